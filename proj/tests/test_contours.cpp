#include <cmath>
#include <numeric>

#include "doctest.h"
#include "utm/contours.hpp"

using namespace utm;

namespace {

const ContourPiece* find_arc(const ContourSpec& s) {
  for (const auto& p : s.pieces)
    if (p.shape == ContourPiece::arc) return &p;
  return nullptr;
}

}  // namespace

TEST_CASE("contour selection by the sign of gamma") {
  CHECK(select_contour(-1.0).kind == ContourKind::boundary_D);
  CHECK(select_contour(0.0).kind == ContourKind::boundary_D);
  const ContourSpec s = select_contour(0.5);
  CHECK(s.kind == ContourKind::boundary_D_tilde);
  const ContourPiece* arc = find_arc(s);
  REQUIRE(arc != nullptr);
  CHECK(std::abs(arc->center - cd(0.0, 0.5)) < 1e-15);
  CHECK(arc->radius == doctest::Approx(0.25));
  CHECK(find_arc(select_contour(-1.0)) == nullptr);
}

TEST_CASE("ten panels on the unit segment integrate k^2 exactly") {
  ContourSpec s;
  s.kind = ContourKind::real_axis;
  ContourPiece p;
  p.a = 0.0;
  p.b = 1.0;
  s.pieces = {p};
  const ContourQuadrature q = build_quadrature(s, 10.0, 80);
  CHECK(q.size() == 80);
  cd sum = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) sum += q.weights[i] * q.nodes[i] * q.nodes[i];
  CHECK(std::abs(sum - 1.0 / 3.0) < 1e-12);
}

TEST_CASE("semicircle weights sum to the endpoint displacement") {
  const double gamma = 0.5;
  ContourSpec s = select_contour(gamma);
  const ContourPiece arc = *find_arc(s);
  s.pieces = {arc};
  const ContourQuadrature q = build_quadrature(s, 10.0, 16);
  CHECK(q.size() == 32);
  const cd sum = std::accumulate(q.weights.begin(), q.weights.end(), cd(0.0));
  const cd start = arc.center + arc.radius * std::exp(cd(0.0, arc.theta0));
  const cd end = arc.center + arc.radius * std::exp(cd(0.0, arc.theta1));
  CHECK(std::abs(sum - (end - start)) < 1e-12);
  // The endpoints are i gamma/2 and 3 i gamma/2.
  CHECK(std::abs(std::abs(end - start) - gamma) < 1e-15);
  CHECK(std::abs(start.real()) < 1e-15);
  // The arc bulges to the right of the imaginary axis.
  for (const cd& z : q.nodes) CHECK(z.real() >= 0.0);
}

TEST_CASE("semicircle contour keeps its distance from the pole") {
  for (double gamma : {0.25, 0.5, 2.0}) {
    const ContourQuadrature q = build_quadrature(select_contour(gamma), 12.0, 16);
    double dmin = INFINITY;
    for (const cd& z : q.nodes) dmin = std::min(dmin, std::abs(z - cd(0.0, gamma)));
    CHECK(dmin >= gamma / 2.0 - 1e-15);
  }
}

TEST_CASE("real-axis rule has real nodes and positive weights") {
  const ContourQuadrature q = build_quadrature(real_axis_contour(), 8.0, 16);
  REQUIRE(q.size() > 0);
  for (std::size_t i = 0; i < q.size(); ++i) {
    CHECK(q.nodes[i].imag() == 0.0);
    CHECK(q.weights[i].imag() == 0.0);
    CHECK(q.weights[i].real() > 0.0);
  }
}

TEST_CASE("boundary of D runs down the imaginary axis then out along the real axis") {
  const double K = 6.0;
  const ContourQuadrature q = build_quadrature(select_contour(-1.0), K, 16);
  // Integral of dk2 along the truncated contour is the displacement from iK to K.
  const cd sum = std::accumulate(q.weights.begin(), q.weights.end(), cd(0.0));
  CHECK(std::abs(sum - cd(K, -K)) < 1e-12);
  for (const cd& z : q.nodes) {
    CHECK(z.real() >= 0.0);
    CHECK(z.imag() >= 0.0);
    CHECK(std::abs(z) <= K + 1e-12);
  }
}
