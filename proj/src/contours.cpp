#include "utm/contours.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>

#include "utm/quadrature.hpp"

namespace utm {

const char* contour_name(ContourKind k) {
  switch (k) {
    case ContourKind::boundary_D: return "boundary_D";
    case ContourKind::boundary_D_tilde: return "boundary_D_tilde";
    case ContourKind::real_axis: return "real_axis";
  }
  return "?";
}

namespace {

ContourPiece seg(cd a, cd b, bool a_inf = false, bool b_inf = false) {
  ContourPiece p;
  p.shape = ContourPiece::segment;
  p.a = a;
  p.b = b;
  p.a_infinite = a_inf;
  p.b_infinite = b_inf;
  return p;
}

}  // namespace

ContourSpec ContourSpec::reversed() const {
  ContourSpec r = *this;
  std::reverse(r.pieces.begin(), r.pieces.end());
  for (auto& p : r.pieces) {
    std::swap(p.a, p.b);
    std::swap(p.a_infinite, p.b_infinite);
    std::swap(p.theta0, p.theta1);
  }
  return r;
}

ContourSpec select_contour(double gamma) {
  ContourSpec s;
  s.gamma = gamma;
  const cd I(0.0, 1.0);
  if (gamma <= 0.0) {
    s.kind = ContourKind::boundary_D;
    s.pieces = {seg(I, 0.0, true, false), seg(0.0, 1.0, false, true)};
    return s;
  }
  s.kind = ContourKind::boundary_D_tilde;
  ContourPiece arc;
  arc.shape = ContourPiece::arc;
  arc.center = I * gamma;
  arc.radius = gamma / 2;
  arc.theta0 = pi / 2;   // 3i gamma/2
  arc.theta1 = -pi / 2;  // i gamma/2
  // The first segment runs from infinity down to 3i gamma/2.
  s.pieces = {seg(I, 1.5 * I * gamma, true, false), arc, seg(0.5 * I * gamma, 0.0), seg(0.0, 1.0, false, true)};
  return s;
}

ContourSpec real_axis_contour() {
  ContourSpec s;
  s.kind = ContourKind::real_axis;
  s.pieces = {seg(-1.0, 0.0, true, false), seg(0.0, 1.0, false, true)};
  return s;
}

ContourSpec rotated_boundary(double angle) {
  ContourSpec s = select_contour(0.0);
  s.pieces[0].a = std::polar(1.0, angle);
  return s;
}

ContourQuadrature build_quadrature(const ContourSpec& spec, double K_max, int nodes_per_unit, int arc_nodes) {
  if (!(K_max > 0.0)) throw Error(ErrorCode::TruncationTooSmall, "K_max must be positive");
  if (spec.kind == ContourKind::boundary_D_tilde && !(K_max > 1.5 * spec.gamma))
    throw Error(ErrorCode::TruncationTooSmall, "K_max must exceed 3 gamma / 2 so the arc sits inside the rays");
  if (nodes_per_unit < 1) throw Error(ErrorCode::Config, "nodes_per_unit must be >= 1");
  const GaussRule& g = gauss_legendre(8);
  ContourQuadrature q;
  q.truncation = K_max;
  for (const auto& p : spec.pieces) {
    if (p.shape == ContourPiece::segment) {
      // An infinite end is given as a direction; truncate at |k2| = K_max.
      cd a = p.a_infinite ? K_max * p.a / std::abs(p.a) : p.a;
      cd b = p.b_infinite ? K_max * p.b / std::abs(p.b) : p.b;
      const double len = std::abs(b - a);
      if (len == 0.0) continue;
      const int panels = std::max(1, int(std::ceil(len * nodes_per_unit / 8.0)));
      for (int P = 0; P < panels; ++P) {
        const cd za = a + (b - a) * (double(P) / panels), zb = a + (b - a) * (double(P + 1) / panels);
        for (std::size_t m = 0; m < g.x.size(); ++m) {
          q.nodes.push_back(0.5 * (za + zb) + 0.5 * (zb - za) * g.x[m]);
          q.weights.push_back(0.5 * (zb - za) * g.w[m]);
        }
      }
    } else {
      const int panels = std::max(1, arc_nodes / 8);
      const double dth = (p.theta1 - p.theta0) / panels;
      for (int P = 0; P < panels; ++P) {
        const double ta = p.theta0 + dth * P;
        for (std::size_t m = 0; m < g.x.size(); ++m) {
          const double th = ta + 0.5 * dth * (g.x[m] + 1.0);
          const cd e = std::polar(1.0, th);
          q.nodes.push_back(p.center + p.radius * e);
          q.weights.push_back(0.5 * dth * g.w[m] * cd(0.0, 1.0) * p.radius * e);
        }
      }
    }
  }
  return q;
}

void write_contour_csv(const ContourQuadrature& q, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorCode::MissingArtifact, "cannot open " + path);
  os << std::setprecision(15) << "re_k2,im_k2,re_w,im_w\n";
  for (std::size_t i = 0; i < q.size(); ++i)
    os << q.nodes[i].real() << "," << q.nodes[i].imag() << "," << q.weights[i].real() << "," << q.weights[i].imag()
       << "\n";
}

}  // namespace utm
