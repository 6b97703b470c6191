#include "utm/quadrature.hpp"

#include <gsl/gsl_integration.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>

#include "utm/core_model.hpp"

namespace utm {

const GaussRule& gauss_legendre(int M) {
  static std::mutex mu;
  static std::map<int, std::unique_ptr<GaussRule>> cache;
  std::lock_guard<std::mutex> lk(mu);
  auto it = cache.find(M);
  if (it != cache.end()) return *it->second;
  auto rule = std::make_unique<GaussRule>();
  gsl_integration_glfixed_table* t = gsl_integration_glfixed_table_alloc(std::size_t(M));
  rule->x.resize(M);
  rule->w.resize(M);
  for (int i = 0; i < M; ++i) gsl_integration_glfixed_point(-1.0, 1.0, std::size_t(i), &rule->x[i], &rule->w[i], t);
  gsl_integration_glfixed_table_free(t);
  auto& ref = *rule;
  cache.emplace(M, std::move(rule));
  return ref;
}

cd checked_exp(cd z) {
  if (z.real() > 700.0) throw Error(ErrorCode::Overflow, "complex exponent exceeds double range");
  return std::exp(z);
}

namespace {

int pick_degree(std::size_t n) {
  if (n < 3 || (n - 1) % 2 != 0) throw Error(ErrorCode::GridMismatch, "panel rule needs an odd node count >= 3");
  for (int p : {8, 6, 4, 2})
    if ((n - 1) % std::size_t(p) == 0) return p;
  return 2;
}

// Values of all p+1 Lagrange basis polynomials on nodes 0..p at u.
void lagrange_values(int p, double u, double* out) {
  for (int q = 0; q <= p; ++q) {
    double v = 1.0;
    for (int r = 0; r <= p; ++r)
      if (r != q) v *= (u - r) / double(q - r);
    out[q] = v;
  }
}

int inner_points(cd kappa, double len) { return std::min(4000, 16 + int(0.5 * std::abs(kappa) * len)); }

}  // namespace

PanelRule::PanelRule(double a, double h, std::size_t n) : a_(a), h_(h), n_(n), p_(pick_degree(n)) {}

std::size_t PanelRule::panel_of(std::size_t j) const {
  if (j == 0) return 0;
  return (j - 1) / std::size_t(p_);
}

std::vector<cd> PanelRule::local_moments(cd kappa, double r) const {
  std::vector<cd> mu(p_ + 1, cd(0.0));
  if (r <= 0.0) return mu;
  const GaussRule& g = gauss_legendre(inner_points(kappa * h_, r));
  std::vector<double> l(p_ + 1);
  const cd ikh = cd(0.0, 1.0) * kappa * h_;
  for (std::size_t m = 0; m < g.x.size(); ++m) {
    double u = 0.5 * r * (g.x[m] + 1.0);
    cd e = checked_exp(ikh * u) * (0.5 * r * g.w[m]);
    lagrange_values(p_, u, l.data());
    for (int q = 0; q <= p_; ++q) mu[q] += e * l[q];
  }
  return mu;
}

std::vector<cd> PanelRule::weights(cd kappa) const {
  std::vector<cd> w(n_, cd(0.0));
  const auto mu = local_moments(kappa, double(p_));
  const std::size_t npan = (n_ - 1) / std::size_t(p_);
  const cd ik(0.0, 1.0);
  for (std::size_t P = 0; P < npan; ++P) {
    const std::size_t j0 = P * std::size_t(p_);
    cd e = checked_exp(ik * kappa * node(j0)) * h_;
    for (int q = 0; q <= p_; ++q) w[j0 + q] += e * mu[q];
  }
  return w;
}

std::vector<cd> PanelRule::cumulative(cd kappa) const {
  std::vector<cd> C(n_ * n_, cd(0.0));
  std::vector<std::vector<cd>> partial(p_ + 1);
  for (int r = 1; r <= p_; ++r) partial[r] = local_moments(kappa, double(r));
  const cd ik(0.0, 1.0);
  std::vector<cd> acc(n_, cd(0.0));  // full panels before the current one
  const std::size_t npan = (n_ - 1) / std::size_t(p_);
  for (std::size_t P = 0; P < npan; ++P) {
    const std::size_t j0 = P * std::size_t(p_);
    const cd e = checked_exp(ik * kappa * node(j0)) * h_;
    for (int r = 1; r <= p_; ++r) {
      cd* row = &C[(j0 + r) * n_];
      for (std::size_t i = 0; i < j0 + 1; ++i) row[i] = acc[i];
      for (int q = 0; q <= p_; ++q) row[j0 + q] += e * partial[r][q];
    }
    for (int q = 0; q <= p_; ++q) acc[j0 + q] += e * partial[p_][q];
  }
  return C;
}

std::vector<double> PanelRule::jet(std::size_t j, int order) const {
  std::vector<double> J(std::size_t(order + 1) * n_, 0.0);
  const std::size_t P = panel_of(j);
  const std::size_t j0 = P * std::size_t(p_);
  const double u0 = double(j - j0);
  for (int q = 0; q <= p_; ++q) {
    // Expand prod_{r != q} ((u - u0) + (u0 - r)) / (q - r) in powers of (u - u0).
    std::vector<double> c(p_ + 1, 0.0);
    c[0] = 1.0;
    int deg = 0;
    for (int r = 0; r <= p_; ++r) {
      if (r == q) continue;
      const double s = 1.0 / double(q - r), b = u0 - r;
      for (int k = deg + 1; k >= 1; --k) c[k] = (c[k] * b + c[k - 1]) * s;
      c[0] *= b * s;
      ++deg;
    }
    double hp = 1.0;
    for (int m = 0; m <= order && m <= p_; ++m) {
      J[std::size_t(m) * n_ + j0 + q] = c[m] / hp;
      hp *= h_;
    }
  }
  return J;
}

std::vector<double> PanelRule::interp_row(double x) const {
  std::vector<double> row(n_, 0.0);
  const std::size_t npan = (n_ - 1) / std::size_t(p_);
  double u = (x - a_) / h_;
  std::size_t P = u <= 0 ? 0 : std::min(npan - 1, std::size_t(u / p_));
  const std::size_t j0 = P * std::size_t(p_);
  std::vector<double> l(p_ + 1);
  lagrange_values(p_, u - double(j0), l.data());
  for (int q = 0; q <= p_; ++q) row[j0 + q] = l[q];
  return row;
}

double taper(double r) {
  if (r <= 0.0) return 1.0;
  if (r >= 1.0) return 0.0;
  const double f = std::exp(-1.0 / r), g = std::exp(-1.0 / (1.0 - r));
  return g / (f + g);
}

std::vector<cd> taper_moments(cd kappa, double delta, int order) {
  std::vector<cd> R(order + 1, cd(0.0));
  if (-kappa.imag() * delta > 700.0) throw Error(ErrorCode::Overflow, "taper moment exponent too large");
  const int npan = std::clamp(int(std::ceil(std::abs(kappa) * delta / 3.0)), 8, 20000);
  const GaussRule& g = gauss_legendre(16);
  const cd ik = cd(0.0, 1.0) * kappa;
  const double hp = delta / npan;
  for (int P = 0; P < npan; ++P) {
    for (std::size_t m = 0; m < g.x.size(); ++m) {
      double s = hp * (P + 0.5 * (g.x[m] + 1.0));
      cd e = std::exp(ik * s) * (0.5 * hp * g.w[m] * taper(s / delta));
      double sp = 1.0;
      for (int k = 0; k <= order; ++k) {
        R[k] += e * sp;
        sp *= s;
      }
    }
  }
  return R;
}

}  // namespace utm
