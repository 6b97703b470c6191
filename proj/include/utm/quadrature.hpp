#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace utm {

struct GaussRule {
  std::vector<double> x, w;  // on [-1, 1]
};

// Cached Gauss-Legendre rule with M points.
const GaussRule& gauss_legendre(int M);

// Composite Lagrange panels of even degree p on a uniform grid a + j*h, j < n (n odd).
// The degree is the largest even p <= 8 dividing n-1. Oscillatory weights integrate the
// piecewise interpolant against exp(i kappa x) exactly up to the inner Gauss rule, so they
// stay accurate when kappa*h is not small (Filon-type rule).
class PanelRule {
 public:
  PanelRule(double a, double h, std::size_t n);

  int degree() const { return p_; }
  std::size_t size() const { return n_; }
  double node(std::size_t j) const { return a_ + h_ * double(j); }

  std::vector<std::complex<double>> weights(std::complex<double> kappa) const;
  // Row-major n x n: row j integrates from a to node(j).
  std::vector<std::complex<double>> cumulative(std::complex<double> kappa) const;
  // Row-major (order+1) x n: Taylor coefficients P^{(m)}(x_j)/m! of the interpolant of the
  // panel ending at node j (first panel for j = 0).
  std::vector<double> jet(std::size_t j, int order) const;
  // Lagrange panel polynomial through the panel containing x, evaluated at x.
  std::vector<double> interp_row(double x) const;

 private:
  // Local moments int_0^r e^{i kappa h u} l_q(u) du for q = 0..p.
  std::vector<std::complex<double>> local_moments(std::complex<double> kappa, double r) const;
  std::size_t panel_of(std::size_t j) const;

  double a_, h_;
  std::size_t n_;
  int p_;
};

// Smooth taper: 1 at r <= 0, 0 at r >= 1, all derivatives vanish at both ends.
double taper(double r);

// int_0^delta e^{i kappa s} s^m taper(s/delta) ds for m = 0..order.
std::vector<std::complex<double>> taper_moments(std::complex<double> kappa, double delta, int order);

// Guard for exp(z): throws Overflow when Re z is beyond the double range.
std::complex<double> checked_exp(std::complex<double> z);

}  // namespace utm
