#include "utm/transforms.hpp"

#include <algorithm>
#include <cmath>

#include "utm/fft.hpp"

namespace utm {

namespace {

// e^{-i k1 x1_0} for the box starting at -L1/2; on the dual grid this is (-1)^(m - N1/2).
double box_phase(std::size_t m, std::size_t N1) { return ((m + N1 / 2) % 2 == 0) ? 1.0 : -1.0; }

}  // namespace

GridField fourier_x1(const GridField& f) {
  if (f.rank() < 1 || f.axes[0].tag != AxisTag::x1) throw Error(ErrorCode::AxisMismatch, "fourier_x1 needs an x1 axis first");
  const std::size_t N = f.axes[0].n;
  if (N % 2 != 0) throw Error(ErrorCode::GridMismatch, "x1 node count must be even");
  if (std::abs(f.axes[0].origin + 0.5 * N * f.axes[0].step) > 1e-9 * N * f.axes[0].step)
    throw Error(ErrorCode::AxisMismatch, "x1 axis must be the symmetric periodic box");
  const double h = f.axes[0].step;
  const std::size_t inner = f.size() / N;
  std::vector<cd> data = f.values;
  fft_axis(data, {N, inner}, 0, -1);
  GridField F(f.axes);
  const double dk = 2.0 * pi / (N * h);
  F.axes[0] = {AxisTag::k1, N, -dk * double(N / 2), dk};
  for (std::size_t m = 0; m < N; ++m) {
    const std::size_t q = (m + N / 2) % N;  // DFT index of k1 = dk (m - N/2)
    const double s = h * box_phase(m, N);
    for (std::size_t r = 0; r < inner; ++r) F.values[m * inner + r] = s * data[q * inner + r];
  }
  return F;
}

GridField inverse_fourier_x1(const GridField& F) {
  if (F.rank() < 1 || F.axes[0].tag != AxisTag::k1) throw Error(ErrorCode::AxisMismatch, "inverse_fourier_x1 needs a k1 axis first");
  const std::size_t N = F.axes[0].n;
  const std::size_t inner = F.size() / N;
  const double dk = F.axes[0].step;
  const double h = 2.0 * pi / (N * dk);
  std::vector<cd> data(F.size());
  for (std::size_t m = 0; m < N; ++m) {
    const std::size_t q = (m + N / 2) % N;
    const double s = box_phase(m, N) / (h * double(N));
    for (std::size_t r = 0; r < inner; ++r) data[q * inner + r] = s * F.values[m * inner + r];
  }
  fft_axis(data, {N, inner}, 0, +1);
  GridField f(F.axes);
  f.axes[0] = {AxisTag::x1, N, -0.5 * N * h, h};
  f.values = std::move(data);
  return f;
}

std::vector<cd> fourier_x1_at(const GridField& f, double k1) {
  if (f.axes[0].tag != AxisTag::x1) throw Error(ErrorCode::AxisMismatch, "fourier_x1_at needs an x1 axis first");
  const std::size_t N = f.axes[0].n, inner = f.size() / N;
  std::vector<cd> out(inner, cd(0.0));
  for (std::size_t i = 0; i < N; ++i) {
    const cd e = std::exp(cd(0.0, -k1 * f.axes[0].node(i))) * f.axes[0].step;
    for (std::size_t r = 0; r < inner; ++r) out[r] += e * f.values[i * inner + r];
  }
  return out;
}

std::vector<cd> halfline_weights(const Axis& x2, cd k2) {
  if (k2.imag() > 1e-14 * std::max(1.0, std::abs(k2)))
    throw Error(ErrorCode::UpperHalfK2, "half-plane transform needs Im k2 <= 0");
  PanelRule rule(x2.origin, x2.step, x2.n);
  return rule.weights(-k2);
}

SpectralField halfplane_fourier(const GridField& f, const std::vector<cd>& k2_nodes) {
  if (f.rank() != 2 || f.axes[1].tag != AxisTag::x2) throw Error(ErrorCode::AxisMismatch, "halfplane_fourier needs (x1, x2)");
  for (cd k : k2_nodes)
    if (k.imag() > 1e-14 * std::max(1.0, std::abs(k)))
      throw Error(ErrorCode::UpperHalfK2, "half-plane transform needs Im k2 <= 0");
  const GridField F = fourier_x1(f);
  const std::size_t N1 = f.dim(0), N2 = f.dim(1), nz = k2_nodes.size();
  SpectralField out;
  out.k2 = k2_nodes;
  for (std::size_t m = 0; m < N1; ++m) out.k1.push_back(F.axes[0].node(m));
  out.values.assign(N1 * nz, cd(0.0));
  PanelRule rule(f.axes[1].origin, f.axes[1].step, N2);
  for (std::size_t z = 0; z < nz; ++z) {
    const auto w = rule.weights(-k2_nodes[z]);
    for (std::size_t m = 0; m < N1; ++m) {
      cd s = 0.0;
      for (std::size_t j = 0; j < N2; ++j) s += w[j] * F(m, j);
      out.values[m * nz + z] = s;
    }
  }
  return out;
}

cd time_transform(const GridField& g, double k1, cd omega, double T) {
  if (g.rank() != 2 || g.axes[0].tag != AxisTag::x1 || g.axes[1].tag != AxisTag::t)
    throw Error(ErrorCode::AxisMismatch, "time_transform needs g on (x1, t)");
  const Axis& ta = g.axes[1];
  const double r = (T - ta.origin) / ta.step;
  const std::size_t j = std::size_t(std::llround(r));
  if (std::abs(r - double(j)) > 1e-9 || j >= ta.n) throw Error(ErrorCode::GridMismatch, "T must be a node of the t axis");
  if (-omega.imag() * std::max(std::abs(ta.origin), std::abs(T)) > 700.0)
    throw Error(ErrorCode::Overflow, "e^{i omega t} exceeds the double range");
  const auto ghat = fourier_x1_at(g, k1);
  PanelRule rule(ta.origin, ta.step, ta.n);
  const auto C = rule.cumulative(omega);
  cd s = 0.0;
  for (std::size_t i = 0; i < ta.n; ++i) s += C[j * ta.n + i] * ghat[i];
  return s;
}

namespace {

// int_0^1 e^{-d s}(1-s) ds and int_0^1 e^{-d s} s ds.
void hat_moments(double d, double& A, double& B) {
  if (d < 1e-3) {
    A = 0.5 - d / 6.0 + d * d / 24.0 - d * d * d / 120.0;
    B = 0.5 - d / 3.0 + d * d / 8.0 - d * d * d / 30.0;
    return;
  }
  const double e = std::exp(-d);
  A = (d - 1.0 + e) / (d * d);
  B = (1.0 - (1.0 + d) * e) / (d * d);
}

void check_laplace_input(const std::vector<double>& k, const std::vector<double>& phi, double floor) {
  if (k.size() != phi.size() || k.size() < 2) throw Error(ErrorCode::AxisMismatch, "laplace: k and phi sizes differ");
  if (k[0] < 0.0) throw Error(ErrorCode::AxisMismatch, "laplace: nodes must be >= 0");
  for (std::size_t i = 1; i < k.size(); ++i)
    if (!(k[i] > k[i - 1])) throw Error(ErrorCode::AxisMismatch, "laplace: nodes must increase");
  double m = 0.0;
  for (double v : phi) {
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFinite, "laplace: non-finite phi");
    m = std::max(m, std::abs(v));
  }
  if (m > 0.0 && std::abs(phi.back()) > floor * m)
    throw Error(ErrorCode::EdgeDecay, "laplace: phi has not decayed at K_max");
}

double laplace_at(const std::vector<double>& k, const std::vector<double>& phi, double x) {
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < k.size(); ++i) {
    const double dk = k[i + 1] - k[i];
    double A, B;
    hat_moments(x * dk, A, B);
    s += std::exp(-k[i] * x) * dk * (A * phi[i] + B * phi[i + 1]);
  }
  return s;
}

}  // namespace

std::vector<double> laplace_halfline(const std::vector<double>& k, const std::vector<double>& phi,
                                     const std::vector<double>& x, double edge_floor) {
  check_laplace_input(k, phi, edge_floor);
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] < 0.0) throw Error(ErrorCode::AxisMismatch, "laplace: x must be >= 0");
    out[i] = laplace_at(k, phi, x[i]);
  }
  return out;
}

double laplace_l2_ratio(const std::vector<double>& k, const std::vector<double>& phi, double edge_floor) {
  check_laplace_input(k, phi, edge_floor);
  double n2 = 0.0;
  for (std::size_t i = 0; i + 1 < k.size(); ++i) {
    const double a = phi[i], b = phi[i + 1];
    n2 += (k[i + 1] - k[i]) / 3.0 * (a * a + a * b + b * b);
  }
  if (n2 == 0.0) return 0.0;
  double kmin = k.back() - k.front();
  for (std::size_t i = 0; i + 1 < k.size(); ++i) kmin = std::min(kmin, k[i + 1] - k[i]);
  kmin = std::max(kmin, k[0]);
  // |L phi|^2 over log-spaced x with constant/1/x^2 tails at the two ends.
  const double xlo = 1e-4 / k.back(), xhi = 1e4 / kmin;
  const double ylo = std::log(xlo), yhi = std::log(xhi);
  const int panels = int(std::ceil(3.0 * (yhi - ylo)));
  const GaussRule& g = gauss_legendre(16);
  double l2 = 0.0;
  const double hy = (yhi - ylo) / panels;
  for (int P = 0; P < panels; ++P)
    for (std::size_t m = 0; m < g.x.size(); ++m) {
      const double y = ylo + hy * (P + 0.5 * (g.x[m] + 1.0));
      const double x = std::exp(y);
      const double L = laplace_at(k, phi, x);
      l2 += 0.5 * hy * g.w[m] * x * L * L;
    }
  const double L0 = laplace_at(k, phi, xlo), L1 = laplace_at(k, phi, xhi);
  l2 += xlo * L0 * L0 + xhi * L1 * L1;
  return std::sqrt(l2 / n2);
}

}  // namespace utm
