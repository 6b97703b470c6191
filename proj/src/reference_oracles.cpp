#include "utm/reference_oracles.hpp"

#include <cmath>

#include "utm/fft.hpp"
#include "utm/parallel.hpp"

namespace utm {

namespace {
const cd I(0.0, 1.0);
}

Grid oracle_grid(const Grid& grid, const OracleConfig& cfg) {
  if (cfg.refinement < 1) throw Error(ErrorCode::GridMismatch, "oracle refinement must be >= 1");
  const std::size_t r = std::size_t(cfg.refinement);
  return Grid::make(grid.L1, grid.N1 * r, grid.L2, (grid.N2 - 1) * r + 1, grid.T, (grid.Nt - 1) * r + 1);
}

cd gaussian_value(const GaussianParams& p, double x1, double x2, double t) {
  const cd q = p.width + 4.0 * I * t;
  const double y1 = x1 - p.c1 - 2.0 * p.v1 * t, y2 = x2 - p.c2 - 2.0 * p.v2 * t;
  const double phase = p.v1 * x1 + p.v2 * x2 - (p.v1 * p.v1 + p.v2 * p.v2) * t;
  return p.amplitude * (p.width / q) * std::exp(-(y1 * y1 + y2 * y2) / q + I * phase);
}

cd gaussian_dx2(const GaussianParams& p, double x1, double x2, double t) {
  const cd q = p.width + 4.0 * I * t;
  const double y2 = x2 - p.c2 - 2.0 * p.v2 * t;
  return gaussian_value(p, x1, x2, t) * (-2.0 * y2 / q + I * p.v2);
}

GridField gaussian_free_evolution(const GaussianParams& p, const Grid& grid, const Axis& x2) {
  if (p.width <= 0.0) throw Error(ErrorCode::Config, "Gaussian width must be positive");
  GridField u({grid.x1_axis(), x2, grid.t_axis()});
  for (std::size_t i = 0; i < grid.N1; ++i)
    for (std::size_t j = 0; j < x2.n; ++j)
      for (std::size_t k = 0; k < grid.Nt; ++k) u(i, j, k) = gaussian_value(p, grid.x1(i), x2.node(j), grid.t(k));
  return u;
}

GridField gaussian_robin_trace(const GaussianParams& p, const Grid& grid, double gamma) {
  GridField g({grid.x1_axis(), grid.t_axis()});
  for (std::size_t i = 0; i < grid.N1; ++i)
    for (std::size_t k = 0; k < grid.Nt; ++k)
      g(i, k) = gaussian_dx2(p, grid.x1(i), 0.0, grid.t(k)) + gamma * gaussian_value(p, grid.x1(i), 0.0, grid.t(k));
  return g;
}

DataTriple gaussian_data(const GaussianParams& p, const Grid& grid, double gamma) {
  DataTriple d;
  d.u0 = GridField({grid.x1_axis(), grid.x2_axis()});
  for (std::size_t i = 0; i < grid.N1; ++i)
    for (std::size_t j = 0; j < grid.N2; ++j) d.u0(i, j) = gaussian_value(p, grid.x1(i), grid.x2(j), 0.0);
  d.g = gaussian_robin_trace(p, grid, gamma);
  return d;
}

namespace {

struct Stepper {
  const Grid& og;
  double gamma, theta;
  std::size_t N1, n, Nt;  // n = x2 nodes, the last one pinned to zero
  double h, dt;
  std::vector<double> lam;
  std::vector<cd> gh;  // (m, t)
  std::vector<cd> fh;  // (m, j, t), empty without forcing

  Stepper(const Grid& g, double gam, double th, const DataTriple& d)
      : og(g), gamma(gam), theta(th), N1(g.N1), n(g.N2), Nt(g.Nt), h(g.h2()), dt(g.dt()) {
    lam.resize(N1);
    const double h1 = g.h1();
    for (std::size_t m = 0; m < N1; ++m) {
      const double k = 2.0 * pi / g.L1 * (m < N1 / 2 ? double(m) : double(m) - double(N1));
      const double s = std::sin(0.5 * k * h1);
      lam[m] = 4.0 * s * s / (h1 * h1);
    }
    gh = d.g.values;
    fft_axis(gh, {N1, Nt}, 0, -1);
    if (d.f && d.f->max_abs() > 0.0) {
      fh = d.f->values;
      fft_axis(fh, {N1, n, Nt}, 0, -1);
    }
  }

  // A u + b - f at time index k for mode m (unknowns j < n-1).
  void apply(std::size_t m, const cd* u, std::size_t k, cd* out) const {
    const double ih2 = 1.0 / (h * h);
    const std::size_t nu = n - 1;
    for (std::size_t j = 0; j < nu; ++j) {
      cd v;
      if (j == 0) v = ((-2.0 + 2.0 * h * gamma) * ih2 - lam[m]) * u[0] + 2.0 * ih2 * (nu > 1 ? u[1] : cd(0.0));
      else v = (-2.0 * ih2 - lam[m]) * u[j] + ih2 * u[j - 1] + (j + 1 < nu ? ih2 * u[j + 1] : cd(0.0));
      out[j] = v;
    }
    out[0] += -2.0 * gh[m * Nt + k] / h;
    if (!fh.empty())
      for (std::size_t j = 0; j < nu; ++j) out[j] -= fh[(m * n + j) * Nt + k];
  }

  // One theta step of mode m from time index k to k+1, in place. Returns the defect of the
  // weighted mass balance (weight 1/2 at the boundary node), exact for theta = 1/2.
  double step(std::size_t m, cd* u, std::size_t k) const {
    const std::size_t nu = n - 1;
    std::vector<cd> r(nu), a0(nu), s0(nu), s1(nu), sub(nu), dia(nu), sup(nu), old(u, u + nu);
    const std::vector<cd> zero(nu, cd(0.0));
    apply(m, u, k, a0.data());
    apply(m, zero.data(), k, s0.data());
    apply(m, zero.data(), k + 1, s1.data());
    for (std::size_t j = 0; j < nu; ++j) r[j] = u[j] + I * dt * ((1.0 - theta) * a0[j] + theta * s1[j]);
    const double ih2 = 1.0 / (h * h);
    const cd c = -I * theta * dt;
    for (std::size_t j = 0; j < nu; ++j) {
      const double d = j == 0 ? (-2.0 + 2.0 * h * gamma) * ih2 - lam[m] : -2.0 * ih2 - lam[m];
      dia[j] = 1.0 + c * d;
      sub[j] = j == 0 ? cd(0.0) : c * ih2;
      sup[j] = j + 1 < nu ? c * (j == 0 ? 2.0 * ih2 : ih2) : cd(0.0);
    }
    for (std::size_t j = 1; j < nu; ++j) {
      if (std::abs(dia[j - 1]) < 1e-300) throw Error(ErrorCode::LinearSolveFailure, "zero pivot in tridiagonal solve");
      const cd w = sub[j] / dia[j - 1];
      dia[j] -= w * sup[j - 1];
      r[j] -= w * r[j - 1];
    }
    if (std::abs(dia[nu - 1]) < 1e-300) throw Error(ErrorCode::LinearSolveFailure, "zero pivot in tridiagonal solve");
    u[nu - 1] = r[nu - 1] / dia[nu - 1];
    for (std::size_t j = nu - 1; j-- > 0;) u[j] = (r[j] - sup[j] * u[j + 1]) / dia[j];
    for (std::size_t j = 0; j < nu; ++j)
      if (!std::isfinite(u[j].real()) || !std::isfinite(u[j].imag()))
        throw Error(ErrorCode::LinearSolveFailure, "non-finite tridiagonal solution");
    double dm = 0.0;
    cd flux = 0.0;
    for (std::size_t j = 0; j < nu; ++j) {
      const double w = j == 0 ? 0.5 : 1.0;
      dm += w * (std::norm(u[j]) - std::norm(old[j]));
      flux += w * std::conj(0.5 * (u[j] + old[j])) * ((1.0 - theta) * s0[j] + theta * s1[j]);
    }
    return std::abs(dm + 2.0 * dt * flux.imag());
  }
};

SolutionRecord run_oracle(const ProblemSpec& spec, const Grid& grid, const DataTriple& data, const OracleConfig& cfg,
                          bool nonlinear) {
  const Grid og = oracle_grid(grid, cfg);
  if (data.u0.rank() != 2 || data.u0.dim(0) != og.N1 || data.u0.dim(1) != og.N2 || data.g.dim(0) != og.N1 ||
      data.g.dim(1) != og.Nt)
    throw Error(ErrorCode::GridMismatch, "oracle data must be sampled on the oracle grid");
  if (data.f && (data.f->rank() != 3 || data.f->dim(1) != og.N2 || data.f->dim(2) != og.Nt))
    throw Error(ErrorCode::GridMismatch, "oracle forcing must be sampled on the oracle grid");
  if (nonlinear && (spec.alpha < 3 || (spec.alpha - 1) % 2 != 0))
    throw Error(ErrorCode::AlphaParity, "(alpha - 1)/2 must be a positive integer");

  Stepper st(og, spec.gamma, cfg.theta_weight, data);
  const std::size_t N1 = og.N1, n = og.N2, Nt = og.Nt, r = std::size_t(cfg.refinement);
  const int half_power = (spec.alpha - 1) / 2;
  const double sgn = spec.sign == Sign::defocusing ? 1.0 : -1.0;

  // Physical state (x1, x2); last x2 node pinned to zero.
  std::vector<cd> phys = data.u0.values;
  for (std::size_t i = 0; i < N1; ++i) phys[i * n + n - 1] = 0.0;
  std::vector<cd> spec_state = phys;
  fft_axis(spec_state, {N1, n}, 0, -1);

  GridField out({grid.x1_axis(), grid.x2_axis(), grid.t_axis()});
  auto store = [&](std::size_t kbase) {
    std::vector<cd> p = spec_state;
    fft_axis(p, {N1, n}, 0, +1);
    for (std::size_t i = 0; i < grid.N1; ++i)
      for (std::size_t j = 0; j < grid.N2; ++j) out(i, j, kbase) = p[(i * r) * n + j * r] / double(N1);
  };
  auto rotate = [&](double tau) {
    fft_axis(spec_state, {N1, n}, 0, +1);
    for (auto& v : spec_state) {
      v /= double(N1);
      double a = 1.0;
      for (int q = 0; q < half_power; ++q) a *= std::norm(v);
      v *= std::exp(-I * (sgn * a * tau));
    }
    fft_axis(spec_state, {N1, n}, 0, -1);
  };
  // Keep the t = 0 slice bit-identical to the data.
  for (std::size_t i = 0; i < grid.N1; ++i)
    for (std::size_t j = 0; j < grid.N2; ++j) out(i, j, 0) = data.u0(i * r, j * r);

  std::vector<double> defects(N1);
  double max_defect = 0.0, mass0 = 0.0;
  for (std::size_t m = 0; m < N1; ++m)
    for (std::size_t j = 0; j + 1 < n; ++j) mass0 += (j == 0 ? 0.5 : 1.0) * std::norm(spec_state[m * n + j]);
  for (std::size_t k = 0; k + 1 < Nt; ++k) {
    if (nonlinear) rotate(0.5 * og.dt());
    parallel_for(N1, [&](std::size_t m) { defects[m] = st.step(m, &spec_state[m * n], k); });
    if (nonlinear) rotate(0.5 * og.dt());
    for (std::size_t m = 0; m < N1; ++m) max_defect = std::max(max_defect, defects[m]);
    if ((k + 1) % r == 0) store((k + 1) / r);
  }

  SolutionRecord rec;
  rec.u = std::move(out);
  rec.u.require_finite("oracle");
  rec.dirichlet_trace = slice_middle(rec.u, 0);
  rec.robin_trace = robin_trace(rec.u, spec.gamma);
  rec.diagnostics["oracle"] = nonlinear ? "split_step" : "crank_nicolson";
  rec.diagnostics["refinement"] = cfg.refinement;
  rec.diagnostics["theta"] = cfg.theta_weight;
  // Relative to the initial weighted spectral mass; nonlinear rotations are not part of the balance.
  rec.diagnostics["mass_balance_defect"] = mass0 > 0.0 ? max_defect / mass0 : max_defect;
  return rec;
}

}  // namespace

SolutionRecord crank_nicolson_halfplane(const ProblemSpec& spec, const Grid& grid, const DataTriple& data,
                                        const OracleConfig& cfg) {
  return run_oracle(spec, grid, data, cfg, false);
}

SolutionRecord splitstep_nls(const ProblemSpec& spec, const Grid& grid, const DataTriple& data,
                             const OracleConfig& cfg) {
  return run_oracle(spec, grid, data, cfg, spec.nonlinear);
}

}  // namespace utm
