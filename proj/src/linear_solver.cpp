#include "utm/linear_solver.hpp"

#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <functional>
#include <random>

#include "utm/fft.hpp"
#include "utm/parallel.hpp"
#include "utm/quadrature.hpp"
#include "utm/transforms.hpp"

namespace utm {

namespace {

using RowMat = Eigen::Matrix<cd, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Clock = std::chrono::steady_clock;
const cd I(0.0, 1.0);

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

struct Coefficients {
  std::function<cd(cd)> R;  // multiplies the reflected initial and forcing data
  std::function<cd(cd)> M;  // multiplies g~
};

Coefficients robin_coefficients(double gamma) {
  return {[gamma](cd z) { return (z + I * gamma) / (z - I * gamma); },
          [gamma](cd z) { return 2.0 * z / (z - I * gamma); }};
}

Coefficients neumann_coefficients() {
  return {[](cd) { return cd(1.0); }, [](cd) { return cd(2.0); }};
}

double k2_of(std::size_t q, std::size_t M2, double h2) {
  const double dk = 2.0 * pi / (double(M2) * h2);
  return dk * (q < M2 / 2 ? double(q) : double(q) - double(M2));
}

std::size_t whole_index(std::size_t j, const Grid& g) {
  return j + 1 < g.N2 ? g.N2 - 1 + j : 0;  // x2 = L2 wraps to -L2
}

// Half-line samples (rows of length N2, leading count `rows`, trailing `inner`) placed on the
// periodic whole line as a zero extension with trapezoid half weights at the two ends.
std::vector<cd> zero_extend_rows(const std::vector<cd>& half, std::size_t rows, std::size_t inner, const Grid& g) {
  const std::size_t N2 = g.N2, M2 = g.M2();
  std::vector<cd> w(rows * M2 * inner, cd(0.0));
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t j = 0; j < N2; ++j) {
      const double s = (j == 0 || j + 1 == N2) ? 0.5 : 1.0;
      const std::size_t q = whole_index(j, g);
      for (std::size_t k = 0; k < inner; ++k) w[(r * M2 + q) * inner + k] += s * half[(r * N2 + j) * inner + k];
    }
  return w;
}

void restrict_rows_add(const std::vector<cd>& whole, std::size_t rows, std::size_t inner, const Grid& g,
                       std::vector<cd>& half) {
  const std::size_t N2 = g.N2, M2 = g.M2();
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t j = 0; j < N2; ++j) {
      const std::size_t q = whole_index(j, g);
      for (std::size_t k = 0; k < inner; ++k) half[(r * N2 + j) * inner + k] += whole[(r * M2 + q) * inner + k];
    }
}

// A: (k1, x2 whole) samples. Returns (k1, x2 whole, t) free evolution, or its x2 DFT
// coefficients (already divided by M2) when physical is false.
std::vector<cd> evolve_whole(const std::vector<cd>& A, const Grid& g, bool physical = true) {
  const std::size_t N1 = g.N1, M2 = g.M2(), Nt = g.Nt;
  std::vector<cd> a = A;
  fft_axis(a, {N1, M2}, 1, -1);
  std::vector<cd> out(N1 * M2 * Nt);
  parallel_for(N1, [&](std::size_t m) {
    const double k1 = g.k1(m);
    for (std::size_t q = 0; q < M2; ++q) {
      const double k2 = k2_of(q, M2, g.h2());
      const double w = k1 * k1 + k2 * k2;
      for (std::size_t j = 0; j < Nt; ++j)
        out[(m * M2 + q) * Nt + j] = a[m * M2 + q] * std::exp(-I * (w * g.t(j))) / double(M2);
    }
  });
  if (physical) fft_axis(out, {N1, M2, Nt}, 1, +1);
  return out;
}

// Fw: (k1, x2 whole, t) forcing. Returns -i int_0^t e^{-i w (t - t')} F dt' on the whole line.
std::vector<cd> duhamel_whole(const std::vector<cd>& Fw, const Grid& g, bool physical = true) {
  const std::size_t N1 = g.N1, M2 = g.M2(), Nt = g.Nt;
  std::vector<cd> a = Fw;
  fft_axis(a, {N1, M2, Nt}, 1, -1);
  PanelRule tr(0.0, g.dt(), Nt);
  std::vector<std::vector<cd>> rules(M2 / 2 + 1);
  parallel_for(rules.size(), [&](std::size_t q) {
    const double k2 = k2_of(q, M2, g.h2());
    rules[q] = tr.cumulative(k2 * k2);
  });
  std::vector<cd> out(N1 * M2 * Nt);
  parallel_for(N1, [&](std::size_t m) {
    const double k1 = g.k1(m);
    std::vector<cd> phi(Nt);
    for (std::size_t i = 0; i < Nt; ++i) phi[i] = std::exp(I * (k1 * k1 * g.t(i)));
    std::vector<cd> v(Nt);
    for (std::size_t q = 0; q < M2; ++q) {
      const std::vector<cd>& C = rules[std::min(q, M2 - q)];
      const double k2 = k2_of(q, M2, g.h2());
      const cd* F = &a[(m * M2 + q) * Nt];
      for (std::size_t i = 0; i < Nt; ++i) v[i] = phi[i] * F[i];
      for (std::size_t j = 0; j < Nt; ++j) {
        cd s = 0.0;
        for (std::size_t i = 0; i < Nt; ++i) s += C[j * Nt + i] * v[i];
        out[(m * M2 + q) * Nt + j] = -I * std::exp(-I * ((k1 * k1 + k2 * k2) * g.t(j))) * s / double(M2);
      }
    }
  });
  if (physical) fft_axis(out, {N1, M2, Nt}, 1, +1);
  return out;
}

// Trigonometric interpolant of whole-line x2 coefficients at the points xs: (k1, xs, t).
std::vector<cd> interp_x2(const std::vector<cd>& coef, const Grid& g, const std::vector<double>& xs) {
  const std::size_t N1 = g.N1, M2 = g.M2(), Nt = g.Nt, nx = xs.size();
  std::vector<cd> E(nx * M2);
  for (std::size_t a = 0; a < nx; ++a)
    for (std::size_t q = 0; q < M2; ++q) {
      const double y = xs[a] + g.L2;
      E[a * M2 + q] = q == M2 / 2 ? cd(std::cos(k2_of(q, M2, g.h2()) * y)) : std::exp(I * (k2_of(q, M2, g.h2()) * y));
    }
  std::vector<cd> out(N1 * nx * Nt, cd(0.0));
  for (std::size_t m = 0; m < N1; ++m)
    for (std::size_t a = 0; a < nx; ++a)
      for (std::size_t q = 0; q < M2; ++q) {
        const cd e = E[a * M2 + q];
        const cd* c = &coef[(m * M2 + q) * Nt];
        cd* o = &out[(m * nx + a) * Nt];
        for (std::size_t j = 0; j < Nt; ++j) o[j] += e * c[j];
      }
  return out;
}

struct EngineOut {
  std::vector<cd> Uk;  // (k1, x2, t)
  std::array<std::vector<cd>, 5> terms;
  std::vector<double> xs;  // fine stencil next to the boundary for the Robin trace
  std::vector<cd> St;      // (k1, xs, t)
  double gap = 0.0;
  std::size_t nz = 0;
  double K = 0.0;
  nlohmann::json timings;
};

struct EngineData {
  const GridField* u0 = nullptr;
  const GridField* g = nullptr;       // on the grid's t axis
  const GridField* f = nullptr;
  const GridField* g_full = nullptr;  // pure problem: own t axis, full transform
};

bool nonzero(const GridField* f) { return f && f->max_abs() > 0.0; }

EngineOut run_engine(const Grid& grid, const ContourSpec& cs, const Coefficients& co, const EngineData& d,
                     const SolverOptions& opts) {
  auto t_start = Clock::now();
  EngineOut out;
  const std::size_t N1 = grid.N1, N2 = grid.N2, Nt = grid.Nt;
  const std::size_t NN = N1 * N2 * Nt;
  out.Uk.assign(NN, cd(0.0));
  const bool keep = opts.keep_terms;
  if (keep)
    for (auto& t : out.terms) t.assign(NN, cd(0.0));

  const bool has_u0 = nonzero(d.u0), has_g = nonzero(d.g), has_f = nonzero(d.f), has_gf = nonzero(d.g_full);
  out.K = opts.K_max > 0.0 ? opts.K_max : grid.k1_max();
  const ContourQuadrature quad = build_quadrature(cs, out.K, opts.nodes_per_unit, opts.arc_nodes);
  const std::size_t nz = quad.size();
  out.nz = nz;

  std::vector<double> k1(N1), t(Nt);
  for (std::size_t m = 0; m < N1; ++m) k1[m] = grid.k1(m);
  for (std::size_t j = 0; j < Nt; ++j) t[j] = grid.t(j);

  const std::size_t ns = 5;
  for (std::size_t q = 0; q < ns; ++q) out.xs.push_back(double(q) * grid.h2() / 16.0);
  out.St.assign(N1 * ns * Nt, cd(0.0));

  // Real-axis terms by the doubled-box transform in x2.
  auto t0 = Clock::now();
  auto real_axis = [&](std::vector<cd>&& C, std::vector<cd>* term) {
    const auto S = interp_x2(C, grid, out.xs);
    for (std::size_t i = 0; i < S.size(); ++i) out.St[i] += S[i];
    fft_axis(C, {N1, grid.M2(), Nt}, 1, +1);
    restrict_rows_add(C, N1, Nt, grid, out.Uk);
    if (term) restrict_rows_add(C, N1, Nt, grid, *term);
  };
  if (has_u0) {
    const GridField U0h = fourier_x1(*d.u0);
    real_axis(evolve_whole(zero_extend_rows(U0h.values, N1, 1, grid), grid, false), keep ? &out.terms[0] : nullptr);
  }
  GridField Fh;
  if (has_f) {
    Fh = fourier_x1(*d.f);
    real_axis(duhamel_whole(zero_extend_rows(Fh.values, N1, Nt, grid), grid, false), keep ? &out.terms[2] : nullptr);
  }
  out.timings["real_axis_ms"] = ms_since(t0);
  if (!(has_u0 || has_g || has_f || has_gf)) {
    out.timings["total_ms"] = ms_since(t_start);
    return out;
  }

  // Contour tables.
  t0 = Clock::now();
  PanelRule xr(0.0, grid.h2(), N2);
  RowMat Wx(nz, N2);
  Eigen::MatrixXcd Ex(N2, nz), Es(ns, nz);
  std::vector<cd> pref(nz * Nt), Rz(nz), Mz(nz);
  parallel_for(nz, [&](std::size_t z) {
    const cd k2 = quad.nodes[z];
    const auto w = xr.weights(k2);
    for (std::size_t j = 0; j < N2; ++j) {
      Wx(z, j) = w[j];
      Ex(j, z) = checked_exp(I * k2 * grid.x2(j));
    }
    for (std::size_t q = 0; q < ns; ++q) Es(q, z) = checked_exp(I * k2 * out.xs[q]);
    for (std::size_t j = 0; j < Nt; ++j)
      pref[z * Nt + j] = quad.weights[z] / (2.0 * pi) * checked_exp(-I * k2 * k2 * t[j]);
    Rz[z] = co.R(k2);
    Mz[z] = co.M(k2);
  });

  const std::size_t S = N1 * nz * Nt;
  std::vector<cd> coef(S, cd(0.0)), coef4, coef5, gapc;
  if (keep) {
    coef4.assign(S, cd(0.0));
    coef5.assign(S, cd(0.0));
  }
  std::vector<cd>& c2 = coef;
  std::vector<cd>& c4 = keep ? coef4 : coef;
  std::vector<cd>& c5 = keep ? coef5 : coef;
  const bool want_gap = opts.variant_gap && has_g;
  if (want_gap) gapc.assign(S, cd(0.0));

  if (has_u0) {
    const GridField U0h = fourier_x1(*d.u0);
    parallel_for(N1, [&](std::size_t m) {
      Eigen::Map<const Eigen::VectorXcd> u(&U0h.values[m * N2], Eigen::Index(N2));
      const Eigen::VectorXcd a = Wx * u;
      for (std::size_t z = 0; z < nz; ++z)
        for (std::size_t j = 0; j < Nt; ++j) c2[(m * nz + z) * Nt + j] += pref[z * Nt + j] * Rz[z] * a(Eigen::Index(z));
    });
  }

  // Reflected forcing data f^(k1, -k2, t) at every contour node.
  std::vector<cd> fneg;
  if (has_f) {
    fneg.assign(S, cd(0.0));
    parallel_for(N1, [&](std::size_t m) {
      Eigen::Map<const RowMat> Fm(&Fh.values[m * N2 * Nt], Eigen::Index(N2), Eigen::Index(Nt));
      Eigen::Map<RowMat> out_m(&fneg[m * nz * Nt], Eigen::Index(nz), Eigen::Index(Nt));
      out_m.noalias() = Wx * Fm;
    });
  }

  // Demodulated boundary data e^{i k1^2 t} g^(k1, t).
  std::vector<cd> phig;
  if (has_g) {
    const GridField Gh = fourier_x1(*d.g);
    phig.resize(N1 * Nt);
    for (std::size_t m = 0; m < N1; ++m)
      for (std::size_t i = 0; i < Nt; ++i) phig[m * Nt + i] = std::exp(I * (k1[m] * k1[m] * t[i])) * Gh(m, i);
  }
  std::vector<cd> phigf;
  std::unique_ptr<PanelRule> gf_rule;
  if (has_gf) {
    const GridField Gh = fourier_x1(*d.g_full);
    const Axis& ta = d.g_full->axes[1];
    gf_rule = std::make_unique<PanelRule>(ta.origin, ta.step, ta.n);
    phigf.resize(N1 * ta.n);
    for (std::size_t m = 0; m < N1; ++m)
      for (std::size_t i = 0; i < ta.n; ++i) phigf[m * ta.n + i] = std::exp(I * (k1[m] * k1[m] * ta.node(i))) * Gh(m, i);
  }

  PanelRule tr(0.0, grid.dt(), Nt);
  const int order = opts.taylor_order;
  std::vector<std::vector<double>> jets;
  if (opts.tail_correction && (has_g || has_f))
    for (std::size_t j = 0; j < Nt; ++j) jets.push_back(tr.jet(j, order));
  out.timings["tables_ms"] = ms_since(t0);

  t0 = Clock::now();
  if (has_g || has_f || has_gf) {
    parallel_for(nz, [&](std::size_t z) {
      const cd k2 = quad.nodes[z];
      const cd kap = k2 * k2;
      std::vector<cd> C;
      if (has_g || has_f) {
        C = tr.cumulative(kap);
        if (opts.tail_correction) {
          const auto Rm = taper_moments(kap, opts.taper_length, order);
          for (std::size_t j = 0; j < Nt; ++j) {
            const cd e = checked_exp(I * kap * t[j]);
            for (int n = 0; n <= order; ++n) {
              const cd c = e * Rm[n];
              const double* Jn = &jets[j][std::size_t(n) * Nt];
              for (std::size_t i = 0; i < Nt; ++i) C[j * Nt + i] += c * Jn[i];
            }
          }
        }
      }
      std::vector<cd> G(Nt), Gc(Nt), phi(Nt);
      for (std::size_t m = 0; m < N1; ++m) {
        const std::size_t base = (m * nz + z) * Nt;
        if (has_g) {
          const cd* pg = &phig[m * Nt];
          cd gT = 0.0;
          for (std::size_t i = 0; i < Nt; ++i) gT += C[(Nt - 1) * Nt + i] * pg[i];
          const bool need_causal = opts.variant == BoundaryVariant::causal || want_gap;
          if (need_causal)
            for (std::size_t j = 0; j < Nt; ++j) {
              cd s = 0.0;
              for (std::size_t i = 0; i < Nt; ++i) s += C[j * Nt + i] * pg[i];
              Gc[j] = s;
            }
          for (std::size_t j = 0; j < Nt; ++j) {
            const cd primary = opts.variant == BoundaryVariant::horizon ? gT : Gc[j];
            const cd c = pref[z * Nt + j] * (-I) * Mz[z];
            c5[base + j] += c * primary;
            if (want_gap) gapc[base + j] = c * ((opts.variant == BoundaryVariant::horizon ? Gc[j] : gT) - primary);
          }
        }
        if (has_gf) {
          const auto w = gf_rule->weights(kap);
          const cd* pg = &phigf[m * w.size()];
          cd s = 0.0;
          for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * pg[i];
          for (std::size_t j = 0; j < Nt; ++j) c5[base + j] += pref[z * Nt + j] * (-I) * Mz[z] * s;
        }
        if (has_f) {
          const cd* fn = &fneg[base];
          for (std::size_t i = 0; i < Nt; ++i) phi[i] = std::exp(I * (k1[m] * k1[m] * t[i])) * fn[i];
          for (std::size_t j = 0; j < Nt; ++j) {
            cd s = 0.0;
            for (std::size_t i = 0; i < Nt; ++i) s += C[j * Nt + i] * phi[i];
            c4[base + j] += pref[z * Nt + j] * (-I) * Rz[z] * s;
          }
        }
      }
    });
  }
  out.timings["time_integrals_ms"] = ms_since(t0);

  // x2 synthesis: U(k1, x2, t) += Ex * coef, then the e^{-i k1^2 t} factor.
  t0 = Clock::now();
  std::vector<double> gap_num(N1, 0.0);
  auto synth = [&](const std::vector<cd>& c, std::size_t m, std::vector<cd>& dst, bool add) {
    Eigen::Map<const RowMat> Cm(&c[m * nz * Nt], Eigen::Index(nz), Eigen::Index(Nt));
    RowMat P = Ex * Cm;
    for (std::size_t i = 0; i < N2; ++i)
      for (std::size_t j = 0; j < Nt; ++j) {
        const cd v = P(Eigen::Index(i), Eigen::Index(j)) * std::exp(-I * (k1[m] * k1[m] * t[j]));
        if (add) dst[(m * N2 + i) * Nt + j] += v;
        else dst[(m * N2 + i) * Nt + j] = v;
      }
  };
  parallel_for(N1, [&](std::size_t m) {
    if (keep) {
      std::vector<cd>* dst[3] = {&out.terms[1], &out.terms[3], &out.terms[4]};
      const std::vector<cd>* src[3] = {&coef, &coef4, &coef5};
      for (int k = 0; k < 3; ++k) {
        synth(*src[k], m, *dst[k], true);
        synth(*src[k], m, out.Uk, true);
      }
    } else {
      synth(coef, m, out.Uk, true);
    }
    {
      std::vector<const std::vector<cd>*> src = {&coef};
      if (keep) src = {&coef, &coef4, &coef5};
      for (const auto* c : src) {
        Eigen::Map<const RowMat> Cm(&(*c)[m * nz * Nt], Eigen::Index(nz), Eigen::Index(Nt));
        RowMat P = Es * Cm;
        for (std::size_t q = 0; q < ns; ++q)
          for (std::size_t j = 0; j < Nt; ++j)
            out.St[(m * ns + q) * Nt + j] += P(Eigen::Index(q), Eigen::Index(j)) * std::exp(-I * (k1[m] * k1[m] * t[j]));
      }
    }
    if (want_gap) {
      Eigen::Map<const RowMat> Cm(&gapc[m * nz * Nt], Eigen::Index(nz), Eigen::Index(Nt));
      gap_num[m] = (Ex * Cm).squaredNorm();
    }
  });
  if (want_gap) {
    double num = 0.0, den = 0.0;
    for (std::size_t m = 0; m < N1; ++m) num += gap_num[m];
    for (cd v : out.Uk) den += std::norm(v);
    out.gap = den > 0.0 ? std::sqrt(num / den) : 0.0;
  }
  out.timings["synthesis_ms"] = ms_since(t0);
  out.timings["total_ms"] = ms_since(t_start);
  return out;
}

GridField to_physical(std::vector<cd>&& Uk, const Grid& grid) {
  GridField F({grid.k1_axis(), grid.x2_axis(), grid.t_axis()});
  F.values = std::move(Uk);
  return inverse_fourier_x1(F);
}

double rel_l2(const GridField& a, const GridField& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += std::norm(a.values[i] - b.values[i]);
    den += std::norm(b.values[i]);
  }
  return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

SolutionRecord finish_record(EngineOut&& eo, const Grid& grid, double gamma, const ContourSpec& cs,
                             const DataTriple* data, const SolverOptions& opts) {
  SolutionRecord rec;
  rec.diagnostics["contour"] = contour_name(cs.kind);
  rec.diagnostics["contour_nodes"] = eo.nz;
  rec.diagnostics["K_max"] = eo.K;
  rec.diagnostics["grid"] = {{"N1", grid.N1}, {"N2", grid.N2}, {"Nt", grid.Nt},
                             {"L1", grid.L1}, {"L2", grid.L2}, {"T", grid.T}};
  rec.diagnostics["gtilde_variant"] = opts.variant == BoundaryVariant::horizon ? "horizon" : "causal";
  rec.diagnostics["gtilde_variant_gap"] = eo.gap;
  rec.diagnostics["timings"] = eo.timings;
  if (opts.keep_terms) {
    TermBreakdown tb;
    static const char* names[5] = {"initial", "reflected_initial", "forcing", "reflected_forcing", "boundary"};
    for (int k = 0; k < 5; ++k) {
      tb.term[k] = to_physical(std::move(eo.terms[k]), grid);
      rec.diagnostics["term_l2"][names[k]] = tb.term[k].l2();
    }
    rec.terms = std::move(tb);
  }
  rec.u = to_physical(std::move(eo.Uk), grid);
  rec.u.require_finite("solution");
  rec.dirichlet_trace = slice_middle(rec.u, 0);
  {
    GridField St({grid.k1_axis(), Axis{AxisTag::x2, eo.xs.size(), 0.0, eo.xs[1]}, grid.t_axis()});
    St.values = std::move(eo.St);
    rec.robin_trace = robin_trace(inverse_fourier_x1(St), gamma);
  }
  if (data) {
    const double gn = data->g.max_abs();
    GridField diff = rec.robin_trace - data->g;
    rec.diagnostics["boundary_residual"] = gn > 0.0 ? rel_l2(rec.robin_trace, data->g) : diff.max_abs();
    GridField u_init = slice_last(rec.u, 0);
    rec.diagnostics["initial_residual"] =
        data->u0.max_abs() > 0.0 ? rel_l2(u_init, data->u0) : u_init.max_abs();
  }
  return rec;
}

}  // namespace

SolutionRecord solve_forced_ibvp(const ProblemSpec& spec, const Grid& grid, const DataTriple& data,
                                 const SolverOptions& opts) {
  validate_spec(spec, grid, data);
  const ContourSpec cs = select_contour(spec.gamma);
  EngineData ed{&data.u0, &data.g, data.f ? &*data.f : nullptr, nullptr};
  return finish_record(run_engine(grid, cs, robin_coefficients(spec.gamma), ed, opts), grid, spec.gamma, cs, &data,
                       opts);
}

SolutionRecord solve_neumann(const ProblemSpec& spec, const Grid& grid, const DataTriple& data,
                             const SolverOptions& opts) {
  ProblemSpec s = spec;
  s.gamma = 0.0;
  validate_spec(s, grid, data);
  const ContourSpec cs = select_contour(0.0);
  EngineData ed{&data.u0, &data.g, data.f ? &*data.f : nullptr, nullptr};
  return finish_record(run_engine(grid, cs, neumann_coefficients(), ed, opts), grid, 0.0, cs, &data, opts);
}

SolutionRecord solve_pure_ibvp(double gamma, const GridField& g, const Grid& grid, const SolverOptions& opts,
                               double support_floor) {
  if (g.rank() != 2 || g.axes[0].tag != AxisTag::x1 || g.axes[1].tag != AxisTag::t || g.dim(0) != grid.N1)
    throw Error(ErrorCode::AxisMismatch, "pure problem data must live on (x1, t)");
  g.require_finite("g");
  const double gmax = g.max_abs();
  const Axis& ta = g.axes[1];
  for (std::size_t i = 0; i < g.dim(0); ++i)
    for (std::size_t k = 0; k < ta.n; ++k) {
      const double tk = ta.node(k);
      if ((tk <= 1e-12 || tk >= 2.0 - 1e-12) && std::abs(g(i, k)) > support_floor * gmax)
        throw Error(ErrorCode::SupportViolation, "g must vanish outside 0 < t < 2");
    }
  const ContourSpec cs = select_contour(gamma);
  EngineData ed{nullptr, nullptr, nullptr, &g};
  SolverOptions o = opts;
  o.variant_gap = false;
  return finish_record(run_engine(grid, cs, robin_coefficients(gamma), ed, o), grid, gamma, cs, nullptr, o);
}

cd pure_boundary_transform(const GridField& g, double k1, cd k2) {
  const Axis& ta = g.axes[1];
  const auto gh = fourier_x1_at(g, k1);
  PanelRule rule(ta.origin, ta.step, ta.n);
  const auto w = rule.weights(k1 * k1 + k2 * k2);
  cd s = 0.0;
  for (std::size_t i = 0; i < ta.n; ++i) s += w[i] * gh[i];
  return s;
}

GridField even_extension(const GridField& half, const Grid& grid) {
  std::vector<Axis> ax = half.axes;
  ax[1] = grid.x2_whole_axis();
  GridField W(ax);
  const std::size_t rows = half.dim(0), inner = half.size() / (rows * grid.N2), M2 = grid.M2();
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t q = 0; q < M2; ++q) {
      const std::size_t j = q >= grid.N2 - 1 ? q - (grid.N2 - 1) : (grid.N2 - 1) - q;
      for (std::size_t k = 0; k < inner; ++k)
        W.values[(r * M2 + q) * inner + k] = half.values[(r * grid.N2 + j) * inner + k];
    }
  return W;
}

GridField zero_extension(const GridField& half, const Grid& grid) {
  std::vector<Axis> ax = half.axes;
  ax[1] = grid.x2_whole_axis();
  GridField W(ax);
  const std::size_t rows = half.dim(0), inner = half.size() / (rows * grid.N2), M2 = grid.M2();
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t q = grid.N2 - 1; q < M2; ++q)
      for (std::size_t k = 0; k < inner; ++k)
        W.values[(r * M2 + q) * inner + k] = half.values[(r * grid.N2 + q - (grid.N2 - 1)) * inner + k];
  return W;
}

GridField restrict_halfplane(const GridField& whole, const Grid& grid) {
  std::vector<Axis> ax = whole.axes;
  ax[1] = grid.x2_axis();
  GridField H(ax);
  const std::size_t rows = whole.dim(0), inner = whole.size() / (rows * grid.M2());
  std::vector<cd> tmp(H.size(), cd(0.0));
  restrict_rows_add(whole.values, rows, inner, grid, tmp);
  H.values = std::move(tmp);
  return H;
}

GridField solve_ivp(const GridField& U0, const GridField* F, const Grid& grid) {
  const std::size_t N1 = grid.N1, M2 = grid.M2(), Nt = grid.Nt;
  if (U0.rank() != 2 || U0.dim(0) != N1 || U0.dim(1) != M2)
    throw Error(ErrorCode::AxisMismatch, "whole-plane U0 must live on (x1, x2 in [-L2, L2))");
  if (F && (F->rank() != 3 || F->dim(0) != N1 || F->dim(1) != M2 || F->dim(2) != Nt))
    throw Error(ErrorCode::AxisMismatch, "whole-plane F must live on (x1, x2, t)");
  auto edge = [&](const GridField& f, const char* name) {
    const double m = f.max_abs();
    if (m == 0.0) return;
    const std::size_t inner = f.size() / (N1 * M2);
    double e = 0.0;
    for (std::size_t i = 0; i < N1; ++i)
      for (std::size_t q = 0; q < M2; ++q) {
        if (!(i == 0 || i + 1 == N1 || q == 0 || q + 1 == M2)) continue;
        for (std::size_t k = 0; k < inner; ++k) e = std::max(e, std::abs(f.values[(i * M2 + q) * inner + k]));
      }
    if (e > 1e-8 * m) throw Error(ErrorCode::EdgeDecay, std::string(name) + " does not decay at the box edges");
  };
  edge(U0, "U0");
  if (F) edge(*F, "F");
  GridField out({grid.x1_axis(), grid.x2_whole_axis(), grid.t_axis()});
  GridField Uk({grid.k1_axis(), grid.x2_whole_axis(), grid.t_axis()});
  if (U0.max_abs() > 0.0) {
    const GridField A = fourier_x1(U0);
    Uk.values = evolve_whole(A.values, grid);
  }
  if (F && F->max_abs() > 0.0) {
    const GridField Fh = fourier_x1(*F);
    const auto D = duhamel_whole(Fh.values, grid);
    for (std::size_t i = 0; i < D.size(); ++i) Uk.values[i] += D[i];
  }
  out = inverse_fourier_x1(Uk);
  out.require_finite("solve_ivp");
  return out;
}

GridField robin_trace(const GridField& u, double gamma) {
  if (u.rank() < 2 || u.axes[1].tag != AxisTag::x2) throw Error(ErrorCode::AxisMismatch, "robin_trace needs an x2 axis");
  if (u.dim(1) < 5) throw Error(ErrorCode::TooFewNodes, "robin_trace needs at least 5 nodes in x2");
  std::vector<Axis> ax;
  ax.push_back(u.axes[0]);
  for (std::size_t a = 2; a < u.rank(); ++a) ax.push_back(u.axes[a]);
  GridField out(ax);
  const std::size_t N2 = u.dim(1), inner = u.size() / (u.dim(0) * N2);
  const double h = u.axes[1].step;
  for (std::size_t i = 0; i < u.dim(0); ++i)
    for (std::size_t k = 0; k < inner; ++k) {
      auto v = [&](std::size_t j) { return u.values[(i * N2 + j) * inner + k]; };
      const cd d = (-25.0 * v(0) + 48.0 * v(1) - 36.0 * v(2) + 16.0 * v(3) - 3.0 * v(4)) / (12.0 * h);
      out.values[i * inner + k] = d + gamma * v(0);
    }
  return out;
}

GridField robin_trace_spectral(const GridField& U, double gamma) {
  if (U.rank() < 2 || U.axes[1].tag != AxisTag::x2) throw Error(ErrorCode::AxisMismatch, "robin_trace_spectral needs an x2 axis");
  const Axis& xa = U.axes[1];
  const std::size_t N1 = U.dim(0), M2 = xa.n, inner = U.size() / (N1 * M2);
  const long j0 = std::lround(-xa.origin / xa.step);
  if (j0 < 0 || std::size_t(j0) >= M2 || std::abs(xa.node(std::size_t(j0))) > 1e-9 * xa.step)
    throw Error(ErrorCode::AxisMismatch, "whole-plane x2 axis must contain x2 = 0");
  std::vector<cd> a = U.values;
  fft_axis(a, {N1, M2, inner}, 1, -1);
  const double dk = 2.0 * pi / (double(M2) * xa.step);
  for (std::size_t i = 0; i < N1; ++i)
    for (std::size_t q = 0; q < M2; ++q) {
      const double k2 = q == M2 / 2 ? 0.0 : dk * (q < M2 / 2 ? double(q) : double(q) - double(M2));
      for (std::size_t k = 0; k < inner; ++k) a[(i * M2 + q) * inner + k] *= I * k2 / double(M2);
    }
  fft_axis(a, {N1, M2, inner}, 1, +1);
  std::vector<Axis> ax;
  ax.push_back(U.axes[0]);
  for (std::size_t x = 2; x < U.rank(); ++x) ax.push_back(U.axes[x]);
  GridField out(ax);
  for (std::size_t i = 0; i < N1; ++i)
    for (std::size_t k = 0; k < inner; ++k) {
      const std::size_t idx = (i * M2 + std::size_t(j0)) * inner + k;
      out.values[i * inner + k] = a[idx] + gamma * U.values[idx];
    }
  return out;
}

std::vector<std::pair<double, cd>> random_relation_samples(std::size_t n, unsigned seed, double kmax) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> k1d(-kmax, kmax), rd(0.1, kmax), thd(-pi, 0.0);
  std::vector<std::pair<double, cd>> s;
  for (std::size_t i = 0; i < n; ++i) {
    const double k1 = k1d(rng);
    s.emplace_back(k1, std::polar(rd(rng), thd(rng)));
  }
  return s;
}

GlobalRelationReport global_relation_residual(const SolutionRecord& sol, const ProblemSpec& spec, const Grid& grid,
                                              const DataTriple& data,
                                              const std::vector<std::pair<double, cd>>& samples) {
  const std::size_t N2 = grid.N2, Nt = grid.Nt;
  PanelRule xr(0.0, grid.h2(), N2);
  PanelRule tr(0.0, grid.dt(), Nt);
  const double gamma = spec.gamma;
  // x1-integrated magnitudes. With |e^{-i k2 x2}| <= 1 they give a data-norm bound on every term of
  // the relation, used as the per-sample normalization.
  const double h1 = grid.h1(), h2 = grid.h2(), dt = grid.dt();
  auto x1_abs = [&](const GridField& f) {
    const std::size_t inner = f.size() / f.dim(0);
    std::vector<double> a(inner, 0.0);
    for (std::size_t i = 0; i < f.dim(0); ++i)
      for (std::size_t r = 0; r < inner; ++r) a[r] += h1 * std::abs(f.values[i * inner + r]);
    return a;
  };
  const auto Au = x1_abs(sol.u), Au0 = x1_abs(data.u0), Ag0 = x1_abs(sol.dirichlet_trace), Ag = x1_abs(data.g);
  const std::vector<double> Af = data.f ? x1_abs(*data.f) : std::vector<double>();
  struct Eval {
    double max_res = 0.0, scale = 0.0;
  };
  auto eval = [&](double k1, cd k2) {
    Eval e;
    const cd om = k1 * k1 + k2 * k2;
    const auto wx = xr.weights(-k2);
    const auto C = tr.cumulative(om);
    const auto uh = fourier_x1_at(sol.u, k1);  // [x2][t]
    const auto u0h = fourier_x1_at(data.u0, k1);
    const auto g0h = fourier_x1_at(sol.dirichlet_trace, k1);
    const auto gh = fourier_x1_at(data.g, k1);
    std::vector<double> ex(N2), et(Nt);
    for (std::size_t j = 0; j < N2; ++j) ex[j] = h2 * (j == 0 || j + 1 == N2 ? 0.5 : 1.0);
    for (std::size_t i = 0; i < Nt; ++i) et[i] = std::exp(-om.imag() * grid.t(i));
    std::vector<cd> fh;
    std::vector<double> fb;
    if (data.f) {
      const auto fx = fourier_x1_at(*data.f, k1);
      fh.assign(Nt, cd(0.0));
      fb.assign(Nt, 0.0);
      for (std::size_t j = 0; j < N2; ++j)
        for (std::size_t i = 0; i < Nt; ++i) {
          fh[i] += wx[j] * fx[j * Nt + i];
          fb[i] += ex[j] * Af[j * Nt + i];
        }
    }
    cd u0hat = 0.0;
    double u0b = 0.0;
    for (std::size_t j = 0; j < N2; ++j) {
      u0hat += wx[j] * u0h[j];
      u0b += ex[j] * Au0[j];
    }
    const double c0 = std::abs(k2 + I * gamma);
    double cum = 0.0;  // trapezoid bound of the time integrals
    auto tb = [&](std::size_t i) { return et[i] * (c0 * Ag0[i] + Ag[i] + (data.f ? fb[i] : 0.0)); };
    for (std::size_t it = 0; it < Nt; ++it) {
      cd uhat = 0.0;
      double ub = 0.0;
      for (std::size_t j = 0; j < N2; ++j) {
        uhat += wx[j] * uh[j * Nt + it];
        ub += ex[j] * Au[j * Nt + it];
      }
      if (it > 0) cum += 0.5 * dt * (tb(it - 1) + tb(it));
      cd G0 = 0.0, G = 0.0, Fc = 0.0;
      for (std::size_t i = 0; i < Nt; ++i) {  // interior rows reach the end of their panel
        G0 += C[it * Nt + i] * g0h[i];
        G += C[it * Nt + i] * gh[i];
        if (data.f) Fc += C[it * Nt + i] * fh[i];
      }
      const cd lhs = checked_exp(I * om * grid.t(it)) * uhat;
      const cd rhs = u0hat + (k2 + I * gamma) * G0 - I * G - I * Fc;
      e.max_res = std::max(e.max_res, std::abs(lhs - rhs));
      e.scale = std::max(e.scale, et[it] * ub + u0b + cum);
    }
    return e;
  };
  std::vector<Eval> direct(samples.size()), refl(samples.size());
  parallel_for(samples.size(), [&](std::size_t s) {
    const double k1 = samples[s].first;
    const cd k2 = samples[s].second;
    if (k2.imag() > 1e-14) throw Error(ErrorCode::UpperHalfK2, "relation samples need Im k2 <= 0");
    direct[s] = eval(k1, k2);
    // Reflected relation: k2' = conj(k2) has Im k2' >= 0, evaluated at -k2'.
    refl[s] = eval(k1, -std::conj(k2));
  });
  GlobalRelationReport rep;
  rep.samples = samples.size();
  for (std::size_t s = 0; s < samples.size(); ++s) {
    rep.scale = std::max({rep.scale, direct[s].scale, refl[s].scale});
    if (direct[s].scale > 0.0) rep.residual = std::max(rep.residual, direct[s].max_res / direct[s].scale);
    if (refl[s].scale > 0.0) rep.reflected_residual = std::max(rep.reflected_residual, refl[s].max_res / refl[s].scale);
  }
  return rep;
}

SuperpositionReport superposition_residual(const ProblemSpec& spec, const Grid& grid, const DataTriple& data,
                                           const SolverOptions& opts) {
  SolverOptions o = opts;
  o.keep_terms = false;
  o.variant_gap = false;
  const SolutionRecord lhs = solve_forced_ibvp(spec, grid, data, o);

  const GridField U0 = even_extension(data.u0, grid);
  const GridField W1 = solve_ivp(U0, nullptr, grid);
  GridField rhs = restrict_halfplane(W1, grid);
  GridField psi1 = data.g - robin_trace_spectral(W1, spec.gamma);

  DataTriple d1 = zero_data(grid, false);
  d1.g = psi1;
  rhs += solve_forced_ibvp(spec, grid, d1, o).u;

  if (data.f && data.f->max_abs() > 0.0) {
    const GridField F = even_extension(*data.f, grid);
    const GridField U0z({grid.x1_axis(), grid.x2_whole_axis()});
    const GridField W2 = solve_ivp(U0z, &F, grid);
    rhs += restrict_halfplane(W2, grid);
    GridField psi2 = robin_trace_spectral(W2, spec.gamma);
    psi2 *= -1.0;
    DataTriple d2 = zero_data(grid, false);
    d2.g = psi2;
    rhs += solve_forced_ibvp(spec, grid, d2, o).u;
  }
  SuperpositionReport rep;
  GridField diff = lhs.u - rhs;
  rep.discrepancy = diff.max_abs();
  const double m = lhs.u.max_abs();
  rep.relative = m > 0.0 ? rep.discrepancy / m : rep.discrepancy;
  return rep;
}

}  // namespace utm
