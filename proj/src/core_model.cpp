#include "utm/core_model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "json.hpp"

namespace utm {

const char* error_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::AlphaParity: return "AlphaParity";
    case ErrorCode::EdgeDecay: return "EdgeDecay";
    case ErrorCode::RangeS: return "RangeS";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::AxisMismatch: return "AxisMismatch";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::UpperHalfK2: return "UpperHalfK2";
    case ErrorCode::Overflow: return "Overflow";
    case ErrorCode::TruncationTooSmall: return "TruncationTooSmall";
    case ErrorCode::SupportViolation: return "SupportViolation";
    case ErrorCode::TooFewNodes: return "TooFewNodes";
    case ErrorCode::HorizonTooLarge: return "HorizonTooLarge";
    case ErrorCode::NonConvergent: return "NonConvergent";
    case ErrorCode::NoContraction: return "NoContraction";
    case ErrorCode::LinearSolveFailure: return "LinearSolveFailure";
    case ErrorCode::MissingArtifact: return "MissingArtifact";
    case ErrorCode::Config: return "Config";
  }
  return "Unknown";
}

Error::Error(ErrorCode c, const std::string& what)
    : std::runtime_error(std::string(error_name(c)) + ": " + what), code_(c) {}

const char* axis_name(AxisTag a) {
  switch (a) {
    case AxisTag::x1: return "x1";
    case AxisTag::x2: return "x2";
    case AxisTag::t: return "t";
    case AxisTag::k1: return "k1";
    case AxisTag::k2: return "k2";
    case AxisTag::tau: return "tau";
  }
  return "?";
}

AxisTag axis_from_name(const std::string& s) {
  for (AxisTag a : {AxisTag::x1, AxisTag::x2, AxisTag::t, AxisTag::k1, AxisTag::k2, AxisTag::tau})
    if (s == axis_name(a)) return a;
  throw Error(ErrorCode::AxisMismatch, "unknown axis tag '" + s + "'");
}

GridField::GridField(std::vector<Axis> ax) : axes(std::move(ax)) {
  std::size_t n = 1;
  for (const auto& a : axes) n *= a.n;
  values.assign(n, cd(0.0, 0.0));
}

std::vector<std::size_t> GridField::shape() const {
  std::vector<std::size_t> s;
  for (const auto& a : axes) s.push_back(a.n);
  return s;
}

bool GridField::all_finite() const {
  return std::all_of(values.begin(), values.end(),
                     [](cd v) { return std::isfinite(v.real()) && std::isfinite(v.imag()); });
}

void GridField::require_finite(const char* where) const {
  if (!all_finite()) throw Error(ErrorCode::NonFinite, std::string("non-finite sample in ") + where);
}

double GridField::max_abs() const {
  double m = 0.0;
  for (cd v : values) m = std::max(m, std::abs(v));
  return m;
}

double GridField::l2() const {
  double s = 0.0;
  for (cd v : values) s += std::norm(v);
  double w = 1.0;
  for (const auto& a : axes) w *= a.step;
  return std::sqrt(s * w);
}

bool same_layout(const GridField& a, const GridField& b) {
  if (a.axes.size() != b.axes.size()) return false;
  for (std::size_t i = 0; i < a.axes.size(); ++i)
    if (a.axes[i].tag != b.axes[i].tag || a.axes[i].n != b.axes[i].n) return false;
  return true;
}

GridField& GridField::operator+=(const GridField& o) {
  if (!same_layout(*this, o)) throw Error(ErrorCode::AxisMismatch, "field layouts differ in +=");
  for (std::size_t i = 0; i < values.size(); ++i) values[i] += o.values[i];
  return *this;
}

GridField& GridField::operator-=(const GridField& o) {
  if (!same_layout(*this, o)) throw Error(ErrorCode::AxisMismatch, "field layouts differ in -=");
  for (std::size_t i = 0; i < values.size(); ++i) values[i] -= o.values[i];
  return *this;
}

GridField& GridField::operator*=(cd a) {
  for (auto& v : values) v *= a;
  return *this;
}

GridField operator+(GridField a, const GridField& b) { return a += b; }
GridField operator-(GridField a, const GridField& b) { return a -= b; }
GridField operator*(cd a, GridField b) { return b *= a; }

Grid Grid::make(double L1, std::size_t N1, double L2, std::size_t N2, double T, std::size_t Nt) {
  if (!(L1 > 0 && L2 > 0 && T > 0)) throw Error(ErrorCode::GridMismatch, "box lengths and horizon must be positive");
  if (N1 < 4 || !std::has_single_bit(N1)) throw Error(ErrorCode::GridMismatch, "N1 must be a power of two >= 4");
  if (N2 < 5 || N2 % 2 == 0) throw Error(ErrorCode::GridMismatch, "N2 must be odd and >= 5");
  if (Nt < 5 || Nt % 2 == 0) throw Error(ErrorCode::GridMismatch, "Nt must be odd and >= 5");
  Grid g;
  g.L1 = L1; g.N1 = N1; g.L2 = L2; g.N2 = N2; g.T = T; g.Nt = Nt;
  return g;
}

std::vector<double> Grid::k1_nodes() const {
  std::vector<double> k(N1);
  for (std::size_t m = 0; m < N1; ++m) k[m] = k1(m);
  return k;
}

Grid Grid::refined() const { return make(L1, 2 * N1, L2, 2 * N2 - 1, T, 2 * Nt - 1); }

Grid Grid::with_horizon(double Tnew) const { return make(L1, N1, L2, N2, Tnew, Nt); }

double edge_ratio(const GridField& f) {
  double m = f.max_abs();
  if (m == 0.0) return 0.0;
  const std::size_t n0 = f.axes[0].n;
  std::size_t inner = f.size() / n0;
  double e = 0.0;
  if (f.axes[0].tag == AxisTag::x1) {
    for (std::size_t r = 0; r < inner; ++r) {
      e = std::max(e, std::abs(f.values[r]));
      e = std::max(e, std::abs(f.values[(n0 - 1) * inner + r]));
    }
  }
  if (f.rank() >= 2 && f.axes[1].tag == AxisTag::x2) {
    const std::size_t n1 = f.axes[1].n;
    const std::size_t tail = inner / n1;
    for (std::size_t i = 0; i < n0; ++i)
      for (std::size_t k = 0; k < tail; ++k)
        e = std::max(e, std::abs(f.values[(i * n1 + n1 - 1) * tail + k]));
  }
  return e / m;
}

CheckedSpec validate_spec(const ProblemSpec& spec, const Grid& grid, const DataTriple& data) {
  if (spec.alpha < 3 || (spec.alpha - 1) % 2 != 0)
    throw Error(ErrorCode::AlphaParity, "(alpha-1)/2 must be a positive integer, got alpha=" + std::to_string(spec.alpha));
  if (spec.nonlinear && !(spec.s > 1.0 && spec.s < 1.5))
    throw Error(ErrorCode::RangeS, "nonlinear path needs 1 < s < 3/2, got s=" + std::to_string(spec.s));
  if (!spec.nonlinear && spec.s < 0.0) throw Error(ErrorCode::RangeS, "s must be >= 0");
  if (!(spec.T > 0.0)) throw Error(ErrorCode::GridMismatch, "T must be positive");
  if (!(spec.lifespan_constant > 0.0)) throw Error(ErrorCode::Config, "lifespan_constant must be positive");
  if (std::abs(spec.T - grid.T) > 1e-12 * std::max(1.0, spec.T))
    throw Error(ErrorCode::GridMismatch, "spec horizon differs from grid horizon");
  if (data.u0.rank() != 2 || data.u0.dim(0) != grid.N1 || data.u0.dim(1) != grid.N2)
    throw Error(ErrorCode::AxisMismatch, "u0 must live on (x1, x2)");
  if (data.g.rank() != 2 || data.g.dim(0) != grid.N1 || data.g.dim(1) != grid.Nt)
    throw Error(ErrorCode::AxisMismatch, "g must live on (x1, t)");
  if (data.f && (data.f->rank() != 3 || data.f->dim(0) != grid.N1 || data.f->dim(1) != grid.N2 ||
                 data.f->dim(2) != grid.Nt))
    throw Error(ErrorCode::AxisMismatch, "f must live on (x1, x2, t)");
  data.u0.require_finite("u0");
  data.g.require_finite("g");
  if (data.f) data.f->require_finite("f");

  CheckedSpec out;
  out.spec = spec;
  out.k1_nodes = grid.k1_nodes();
  out.u0_edge = edge_ratio(data.u0);
  out.g_edge = edge_ratio(data.g);
  out.f_edge = data.f ? edge_ratio(*data.f) : 0.0;
  auto check = [&](double e, const char* name) {
    if (e > spec.edge_floor) {
      std::ostringstream os;
      os << name << " edge magnitude " << e << " exceeds floor " << spec.edge_floor;
      throw Error(ErrorCode::EdgeDecay, os.str());
    }
  };
  check(out.u0_edge, "u0");
  check(out.g_edge, "g");
  check(out.f_edge, "f");
  return out;
}

GridField zeros(const std::vector<Axis>& axes) { return GridField(axes); }

DataTriple zero_data(const Grid& grid, bool with_forcing) {
  DataTriple d;
  d.u0 = GridField({grid.x1_axis(), grid.x2_axis()});
  d.g = GridField({grid.x1_axis(), grid.t_axis()});
  if (with_forcing) d.f = GridField({grid.x1_axis(), grid.x2_axis(), grid.t_axis()});
  return d;
}

GridField sample(const Expression& expr, const Grid& grid, const std::vector<AxisTag>& tags) {
  std::vector<Axis> axes;
  for (AxisTag t : tags) {
    switch (t) {
      case AxisTag::x1: axes.push_back(grid.x1_axis()); break;
      case AxisTag::x2: axes.push_back(grid.x2_axis()); break;
      case AxisTag::t: axes.push_back(grid.t_axis()); break;
      default: throw Error(ErrorCode::AxisMismatch, "sample only takes physical axes");
    }
  }
  for (std::size_t i = 1; i < tags.size(); ++i)
    if (int(tags[i]) <= int(tags[i - 1])) throw Error(ErrorCode::AxisMismatch, "axes must be ordered x1, x2, t");
  GridField f(axes);
  std::size_t idx = 0;
  const std::size_t r = axes.size();
  std::vector<std::size_t> cnt(r, 0);
  for (std::size_t lin = 0; lin < f.size(); ++lin) {
    double c[3] = {0.0, 0.0, 0.0};
    for (std::size_t a = 0; a < r; ++a) c[int(tags[a])] = axes[a].node(cnt[a]);
    f.values[idx++] = expr(c[0], c[1], c[2]);
    for (std::size_t a = r; a-- > 0;) {
      if (++cnt[a] < axes[a].n) break;
      cnt[a] = 0;
    }
  }
  f.require_finite("sample");
  return f;
}

GridField slice_last(const GridField& f, std::size_t index) {
  std::vector<Axis> ax(f.axes.begin(), f.axes.end() - 1);
  GridField out(ax);
  const std::size_t n = f.axes.back().n;
  for (std::size_t i = 0; i < out.size(); ++i) out.values[i] = f.values[i * n + index];
  return out;
}

GridField slice_middle(const GridField& f, std::size_t index) {
  if (f.rank() != 3) throw Error(ErrorCode::AxisMismatch, "slice_middle needs a rank-3 field");
  GridField out({f.axes[0], f.axes[2]});
  for (std::size_t i = 0; i < f.dim(0); ++i)
    for (std::size_t k = 0; k < f.dim(2); ++k) out(i, k) = f(i, index, k);
  return out;
}

namespace {

void put_le(std::ostream& os, double v) {
  std::uint64_t u;
  std::memcpy(&u, &v, 8);
  if constexpr (std::endian::native == std::endian::big) u = __builtin_bswap64(u);
  os.write(reinterpret_cast<const char*>(&u), 8);
}

double get_le(std::istream& is) {
  std::uint64_t u;
  is.read(reinterpret_cast<char*>(&u), 8);
  if constexpr (std::endian::native == std::endian::big) u = __builtin_bswap64(u);
  double v;
  std::memcpy(&v, &u, 8);
  return v;
}

}  // namespace

void write_field(const GridField& f, const std::string& base) {
  std::ofstream bin(base + ".bin", std::ios::binary);
  if (!bin) throw Error(ErrorCode::MissingArtifact, "cannot open " + base + ".bin");
  for (cd v : f.values) {
    put_le(bin, v.real());
    put_le(bin, v.imag());
  }
  nlohmann::json h;
  h["format"] = "f64le-complex-interleaved";
  for (const auto& a : f.axes) {
    h["axes"].push_back(axis_name(a.tag));
    h["shape"].push_back(a.n);
    h["spacing"].push_back(a.step);
    h["origin"].push_back(a.origin);
  }
  std::ofstream js(base + ".json");
  js << h.dump(2) << "\n";
}

GridField read_field(const std::string& base) {
  std::ifstream js(base + ".json");
  if (!js) throw Error(ErrorCode::MissingArtifact, "missing header " + base + ".json");
  nlohmann::json h = nlohmann::json::parse(js);
  std::vector<Axis> axes;
  for (std::size_t i = 0; i < h["axes"].size(); ++i)
    axes.push_back({axis_from_name(h["axes"][i].get<std::string>()), h["shape"][i].get<std::size_t>(),
                    h["origin"][i].get<double>(), h["spacing"][i].get<double>()});
  GridField f(axes);
  std::ifstream bin(base + ".bin", std::ios::binary);
  if (!bin) throw Error(ErrorCode::MissingArtifact, "missing data " + base + ".bin");
  for (auto& v : f.values) {
    double re = get_le(bin);
    double im = get_le(bin);
    v = cd(re, im);
  }
  if (!bin) throw Error(ErrorCode::MissingArtifact, "truncated data " + base + ".bin");
  return f;
}

void write_csv(const GridField& f, const std::string& path) {
  if (f.rank() < 1 || f.rank() > 2) throw Error(ErrorCode::AxisMismatch, "CSV export takes 1D or 2D fields");
  std::ofstream os(path);
  if (!os) throw Error(ErrorCode::MissingArtifact, "cannot open " + path);
  os << std::setprecision(12);
  if (f.rank() == 1) {
    os << axis_name(f.axes[0].tag) << ",re,im,abs\n";
    for (std::size_t i = 0; i < f.dim(0); ++i)
      os << f.axes[0].node(i) << "," << f.values[i].real() << "," << f.values[i].imag() << ","
         << std::abs(f.values[i]) << "\n";
    return;
  }
  os << axis_name(f.axes[0].tag) << "," << axis_name(f.axes[1].tag) << ",re,im,abs\n";
  for (std::size_t i = 0; i < f.dim(0); ++i)
    for (std::size_t j = 0; j < f.dim(1); ++j) {
      cd v = f(i, j);
      os << f.axes[0].node(i) << "," << f.axes[1].node(j) << "," << v.real() << "," << v.imag() << ","
         << std::abs(v) << "\n";
    }
}

}  // namespace utm
