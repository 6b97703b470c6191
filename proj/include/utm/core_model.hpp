#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace utm {

using cd = std::complex<double>;
inline constexpr double pi = 3.14159265358979323846;

enum class ErrorCode {
  AlphaParity,
  EdgeDecay,
  RangeS,
  NonFinite,
  AxisMismatch,
  GridMismatch,
  UpperHalfK2,
  Overflow,
  TruncationTooSmall,
  SupportViolation,
  TooFewNodes,
  HorizonTooLarge,
  NonConvergent,
  NoContraction,
  LinearSolveFailure,
  MissingArtifact,
  Config,
};

const char* error_name(ErrorCode c);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode c, const std::string& what);
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

enum class AxisTag { x1, x2, t, k1, k2, tau };

const char* axis_name(AxisTag a);
AxisTag axis_from_name(const std::string& s);

// Uniform axis: node(i) = origin + i*step.
struct Axis {
  AxisTag tag;
  std::size_t n = 0;
  double origin = 0.0;
  double step = 1.0;

  double node(std::size_t i) const { return origin + step * double(i); }
  double last() const { return node(n - 1); }
};

// Row-major complex samples; the first axis varies slowest.
struct GridField {
  std::vector<Axis> axes;
  std::vector<cd> values;

  GridField() = default;
  explicit GridField(std::vector<Axis> ax);

  std::size_t rank() const { return axes.size(); }
  std::size_t size() const { return values.size(); }
  std::size_t dim(std::size_t a) const { return axes.at(a).n; }
  std::vector<std::size_t> shape() const;

  cd& operator()(std::size_t i, std::size_t j) { return values[i * axes[1].n + j]; }
  cd operator()(std::size_t i, std::size_t j) const { return values[i * axes[1].n + j]; }
  cd& operator()(std::size_t i, std::size_t j, std::size_t k) {
    return values[(i * axes[1].n + j) * axes[2].n + k];
  }
  cd operator()(std::size_t i, std::size_t j, std::size_t k) const {
    return values[(i * axes[1].n + j) * axes[2].n + k];
  }

  bool all_finite() const;
  void require_finite(const char* where) const;
  double max_abs() const;
  // Riemann sum of |v|^2 times the product of steps, then sqrt.
  double l2() const;

  GridField& operator+=(const GridField& o);
  GridField& operator-=(const GridField& o);
  GridField& operator*=(cd a);
};

GridField operator+(GridField a, const GridField& b);
GridField operator-(GridField a, const GridField& b);
GridField operator*(cd a, GridField b);
bool same_layout(const GridField& a, const GridField& b);

struct Grid {
  double L1 = 20.0, L2 = 20.0, T = 0.5;
  std::size_t N1 = 64, N2 = 65, Nt = 33;

  // Checks N1 a power of two, N2 and Nt odd and >= 5.
  static Grid make(double L1, std::size_t N1, double L2, std::size_t N2, double T, std::size_t Nt);

  double h1() const { return L1 / double(N1); }
  double h2() const { return L2 / double(N2 - 1); }
  double dt() const { return T / double(Nt - 1); }
  double dk1() const { return 2.0 * pi / L1; }
  double x1(std::size_t i) const { return -0.5 * L1 + h1() * double(i); }
  double x2(std::size_t j) const { return h2() * double(j); }
  double t(std::size_t k) const { return dt() * double(k); }
  double k1(std::size_t m) const { return dk1() * (double(m) - double(N1 / 2)); }
  std::vector<double> k1_nodes() const;
  double k1_max() const { return dk1() * double(N1 / 2); }

  Axis x1_axis() const { return {AxisTag::x1, N1, -0.5 * L1, h1()}; }
  Axis x2_axis() const { return {AxisTag::x2, N2, 0.0, h2()}; }
  Axis t_axis() const { return {AxisTag::t, Nt, 0.0, dt()}; }
  Axis k1_axis() const { return {AxisTag::k1, N1, -dk1() * double(N1 / 2), dk1()}; }
  // Periodic whole-line x2 axis on [-L2, L2) with the same spacing.
  std::size_t M2() const { return 2 * (N2 - 1); }
  Axis x2_whole_axis() const { return {AxisTag::x2, M2(), -L2, h2()}; }

  // Same box, intervals doubled in every direction.
  Grid refined() const;
  Grid with_horizon(double Tnew) const;
};

enum class Sign { focusing = -1, defocusing = +1 };

struct ProblemSpec {
  double gamma = 0.0;
  int alpha = 3;
  Sign sign = Sign::defocusing;
  double s = 1.2;
  double T = 0.5;
  double lifespan_constant = 1.0;
  bool nonlinear = false;
  double edge_floor = 1e-8;
};

struct DataTriple {
  GridField u0;  // (x1, x2)
  GridField g;   // (x1, t)
  std::optional<GridField> f;  // (x1, x2, t)
};

struct CheckedSpec {
  ProblemSpec spec;
  std::vector<double> k1_nodes;
  double u0_edge = 0.0;  // relative edge magnitudes actually measured
  double g_edge = 0.0;
  double f_edge = 0.0;
};

CheckedSpec validate_spec(const ProblemSpec& spec, const Grid& grid, const DataTriple& data);

// Relative max of |field| on the x1 edges (and the far x2 edge when present).
double edge_ratio(const GridField& field);

using Expression = std::function<cd(double x1, double x2, double t)>;

// Axes must be a subset of {x1, x2, t} in that order. Missing coordinates are passed as 0.
GridField sample(const Expression& expr, const Grid& grid, const std::vector<AxisTag>& axes);

GridField zeros(const std::vector<Axis>& axes);
DataTriple zero_data(const Grid& grid, bool with_forcing);

// Slices and traces.
GridField slice_last(const GridField& f, std::size_t index);   // fix the last axis
GridField slice_middle(const GridField& f, std::size_t index); // fix axis 1 of a rank-3 field

// Binary: little-endian float64 re/im interleaved; sidecar JSON header.
void write_field(const GridField& f, const std::string& path_without_ext);
GridField read_field(const std::string& path_without_ext);
// 1D or 2D field to CSV: coordinates then re, im, abs.
void write_csv(const GridField& f, const std::string& path);

}  // namespace utm
