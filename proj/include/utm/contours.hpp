#pragma once

#include <string>
#include <vector>

#include "utm/core_model.hpp"

namespace utm {

enum class ContourKind { boundary_D, boundary_D_tilde, real_axis };

const char* contour_name(ContourKind k);

// One parametrized piece: a straight segment from a to b, or the arc
// center + radius*e^{i theta} for theta from theta0 to theta1.
// Segments whose endpoint sits at infinity are truncated at |k2| = K_max when building a rule.
struct ContourPiece {
  enum Shape { segment, arc } shape = segment;
  cd a = 0.0, b = 0.0;
  bool a_infinite = false, b_infinite = false;  // direction a (or b) points to infinity
  cd center = 0.0;
  double radius = 0.0, theta0 = 0.0, theta1 = 0.0;
};

struct ContourSpec {
  ContourKind kind = ContourKind::boundary_D;
  double gamma = 0.0;
  std::vector<ContourPiece> pieces;

  ContourSpec reversed() const;
};

struct ContourQuadrature {
  std::vector<cd> nodes;
  std::vector<cd> weights;  // dk2/dtheta Jacobian and orientation included
  double truncation = 0.0;
  std::size_t size() const { return nodes.size(); }
};

ContourSpec select_contour(double gamma);
ContourSpec real_axis_contour();

// Incoming ray from infinity along direction e^{i angle} to 0, then the positive real axis.
ContourSpec rotated_boundary(double angle);

// GL8 panels. Straight pieces use nodes_per_unit along |dk2|; arcs use arc_nodes in total.
ContourQuadrature build_quadrature(const ContourSpec& spec, double K_max, int nodes_per_unit, int arc_nodes = 32);

void write_contour_csv(const ContourQuadrature& q, const std::string& path);

}  // namespace utm
