#pragma once

#include <string>

#include "json.hpp"
#include "utm/core_model.hpp"

namespace utm {

enum class NormKind { sobolev_plane, sobolev_halfplane, bourgain, bourgain_restricted, bourgain_homogeneous, bts };
const char* norm_kind_name(NormKind k);

enum class HalfplaneExtension { even_reflection, zero };

enum class ExtensionMode { zero_extension, cutoff_extension };
struct ExtensionPolicy {
  ExtensionMode mode = ExtensionMode::zero_extension;
};
const char* extension_name(ExtensionMode m);

struct NormReport {
  NormKind kind = NormKind::sobolev_plane;
  nlohmann::json exponents;
  double value = 0.0;
  std::string policy;
  double excluded_mass = 0.0;

  nlohmann::json to_json() const;
};

// Fields on (x1, x2) over a periodic box; weight (1 + k1^2 + k2^2)^s. edge_floor <= 0 skips the decay check.
double sobolev_norm_plane(const GridField& f, double s, double edge_floor = 1e-8);

// Upper bound for the half-plane norm through a fixed extension to the doubled box [-L2, L2).
// Even reflection needs s < 3/2.
double sobolev_norm_halfplane(const GridField& f, double s, HalfplaneExtension ext = HalfplaneExtension::even_reflection,
                              double edge_floor = 1e-8);

// Fields on (x1, t) covering the whole support in t. Weight (1+k1^2)^sigma (1+|tau+k1^2|^2)^b, or
// (1+k1^2)^sigma |tau+k1^2|^{2b} when homogeneous; for homogeneous b < 0 the nodes with
// |tau + k1^2| < 1e-8 are dropped and their unweighted-in-tau mass reported.
NormReport bourgain_norm(const GridField& g, double sigma, double b, bool homogeneous = false,
                         double edge_floor = 1e-8);

// C-infinity bump: 1 on [0, 2], 0 outside (-1, 3).
double cutoff_profile(double t);

// psi on (x1, t in [0, T]) to (x1, t in [-1, 3]) with the same step; the node count is odd.
GridField extend_boundary_datum(const GridField& psi, const ExtensionPolicy& policy);

// ||h||_{X^{0,(2s-1)/4}} + ||h||_{X^{s,-1/4}} for the extension h of g; homogeneous swaps in the
// homogeneous modulation weight.
NormReport bts_norm(const GridField& g, double s, const ExtensionPolicy& policy = {}, bool homogeneous = false);

struct KernelBound {
  double value = 0.0;  // I(k1, k2, beta)
  double ratio = 0.0;  // I / (k1^2 + k2^2)^beta
  double error_estimate = 0.0;
};

// I(k1,k2,beta) = int_{z1 in R} int_{z2 > 0} |e^{i k1 z1 - k2 z2} - 1|^2 / |z|^{2+2beta} dz, adaptive in polar form.
KernelBound kernel_bound_check(double k1, double k2, double beta);

}  // namespace utm
