#pragma once

#include <vector>

#include "utm/core_model.hpp"
#include "utm/quadrature.hpp"

namespace utm {

// x1 transform: F(k1) = int e^{-i k1 x1} f dx1 by the periodic trapezoid rule. Axis 0 must be x1;
// the result carries a k1 axis (ascending, k1 = dk1*(m - N1/2)).
GridField fourier_x1(const GridField& f);
GridField inverse_fourier_x1(const GridField& F);

// Unnormalized transform of the x1 samples at an arbitrary real k1 (direct sum).
std::vector<cd> fourier_x1_at(const GridField& f, double k1);

struct SpectralField {
  std::vector<double> k1;
  std::vector<cd> k2;
  std::vector<cd> values;  // [m * k2.size() + z]
  cd at(std::size_t m, std::size_t z) const { return values[m * k2.size() + z]; }
};

// int_0^L2 int e^{-i k1 x1 - i k2 x2} f dx1 dx2 for every grid k1 and every k2 node (Im k2 <= 0).
SpectralField halfplane_fourier(const GridField& f, const std::vector<cd>& k2_nodes);

// Weights w_j with sum_j w_j phi(x2_j) = int_0^L2 e^{-i k2 x2} phi dx2.
std::vector<cd> halfline_weights(const Axis& x2, cd k2);

// g~(k1, omega, T) = int_0^T e^{i omega t} g^(k1, t) dt; T must be a node of the t axis.
cd time_transform(const GridField& g, double k1, cd omega, double T);

// Laplace transform of piecewise-linear data on nodes k (sorted, k[0] >= 0) at points x >= 0.
std::vector<double> laplace_halfline(const std::vector<double>& k, const std::vector<double>& phi,
                                     const std::vector<double>& x, double edge_floor = 1e-8);

// ||L phi||_2 / ||phi||_2 over the half-line for the piecewise-linear interpolant of phi.
double laplace_l2_ratio(const std::vector<double>& k, const std::vector<double>& phi, double edge_floor = 1e-8);

}  // namespace utm
