#pragma once

#include <vector>

#include "murraynet/discrete_optim.hpp"
#include "murraynet/kirchhoff.hpp"
#include "murraynet/network.hpp"

namespace murraynet {

struct TubeParams {
  double radius;
  double tube_length;
  double viscosity;  // mu
  double metabolic;  // nu
  double flow;       // Q
};

// Poiseuille pumping power plus volumetric maintenance cost:
//   E = 8 mu L Q^2 / (pi R^4) + nu pi L R^2.
double tube_energy(const TubeParams& t);

// Flow that makes a tube of radius R energy-stationary:
//   Q = sqrt(pi^2 nu / (16 mu)) R^3  (the cube law).
double optimal_flow(double radius, double viscosity, double metabolic);

// |R0^3 - sum R_i^3| / R0^3
double radius_law_residual(double parent_radius,
                           const std::vector<double>& child_radii);

// |C0^(3/4) - sum C_i^(3/4)| / C0^(3/4)
double conductivity_34_residual(double parent_conductivity,
                                const std::vector<double>& child_conductivities);

struct MurrayNodeRecord {
  int node;
  double inflow_power_sum;   // sqrt(nu) * sum over inflow neighbors of C^((gamma+1)/2)
  double outflow_power_sum;  // same over outflow neighbors
  double source;
  double residual;  // |inflow_power_sum + source - outflow_power_sum| / scale
  std::vector<int> n_plus;   // neighbors with flux into the node (Q_ij >= -flux_eps)
  std::vector<int> n_minus;  // neighbors with flux out of the node
};

struct MurrayReport {
  std::vector<MurrayNodeRecord> nodes;
  double max_residual = 0.0;
  double mean_residual = 0.0;
  double exponent = 0.0;  // (gamma+1)/2; 3/4 in the gamma = 1/2 regime
};

// Checks the node balance sqrt(nu) sum_{N+} C^((gamma+1)/2) + S_i =
// sqrt(nu) sum_{N-} C^((gamma+1)/2) that critical conductivities satisfy.
// Residuals are normalized by sqrt(nu) sum_{N(i)} C^((gamma+1)/2) + |S_i|.
MurrayReport node_murray_report(const Network& net, const FlowState& flow,
                                const MetabolicParams& params,
                                double flux_eps = 0.0);

// Same split and normalization with |Q_ij| in place of the conductivity
// power. Exact for any conserved flow; a self-test of the report plumbing.
MurrayReport node_flux_balance_report(const Network& net, const FlowState& flow,
                                      double flux_eps = 0.0);

}  // namespace murraynet
