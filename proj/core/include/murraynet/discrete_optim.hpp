#pragma once

#include <string>
#include <utility>
#include <vector>

#include "murraynet/kirchhoff.hpp"
#include "murraynet/network.hpp"

namespace murraynet {

// Metabolic exponent gamma > 0 and cost coefficient nu > 0. Energy per edge:
//   (Q^2 / C + (nu/gamma) C^gamma) L.
struct MetabolicParams {
  double gamma = 1.0;
  double nu = 1.0;
  void validate() const;
  // gamma = 1/2 models rigid tubes (vessel-like); gamma in [1/2, 1] shows up
  // in venation studies; gamma > 1 makes the energy convex in C.
  std::string regime() const;
};

struct ArmijoParams {
  double initial_step = 1.0;
  double shrink = 0.5;
  double sufficient_decrease = 1e-4;
};

struct OptimizerConfig {
  MetabolicParams params;
  double c_min = 1e-10;
  double grad_tol = 1e-8;  // relative to nu * max(C)^gamma * max(L)
  int max_iter = 20000;
  ArmijoParams armijo;
  double lin_tol = 1e-10;
  int lin_max_iter = 10000;
};

enum class TerminalStatus { Converged, MaxIter, LineSearchStall };

struct IterationRecord {
  int iter;
  double energy;
  double grad_norm;  // projected-gradient max-norm
  double step;
  int floored_edges;
};

struct EdgeDeathEvent {
  int iter;
  int edge;
};

struct OptimizerTrace {
  std::vector<IterationRecord> records;
  std::vector<EdgeDeathEvent> deaths;  // first time an edge hits the floor
  TerminalStatus status = TerminalStatus::MaxIter;
  double final_energy = 0.0;
  int iterations = 0;
};

// Total dissipation + metabolic cost at the conservation solution for net's
// current conductivities. Solves pressures internally.
double energy(const Network& net, const MetabolicParams& params,
              double lin_tol = 1e-10);

// Exact energy derivative per edge at the conservation solution:
//   dE/dC_ij = -(Q_ij^2 / C_ij^2 - nu C_ij^(gamma-1)) L_ij,
// computed from one pressure solve (Q/C = dP/L needs no division by C).
// Throws ZeroConductivity when some C = 0 and gamma < 1.
std::vector<double> energy_gradient(const Network& net,
                                    const MetabolicParams& params,
                                    double lin_tol = 1e-10);

// Projected gradient descent with Armijo backtracking on C >= c_min.
// Energy decreases monotonically to round-off (once the predicted decrease
// drops below the energy's floating-point resolution, steps are accepted on
// gradient-norm contraction instead); terminates when the projected gradient
// max-norm drops below grad_tol * nu * max(C)^gamma * max(L) (edges at the
// floor only need gradient >= -tolerance).
std::pair<Network, OptimizerTrace> descend(const Network& net,
                                           const OptimizerConfig& cfg);

// Relative criticality defect per edge:
//   interior:  |Q^2 - nu C^(gamma+1)| / max(Q^2, nu C^(gamma+1))
//   at floor:  max(0, -dE/dC)  (one-sided condition)
std::vector<double> kkt_residual(const Network& net,
                                 const MetabolicParams& params,
                                 double c_min = 1e-10,
                                 double lin_tol = 1e-10);

// Oriented edge fluxes determined by topology alone (independent of C):
// flux on e=(i,j) equals the net source of the subtree hanging off j.
// Throws NotATree unless the network is a connected tree.
std::vector<double> tree_fluxes(const Network& net);

// Closed-form critical conductivities on a tree: C = (Q^2/nu)^(1/(gamma+1)).
std::vector<double> analytic_tree_solution(const Network& net,
                                           const MetabolicParams& params);

}  // namespace murraynet
