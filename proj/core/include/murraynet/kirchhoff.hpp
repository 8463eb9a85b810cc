#pragma once

#include <memory>
#include <vector>

#include "murraynet/network.hpp"

namespace murraynet {

// Result of a conservation solve. flux[e] is the oriented flow rate from
// edge e's higher-index node into its lower-index node:
//   Q_ij = C_ij (P_j - P_i) / L_ij  with  i < j,
// so at every node the fluxes from all neighbors plus the node's source
// cancel. Pressures carry a zero-mean gauge per connected component of the
// positive-conductivity subgraph.
struct FlowState {
  std::vector<double> pressure;
  std::vector<double> flux;
  double residual_norm = 0.0;  // max-norm of the per-node defect
};

// Flow rate from node j into node i (any order); zero when no edge exists.
double flux_between(const Network& net, const FlowState& flow, int i, int j);

// Solves the nodal conservation system for pressures and fluxes.
//
// The positive-conductivity subgraph is usually required to be connected.
// Extension: if it splits into components but every component's sources
// balance on their own, each component is solved independently (zero-mean
// gauge per component); otherwise DisconnectedGraph is thrown.
//
// Direct sparse factorization up to 10^4 nodes, Jacobi-preconditioned CG
// above (max_iter applies to CG only). Throws NonConvergence if the final
// defect exceeds lin_tol * max(1, max|S_i|).
FlowState solve_pressures(const Network& net, double lin_tol = 1e-10,
                          int max_iter = 10000);

// Per-node defect sum_j Q_ij + S_i for an externally supplied flow.
std::vector<double> kirchhoff_defect(const Network& net, const FlowState& flow);

// Reusable solver for repeated solves on a fixed topology (conductivity may
// change between calls; the sparsity pattern is analyzed once).
class KirchhoffSolver {
 public:
  explicit KirchhoffSolver(const Network& net);
  ~KirchhoffSolver();
  KirchhoffSolver(KirchhoffSolver&&) noexcept;
  KirchhoffSolver& operator=(KirchhoffSolver&&) noexcept;

  FlowState solve(const Network& net, double lin_tol = 1e-10,
                  int max_iter = 10000);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace murraynet
