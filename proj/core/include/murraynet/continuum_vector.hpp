#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "murraynet/grid.hpp"

namespace murraynet {

// Vector-valued medium on a 2-D grid. Conduction happens along a cell-wise
// direction field m with strength |m|^2 on top of the isotropic background
// r, giving the flux q = -(r + m (x) m) grad p. Under the stability
// assumption (the directed set covers the whole domain) the pressure solves
// the isotropic law
//   -div((r + nu^{1/(1-gamma)} |grad p|^{2/(gamma-1)}) grad p) = S
// with no flux through the boundary, and m follows from p pointwise.
//
// gamma in (1, 2] is the standard range; the magnitude/direction split used
// here stays well defined for every gamma > 1.
struct VectorProblem {
  RectGrid grid;  // dim == 2 required
  double gamma = 2.0;
  double nu = 1.0;
  std::vector<double> r;       // cell-centered, strictly positive
  std::vector<double> source;  // cell-centered
  double source_shift = 0.0;

  void validate() const;  // ConfigError on bad shapes or parameter ranges
};

// Mean removal, same contract as the scalar-model version.
VectorProblem project_source(VectorProblem problem);

struct VectorState {
  RectGrid grid;
  std::vector<double> p;  // cells, zero-mean
  // cell-centered gradient, central differences (one-sided at the boundary)
  std::array<std::vector<double>, 2> grad_p;
  std::array<std::vector<double>, 2> m;  // cells; empty until reconstruct_m
  std::vector<std::int8_t> orientation;  // +1 / -1 / 0 per cell
  double sign_eps = 0.0;                 // dead band used by reconstruct_m
};

// Damped fixed-point solve on the lagged face mobility
//   lambda_f = r_f + nu^{1/(1-gamma)} |g_f|^{2/(gamma-1)},
// where g_f pairs the two-point normal difference with the averaged
// transverse difference, so each face carries the full gradient. Every
// iterate solves a symmetric positive definite five-point system; the
// converged field makes each cell's conservation defect at most
// tol * max(1, max|S|) * cellvol with the true nonlinear flux. Throws
// NonConvergence with the achieved relative defect. p and grad_p are
// filled; m is left for reconstruct_m.
VectorState solve_pressure_vec(const VectorProblem& problem,
                               double tol = 1e-10, int max_iter = 1000);
VectorState solve_pressure_vec(const VectorProblem& problem,
                               const std::vector<double>& initial,
                               double tol = 1e-10, int max_iter = 1000);

// m = sign * nu^{1/(2(1-gamma))} |grad p|^{1/(gamma-1)} * grad p / |grad p|
// per cell; zero (orientation 0) where |grad p| <= sign_eps, which removes
// the formal singularity of the prefactor. sign_eps < 0 selects
// 1e-12 * max|grad p|. The direction sign is +1 everywhere by default; a
// per-cell mask of +-1 entries exercises the free choice, and every
// observable built from m (x) m is invariant under it.
VectorState reconstruct_m(VectorState state, const VectorProblem& problem,
                          double sign_eps = -1.0,
                          const std::vector<std::int8_t>& orientation_mask = {});

// Per-cell residual of the alignment law (grad p . m) grad p =
// nu |m|^{2(gamma-1)} m, normalized by nu |m|^{2(gamma-1)} |m|. Zero to
// round-off on reconstruct_m output; 1 for a perpendicular m.
std::vector<double> eigen_residual(const VectorState& state,
                                   const VectorProblem& problem);

// Flux balance over a union of cells, face-local: boundary faces of the
// union are classified by the sign of the outward normal flux
// q_f = -lambda_f u_f; influx/outflux accumulate the branching-law
// integrand sqrt(nu) (r + |m_f|^2) |m_f|^{gamma-1} |u_hat . n| with m_f
// built from the face gradient g_f (identical to |q_f| by algebra, so the
// raw_* cross-check agrees to round-off). Faces whose normal gradient sits
// inside the dead band contribute nothing and are tallied in null_faces.
BalanceRecord murray_balance_vec(const VectorState& state,
                                 const VectorProblem& problem,
                                 const std::vector<std::uint8_t>& subdomain,
                                 double sign_eps = -1.0);

}  // namespace murraynet
