#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "murraynet/grid.hpp"

namespace murraynet {

// Porous medium on a rectangular grid: background permeability r (cells),
// net source S (cells), metabolic exponent gamma > 1 and coefficient nu > 0.
// The pressure minimizes a strictly convex energy whose stationarity
// condition is the nonlinear conservation law
//   -div((r + c(|grad p|)) grad p) = S,
//   c(u) = nu^{-1/(gamma-1)} |u|^{2/(gamma-1)},
// with zero normal flux through the domain boundary.
struct ContinuumProblem {
  RectGrid grid;
  double gamma = 2.0;
  double nu = 1.0;
  std::vector<double> r;       // cell-centered, must stay strictly positive
  std::vector<double> source;  // cell-centered
  double source_shift = 0.0;   // constant removed to make the source net-zero

  void validate() const;  // ConfigError on bad shapes or parameter ranges
};

// Subtracts the volume-weighted mean of S (a second pass mops up round-off)
// and records it in source_shift. Solvability needs a net-zero source.
ContinuumProblem project_source(ContinuumProblem problem);

// Quadrature of the pressure energy
//   int sum_k ( (r/2)|d_k p|^2
//               + nu^{-1/(gamma-1)} |d_k p|^{2 gamma/(gamma-1)} ) - int p S
// with two-point face differences, face-averaged r and dual-cell weights;
// boundary faces use a one-sided difference at half weight, so a linear p
// integrates exactly. Diagnostic form: the solver minimizes the companion
// objective whose nonlinear coefficient carries the extra factor
// (gamma-1)/(2 gamma), making its gradient the finite-volume residual of the
// conservation law above.
double functional_value(const GridField& p, const ContinuumProblem& problem);

// Zero-mean pressure solve: Barzilai-Borwein descent with a backtracking
// safeguard on the companion objective. Terminates when every cell's
// conservation defect is at most tol * max(1, max|S|) * cellvol. Throws
// NonConvergence carrying the achieved relative defect. The overload taking
// an initial field exists so independence from the starting point can be
// checked; the default start is p = 0.
GridField solve_pressure(const ContinuumProblem& problem, double tol = 1e-10,
                         int max_iter = 200000);
GridField solve_pressure(const ContinuumProblem& problem,
                         const std::vector<double>& initial, double tol = 1e-10,
                         int max_iter = 200000);

// c^k = nu^{-1/(gamma-1)} |d_k p|^{2/(gamma-1)} per face; boundary faces 0.
GridField reconstruct_conductivity(GridField p, const ContinuumProblem& problem);

// max over faces of |(d_k p)^2 - nu (c^k)^{gamma-1}| relative to the larger
// side; zero to round-off when c comes from reconstruct_conductivity.
double conductivity_identity_residual(const GridField& p,
                                      const ContinuumProblem& problem);

// Face labels from the sign of d_k p with dead band sign_eps; sign_eps < 0
// selects 1e-12 * max|d_k p|. Boundary faces are always null.
SignMasks sign_sets(const GridField& p, double sign_eps = -1.0);

// q^k = -(r_face + c^k) d_k p on interior faces, exactly 0 on boundary
// faces. Needs conductivity present (reconstruct_conductivity).
GridField face_fluxes(GridField p, const ContinuumProblem& problem);

// Flux balance over a union of cells (mask over cells, 1 = inside).
// Boundary faces of the union are classified by flow direction with the
// sign_sets dead band; influx/outflux accumulate the branching-law
// integrand sqrt(nu) (c^k)^{(gamma-1)/2} (r_face + c^k), the raw_* twins the
// plain face flux. The two agree identically when c comes from
// reconstruct_conductivity; faces inside the dead band contribute nothing
// and are tallied in null_faces.
BalanceRecord murray_balance(const GridField& p,
                             const ContinuumProblem& problem,
                             const std::vector<std::uint8_t>& subdomain,
                             double sign_eps = -1.0);

// Reference solution of the 1-D problem by direct flux integration: the face
// flux is the running integral of S (no flux at x = 0), the gradient u
// inverts the strictly monotone scalar law
//   r u + nu^{-1/(gamma-1)} |u|^{2/(gamma-1)} u = -q
// face by face (bisection to 1e-14 plus Newton polish), and p is the
// integral of u, re-gauged to zero mean.
//
// The sampled overload mirrors the solver's own discretization (midpoint
// source, face-averaged r): it is the direct, iteration-free solution of the
// same discrete system. The callable overload evaluates S and r exactly and
// integrates with 5-point Gauss quadrature: a high-order reference for the
// underlying differential problem.
GridField oracle_1d(const ContinuumProblem& problem);
GridField oracle_1d(const ContinuumProblem& problem,
                    const std::function<double(double)>& source,
                    const std::function<double(double)>& r_of_x);

}  // namespace murraynet
