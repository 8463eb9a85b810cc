#pragma once

#include <functional>
#include <string>
#include <vector>

#include "murraynet/discrete_optim.hpp"
#include "murraynet/network.hpp"

namespace testsupport {

// Central finite difference of the total energy in one conductivity,
// relative step 1e-6. Deliberately retraces nothing from energy_gradient.
double fd_energy_derivative(const murraynet::Network& net,
                            const murraynet::MetabolicParams& params, int edge,
                            double rel_step = 1e-6);

// Worst relative mismatch between energy_gradient and the FD derivative
// over all edges.
double fd_gradient_gap(const murraynet::Network& net,
                       const murraynet::MetabolicParams& params);

// Solves r*u + kappa*|u|^expo*u = target by bisection + Newton polish.
// Independent reimplementation of the scalar flux-law inversion used in
// the library; tests compare the two.
double invert_scalar_law(double r, double kappa, double expo, double target);

// Reference radial profile for a radially symmetric source S(rho) with
// constant r: flux q(rho) = (1/rho) * int_0^rho S(t) t dt, gradient from the
// scalar law r*u + kappa|u|^expo u = -q, pressure p(rho) = int_0^rho u.
// Tabulated on a fine mesh; value() interpolates linearly.
class RadialOracle {
 public:
  RadialOracle(std::function<double(double)> source, double r, double gamma,
               double nu, double rho_max, int samples = 4096);
  double pressure(double rho) const;  // not gauged; caller subtracts means
  double flux(double rho) const;

 private:
  double drho_;
  std::vector<double> p_, q_;
};

// Fresh unique directory under the system temp dir.
std::string make_temp_dir(const std::string& tag);

}  // namespace testsupport
