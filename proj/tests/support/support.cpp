#include "support.hpp"

#include <atomic>
#include <cmath>
#include <filesystem>
#include <stdexcept>

namespace testsupport {

using murraynet::MetabolicParams;
using murraynet::Network;

double fd_energy_derivative(const Network& net, const MetabolicParams& params,
                            int edge, double rel_step) {
  std::vector<double> c = net.conductivities();
  const double step = rel_step * c[edge];
  c[edge] += step;
  const double ep = murraynet::energy(net.with_conductivity(c), params, 1e-12);
  c[edge] -= 2.0 * step;
  const double em = murraynet::energy(net.with_conductivity(c), params, 1e-12);
  return (ep - em) / (2.0 * step);
}

double fd_gradient_gap(const Network& net, const MetabolicParams& params) {
  const std::vector<double> g = murraynet::energy_gradient(net, params, 1e-12);
  double worst = 0.0;
  for (int e = 0; e < net.edge_count(); ++e) {
    const double fd = fd_energy_derivative(net, params, e);
    const double rel =
        std::abs(fd - g[e]) / std::max({std::abs(fd), std::abs(g[e]), 1e-12});
    worst = std::max(worst, rel);
  }
  return worst;
}

double invert_scalar_law(double r, double kappa, double expo, double target) {
  auto law = [&](double u) {
    return r * u + kappa * std::pow(std::abs(u), expo) * u;
  };
  double lo = std::min(0.0, target / r), hi = std::max(0.0, target / r);
  for (int k = 0; k < 200 && law(lo) > target; ++k) lo = 2.0 * lo - 1.0;
  for (int k = 0; k < 200 && law(hi) < target; ++k) hi = 2.0 * hi + 1.0;
  for (int k = 0; k < 200; ++k) {
    const double mid = 0.5 * (lo + hi);
    (law(mid) < target ? lo : hi) = mid;
  }
  double u = 0.5 * (lo + hi);
  for (int k = 0; k < 4; ++k) {
    const double d = r + kappa * (expo + 1.0) * std::pow(std::abs(u), expo);
    u -= (law(u) - target) / d;
  }
  return u;
}

RadialOracle::RadialOracle(std::function<double(double)> source, double r,
                           double gamma, double nu, double rho_max,
                           int samples) {
  const double kappa = std::pow(nu, -1.0 / (gamma - 1.0));
  const double expo = 2.0 / (gamma - 1.0);
  drho_ = rho_max / samples;
  q_.assign(samples + 1, 0.0);
  p_.assign(samples + 1, 0.0);
  double moment = 0.0;  // int_0^rho S(t) t dt, midpoint rule per slice
  double uprev = 0.0;
  for (int k = 1; k <= samples; ++k) {
    const double tm = (k - 0.5) * drho_;
    moment += source(tm) * tm * drho_;
    const double rho = k * drho_;
    q_[k] = moment / rho;
    const double u = invert_scalar_law(r, kappa, expo, -q_[k]);
    p_[k] = p_[k - 1] + 0.5 * (uprev + u) * drho_;
    uprev = u;
  }
}

double RadialOracle::pressure(double rho) const {
  const double t = rho / drho_;
  const int k = std::min(static_cast<int>(t), static_cast<int>(p_.size()) - 2);
  const double w = t - k;
  return p_[k] * (1.0 - w) + p_[k + 1] * w;
}

double RadialOracle::flux(double rho) const {
  const double t = rho / drho_;
  const int k = std::min(static_cast<int>(t), static_cast<int>(q_.size()) - 2);
  const double w = t - k;
  return q_[k] * (1.0 - w) + q_[k + 1] * w;
}

std::string make_temp_dir(const std::string& tag) {
  static std::atomic<int> counter{0};
  const auto base = std::filesystem::temp_directory_path() /
                    ("murraynet_test_" + tag + "_" +
                     std::to_string(counter.fetch_add(1)));
  std::filesystem::remove_all(base);
  std::filesystem::create_directories(base);
  return base.string();
}

}  // namespace testsupport
