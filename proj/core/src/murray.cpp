#include "murraynet/murray.hpp"

#include <cmath>
#include <numbers>

#include "murraynet/errors.hpp"

namespace murraynet {

namespace {

template <typename Weight>
MurrayReport balance_report(const Network& net, const FlowState& flow,
                            double flux_eps, double exponent, Weight weight) {
  MurrayReport rep;
  rep.exponent = exponent;
  rep.nodes.reserve(net.node_count());
  double sum_res = 0.0;
  for (int n = 0; n < net.node_count(); ++n) {
    MurrayNodeRecord rec;
    rec.node = n;
    rec.source = net.source(n);
    rec.inflow_power_sum = rec.outflow_power_sum = 0.0;
    for (auto [nbr, e] : net.neighbors(n)) {
      const double q = (n < nbr) ? flow.flux[e] : -flow.flux[e];
      const double w = weight(e);
      if (q >= -flux_eps) {  // zero flux counts as inflow
        rec.n_plus.push_back(nbr);
        rec.inflow_power_sum += w;
      } else {
        rec.n_minus.push_back(nbr);
        rec.outflow_power_sum += w;
      }
    }
    const double scale =
        rec.inflow_power_sum + rec.outflow_power_sum + std::abs(rec.source);
    const double defect =
        std::abs(rec.inflow_power_sum + rec.source - rec.outflow_power_sum);
    rec.residual = scale > 0.0 ? defect / scale : 0.0;
    rep.max_residual = std::max(rep.max_residual, rec.residual);
    sum_res += rec.residual;
    rep.nodes.push_back(std::move(rec));
  }
  rep.mean_residual = sum_res / double(net.node_count());
  return rep;
}

}  // namespace

double tube_energy(const TubeParams& t) {
  if (!(t.radius > 0.0) || !(t.tube_length > 0.0) || !(t.viscosity > 0.0) ||
      !(t.metabolic > 0.0))
    throw ConfigError("tube parameters must be positive");
  const double r2 = t.radius * t.radius;
  const double r4 = r2 * r2;
  return 8.0 * t.viscosity * t.tube_length * t.flow * t.flow /
             (std::numbers::pi * r4) +
         t.metabolic * std::numbers::pi * t.tube_length * r2;
}

double optimal_flow(double radius, double viscosity, double metabolic) {
  if (!(radius > 0.0) || !(viscosity > 0.0) || !(metabolic > 0.0))
    throw ConfigError("tube parameters must be positive");
  const double pi2 = std::numbers::pi * std::numbers::pi;
  return std::sqrt(pi2 * metabolic / (16.0 * viscosity)) * radius * radius *
         radius;
}

double radius_law_residual(double parent_radius,
                           const std::vector<double>& child_radii) {
  if (!(parent_radius > 0.0)) throw ConfigError("parent radius must be positive");
  double sum = 0.0;
  for (double r : child_radii) sum += r * r * r;
  const double p3 = parent_radius * parent_radius * parent_radius;
  return std::abs(p3 - sum) / p3;
}

double conductivity_34_residual(double parent_conductivity,
                                const std::vector<double>& child_conductivities) {
  if (!(parent_conductivity > 0.0))
    throw ConfigError("parent conductivity must be positive");
  double sum = 0.0;
  for (double c : child_conductivities) sum += std::pow(c, 0.75);
  const double p = std::pow(parent_conductivity, 0.75);
  return std::abs(p - sum) / p;
}

MurrayReport node_murray_report(const Network& net, const FlowState& flow,
                                const MetabolicParams& params, double flux_eps) {
  params.validate();
  const double expo = 0.5 * (params.gamma + 1.0);
  const double root_nu = std::sqrt(params.nu);
  return balance_report(net, flow, flux_eps, expo, [&](int e) {
    return root_nu * std::pow(net.conductivity(e), expo);
  });
}

MurrayReport node_flux_balance_report(const Network& net, const FlowState& flow,
                                      double flux_eps) {
  return balance_report(net, flow, flux_eps, 1.0,
                        [&](int e) { return std::abs(flow.flux[e]); });
}

}  // namespace murraynet
