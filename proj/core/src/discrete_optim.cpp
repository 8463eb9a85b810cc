#include "murraynet/discrete_optim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "murraynet/errors.hpp"

namespace murraynet {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

double energy_of_flow(const Network& net, const FlowState& flow,
                      const MetabolicParams& mp) {
  double e = 0.0;
  for (int k = 0; k < net.edge_count(); ++k) {
    const auto [i, j] = net.edge(k);
    const double L = net.length(k);
    const double c = net.conductivity(k);
    const double dp = (flow.pressure[j] - flow.pressure[i]) / L;
    e += (c * dp * dp + (mp.nu / mp.gamma) * std::pow(c, mp.gamma)) * L;
  }
  return e;
}

// dE/dC with the metabolic term at an exact-zero conductivity treated as an
// infinite uphill slope for gamma < 1 (the edge is pinned at the floor).
std::vector<double> gradient_of_flow(const Network& net, const FlowState& flow,
                                     const MetabolicParams& mp, bool guarded) {
  std::vector<double> g(net.edge_count());
  for (int k = 0; k < net.edge_count(); ++k) {
    const auto [i, j] = net.edge(k);
    const double L = net.length(k);
    const double c = net.conductivity(k);
    const double dp = (flow.pressure[j] - flow.pressure[i]) / L;
    double metab;
    if (c == 0.0 && mp.gamma < 1.0) {
      if (!guarded)
        throw ZeroConductivity("edge " + std::to_string(k) +
                               " has zero conductivity and gamma < 1");
      metab = kInf;
    } else {
      metab = std::pow(c, mp.gamma - 1.0);
    }
    g[k] = -(dp * dp - mp.nu * metab) * L;
  }
  return g;
}
}  // namespace

void MetabolicParams::validate() const {
  if (!(gamma > 0.0) || !std::isfinite(gamma))
    throw ConfigError("gamma must be positive and finite");
  if (!(nu > 0.0) || !std::isfinite(nu))
    throw ConfigError("nu must be positive and finite");
}

std::string MetabolicParams::regime() const {
  if (std::abs(gamma - 0.5) <= 1e-12) return "blood-vessel";
  if (gamma >= 0.5 && gamma <= 1.0) return "leaf-venation";
  return "general";
}

double energy(const Network& net, const MetabolicParams& params, double lin_tol) {
  params.validate();
  return energy_of_flow(net, solve_pressures(net, lin_tol), params);
}

std::vector<double> energy_gradient(const Network& net,
                                    const MetabolicParams& params,
                                    double lin_tol) {
  params.validate();
  if (params.gamma < 1.0)
    for (int e = 0; e < net.edge_count(); ++e)
      if (net.conductivity(e) == 0.0)
        throw ZeroConductivity("edge " + std::to_string(e) +
                               " has zero conductivity and gamma < 1");
  return gradient_of_flow(net, solve_pressures(net, lin_tol), params, false);
}

std::pair<Network, OptimizerTrace> descend(const Network& net,
                                           const OptimizerConfig& cfg) {
  cfg.params.validate();
  if (cfg.c_min < 0.0) throw ConfigError("c_min must be nonnegative");

  const int ne = net.edge_count();
  double max_len = 0.0;
  for (int e = 0; e < ne; ++e) max_len = std::max(max_len, net.length(e));

  std::vector<double> c = net.conductivities();
  for (double& v : c) v = std::max(v, cfg.c_min);

  Network cur = net.with_conductivity(c);
  KirchhoffSolver solver(cur);

  auto eval = [&](const Network& n) {
    FlowState f = solver.solve(n, cfg.lin_tol, cfg.lin_max_iter);
    double e = energy_of_flow(n, f, cfg.params);
    return std::pair<double, FlowState>(e, std::move(f));
  };

  auto [E, flow] = eval(cur);

  // projected max-norm: edges at the floor only count their outward pull
  auto proj_norm = [&](const std::vector<double>& cv,
                       const std::vector<double>& gv, int* floored_out) {
    int floored = 0;
    double gn = 0.0;
    for (int e = 0; e < ne; ++e) {
      if (cv[e] <= cfg.c_min) {
        ++floored;
        gn = std::max(gn, std::max(0.0, -gv[e]));
      } else {
        gn = std::max(gn, std::abs(gv[e]));
      }
    }
    if (floored_out) *floored_out = floored;
    return gn;
  };

  OptimizerTrace trace;
  trace.status = TerminalStatus::MaxIter;
  double prev_step = cfg.armijo.initial_step;

  for (int it = 0; it < cfg.max_iter; ++it) {
    std::vector<double> g = gradient_of_flow(cur, flow, cfg.params, true);

    int floored = 0;
    const double gn = proj_norm(c, g, &floored);

    double max_c = 0.0;
    for (double v : c) max_c = std::max(max_c, v);
    const double eps_g =
        cfg.grad_tol * cfg.params.nu * std::pow(max_c, cfg.params.gamma) * max_len;

    if (gn <= eps_g) {
      trace.records.push_back({it, E, gn, 0.0, floored});
      trace.status = TerminalStatus::Converged;
      break;
    }

    double alpha = std::min(cfg.armijo.initial_step, prev_step * 2.0);
    const double alpha_floor = alpha * 1e-20;
    bool accepted = false;
    std::vector<double> ct(ne);
    double Et = 0.0;
    FlowState flowt;

    while (alpha > alpha_floor) {
      double pred = 0.0;
      for (int e = 0; e < ne; ++e) {
        ct[e] = std::max(c[e] - alpha * g[e], cfg.c_min);
        if (ct[e] != c[e]) pred += g[e] * (c[e] - ct[e]);
      }
      if (pred > 0.0) {
        Network trial = cur.with_conductivity(ct);
        bool solvable = true;
        try {
          std::tie(Et, flowt) = eval(trial);
        } catch (const DisconnectedGraph&) {
          solvable = false;  // step killed a load-bearing edge; shorten it
        } catch (const NonConvergence&) {
          solvable = false;  // trial too ill-conditioned to solve; shorten it
        }
        bool accept = false;
        if (solvable) {
          // Near a minimum the requested decrease falls below the energy's
          // own floating-point resolution and the Armijo comparison turns
          // into coin flips. Switch to steering by the projected gradient:
          // take the step only when it cannot have measurably raised the
          // energy and it strictly contracts the gradient norm.
          const double noise = 64.0 * std::numeric_limits<double>::epsilon() *
                               (std::fabs(E) + std::fabs(Et));
          if (cfg.armijo.sufficient_decrease * pred > noise) {
            accept = Et <= E - cfg.armijo.sufficient_decrease * pred;
          } else if (Et <= E + noise) {
            std::vector<double> gt =
                gradient_of_flow(trial, flowt, cfg.params, true);
            accept = proj_norm(ct, gt, nullptr) <= gn * (1.0 - 1e-4);
          }
        }
        if (accept) {
          for (int e = 0; e < ne; ++e)
            if (c[e] > cfg.c_min && ct[e] <= cfg.c_min)
              trace.deaths.push_back({it, e});
          cur = cur.with_conductivity(ct);
          c = ct;
          E = Et;
          flow = std::move(flowt);
          accepted = true;
          break;
        }
      }
      alpha *= cfg.armijo.shrink;
    }

    if (!accepted) {
      trace.records.push_back({it, E, gn, 0.0, floored});
      trace.status = TerminalStatus::LineSearchStall;
      break;
    }
    prev_step = alpha;
    trace.records.push_back({it, E, gn, alpha, floored});
  }

  trace.final_energy = E;
  trace.iterations = static_cast<int>(trace.records.size());
  return {std::move(cur), std::move(trace)};
}

std::vector<double> kkt_residual(const Network& net,
                                 const MetabolicParams& params, double c_min,
                                 double lin_tol) {
  params.validate();
  FlowState flow = solve_pressures(net, lin_tol);
  std::vector<double> g = gradient_of_flow(net, flow, params, true);
  std::vector<double> r(net.edge_count());
  for (int e = 0; e < net.edge_count(); ++e) {
    const double c = net.conductivity(e);
    if (c <= c_min) {
      r[e] = std::max(0.0, -g[e]);
    } else {
      const double q2 = flow.flux[e] * flow.flux[e];
      const double crit = params.nu * std::pow(c, params.gamma + 1.0);
      r[e] = std::abs(q2 - crit) / std::max({q2, crit, 1e-300});
    }
  }
  return r;
}

std::vector<double> tree_fluxes(const Network& net) {
  const int n = net.node_count();
  if (net.edge_count() != n - 1 || positive_components(net, -1.0).size() != 1)
    throw NotATree("flux determination needs a connected tree topology");

  double total = 0.0;
  for (int i = 0; i < n; ++i) total += net.source(i);

  // iterative post-order accumulation of subtree sources
  std::vector<double> sub(n);
  std::vector<int> parent(n, -1), parent_edge(n, -1), order;
  order.reserve(n);
  std::vector<int> stack{0};
  std::vector<char> seen(n, 0);
  seen[0] = 1;
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    order.push_back(v);
    for (auto [nbr, e] : net.neighbors(v)) {
      if (!seen[nbr]) {
        seen[nbr] = 1;
        parent[nbr] = v;
        parent_edge[nbr] = e;
        stack.push_back(nbr);
      }
    }
  }
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    int v = *it;
    sub[v] = net.source(v);
    for (auto [nbr, e] : net.neighbors(v))
      if (parent[nbr] == v) sub[v] += sub[nbr];
  }

  std::vector<double> q(net.edge_count());
  for (int v = 0; v < n; ++v) {
    if (parent_edge[v] < 0) continue;
    const int e = parent_edge[v];
    // flux from the edge's j-side into its i-side
    q[e] = (net.edge(e).j == v) ? sub[v] : total - sub[v];
  }
  return q;
}

std::vector<double> analytic_tree_solution(const Network& net,
                                           const MetabolicParams& params) {
  params.validate();
  std::vector<double> q = tree_fluxes(net);
  std::vector<double> c(q.size());
  for (size_t e = 0; e < q.size(); ++e)
    c[e] = std::pow(q[e] * q[e] / params.nu, 1.0 / (params.gamma + 1.0));
  return c;
}

}  // namespace murraynet
