// Acceptance gate for the murraynet library. Each check prints one line:
//   [PASS|FAIL] <n>. <what was measured> (<elapsed>, cap <seconds>)
// and the process exit code is the number of failures. Tolerances are pinned
// here on purpose; loosening them is a library regression, not a test tweak.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "murraynet/continuum_grid.hpp"
#include "murraynet/continuum_vector.hpp"
#include "murraynet/discrete_optim.hpp"
#include "murraynet/errors.hpp"
#include "murraynet/grid.hpp"
#include "murraynet/kirchhoff.hpp"
#include "murraynet/murray.hpp"
#include "murraynet/network.hpp"
#include "murraynet/presets.hpp"
#include "murraynet/runner.hpp"
#include "support.hpp"

namespace {

using namespace murraynet;

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

const double kGammas[] = {0.5, 1.0, 1.5, 2.0};
const double kNus[] = {0.5, 1.0, 4.0};

// 1. Exact energy gradient against central finite differences on 50 random
// connected networks, every edge within 1e-5 relative.
bool check_gradient(std::string& detail) {
  double worst = 0.0;
  for (int k = 0; k < 50; ++k) {
    Network net = random_connected_network(1000 + k);
    MetabolicParams mp;
    mp.gamma = kGammas[k % 4];
    mp.nu = kNus[k % 3];
    worst = std::max(worst, testsupport::fd_gradient_gap(net, mp));
  }
  detail = fmt("worst per-edge relative gap %.3e over 50 nets (tol 1e-5)", worst);
  return worst <= 1e-5;
}

Network tree_preset(int which) {
  return which == 0 ? y_junction() : binary_tree_depth3();
}

// parent edge -> its two child edges, for the branching-law checks
std::vector<std::array<int, 3>> parent_child_edges(int which) {
  if (which == 0) return {{0, 1, 2}};
  return {{0, 1, 2}, {1, 3, 4}, {2, 5, 6}};
}

// 2. Gradient descent on the Y junction and the depth-3 binary tree across a
// gamma/nu sweep: convergence, node branching-law residual <= 1e-6 at every
// node, and in the rigid-tube regime gamma = 1/2 the exponent is exactly 3/4
// with the conductivity three-quarter law holding at each junction.
bool check_murray_after_descent(std::string& detail) {
  double worst_node = 0.0, worst_law = 0.0;
  for (int which = 0; which < 2; ++which) {
    Network base = tree_preset(which);
    for (double g : kGammas) {
      for (double v : kNus) {
        OptimizerConfig cfg;
        cfg.params.gamma = g;
        cfg.params.nu = v;
        cfg.grad_tol = 1e-8;
        cfg.max_iter = 200000;
        auto [opt, trace] = descend(base, cfg);
        if (trace.status != TerminalStatus::Converged) {
          detail = fmt("no convergence at gamma=%g nu=%g (net %d)", g, v, which);
          return false;
        }
        FlowState flow = solve_pressures(opt);
        MurrayReport rep = node_murray_report(opt, flow, cfg.params);
        worst_node = std::max(worst_node, rep.max_residual);
        if (g == 0.5) {
          if (rep.exponent != 0.75) {
            detail = fmt("exponent %.17g != 0.75 at gamma=1/2", rep.exponent);
            return false;
          }
          for (const auto& pc : parent_child_edges(which)) {
            double r = conductivity_34_residual(
                opt.conductivity(pc[0]),
                {opt.conductivity(pc[1]), opt.conductivity(pc[2])});
            worst_law = std::max(worst_law, r);
          }
        }
      }
    }
  }
  detail = fmt("worst node residual %.3e, worst 3/4-law residual %.3e (tol 1e-6)",
               worst_node, worst_law);
  return worst_node <= 1e-6 && worst_law <= 1e-6;
}

// 3. Descent lands on the closed-form critical conductivities of the binary
// tree, per edge, across the same sweep.
bool check_analytic_tree(std::string& detail) {
  double worst = 0.0;
  Network base = binary_tree_depth3();
  for (double g : kGammas) {
    for (double v : kNus) {
      OptimizerConfig cfg;
      cfg.params.gamma = g;
      cfg.params.nu = v;
      cfg.grad_tol = 1e-8;
      cfg.max_iter = 200000;
      auto [opt, trace] = descend(base, cfg);
      if (trace.status != TerminalStatus::Converged) {
        detail = fmt("no convergence at gamma=%g nu=%g", g, v);
        return false;
      }
      std::vector<double> exact = analytic_tree_solution(base, cfg.params);
      for (int e = 0; e < base.edge_count(); ++e) {
        double rel = std::fabs(opt.conductivity(e) - exact[e]) / exact[e];
        worst = std::max(worst, rel);
      }
    }
  }
  detail = fmt("worst per-edge relative error %.3e over 12 sweeps (tol 1e-6)", worst);
  return worst <= 1e-6;
}

// 4. Minimizing the single-tube energy over the radius at fixed flow inverts
// the cube law: optimal_flow at the minimizer returns the imposed flow.
// Bracket by geometric scan, golden-section, then three-point parabola
// refinements; only tube_energy is evaluated.
bool check_tube_law(std::string& detail) {
  std::mt19937_64 rng(77);
  auto draw = [&](double lo, double hi) {
    std::uniform_real_distribution<double> d(std::log(lo), std::log(hi));
    return std::exp(d(rng));
  };
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    const double q = draw(0.1, 10.0), mu = draw(0.05, 5.0);
    const double nu = draw(0.05, 5.0), len = draw(0.1, 10.0);
    auto energy_at = [&](double radius) {
      TubeParams t;
      t.radius = radius;
      t.tube_length = len;
      t.viscosity = mu;
      t.metabolic = nu;
      t.flow = q;
      return tube_energy(t);
    };
    // geometric scan for a bracket
    int best = 0;
    double best_e = 0.0;
    for (int i = -30; i <= 30; ++i) {
      double e = energy_at(std::ldexp(1.0, i));
      if (i == -30 || e < best_e) {
        best_e = e;
        best = i;
      }
    }
    double a = std::ldexp(1.0, best - 1), b = std::ldexp(1.0, best + 1);
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    double f1 = energy_at(x1), f2 = energy_at(x2);
    while (b - a > 1e-7 * (a + b)) {
      if (f1 < f2) {
        b = x2;
        x2 = x1;
        f2 = f1;
        x1 = b - gr * (b - a);
        f1 = energy_at(x1);
      } else {
        a = x1;
        x1 = x2;
        f1 = f2;
        x2 = a + gr * (b - a);
        f2 = energy_at(x2);
      }
    }
    double r = 0.5 * (a + b);
    for (double scale : {1e-4, 1e-5, 1e-6}) {
      const double d = scale * r;
      const double fm = energy_at(r - d), f0 = energy_at(r), fp = energy_at(r + d);
      const double denom = fp - 2.0 * f0 + fm;
      if (denom > 0.0) r -= 0.5 * d * (fp - fm) / denom;
    }
    worst = std::max(worst, std::fabs(optimal_flow(r, mu, nu) - q) / q);
  }
  detail = fmt("worst |Q(R*) - Q|/Q = %.3e over 20 draws (tol 1e-8)", worst);
  return worst <= 1e-8;
}

// 5. Scalar continuum solver against the high-order 1-D reference on the
// cosine source: observed L-inf order >= 1.8 and absolute accuracy at the
// finest grid.
bool check_scalar_convergence(std::string& detail) {
  const int ns[] = {32, 64, 128, 256};
  double worst_order = 1e30, worst_fine = 0.0;
  for (double g : {1.5, 2.0, 3.0}) {
    std::vector<double> lg_n, lg_err;
    double fine_err = 0.0;
    for (int n : ns) {
      ContinuumProblem prob;
      prob.grid = RectGrid::make(1, {1.0, 1.0}, {n, 1});
      prob.gamma = g;
      prob.nu = 1.0;
      prob.r.assign(static_cast<size_t>(n), 1.0);
      prob.source = sample_cos1d(prob.grid);
      prob = project_source(prob);
      GridField sol = solve_pressure(prob, 1e-11);
      GridField ref = oracle_1d(prob, cos1d_value, [](double) { return 1.0; });
      double err = 0.0;
      for (int c = 0; c < n; ++c)
        err = std::max(err, std::fabs(sol.pressure[c] - ref.pressure[c]));
      lg_n.push_back(std::log2(static_cast<double>(n)));
      lg_err.push_back(std::log2(err));
      fine_err = err;
    }
    // least-squares slope of log2(err) against log2(n)
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const int m = static_cast<int>(lg_n.size());
    for (int i = 0; i < m; ++i) {
      sx += lg_n[i];
      sy += lg_err[i];
      sxx += lg_n[i] * lg_n[i];
      sxy += lg_n[i] * lg_err[i];
    }
    double order = -(m * sxy - sx * sy) / (m * sxx - sx * sx);
    worst_order = std::min(worst_order, order);
    worst_fine = std::max(worst_fine, fine_err);
  }
  detail = fmt("observed order >= %.3f (need 1.8), n=256 error <= %.3e (need 5e-4)",
               worst_order, worst_fine);
  return worst_order >= 1.8 && worst_fine <= 5e-4;
}

struct BalancePair {
  BalanceRecord coarse, fine;
  std::string tag;
};

// 6. Subdomain flux balances for the scalar model on the 1-D cosine and 2-D
// dipole presets: residual small on the fine grid for every subdomain, and
// the branching-law boundary sums agree with the raw fluxes to round-off.
// The scheme conserves mass exactly, so residuals sit at solver noise; the
// refinement comparison only binds when they rise above that floor.
bool check_scalar_balance(std::string& detail) {
  std::vector<BalancePair> pairs;
  auto run_case = [&](int dim, int n_coarse, int n_fine,
                      const std::vector<std::array<double, 4>>& rects,
                      const char* name) {
    for (int pass = 0; pass < 2; ++pass) {
      const int n = pass == 0 ? n_coarse : n_fine;
      ContinuumProblem prob;
      prob.grid = dim == 1 ? RectGrid::make(1, {1.0, 1.0}, {n, 1})
                           : RectGrid::make(2, {1.0, 1.0}, {n, n});
      prob.gamma = 2.0;
      prob.nu = 1.0;
      prob.r.assign(static_cast<size_t>(prob.grid.cell_count()), 1.0);
      prob.source = dim == 1 ? sample_cos1d(prob.grid) : sample_dipole2d(prob.grid);
      prob = project_source(prob);
      GridField sol = reconstruct_conductivity(solve_pressure(prob, 1e-10), prob);
      for (size_t ri = 0; ri < rects.size(); ++ri) {
        auto mask = snap_rectangle(prob.grid, rects[ri]);
        BalanceRecord rec = murray_balance(sol, prob, mask);
        if (pass == 0) {
          BalancePair bp;
          bp.coarse = rec;
          bp.tag = fmt("%s rect%zu", name, ri);
          pairs.push_back(bp);
        } else {
          pairs[pairs.size() - rects.size() + ri].fine = rec;
        }
      }
    }
  };
  run_case(1, 64, 128,
           {{{0.0, 0.5, 0.0, 1.0}},
            {{0.25, 0.75, 0.0, 1.0}},
            {{0.125, 0.875, 0.0, 1.0}}},
           "cos1d");
  // the later pairs belong to the dipole case
  run_case(2, 32, 64,
           {{{0.25, 0.75, 0.25, 0.75}},
            {{0.0, 0.5, 0.0, 1.0}},
            {{0.25, 0.5, 0.25, 0.5}}},
           "dipole2d");
  double worst_fine = 0.0, worst_form = 0.0;
  bool refine_ok = true;
  std::string refine_note;
  for (const auto& bp : pairs) {
    worst_fine = std::max(worst_fine, bp.fine.residual);
    worst_form = std::max(worst_form,
                          std::max(bp.coarse.form_agreement, bp.fine.form_agreement));
    const bool at_floor = bp.coarse.residual <= 1e-8 && bp.fine.residual <= 1e-8;
    const bool halved = bp.fine.residual >= 0.35 * bp.coarse.residual &&
                        bp.fine.residual <= 0.65 * bp.coarse.residual;
    if (!(at_floor || halved)) {
      refine_ok = false;
      refine_note = fmt("; refinement broke at %s (%.3e -> %.3e)", bp.tag.c_str(),
                        bp.coarse.residual, bp.fine.residual);
    }
  }
  detail = fmt("worst fine residual %.3e (tol 0.02), worst form gap %.3e (tol 1e-12)%s",
               worst_fine, worst_form, refine_note.c_str());
  return worst_fine <= 0.02 && worst_form <= 1e-12 && refine_ok;
}

// 7. Vector model on the radial preset: the reconstructed direction field
// satisfies the alignment law to round-off, its magnitude matches the
// gradient law, the centered-square balance closes, and flipping every
// orientation leaves the flux bit-for-bit unchanged.
bool check_vector_model(std::string& detail) {
  double worst_eigen = 0.0, worst_mag = 0.0, worst_bal = 0.0;
  for (double g : {1.5, 2.0}) {
    VectorProblem prob;
    prob.grid = RectGrid::make(2, {1.0, 1.0}, {64, 64});
    prob.gamma = g;
    prob.nu = 1.0;
    const int nc = prob.grid.cell_count();
    prob.r.assign(static_cast<size_t>(nc), 1.0);
    prob.source = sample_radial2d(prob.grid);
    prob = project_source(prob);
    VectorState st = reconstruct_m(solve_pressure_vec(prob, 1e-10), prob);
    for (double r : eigen_residual(st, prob)) worst_eigen = std::max(worst_eigen, r);
    for (int c = 0; c < nc; ++c) {
      if (st.orientation[c] == 0) continue;
      const double gn = std::hypot(st.grad_p[0][c], st.grad_p[1][c]);
      const double mn = std::hypot(st.m[0][c], st.m[1][c]);
      const double lhs = prob.nu * std::pow(mn, 2.0 * (g - 1.0));
      const double rhs = gn * gn;
      worst_mag = std::max(worst_mag, std::fabs(lhs - rhs) / rhs);
    }
    auto mask = snap_rectangle(prob.grid, {0.25, 0.75, 0.25, 0.75});
    BalanceRecord bal = murray_balance_vec(st, prob, mask);
    worst_bal = std::max(worst_bal, bal.residual);
    // tensor flux q = -(r I + m (x) m) grad p, cell by cell, both orientations
    VectorState flipped = reconstruct_m(
        st, prob, -1.0, std::vector<std::int8_t>(static_cast<size_t>(nc), -1));
    std::vector<double> qa(static_cast<size_t>(2 * nc)), qb(qa.size());
    auto tensor_flux = [&](const VectorState& s, std::vector<double>& out) {
      for (int c = 0; c < nc; ++c) {
        const double g0 = s.grad_p[0][c], g1 = s.grad_p[1][c];
        const double mg = s.m[0][c] * g0 + s.m[1][c] * g1;
        out[static_cast<size_t>(2 * c)] = -(prob.r[static_cast<size_t>(c)] * g0 + mg * s.m[0][c]);
        out[static_cast<size_t>(2 * c) + 1] = -(prob.r[static_cast<size_t>(c)] * g1 + mg * s.m[1][c]);
      }
    };
    tensor_flux(st, qa);
    tensor_flux(flipped, qb);
    if (std::memcmp(qa.data(), qb.data(), qa.size() * sizeof(double)) != 0) {
      detail = fmt("orientation flip changed the flux at gamma=%g", g);
      return false;
    }
  }
  detail = fmt("worst alignment %.3e, magnitude law %.3e (tol 1e-12); "
               "square balance %.3e (tol 0.02); flip bit-exact",
               worst_eigen, worst_mag, worst_bal);
  return worst_eigen <= 1e-12 && worst_mag <= 1e-12 && worst_bal <= 0.02;
}

// 8. Conservation bookkeeping: nodal defects after every discrete solve stay
// below the linear tolerance, dissipation equals source power, and the
// whole-domain continuum balances close at solver tolerance.
bool check_conservation(std::string& detail) {
  double worst_defect = 0.0, worst_energy = 0.0;
  std::vector<Network> nets = {y_junction(), binary_tree_depth3(), grid_graph_4x4()};
  for (int k = 0; k < 20; ++k) nets.push_back(random_connected_network(2000 + k));
  for (const Network& net : nets) {
    FlowState flow = solve_pressures(net, 1e-12);
    for (double d : kirchhoff_defect(net, flow))
      worst_defect = std::max(worst_defect, std::fabs(d));
    double dissipation = 0.0, source_power = 0.0;
    for (int e = 0; e < net.edge_count(); ++e) {
      const Edge ed = net.edge(e);
      const double du = (flow.pressure[static_cast<size_t>(ed.j)] -
                         flow.pressure[static_cast<size_t>(ed.i)]) / net.length(e);
      dissipation += net.conductivity(e) * du * du * net.length(e);
    }
    for (int i = 0; i < net.node_count(); ++i)
      source_power += net.source(i) * flow.pressure[static_cast<size_t>(i)];
    const double scale = std::max(std::fabs(dissipation), std::fabs(source_power));
    worst_energy = std::max(worst_energy, std::fabs(dissipation - source_power) /
                                              std::max(scale, 1e-300));
  }

  ContinuumProblem sp;
  sp.grid = RectGrid::make(1, {1.0, 1.0}, {64, 1});
  sp.r.assign(64, 1.0);
  sp.source = sample_cos1d(sp.grid);
  sp = project_source(sp);
  GridField sol = reconstruct_conductivity(solve_pressure(sp, 1e-10), sp);
  BalanceRecord whole_s = murray_balance(
      sol, sp, std::vector<std::uint8_t>(static_cast<size_t>(sp.grid.cell_count()), 1));

  VectorProblem vp;
  vp.grid = RectGrid::make(2, {1.0, 1.0}, {32, 32});
  vp.r.assign(static_cast<size_t>(vp.grid.cell_count()), 1.0);
  vp.source = sample_radial2d(vp.grid);
  vp = project_source(vp);
  VectorState vst = reconstruct_m(solve_pressure_vec(vp, 1e-10), vp);
  BalanceRecord whole_v = murray_balance_vec(
      vst, vp, std::vector<std::uint8_t>(static_cast<size_t>(vp.grid.cell_count()), 1));

  detail = fmt("worst nodal defect %.3e (tol 1e-12), energy identity %.3e (tol 1e-10), "
               "global balances %.3e / %.3e (tol 1e-10)",
               worst_defect, worst_energy, whole_s.residual, whole_v.residual);
  return worst_defect <= 1e-12 && worst_energy <= 1e-10 &&
         whole_s.residual <= 1e-10 && whole_v.residual <= 1e-10;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// 9. Randomized self-test reruns with a fixed seed produce byte-identical
// reports.
bool check_selftest_determinism(std::string& detail) {
  const std::string d1 = testsupport::make_temp_dir("accept9a");
  const std::string d2 = testsupport::make_temp_dir("accept9b");
  RunConfig rc;
  rc.command = "selftest";
  rc.seed = 42;
  rc.quiet = true;
  rc.out_dir = d1;
  const int r1 = run(rc);
  rc.out_dir = d2;
  const int r2 = run(rc);
  if (r1 != 0 || r2 != 0) {
    detail = fmt("selftest exit codes %d / %d", r1, r2);
    return false;
  }
  const std::string a = slurp(d1 + "/report.json"), b = slurp(d2 + "/report.json");
  detail = fmt("two seed-42 reports, %zu bytes, %s", a.size(),
               a == b ? "byte-identical" : "DIFFER");
  return !a.empty() && a == b;
}

struct Check {
  const char* name;
  bool (*fn)(std::string&);
  double cap_seconds;
};

}  // namespace

int main() {
  const Check checks[] = {
      {"discrete gradient vs finite differences", check_gradient, 10.0},
      {"branching law after descent", check_murray_after_descent, 30.0},
      {"descent matches closed-form tree", check_analytic_tree, 30.0},
      {"tube energy minimum inverts the cube law", check_tube_law, 1.0},
      {"scalar continuum convergence order", check_scalar_convergence, 60.0},
      {"scalar subdomain flux balance", check_scalar_balance, 60.0},
      {"vector model alignment and balance", check_vector_model, 60.0},
      {"conservation and energy identities", check_conservation, 5.0},
      {"self-test determinism", check_selftest_determinism, 0.0},
  };
  int failures = 0;
  int idx = 0;
  for (const Check& c : checks) {
    ++idx;
    const auto t0 = std::chrono::steady_clock::now();
    std::string detail;
    bool ok = false;
    try {
      ok = c.fn(detail);
    } catch (const std::exception& e) {
      detail = fmt("threw: %s", e.what());
    }
    const double dt =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = c.cap_seconds <= 0.0 || dt < c.cap_seconds;
    if (!in_time) detail += fmt("; exceeded the %.0fs budget", c.cap_seconds);
    const bool pass = ok && in_time;
    if (!pass) ++failures;
    if (c.cap_seconds > 0.0)
      std::printf("[%s] %d. %s: %s (%.2fs, cap %.0fs)\n", pass ? "PASS" : "FAIL",
                  idx, c.name, detail.c_str(), dt, c.cap_seconds);
    else
      std::printf("[%s] %d. %s: %s (%.2fs)\n", pass ? "PASS" : "FAIL", idx, c.name,
                  detail.c_str(), dt);
  }
  if (failures == 0)
    std::printf("all %d checks passed\n", idx);
  else
    std::printf("%d of %d checks failed\n", failures, idx);
  return failures;
}
