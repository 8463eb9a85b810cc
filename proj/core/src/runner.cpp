#include "murraynet/runner.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <iostream>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "json.hpp"
#include "murraynet/continuum_grid.hpp"
#include "murraynet/continuum_vector.hpp"
#include "murraynet/discrete_optim.hpp"
#include "murraynet/errors.hpp"
#include "murraynet/io.hpp"
#include "murraynet/murray.hpp"
#include "murraynet/presets.hpp"
#include "murraynet/toml.hpp"

namespace murraynet {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int parse_threads_env() {
  const char* raw = std::getenv("MURRAYNET_THREADS");
  if (!raw || !*raw) return 0;
  char* end = nullptr;
  const long v = std::strtol(raw, &end, 10);
  if (end == raw || *end != '\0' || v < 0 || v > 4096)
    throw ConfigError("MURRAYNET_THREADS must be a small nonnegative integer");
  return static_cast<int>(v);
}

// Accumulates everything run_manifest.json needs while a command executes.
struct Ctx {
  const RunConfig* cfg = nullptr;
  int threads = 0;
  json parameters = json::object();
  json inputs = json::object();
  std::vector<std::string> outputs;

  void emit(const std::string& name, const std::string& content) {
    write_text_file((fs::path(cfg->out_dir) / name).string(), content);
    outputs.push_back(name);
  }
  std::string note_input(const std::string& path) {
    std::string text = read_text_file(path);
    inputs[path] = content_hash(text);
    return text;
  }
  void manifest() {
    outputs.push_back("run_manifest.json");
    json doc{{"command", cfg->command}, {"parameters", parameters},
             {"inputs", inputs},        {"outputs", outputs},
             {"seed", cfg->seed},       {"threads", threads}};
    write_text_file((fs::path(cfg->out_dir) / "run_manifest.json").string(),
                    doc.dump(2) + "\n");
  }
  void say(const std::string& line) const {
    if (!cfg->quiet) std::cout << line << "\n";
  }
};

std::string resolve_rel(const std::string& base_file, const std::string& p) {
  fs::path pp(p);
  if (pp.is_absolute()) return pp.lexically_normal().string();
  return (fs::path(base_file).parent_path() / pp).lexically_normal().string();
}

void check_keys(const toml::Table& tbl, const std::string& prefix,
                const std::set<std::string>& allowed) {
  for (const auto& [key, val] : tbl.entries()) {
    if (key.rfind(prefix + ".", 0) != 0) continue;
    const std::string leaf = key.substr(prefix.size() + 1);
    if (!allowed.count(leaf))
      throw InputError(tbl.origin() + ":" + std::to_string(val.line) +
                       ": unknown key \"" + key + "\"");
  }
}

double positive_number(const toml::Table& t, const std::string& key,
                       double fallback) {
  const double v = t.number_or(key, fallback);
  if (!(v > 0.0) || !std::isfinite(v))
    throw ConfigError(key + " must be a positive number");
  return v;
}

int positive_int(const toml::Table& t, const std::string& key, long long fb) {
  const long long v = t.integer_or(key, fb);
  if (v < 1 || v > (1ll << 31))
    throw ConfigError(key + " must be a positive integer");
  return static_cast<int>(v);
}

// ---------- discrete commands ----------

struct DiscreteRun {
  Network net;
  OptimizerConfig ocfg;
  double flux_eps = 0.0;
  std::string network_path;
};

DiscreteRun load_discrete(Ctx& ctx, const toml::Table& tbl) {
  check_keys(tbl, "discrete",
             {"network", "gamma", "nu", "lin_tol", "lin_max_iter", "grad_tol",
              "max_iter", "c_min", "flux_eps", "armijo_initial",
              "armijo_shrink", "armijo_decrease"});
  const std::string rel = tbl.require("discrete.network").as_string("discrete.network");
  const std::string path = resolve_rel(tbl.origin(), rel);
  ctx.note_input(path);

  OptimizerConfig ocfg;
  ocfg.params.gamma = positive_number(tbl, "discrete.gamma", 1.0);
  ocfg.params.nu = positive_number(tbl, "discrete.nu", 1.0);
  ocfg.params.validate();
  ocfg.lin_tol = positive_number(tbl, "discrete.lin_tol", 1e-10);
  ocfg.lin_max_iter = positive_int(tbl, "discrete.lin_max_iter", 10000);
  ocfg.grad_tol = positive_number(tbl, "discrete.grad_tol", 1e-8);
  ocfg.max_iter = positive_int(tbl, "discrete.max_iter", 20000);
  ocfg.c_min = tbl.number_or("discrete.c_min", 1e-10);
  if (ocfg.c_min < 0.0) throw ConfigError("discrete.c_min must be >= 0");
  ocfg.armijo.initial_step = positive_number(tbl, "discrete.armijo_initial", 1.0);
  ocfg.armijo.shrink = tbl.number_or("discrete.armijo_shrink", 0.5);
  if (!(ocfg.armijo.shrink > 0.0 && ocfg.armijo.shrink < 1.0))
    throw ConfigError("discrete.armijo_shrink must lie in (0,1)");
  ocfg.armijo.sufficient_decrease =
      tbl.number_or("discrete.armijo_decrease", 1e-4);
  if (!(ocfg.armijo.sufficient_decrease > 0.0 &&
        ocfg.armijo.sufficient_decrease < 1.0))
    throw ConfigError("discrete.armijo_decrease must lie in (0,1)");
  const double flux_eps = tbl.number_or("discrete.flux_eps", 0.0);
  if (flux_eps < 0.0) throw ConfigError("discrete.flux_eps must be >= 0");

  ctx.parameters = json{{"network", path},
                        {"gamma", ocfg.params.gamma},
                        {"nu", ocfg.params.nu},
                        {"lin_tol", ocfg.lin_tol},
                        {"lin_max_iter", ocfg.lin_max_iter},
                        {"grad_tol", ocfg.grad_tol},
                        {"max_iter", ocfg.max_iter},
                        {"c_min", ocfg.c_min},
                        {"flux_eps", flux_eps},
                        {"armijo_initial", ocfg.armijo.initial_step},
                        {"armijo_shrink", ocfg.armijo.shrink},
                        {"armijo_decrease", ocfg.armijo.sufficient_decrease}};
  return DiscreteRun{read_network_json(path), ocfg, flux_eps, path};
}

std::string pressures_csv(const FlowState& flow) {
  std::string s = "node,pressure\n";
  for (std::size_t n = 0; n < flow.pressure.size(); ++n)
    s += std::to_string(n) + "," + format_double(flow.pressure[n]) + "\n";
  return s;
}

std::string fluxes_csv(const Network& net, const FlowState& flow) {
  std::string s = "i,j,flux\n";
  for (int e = 0; e < net.edge_count(); ++e)
    s += std::to_string(net.edge(e).i) + "," + std::to_string(net.edge(e).j) +
         "," + format_double(flow.flux[e]) + "\n";
  return s;
}

int cmd_solve(Ctx& ctx, const toml::Table& tbl) {
  DiscreteRun r = load_discrete(ctx, tbl);
  FlowState flow =
      solve_pressures(r.net, r.ocfg.lin_tol, r.ocfg.lin_max_iter);
  ctx.emit("pressures.csv", pressures_csv(flow));
  ctx.emit("fluxes.csv", fluxes_csv(r.net, flow));
  ctx.manifest();
  ctx.say("solve: " + std::to_string(r.net.node_count()) + " nodes, defect " +
          format_double(flow.residual_norm));
  return 0;
}

int cmd_optimize(Ctx& ctx, const toml::Table& tbl) {
  DiscreteRun r = load_discrete(ctx, tbl);
  auto [opt, trace] = descend(r.net, r.ocfg);
  std::string csv = "iter,energy,grad_norm,step,floored_edges\n";
  for (const IterationRecord& rec : trace.records)
    csv += std::to_string(rec.iter) + "," + format_double(rec.energy) + "," +
           format_double(rec.grad_norm) + "," + format_double(rec.step) + "," +
           std::to_string(rec.floored_edges) + "\n";
  ctx.emit("optimized.json", network_json_text(opt));
  ctx.emit("trace.csv", csv);
  ctx.manifest();
  ctx.say("optimize: " + std::to_string(trace.iterations) +
          " iterations, final energy " + format_double(trace.final_energy));
  if (trace.status != TerminalStatus::Converged)
    throw NonConvergence(
        trace.status == TerminalStatus::MaxIter
            ? "conductivity descent hit the iteration cap"
            : "conductivity descent stalled in the line search",
        trace.records.empty() ? 0.0 : trace.records.back().grad_norm);
  return 0;
}

int cmd_check_murray(Ctx& ctx, const toml::Table& tbl) {
  DiscreteRun r = load_discrete(ctx, tbl);
  FlowState flow =
      solve_pressures(r.net, r.ocfg.lin_tol, r.ocfg.lin_max_iter);
  MurrayReport rep =
      node_murray_report(r.net, flow, r.ocfg.params, r.flux_eps);
  std::string csv = "node,residual,n_plus,n_minus,source\n";
  for (const MurrayNodeRecord& n : rep.nodes)
    csv += std::to_string(n.node) + "," + format_double(n.residual) + "," +
           std::to_string(n.n_plus.size()) + "," +
           std::to_string(n.n_minus.size()) + "," + format_double(n.source) +
           "\n";
  ctx.emit("murray.json", murray_report_json(rep));
  ctx.emit("murray.csv", csv);
  ctx.manifest();
  ctx.say("check-murray: max residual " + format_double(rep.max_residual) +
          ", exponent " + format_double(rep.exponent));
  return 0;
}

// ---------- continuum commands ----------

struct ContinuumRun {
  RectGrid grid;
  std::string model;  // "scalar" or "vector"
  double gamma = 2.0, nu = 1.0, tol = 1e-10, sign_eps = -1.0;
  int max_iter = 0;
  std::vector<double> r, source;
  std::array<double, 4> rect{0.0, 0.0, 0.0, 0.0};
  bool has_rect = false;
  std::vector<std::int8_t> orientation;  // empty unless orientation_csv given
  std::string source_name;
};

ContinuumRun load_continuum(Ctx& ctx, const toml::Table& tbl) {
  check_keys(tbl, "continuum",
             {"model", "dim", "extent", "cells", "gamma", "nu", "r", "r_csv",
              "source", "source_csv", "tol", "max_iter", "subdomain",
              "sign_eps", "orientation_csv"});
  ContinuumRun c;
  c.model = tbl.string_or("continuum.model", "scalar");
  if (c.model != "scalar" && c.model != "vector")
    throw ConfigError("continuum.model must be \"scalar\" or \"vector\"");

  const std::vector<double> cells_raw =
      tbl.require("continuum.cells").as_numbers("continuum.cells");
  if (cells_raw.empty() || cells_raw.size() > 2)
    throw ConfigError("continuum.cells takes one or two entries");
  const int dim = static_cast<int>(
      tbl.integer_or("continuum.dim", static_cast<long long>(cells_raw.size())));
  if (dim != static_cast<int>(cells_raw.size()))
    throw ConfigError("continuum.dim disagrees with the cells array");
  std::array<int, 2> cells{1, 1};
  for (std::size_t d = 0; d < cells_raw.size(); ++d) {
    const double v = cells_raw[d];
    if (!(v >= 2.0) || v != std::floor(v) || v > 1e7)
      throw ConfigError("continuum.cells entries must be integers >= 2");
    cells[d] = static_cast<int>(v);
  }
  std::array<double, 2> extent{1.0, 1.0};
  if (tbl.has("continuum.extent")) {
    const std::vector<double> er =
        tbl.require("continuum.extent").as_numbers("continuum.extent");
    if (static_cast<int>(er.size()) != dim)
      throw ConfigError("continuum.extent must list one length per axis");
    for (std::size_t d = 0; d < er.size(); ++d) {
      if (!(er[d] > 0.0)) throw ConfigError("continuum.extent must be positive");
      extent[d] = er[d];
    }
  }
  c.grid = RectGrid::make(dim, extent, cells);

  c.gamma = tbl.number_or("continuum.gamma", 2.0);
  if (!(c.gamma > 1.0))
    throw ConfigError("continuum.gamma must exceed 1");
  c.nu = positive_number(tbl, "continuum.nu", 1.0);
  c.tol = positive_number(tbl, "continuum.tol", 1e-10);
  c.max_iter = positive_int(tbl, "continuum.max_iter",
                            c.model == "vector" ? 1000 : 200000);
  c.sign_eps = tbl.number_or("continuum.sign_eps", -1.0);

  json rparam;
  if (tbl.has("continuum.r") && tbl.has("continuum.r_csv"))
    throw ConfigError("give continuum.r or continuum.r_csv, not both");
  if (tbl.has("continuum.r_csv")) {
    const std::string path = resolve_rel(
        tbl.origin(), tbl.require("continuum.r_csv").as_string("continuum.r_csv"));
    ctx.note_input(path);
    c.r = read_grid_csv(path, c.grid);
    rparam = path;
  } else {
    const double rv = positive_number(tbl, "continuum.r", 1.0);
    c.r.assign(static_cast<std::size_t>(c.grid.cell_count()), rv);
    rparam = rv;
  }

  const bool named = tbl.has("continuum.source");
  const bool from_csv = tbl.has("continuum.source_csv");
  if (named == from_csv)
    throw ConfigError("give exactly one of continuum.source, continuum.source_csv");
  json sparam;
  if (named) {
    c.source_name = tbl.require("continuum.source").as_string("continuum.source");
    if (c.source_name == "cos1d")
      c.source = sample_cos1d(c.grid);
    else if (c.source_name == "dipole2d")
      c.source = sample_dipole2d(c.grid);
    else if (c.source_name == "radial2d")
      c.source = sample_radial2d(c.grid);
    else
      throw ConfigError("unknown source preset \"" + c.source_name +
                        "\" (cos1d, dipole2d, radial2d)");
    sparam = c.source_name;
  } else {
    const std::string path = resolve_rel(
        tbl.origin(),
        tbl.require("continuum.source_csv").as_string("continuum.source_csv"));
    ctx.note_input(path);
    c.source = read_grid_csv(path, c.grid);
    sparam = path;
  }

  if (tbl.has("continuum.subdomain")) {
    const std::vector<double> sr =
        tbl.require("continuum.subdomain").as_numbers("continuum.subdomain");
    if (static_cast<int>(sr.size()) != 2 * dim)
      throw ConfigError("continuum.subdomain wants [x0,x1] per axis");
    c.rect = {sr[0], sr[1], dim == 2 ? sr[2] : 0.0, dim == 2 ? sr[3] : 0.0};
    c.has_rect = true;
  }

  if (tbl.has("continuum.orientation_csv")) {
    const std::string path = resolve_rel(
        tbl.origin(), tbl.require("continuum.orientation_csv")
                          .as_string("continuum.orientation_csv"));
    ctx.note_input(path);
    const std::vector<double> vals = read_grid_csv(path, c.grid);
    c.orientation.resize(vals.size());
    for (std::size_t i = 0; i < vals.size(); ++i) {
      if (vals[i] != 1.0 && vals[i] != -1.0)
        throw InputError(path + ": orientation entries must be +1 or -1");
      c.orientation[i] = vals[i] > 0 ? 1 : -1;
    }
    ctx.parameters["orientation_csv"] = path;
  }

  ctx.parameters["model"] = c.model;
  ctx.parameters["dim"] = dim;
  ctx.parameters["cells"] = std::vector<int>(cells.begin(), cells.begin() + dim);
  ctx.parameters["extent"] =
      std::vector<double>(extent.begin(), extent.begin() + dim);
  ctx.parameters["gamma"] = c.gamma;
  ctx.parameters["nu"] = c.nu;
  ctx.parameters["tol"] = c.tol;
  ctx.parameters["max_iter"] = c.max_iter;
  ctx.parameters["r"] = rparam;
  ctx.parameters["source"] = sparam;
  ctx.parameters["sign_eps"] = c.sign_eps;
  if (c.has_rect)
    ctx.parameters["subdomain"] = std::vector<double>(
        c.rect.begin(), c.rect.begin() + 2 * dim);
  return c;
}

ContinuumProblem scalar_problem(const ContinuumRun& c) {
  ContinuumProblem pb;
  pb.grid = c.grid;
  pb.gamma = c.gamma;
  pb.nu = c.nu;
  pb.r = c.r;
  pb.source = c.source;
  return project_source(pb);
}

int cmd_solve_continuum(Ctx& ctx, const toml::Table& tbl) {
  ContinuumRun c = load_continuum(ctx, tbl);
  if (c.model != "scalar")
    throw ConfigError("solve-continuum runs the scalar model; use solve-phenom");
  ContinuumProblem pb = scalar_problem(c);
  ctx.parameters["source_shift"] = pb.source_shift;
  GridField f = solve_pressure(pb, c.tol, c.max_iter);
  f = reconstruct_conductivity(std::move(f), pb);
  f = face_fluxes(std::move(f), pb);
  ctx.emit("p.csv", grid_cell_csv(pb.grid, f.pressure));
  ctx.emit("c1.csv", grid_face_csv(pb.grid, 0, f.conductivity[0]));
  ctx.emit("q1.csv", grid_face_csv(pb.grid, 0, f.flux[0]));
  if (pb.grid.dim == 2) {
    ctx.emit("c2.csv", grid_face_csv(pb.grid, 1, f.conductivity[1]));
    ctx.emit("q2.csv", grid_face_csv(pb.grid, 1, f.flux[1]));
  }
  ctx.manifest();
  ctx.say("solve-continuum: " + std::to_string(pb.grid.cell_count()) +
          " cells, source shift " + format_double(pb.source_shift));
  return 0;
}

int cmd_check_continuum_murray(Ctx& ctx, const toml::Table& tbl) {
  ContinuumRun c = load_continuum(ctx, tbl);
  if (c.model != "scalar")
    throw ConfigError("check-continuum-murray runs the scalar model");
  if (!c.has_rect)
    throw ConfigError("check-continuum-murray needs continuum.subdomain");
  ContinuumProblem pb = scalar_problem(c);
  GridField f = solve_pressure(pb, c.tol, c.max_iter);
  f = reconstruct_conductivity(std::move(f), pb);
  const std::vector<std::uint8_t> mask = snap_rectangle(pb.grid, c.rect);
  const BalanceRecord rec = murray_balance(f, pb, mask, c.sign_eps);
  ctx.emit("balance.json", balance_record_json(rec));
  ctx.manifest();
  ctx.say("check-continuum-murray: residual " + format_double(rec.residual) +
          ", form agreement " + format_double(rec.form_agreement));
  return 0;
}

VectorProblem vector_problem(const ContinuumRun& c) {
  VectorProblem pb;
  pb.grid = c.grid;
  pb.gamma = c.gamma;
  pb.nu = c.nu;
  pb.r = c.r;
  pb.source = c.source;
  return project_source(pb);
}

int cmd_solve_phenom(Ctx& ctx, const toml::Table& tbl) {
  ContinuumRun c = load_continuum(ctx, tbl);
  if (c.model != "vector")
    throw ConfigError("solve-phenom needs continuum.model = \"vector\"");
  VectorProblem pb = vector_problem(c);
  ctx.parameters["source_shift"] = pb.source_shift;
  VectorState st = solve_pressure_vec(pb, c.tol, c.max_iter);
  st = reconstruct_m(std::move(st), pb, c.sign_eps, c.orientation);

  const int N = pb.grid.cell_count();
  std::vector<double> mmag(static_cast<std::size_t>(N)),
      q1(static_cast<std::size_t>(N)), q2(static_cast<std::size_t>(N));
  for (int i = 0; i < N; ++i) {
    const double m2 = st.m[0][i] * st.m[0][i] + st.m[1][i] * st.m[1][i];
    mmag[i] = std::sqrt(m2);
    q1[i] = -(pb.r[i] + m2) * st.grad_p[0][i];
    q2[i] = -(pb.r[i] + m2) * st.grad_p[1][i];
  }
  ctx.emit("p.csv", grid_cell_csv(pb.grid, st.p));
  ctx.emit("m1.csv", grid_cell_csv(pb.grid, st.m[0]));
  ctx.emit("m2.csv", grid_cell_csv(pb.grid, st.m[1]));
  ctx.emit("mmag.csv", grid_cell_csv(pb.grid, mmag));
  ctx.emit("q1.csv", grid_cell_csv(pb.grid, q1));
  ctx.emit("q2.csv", grid_cell_csv(pb.grid, q2));
  ctx.manifest();
  int null_cells = 0;
  for (auto o : st.orientation) null_cells += o == 0 ? 1 : 0;
  ctx.say("solve-phenom: " + std::to_string(N) + " cells, " +
          std::to_string(null_cells) + " null");
  return 0;
}

int cmd_check_phenom_murray(Ctx& ctx, const toml::Table& tbl) {
  ContinuumRun c = load_continuum(ctx, tbl);
  if (c.model != "vector")
    throw ConfigError("check-phenom-murray needs continuum.model = \"vector\"");
  if (!c.has_rect)
    throw ConfigError("check-phenom-murray needs continuum.subdomain");
  VectorProblem pb = vector_problem(c);
  VectorState st = solve_pressure_vec(pb, c.tol, c.max_iter);
  const std::vector<std::uint8_t> mask = snap_rectangle(pb.grid, c.rect);
  const BalanceRecord rec = murray_balance_vec(st, pb, mask, c.sign_eps);
  ctx.emit("balance.json", balance_record_json(rec));
  ctx.manifest();
  ctx.say("check-phenom-murray: residual " + format_double(rec.residual) +
          ", form agreement " + format_double(rec.form_agreement));
  return 0;
}

// ---------- selftest ----------

struct CheckList {
  json checks = json::array();
  int failures = 0;
  void add(const std::string& name, double value, double bound, Ctx& ctx) {
    const bool pass = value <= bound;
    if (!pass) ++failures;
    checks.push_back(json{
        {"name", name}, {"value", value}, {"bound", bound}, {"pass", pass}});
    ctx.say(std::string(pass ? "PASS " : "FAIL ") + name + "  (" +
            format_double(value) + " vs " + format_double(bound) + ")");
  }
};

double fd_gradient_worst(const Network& net, const MetabolicParams& params) {
  const std::vector<double> g = energy_gradient(net, params, 1e-12);
  double worst = 0.0;
  for (int e = 0; e < net.edge_count(); ++e) {
    std::vector<double> c = net.conductivities();
    const double step = 1e-6 * c[e];
    c[e] += step;
    const double ep = energy(net.with_conductivity(c), params, 1e-12);
    c[e] -= 2.0 * step;
    const double em = energy(net.with_conductivity(c), params, 1e-12);
    const double fd = (ep - em) / (2.0 * step);
    const double rel =
        std::abs(fd - g[e]) / std::max({std::abs(fd), std::abs(g[e]), 1e-12});
    worst = std::max(worst, rel);
  }
  return worst;
}

ContinuumProblem cos_problem(int n, double gamma) {
  ContinuumProblem pb;
  pb.grid = RectGrid::make(1, {1.0, 1.0}, {n, 1});
  pb.gamma = gamma;
  pb.nu = 1.0;
  pb.r.assign(static_cast<std::size_t>(n), 1.0);
  pb.source = sample_cos1d(pb.grid);
  return project_source(pb);
}

double linf_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

int cmd_selftest(Ctx& ctx) {
  const std::uint64_t seed = ctx.cfg->seed;
  ctx.parameters = json{{"graphs", 10}};
  CheckList cl;

  // exact energy derivative vs central differences on random graphs
  {
    const double gammas[4] = {0.5, 1.0, 1.5, 2.0};
    const double nus[3] = {0.5, 1.0, 4.0};
    double worst = 0.0;
    for (int k = 0; k < 10; ++k) {
      Network net = random_connected_network(seed + static_cast<std::uint64_t>(k));
      MetabolicParams params{gammas[k % 4], nus[k % 3]};
      worst = std::max(worst, fd_gradient_worst(net, params));
    }
    cl.add("discrete_gradient_fd", worst, 1e-5, ctx);
  }

  // discrete energy identity: dissipation equals source power
  {
    Network net = random_connected_network(seed + 101);
    FlowState flow = solve_pressures(net, 1e-12);
    double lhs = 0.0, rhs = 0.0;
    for (int e = 0; e < net.edge_count(); ++e) {
      const Edge ed = net.edge(e);
      const double dp =
          (flow.pressure[ed.j] - flow.pressure[ed.i]) / net.length(e);
      lhs += net.conductivity(e) * dp * dp * net.length(e);
    }
    for (int n = 0; n < net.node_count(); ++n)
      rhs += net.source(n) * flow.pressure[n];
    const double rel = std::abs(lhs - rhs) / std::max({lhs, rhs, 1e-300});
    cl.add("discrete_energy_identity", rel, 1e-10, ctx);
  }

  // 1-D scalar solve against the exact discrete reference
  {
    ContinuumProblem pb = cos_problem(128, 2.0);
    GridField f = solve_pressure(pb, 1e-10);
    GridField ref = oracle_1d(pb);
    cl.add("oracle_1d_sampled", linf_diff(f.pressure, ref.pressure), 1e-8, ctx);

    GridField cont = oracle_1d(
        pb, [](double x) { return cos1d_value(x); },
        [](double) { return 1.0; });
    cl.add("oracle_1d_analytic", linf_diff(f.pressure, cont.pressure), 5e-4,
           ctx);
  }

  // subdomain balance in both the conductivity-power and raw-flux forms
  {
    ContinuumProblem pb = cos_problem(64, 2.0);
    GridField f = reconstruct_conductivity(solve_pressure(pb, 1e-10), pb);
    const auto mask = snap_rectangle(pb.grid, {0.25, 0.75, 0.0, 0.0});
    const BalanceRecord rec = murray_balance(f, pb, mask);
    cl.add("murray_1d_residual", rec.residual, 1e-8, ctx);
    cl.add("murray_1d_form_agreement", rec.form_agreement, 1e-10, ctx);
  }

  // 2-D global conservation under no-flux boundaries
  {
    ContinuumProblem pb;
    pb.grid = RectGrid::make(2, {1.0, 1.0}, {32, 32});
    pb.gamma = 2.0;
    pb.nu = 1.0;
    pb.r.assign(static_cast<std::size_t>(pb.grid.cell_count()), 1.0);
    pb.source = sample_dipole2d(pb.grid);
    pb = project_source(pb);
    GridField f = reconstruct_conductivity(solve_pressure(pb, 1e-10), pb);
    const std::vector<std::uint8_t> all(
        static_cast<std::size_t>(pb.grid.cell_count()), 1);
    const BalanceRecord whole = murray_balance(f, pb, all);
    cl.add("dipole_global_balance", whole.residual, 1e-10, ctx);
    const auto mask = snap_rectangle(pb.grid, {0.25, 0.75, 0.25, 0.75});
    const BalanceRecord rec = murray_balance(f, pb, mask);
    cl.add("dipole_subdomain_form_agreement", rec.form_agreement, 1e-10, ctx);
  }

  // vector model: eigen alignment, magnitude law, orientation invariance
  {
    VectorProblem pb;
    pb.grid = RectGrid::make(2, {1.0, 1.0}, {32, 32});
    pb.gamma = 2.0;
    pb.nu = 1.0;
    pb.r.assign(static_cast<std::size_t>(pb.grid.cell_count()), 1.0);
    pb.source = sample_radial2d(pb.grid);
    pb = project_source(pb);
    VectorState st = solve_pressure_vec(pb, 1e-10);
    st = reconstruct_m(std::move(st), pb);

    const std::vector<double> er = eigen_residual(st, pb);
    double worst_eig = 0.0;
    for (std::size_t i = 0; i < er.size(); ++i)
      if (st.orientation[i] != 0) worst_eig = std::max(worst_eig, er[i]);
    cl.add("vector_eigen_residual", worst_eig, 1e-12, ctx);

    double worst_mag = 0.0;
    for (int i = 0; i < pb.grid.cell_count(); ++i) {
      if (st.orientation[i] == 0) continue;
      const double m2 =
          st.m[0][i] * st.m[0][i] + st.m[1][i] * st.m[1][i];
      const double g2 = st.grad_p[0][i] * st.grad_p[0][i] +
                        st.grad_p[1][i] * st.grad_p[1][i];
      const double lhs = pb.nu * std::pow(m2, pb.gamma - 1.0);
      worst_mag =
          std::max(worst_mag, std::abs(lhs - g2) / std::max({lhs, g2, 1e-300}));
    }
    cl.add("vector_magnitude_law", worst_mag, 1e-12, ctx);

    std::vector<std::int8_t> flip(
        static_cast<std::size_t>(pb.grid.cell_count()), -1);
    VectorState st2 = reconstruct_m(st, pb, -1.0, flip);
    double qdiff = 0.0;
    for (int i = 0; i < pb.grid.cell_count(); ++i) {
      const double a2 = st.m[0][i] * st.m[0][i] + st.m[1][i] * st.m[1][i];
      const double b2 =
          st2.m[0][i] * st2.m[0][i] + st2.m[1][i] * st2.m[1][i];
      for (int ax = 0; ax < 2; ++ax) {
        const double qa = -(pb.r[i] + a2) * st.grad_p[ax][i];
        const double qb = -(pb.r[i] + b2) * st2.grad_p[ax][i];
        if (std::memcmp(&qa, &qb, sizeof(double)) != 0) qdiff += 1.0;
      }
    }
    cl.add("vector_orientation_flip_bits", qdiff, 0.0, ctx);

    const auto mask = snap_rectangle(pb.grid, {0.15, 0.85, 0.15, 0.85});
    const BalanceRecord rec = murray_balance_vec(st, pb, mask);
    cl.add("vector_murray_form_agreement", rec.form_agreement, 1e-12, ctx);
    cl.add("vector_murray_residual", rec.residual, 1e-8, ctx);
  }

  // repeated solve bit-stability
  {
    ContinuumProblem pb = cos_problem(32, 1.5);
    GridField a = solve_pressure(pb, 1e-10);
    GridField b = solve_pressure(pb, 1e-10);
    double diff = 0.0;
    for (std::size_t i = 0; i < a.pressure.size(); ++i)
      if (std::memcmp(&a.pressure[i], &b.pressure[i], sizeof(double)) != 0)
        diff += 1.0;
    cl.add("repeat_solve_identical", diff, 0.0, ctx);
  }

  json report{{"seed", seed},
              {"checks", cl.checks},
              {"failures", cl.failures}};
  ctx.emit("report.json", report.dump(2) + "\n");
  ctx.manifest();
  if (cl.failures > 0) {
    std::cerr << json{{"error",
                       {{"type", "SelftestFailure"},
                        {"message", std::to_string(cl.failures) +
                                        " self-check(s) failed"}}}}
                     .dump()
              << "\n";
    return 4;
  }
  ctx.say("selftest: all checks passed");
  return 0;
}

int dispatch(Ctx& ctx) {
  const RunConfig& cfg = *ctx.cfg;
  if (cfg.command == "selftest") return cmd_selftest(ctx);

  if (cfg.config_path.empty())
    throw ConfigError("command \"" + cfg.command + "\" needs --config");
  const std::string text = ctx.note_input(cfg.config_path);
  const toml::Table tbl = toml::parse_string(text, cfg.config_path);

  if (cfg.command == "solve") return cmd_solve(ctx, tbl);
  if (cfg.command == "optimize") return cmd_optimize(ctx, tbl);
  if (cfg.command == "check-murray") return cmd_check_murray(ctx, tbl);
  if (cfg.command == "solve-continuum") return cmd_solve_continuum(ctx, tbl);
  if (cfg.command == "check-continuum-murray")
    return cmd_check_continuum_murray(ctx, tbl);
  if (cfg.command == "solve-phenom") return cmd_solve_phenom(ctx, tbl);
  if (cfg.command == "check-phenom-murray")
    return cmd_check_phenom_murray(ctx, tbl);
  throw ConfigError("unknown command \"" + cfg.command + "\"");
}

int fail(const char* type, const std::string& msg, int code) {
  std::cerr << json{{"error", {{"type", type}, {"message", msg}}}}.dump()
            << "\n";
  return code;
}

}  // namespace

int run(const RunConfig& config) {
  Ctx ctx;
  ctx.cfg = &config;
  try {
    ctx.threads = parse_threads_env();
    if (ctx.threads > 0) Eigen::setNbThreads(ctx.threads);
    if (!config.out_dir.empty()) fs::create_directories(config.out_dir);
    return dispatch(ctx);
  } catch (const ConfigError& e) {
    return fail("ConfigError", e.what(), 2);
  } catch (const InputError& e) {
    return fail("InputError", e.what(), 3);
  } catch (const NonConvergence& e) {
    return fail("NonConvergence",
                std::string(e.what()) + " (achieved " +
                    format_double(e.achieved) + ")",
                4);
  } catch (const BisectionFailure& e) {
    return fail("BisectionFailure", e.what(), 4);
  } catch (const Error& e) {
    return fail("Error", e.what(), 4);
  } catch (const std::exception& e) {
    return fail("InternalError", e.what(), 5);
  }
}

}  // namespace murraynet
