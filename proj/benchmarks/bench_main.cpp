// Throughput benchmarks for the hot paths: nodal conservation solves on
// lattices, the two continuum solvers, and gradient descent on small nets.
// Not wired into ctest; run the binary directly.

#include <benchmark/benchmark.h>

#include <cmath>
#include <cstdint>
#include <vector>

#include "murraynet/continuum_grid.hpp"
#include "murraynet/continuum_vector.hpp"
#include "murraynet/discrete_optim.hpp"
#include "murraynet/grid.hpp"
#include "murraynet/kirchhoff.hpp"
#include "murraynet/network.hpp"
#include "murraynet/presets.hpp"

namespace {

using namespace murraynet;

// n x n lattice, unit weights, source at one corner and sink at the other
Network lattice(int n) {
  std::vector<Edge> edges;
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x) {
      const int id = x + n * y;
      if (x + 1 < n) edges.push_back({id, id + 1});
      if (y + 1 < n) edges.push_back({id, id + n});
    }
  std::vector<double> len(edges.size(), 1.0), cond(edges.size(), 1.0);
  std::vector<double> src(static_cast<size_t>(n) * n, 0.0);
  src.front() = 1.0;
  src.back() = -1.0;
  return Network(n * n, std::move(edges), std::move(len), std::move(cond),
                 std::move(src));
}

void bm_kirchhoff_solve(benchmark::State& state) {
  const Network net = lattice(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    FlowState flow = solve_pressures(net, 1e-10);
    benchmark::DoNotOptimize(flow.pressure.data());
  }
  state.SetLabel(std::to_string(net.node_count()) + " nodes");
}
BENCHMARK(bm_kirchhoff_solve)->Arg(8)->Arg(16)->Arg(32)->Arg(64)
    ->Unit(benchmark::kMillisecond);

// repeated solves on a fixed sparsity pattern, conductivities perturbed
void bm_kirchhoff_reuse(benchmark::State& state) {
  Network net = lattice(static_cast<int>(state.range(0)));
  KirchhoffSolver solver(net);
  std::vector<double> c(static_cast<size_t>(net.edge_count()), 1.0);
  std::uint64_t s = 1;
  for (auto _ : state) {
    for (auto& v : c) {
      s = s * 6364136223846793005ull + 1442695040888963407ull;
      v = 0.5 + static_cast<double>(s >> 40) / (1 << 24);
    }
    net = net.with_conductivity(c);
    FlowState flow = solver.solve(net, 1e-10);
    benchmark::DoNotOptimize(flow.pressure.data());
  }
}
BENCHMARK(bm_kirchhoff_reuse)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

void bm_descend_tree(benchmark::State& state) {
  const Network net = binary_tree_depth3();
  OptimizerConfig cfg;
  cfg.params.gamma = 0.5;
  cfg.grad_tol = 1e-8;
  for (auto _ : state) {
    auto [opt, trace] = descend(net, cfg);
    benchmark::DoNotOptimize(trace.final_energy);
  }
}
BENCHMARK(bm_descend_tree)->Unit(benchmark::kMillisecond);

ContinuumProblem cos_problem(int n) {
  ContinuumProblem prob;
  prob.grid = RectGrid::make(1, {1.0, 1.0}, {n, 1});
  prob.r.assign(static_cast<size_t>(n), 1.0);
  prob.source = sample_cos1d(prob.grid);
  return project_source(std::move(prob));
}

void bm_scalar_solve_1d(benchmark::State& state) {
  const ContinuumProblem prob = cos_problem(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    GridField sol = solve_pressure(prob, 1e-10);
    benchmark::DoNotOptimize(sol.pressure.data());
  }
}
BENCHMARK(bm_scalar_solve_1d)->Arg(128)->Arg(256)->Arg(512)
    ->Unit(benchmark::kMillisecond);

ContinuumProblem dipole_problem(int n) {
  ContinuumProblem prob;
  prob.grid = RectGrid::make(2, {1.0, 1.0}, {n, n});
  prob.r.assign(static_cast<size_t>(prob.grid.cell_count()), 1.0);
  prob.source = sample_dipole2d(prob.grid);
  return project_source(std::move(prob));
}

void bm_scalar_solve_2d(benchmark::State& state) {
  const ContinuumProblem prob = dipole_problem(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    GridField sol = solve_pressure(prob, 1e-8);
    benchmark::DoNotOptimize(sol.pressure.data());
  }
}
BENCHMARK(bm_scalar_solve_2d)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void bm_vector_solve(benchmark::State& state) {
  VectorProblem prob;
  const int n = static_cast<int>(state.range(0));
  prob.grid = RectGrid::make(2, {1.0, 1.0}, {n, n});
  prob.r.assign(static_cast<size_t>(prob.grid.cell_count()), 1.0);
  prob.source = sample_radial2d(prob.grid);
  prob = project_source(std::move(prob));
  for (auto _ : state) {
    VectorState st = solve_pressure_vec(prob, 1e-8);
    benchmark::DoNotOptimize(st.p.data());
  }
}
BENCHMARK(bm_vector_solve)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
