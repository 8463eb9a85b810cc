#include "murraynet/kirchhoff.hpp"

#include <Eigen/Sparse>
#include <algorithm>
#include <cmath>

#include "murraynet/errors.hpp"

namespace murraynet {

namespace {
constexpr int kDirectSolveLimit = 10000;
}

double flux_between(const Network& net, const FlowState& flow, int i, int j) {
  auto e = net.edge_index(i, j);
  if (!e) return 0.0;
  return i < j ? flow.flux[*e] : -flow.flux[*e];
}

std::vector<double> kirchhoff_defect(const Network& net, const FlowState& flow) {
  std::vector<double> defect(net.node_count());
  for (int n = 0; n < net.node_count(); ++n) {
    double acc = net.source(n);
    for (auto [nbr, e] : net.neighbors(n))
      acc += (n < nbr) ? flow.flux[e] : -flow.flux[e];
    defect[n] = acc;
  }
  return defect;
}

struct KirchhoffSolver::Impl {
  Eigen::SparseMatrix<double> A;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
  bool pattern_ready = false;

  void assemble(const Network& net, const std::vector<std::vector<int>>& comps) {
    const int n = net.node_count();
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(4 * net.edge_count() + n);
    for (int i = 0; i < n; ++i) trip.emplace_back(i, i, 0.0);
    for (int e = 0; e < net.edge_count(); ++e) {
      const auto [i, j] = net.edge(e);
      const double w = net.conductivity(e) / net.length(e);
      trip.emplace_back(i, i, w);
      trip.emplace_back(j, j, w);
      trip.emplace_back(i, j, -w);
      trip.emplace_back(j, i, -w);
    }
    // gauge: one Tikhonov pin per component keeps the system SPD and
    // the kernel (componentwise constants) out
    for (const auto& comp : comps) {
      double diag_sum = 0.0;
      for (int v : comp)
        for (auto [nbr, e] : net.neighbors(v))
          if (net.conductivity(e) > 0.0)
            diag_sum += net.conductivity(e) / net.length(e);
      double alpha = diag_sum > 0.0 ? diag_sum / double(comp.size()) : 1.0;
      trip.emplace_back(comp[0], comp[0], alpha);
    }
    A.resize(n, n);
    A.setFromTriplets(trip.begin(), trip.end());
  }
};

KirchhoffSolver::KirchhoffSolver(const Network&) : impl_(new Impl) {}
KirchhoffSolver::~KirchhoffSolver() = default;
KirchhoffSolver::KirchhoffSolver(KirchhoffSolver&&) noexcept = default;
KirchhoffSolver& KirchhoffSolver::operator=(KirchhoffSolver&&) noexcept = default;

FlowState KirchhoffSolver::solve(const Network& net, double lin_tol,
                                 int max_iter) {
  const int n = net.node_count();
  double max_abs_s = 0.0;
  for (int i = 0; i < n; ++i) max_abs_s = std::max(max_abs_s, std::abs(net.source(i)));
  const double bound = lin_tol * std::max(1.0, max_abs_s);

  auto comps = positive_components(net, 0.0);
  if (comps.size() > 1) {
    for (const auto& comp : comps) {
      double s = 0.0;
      for (int v : comp) s += net.source(v);
      if (std::abs(s) > bound)
        throw DisconnectedGraph(
            "positive-conductivity subgraph has " + std::to_string(comps.size()) +
            " components and a component with net source " + std::to_string(s));
    }
  }

  impl_->assemble(net, comps);

  Eigen::VectorXd b(n);
  for (int i = 0; i < n; ++i) b(i) = net.source(i);

  Eigen::VectorXd p;
  if (n <= kDirectSolveLimit) {
    if (!impl_->pattern_ready) {
      impl_->ldlt.analyzePattern(impl_->A);
      impl_->pattern_ready = true;
    }
    impl_->ldlt.factorize(impl_->A);
    if (impl_->ldlt.info() != Eigen::Success)
      throw NonConvergence("sparse factorization failed", std::nan(""));
    p = impl_->ldlt.solve(b);
  } else {
    Eigen::ConjugateGradient<Eigen::SparseMatrix<double>,
                             Eigen::Lower | Eigen::Upper,
                             Eigen::DiagonalPreconditioner<double>>
        cg;
    cg.compute(impl_->A);
    const double bnorm = std::max(b.norm(), 1e-300);
    cg.setTolerance(std::max(bound / bnorm, 1e-15));
    cg.setMaxIterations(max_iter);
    p = cg.solve(b);
    if (cg.info() != Eigen::Success && cg.info() != Eigen::NoConvergence)
      throw NonConvergence("conjugate gradient broke down", std::nan(""));
  }

  for (const auto& comp : comps) {
    double mean = 0.0;
    for (int v : comp) mean += p(v);
    mean /= double(comp.size());
    for (int v : comp) p(v) -= mean;
  }

  FlowState flow;
  flow.pressure.assign(p.data(), p.data() + n);
  flow.flux.resize(net.edge_count());
  for (int e = 0; e < net.edge_count(); ++e) {
    const auto [i, j] = net.edge(e);
    flow.flux[e] =
        net.conductivity(e) * (flow.pressure[j] - flow.pressure[i]) / net.length(e);
  }

  double res = 0.0;
  for (double d : kirchhoff_defect(net, flow)) res = std::max(res, std::abs(d));
  flow.residual_norm = res;
  if (res > bound)
    throw NonConvergence("conservation defect " + std::to_string(res) +
                             " exceeds tolerance " + std::to_string(bound),
                         res);
  return flow;
}

FlowState solve_pressures(const Network& net, double lin_tol, int max_iter) {
  KirchhoffSolver solver(net);
  return solver.solve(net, lin_tol, max_iter);
}

}  // namespace murraynet
