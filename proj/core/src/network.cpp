#include "murraynet/network.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

namespace murraynet {

namespace {
inline std::int64_t pair_key(int i, int j, int n) {
  return static_cast<std::int64_t>(i) * n + j;
}
}  // namespace

Network::Network(int node_count, std::vector<Edge> edges,
                 std::vector<double> length, std::vector<double> conductivity,
                 std::vector<double> source,
                 std::vector<std::vector<double>> positions)
    : node_count_(node_count),
      edges_(std::move(edges)),
      length_(std::move(length)),
      conductivity_(std::move(conductivity)),
      source_(std::move(source)),
      positions_(std::move(positions)) {
  if (node_count_ <= 0) throw StructuralError("network needs at least one node");
  const auto ne = edges_.size();
  if (length_.size() != ne || conductivity_.size() != ne)
    throw StructuralError("edge attribute arrays disagree with edge count");
  if (source_.size() != static_cast<size_t>(node_count_))
    throw StructuralError("source array size disagrees with node count");
  if (!positions_.empty() && positions_.size() != static_cast<size_t>(node_count_))
    throw StructuralError("positions given for some but not all nodes");

  std::unordered_map<std::int64_t, int> seen;
  seen.reserve(ne * 2);
  for (size_t e = 0; e < ne; ++e) {
    auto& ed = edges_[e];
    if (ed.i > ed.j) std::swap(ed.i, ed.j);
    const std::string tag = "edge " + std::to_string(e) + " (" +
                            std::to_string(ed.i) + "," + std::to_string(ed.j) + ")";
    if (ed.i < 0 || ed.j >= node_count_)
      throw StructuralError(tag + ": node index out of range");
    if (ed.i == ed.j) throw StructuralError(tag + ": self-loop");
    if (!seen.emplace(pair_key(ed.i, ed.j, node_count_), int(e)).second)
      throw StructuralError(tag + ": duplicate of an earlier edge");
    if (!(length_[e] > 0.0) || !std::isfinite(length_[e]))
      throw StructuralError(tag + ": length must be positive and finite");
    if (!(conductivity_[e] >= 0.0) || !std::isfinite(conductivity_[e]))
      throw StructuralError(tag + ": conductivity must be nonnegative and finite");
  }

  adjacency_.resize(node_count_);
  for (size_t e = 0; e < ne; ++e) {
    adjacency_[edges_[e].i].emplace_back(edges_[e].j, int(e));
    adjacency_[edges_[e].j].emplace_back(edges_[e].i, int(e));
  }
}

std::optional<int> Network::edge_index(int i, int j) const {
  if (i > j) std::swap(i, j);
  for (auto [nbr, e] : adjacency_[i])
    if (nbr == j) return e;
  return std::nullopt;
}

Network Network::with_conductivity(std::vector<double> c) const {
  return Network(node_count_, edges_, length_, std::move(c), source_, positions_);
}

Network Network::with_source(std::vector<double> s) const {
  return Network(node_count_, edges_, length_, conductivity_, std::move(s),
                 positions_);
}

ValidationReport validate(const Network& net, double mass_tol) {
  ValidationReport rep;
  double sum = 0.0, abs_sum = 0.0;
  for (int n = 0; n < net.node_count(); ++n) {
    sum += net.source(n);
    abs_sum += std::abs(net.source(n));
  }
  rep.mass_balance_defect = std::abs(sum);
  rep.mass_balanced = rep.mass_balance_defect <= mass_tol * std::max(abs_sum, 1e-300);
  if (abs_sum == 0.0) rep.mass_balanced = true;

  for (int n = 0; n < net.node_count(); ++n) {
    bool live = false;
    for (auto [nbr, e] : net.neighbors(n))
      if (net.conductivity(e) > 0.0) { live = true; break; }
    if (!live) rep.isolated_nodes.push_back(n);
  }

  for (int e = 0; e < net.edge_count(); ++e) {
    if (!std::isfinite(net.length(e)))
      rep.offending_edges.emplace_back(e, "nonfinite length");
    if (!std::isfinite(net.conductivity(e)))
      rep.offending_edges.emplace_back(e, "nonfinite conductivity");
  }

  rep.positive_subgraph_connected = positive_components(net, 0.0).size() == 1;
  return rep;
}

std::vector<std::vector<int>> positive_components(const Network& net,
                                                  double threshold) {
  const int n = net.node_count();
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (int e = 0; e < net.edge_count(); ++e) {
    if (net.conductivity(e) > threshold) {
      int a = find(net.edge(e).i), b = find(net.edge(e).j);
      if (a != b) parent[a] = b;
    }
  }
  std::unordered_map<int, int> root_to_comp;
  std::vector<std::vector<int>> comps;
  for (int v = 0; v < n; ++v) {
    int r = find(v);
    auto [it, fresh] = root_to_comp.emplace(r, int(comps.size()));
    if (fresh) comps.emplace_back();
    comps[it->second].push_back(v);
  }
  return comps;
}

}  // namespace murraynet
