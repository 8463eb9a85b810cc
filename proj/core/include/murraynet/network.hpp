#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "murraynet/errors.hpp"

namespace murraynet {

struct Edge {
  int i, j;  // canonical orientation i < j
};

// Immutable weighted graph: per-edge length L > 0 and conductivity C >= 0,
// per-node source strength S. Topology is fixed at construction; conductivity
// updates produce a new Network via with_conductivity().
class Network {
 public:
  Network(int node_count, std::vector<Edge> edges, std::vector<double> length,
          std::vector<double> conductivity, std::vector<double> source,
          std::vector<std::vector<double>> positions = {});

  int node_count() const { return node_count_; }
  int edge_count() const { return static_cast<int>(edges_.size()); }

  const std::vector<Edge>& edges() const { return edges_; }
  Edge edge(int e) const { return edges_[e]; }
  double length(int e) const { return length_[e]; }
  double conductivity(int e) const { return conductivity_[e]; }
  double source(int n) const { return source_[n]; }
  const std::vector<double>& lengths() const { return length_; }
  const std::vector<double>& conductivities() const { return conductivity_; }
  const std::vector<double>& sources() const { return source_; }
  const std::vector<std::vector<double>>& positions() const { return positions_; }

  // (neighbor node, edge id) pairs
  const std::vector<std::pair<int, int>>& neighbors(int n) const {
    return adjacency_[n];
  }

  std::optional<int> edge_index(int i, int j) const;

  Network with_conductivity(std::vector<double> c) const;
  Network with_source(std::vector<double> s) const;

 private:
  int node_count_;
  std::vector<Edge> edges_;
  std::vector<double> length_;
  std::vector<double> conductivity_;
  std::vector<double> source_;
  std::vector<std::vector<double>> positions_;
  std::vector<std::vector<std::pair<int, int>>> adjacency_;
};

struct ValidationReport {
  double mass_balance_defect = 0.0;    // |sum of S_i|
  bool mass_balanced = false;          // defect <= mass_tol * sum|S_i|
  bool positive_subgraph_connected = false;
  std::vector<int> isolated_nodes;     // no incident edge with C > 0
  std::vector<std::pair<int, std::string>> offending_edges;
  bool ok() const {
    return mass_balanced && positive_subgraph_connected && offending_edges.empty();
  }
};

// mass_tol is relative to sum|S_i|
ValidationReport validate(const Network& net, double mass_tol = 1e-12);

// connected components of the subgraph with conductivity > threshold;
// nodes with no such incident edge become singletons
std::vector<std::vector<int>> positive_components(const Network& net,
                                                  double threshold = 0.0);

}  // namespace murraynet
