/// Graph container: edge-list IO, adjacency, BFS, normalization, generators.
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "srcloc/rng.hpp"

namespace srcloc {

using Matrix = Eigen::MatrixXd;

struct Edge {
  int u = 0;
  int v = 0;
  double w = -1.0;  // -1 marks "not yet assigned"; valid weights lie in (0, 1)
};

class Graph {
 public:
  Graph() = default;
  /// Validates ids, rejects self-loops and duplicate edges, builds adjacency.
  Graph(int n, bool directed, std::vector<Edge> edges);

  /// Parses "u v" / "u v w" lines ('#' comments, blank lines allowed) and
  /// remaps the sorted distinct labels to dense 0-based ids.
  static Graph load_edge_list(const std::string& path, bool directed);

  /// Writes one "u v" or "u v w" line per edge in stored order.
  void save_edge_list(const std::string& path) const;

  int n() const { return n_; }
  bool directed() const { return directed_; }
  const std::vector<Edge>& edges() const { return edges_; }

  /// Out-neighbors as (neighbor, weight), ascending by neighbor id.
  const std::vector<std::pair<int, double>>& out_neighbors(int u) const { return out_[u]; }
  /// In-neighbors as (neighbor, weight); mirrors out_neighbors when undirected.
  const std::vector<std::pair<int, double>>& in_neighbors(int v) const { return in_[v]; }

  /// Total degree: neighbor count (undirected) or in+out (directed).
  int degree(int v) const {
    return directed_ ? static_cast<int>(out_[v].size() + in_[v].size())
                     : static_cast<int>(out_[v].size());
  }

  bool weights_assigned() const;

 private:
  int n_ = 0;
  bool directed_ = false;
  std::vector<Edge> edges_;
  std::vector<std::vector<std::pair<int, double>>> out_;
  std::vector<std::vector<std::pair<int, double>>> in_;

  void build_adjacency();
};

/// Fills every unassigned edge weight with a Uniform(0.2, 0.8) draw, in
/// stored edge order.
void assign_edge_weights(Graph& g, Rng& rng);

/// Hop distances from src following edge direction; unreachable nodes get n.
/// `allowed` (optional) restricts traversal to the induced subgraph where
/// allowed[v] != 0 (src must itself be allowed).
std::vector<int> bfs_distances(const Graph& g, int src,
                               const std::vector<uint8_t>* allowed = nullptr);

/// D^-1/2 (A + I) D^-1/2 over the symmetrized binary adjacency.
Matrix normalized_adjacency(const Graph& g);

/// Preferential-attachment graph: complete seed on m+1 nodes, then each new
/// node attaches to m distinct existing nodes sampled by degree. Undirected,
/// weights unassigned.
Graph barabasi_albert(int n, int m, Rng& rng);

}  // namespace srcloc
