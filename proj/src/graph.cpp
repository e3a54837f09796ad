#include "srcloc/graph.hpp"

#include <algorithm>
#include <cstdio>
#include <deque>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace srcloc {

Graph::Graph(int n, bool directed, std::vector<Edge> edges)
    : n_(n), directed_(directed), edges_(std::move(edges)) {
  if (n_ <= 0) throw std::invalid_argument("graph: node count must be positive");
  std::set<std::pair<int, int>> seen;
  for (const Edge& e : edges_) {
    if (e.u < 0 || e.u >= n_ || e.v < 0 || e.v >= n_)
      throw std::invalid_argument("graph: edge endpoint out of range");
    if (e.u == e.v) throw std::invalid_argument("graph: self-loops are not allowed");
    if (e.w != -1.0 && (e.w <= 0.0 || e.w >= 1.0))
      throw std::invalid_argument("graph: edge weight must lie in (0, 1)");
    std::pair<int, int> key(e.u, e.v);
    if (!directed_ && key.first > key.second) std::swap(key.first, key.second);
    if (!seen.insert(key).second)
      throw std::invalid_argument("graph: duplicate edge");
  }
  build_adjacency();
}

void Graph::build_adjacency() {
  out_.assign(n_, {});
  in_.assign(n_, {});
  for (const Edge& e : edges_) {
    out_[e.u].push_back({e.v, e.w});
    in_[e.v].push_back({e.u, e.w});
    if (!directed_) {
      out_[e.v].push_back({e.u, e.w});
      in_[e.u].push_back({e.v, e.w});
    }
  }
  for (auto& adj : out_) std::sort(adj.begin(), adj.end());
  for (auto& adj : in_) std::sort(adj.begin(), adj.end());
}

Graph Graph::load_edge_list(const std::string& path, bool directed) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open edge list: " + path);
  struct RawEdge {
    long long u, v;
    double w;
  };
  std::vector<RawEdge> raw;
  std::set<long long> labels;
  std::string line;
  int lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    size_t start = line.find_first_not_of(" \t\r");
    if (start == std::string::npos || line[start] == '#') continue;
    std::istringstream ss(line);
    long long u, v;
    if (!(ss >> u >> v) || u < 0 || v < 0)
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": expected 'u v [w]' with non-negative integers");
    double w = -1.0;
    std::string tail;
    if (ss >> tail) {
      try {
        size_t pos = 0;
        w = std::stod(tail, &pos);
        if (pos != tail.size()) throw std::invalid_argument("");
      } catch (const std::exception&) {
        throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                 ": malformed edge weight");
      }
    }
    std::string extra;
    if (ss >> extra)
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": trailing tokens after edge");
    raw.push_back({u, v, w});
    labels.insert(u);
    labels.insert(v);
  }
  if (raw.empty()) throw std::runtime_error("edge list is empty: " + path);
  std::map<long long, int> remap;
  int next_id = 0;
  for (long long lab : labels) remap[lab] = next_id++;
  std::vector<Edge> edges;
  edges.reserve(raw.size());
  for (const RawEdge& r : raw)
    edges.push_back({remap[r.u], remap[r.v], r.w});
  return Graph(next_id, directed, std::move(edges));
}

void Graph::save_edge_list(const std::string& path) const {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write edge list: " + path);
  char buf[64];
  for (const Edge& e : edges_) {
    if (e.w == -1.0) {
      f << e.u << ' ' << e.v << '\n';
    } else {
      std::snprintf(buf, sizeof(buf), "%.17g", e.w);
      f << e.u << ' ' << e.v << ' ' << buf << '\n';
    }
  }
  if (!f) throw std::runtime_error("write failed: " + path);
}

bool Graph::weights_assigned() const {
  for (const Edge& e : edges_)
    if (e.w == -1.0) return false;
  return true;
}

void assign_edge_weights(Graph& g, Rng& rng) {
  std::vector<Edge> edges = g.edges();
  for (Edge& e : edges)
    if (e.w == -1.0) e.w = rng.uniform(0.2, 0.8);
  g = Graph(g.n(), g.directed(), std::move(edges));
}

std::vector<int> bfs_distances(const Graph& g, int src,
                               const std::vector<uint8_t>* allowed) {
  const int n = g.n();
  if (src < 0 || src >= n) throw std::invalid_argument("bfs: source out of range");
  if (allowed && !(*allowed)[src]) throw std::invalid_argument("bfs: source not in induced set");
  std::vector<int> dist(n, n);
  std::deque<int> q;
  dist[src] = 0;
  q.push_back(src);
  while (!q.empty()) {
    int u = q.front();
    q.pop_front();
    for (const auto& [v, w] : g.out_neighbors(u)) {
      (void)w;
      if (dist[v] != n) continue;
      if (allowed && !(*allowed)[v]) continue;
      dist[v] = dist[u] + 1;
      q.push_back(v);
    }
  }
  return dist;
}

Matrix normalized_adjacency(const Graph& g) {
  const int n = g.n();
  Matrix a = Matrix::Identity(n, n);
  for (const Edge& e : g.edges()) {
    a(e.u, e.v) = 1.0;
    a(e.v, e.u) = 1.0;
  }
  Eigen::VectorXd dinv = a.rowwise().sum().array().rsqrt();
  return dinv.asDiagonal() * a * dinv.asDiagonal();
}

Graph barabasi_albert(int n, int m, Rng& rng) {
  if (m < 1) throw std::invalid_argument("barabasi_albert: m must be >= 1");
  if (n < m + 2) throw std::invalid_argument("barabasi_albert: n must exceed the seed clique");
  std::vector<Edge> edges;
  std::vector<int> endpoints;  // every edge endpoint once; sampling it is degree-proportional
  for (int u = 0; u < m + 1; ++u) {
    for (int v = u + 1; v < m + 1; ++v) {
      edges.push_back({u, v, -1.0});
      endpoints.push_back(u);
      endpoints.push_back(v);
    }
  }
  std::vector<int> targets;
  for (int u = m + 1; u < n; ++u) {
    targets.clear();
    while (static_cast<int>(targets.size()) < m) {
      int cand = endpoints[rng.below(endpoints.size())];
      if (std::find(targets.begin(), targets.end(), cand) == targets.end())
        targets.push_back(cand);
    }
    for (int v : targets) {
      edges.push_back({v, u, -1.0});
      endpoints.push_back(v);
      endpoints.push_back(u);
    }
  }
  return Graph(n, false, std::move(edges));
}

}  // namespace srcloc
