#include "srcloc/baselines.hpp"

#include <algorithm>
#include <stdexcept>

namespace srcloc {

Baseline baseline_from_string(const std::string& s) {
  if (s == "all_negative") return Baseline::all_negative;
  if (s == "random_k") return Baseline::random_k;
  if (s == "degree_top_k") return Baseline::degree_top_k;
  if (s == "jordan_center_k") return Baseline::jordan_center_k;
  throw std::invalid_argument("unknown baseline: " + s);
}

std::string to_string(Baseline b) {
  switch (b) {
    case Baseline::all_negative: return "all_negative";
    case Baseline::random_k: return "random_k";
    case Baseline::degree_top_k: return "degree_top_k";
    case Baseline::jordan_center_k: return "jordan_center_k";
  }
  throw std::logic_error("unhandled baseline value");
}

std::vector<uint8_t> run_baseline(Baseline b, const Graph& g,
                                  const std::vector<uint8_t>& infected, int k,
                                  Rng& rng) {
  const int n = g.n();
  if (static_cast<int>(infected.size()) != n)
    throw std::invalid_argument("run_baseline: infected vector length mismatch");
  std::vector<uint8_t> pred(n, 0);
  if (b == Baseline::all_negative) return pred;

  std::vector<int> pool;
  for (int v = 0; v < n; ++v)
    if (infected[v]) pool.push_back(v);
  if (k < 1) throw std::invalid_argument("run_baseline: k must be positive");
  if (static_cast<int>(pool.size()) < k)
    throw std::runtime_error("run_baseline: fewer infected nodes than k");

  switch (b) {
    case Baseline::random_k: {
      // partial Fisher-Yates over the infected pool
      for (int i = 0; i < k; ++i) {
        const size_t j = i + rng.below(pool.size() - i);
        std::swap(pool[i], pool[j]);
      }
      for (int i = 0; i < k; ++i) pred[pool[i]] = 1;
      break;
    }
    case Baseline::degree_top_k: {
      std::stable_sort(pool.begin(), pool.end(), [&](int a, int b2) {
        const int da = g.degree(a), db = g.degree(b2);
        if (da != db) return da > db;
        return a < b2;
      });
      for (int i = 0; i < k; ++i) pred[pool[i]] = 1;
      break;
    }
    case Baseline::jordan_center_k: {
      // eccentricity within the infected-induced subgraph; unreachable pairs
      // cost n so isolated infected nodes rank last
      std::vector<std::pair<int, int>> ecc;  // (eccentricity, node)
      for (int v : pool) {
        const std::vector<int> dist = bfs_distances(g, v, &infected);
        int e = 0;
        for (int u : pool) e = std::max(e, dist[u]);
        ecc.emplace_back(e, v);
      }
      std::sort(ecc.begin(), ecc.end());
      for (int i = 0; i < k; ++i) pred[ecc[i].second] = 1;
      break;
    }
    case Baseline::all_negative:
      break;  // handled above
  }
  return pred;
}

}  // namespace srcloc
