#include "srcloc/metrics.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace srcloc {

MacroScores macro_scores(const std::vector<uint8_t>& truth,
                         const std::vector<uint8_t>& pred) {
  if (truth.size() != pred.size() || truth.empty())
    throw std::invalid_argument("macro_scores: vectors must share a positive length");
  // counts[t][p]
  double counts[2][2] = {{0.0, 0.0}, {0.0, 0.0}};
  for (size_t i = 0; i < truth.size(); ++i)
    counts[truth[i] ? 1 : 0][pred[i] ? 1 : 0] += 1.0;
  MacroScores out;
  for (int cls = 0; cls < 2; ++cls) {
    const double tp = counts[cls][cls];
    const double fp = counts[1 - cls][cls];
    const double fn = counts[cls][1 - cls];
    const double prec = (tp + fp) > 0.0 ? tp / (tp + fp) : 0.0;
    const double rec = (tp + fn) > 0.0 ? tp / (tp + fn) : 0.0;
    const double f1 = (prec + rec) > 0.0 ? 2.0 * prec * rec / (prec + rec) : 0.0;
    out.precision += 0.5 * prec;
    out.recall += 0.5 * rec;
    out.f1 += 0.5 * f1;
  }
  out.accuracy = (counts[0][0] + counts[1][1]) / static_cast<double>(truth.size());
  return out;
}

double assignment_min_cost(const Matrix& cost) {
  const int k = static_cast<int>(cost.rows());
  if (k == 0 || cost.cols() != k)
    throw std::invalid_argument("assignment_min_cost: matrix must be square and non-empty");
  // Hungarian algorithm with potentials; rows/columns are 1-based internally.
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(k + 1, 0.0), v(k + 1, 0.0);
  std::vector<int> match(k + 1, 0);  // column -> assigned row
  std::vector<int> way(k + 1, 0);
  for (int i = 1; i <= k; ++i) {
    match[0] = i;
    int j0 = 0;
    std::vector<double> minv(k + 1, inf);
    std::vector<char> used(k + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = match[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= k; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= k; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const int j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  double total = 0.0;
  for (int j = 1; j <= k; ++j) total += cost(match[j] - 1, j - 1);
  return total;
}

std::vector<int> top_k_nodes(const std::vector<double>& probs, int k) {
  const int n = static_cast<int>(probs.size());
  if (k < 1 || k > n) throw std::invalid_argument("top_k_nodes: k out of range");
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return probs[a] > probs[b]; });
  order.resize(k);
  std::sort(order.begin(), order.end());
  return order;
}

double average_error_distance(const Graph& g, const std::vector<int>& truth,
                              const std::vector<double>& probs) {
  const int k = static_cast<int>(truth.size());
  if (k == 0) throw std::invalid_argument("average_error_distance: empty truth set");
  if (static_cast<int>(probs.size()) != g.n())
    throw std::invalid_argument("average_error_distance: probability vector length mismatch");
  const std::vector<int> pred = top_k_nodes(probs, k);
  Matrix cost(k, k);
  for (int i = 0; i < k; ++i) {
    const std::vector<int> dist = bfs_distances(g, truth[i]);
    for (int j = 0; j < k; ++j) cost(i, j) = dist[pred[j]];
  }
  return assignment_min_cost(cost) / static_cast<double>(k);
}

}  // namespace srcloc
