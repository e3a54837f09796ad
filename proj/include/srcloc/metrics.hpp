/// Classification scores and the assignment-based error distance.
#pragma once

#include <cstdint>
#include <vector>

#include "srcloc/graph.hpp"

namespace srcloc {

struct MacroScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double accuracy = 0.0;
};

/// Macro-averages precision/recall/F1 over the two classes (positive and
/// negative); any empty denominator contributes 0 for that class.
MacroScores macro_scores(const std::vector<uint8_t>& truth,
                         const std::vector<uint8_t>& pred);

/// Minimum-cost perfect assignment on a square cost matrix (Hungarian
/// algorithm, O(k^3)).
double assignment_min_cost(const Matrix& cost);

/// The k most probable nodes, ties resolved toward the lower id.
std::vector<int> top_k_nodes(const std::vector<double>& probs, int k);

/// Average error distance: hop distances between true sources and the top-k
/// predictions under the best one-to-one assignment, divided by k.
/// Unreachable pairs cost n.
double average_error_distance(const Graph& g, const std::vector<int>& truth,
                              const std::vector<double>& probs);

}  // namespace srcloc
