#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "srcloc/graph.hpp"
#include "srcloc/rng.hpp"

namespace srcloc {

enum class Baseline { all_negative, random_k, degree_top_k, jordan_center_k };

Baseline baseline_from_string(const std::string& s);
std::string to_string(Baseline b);

// Predict k source nodes among the infected set (all_negative ignores k and
// predicts nothing). Returns a 0/1 indicator over all nodes.
std::vector<uint8_t> run_baseline(Baseline b, const Graph& g,
                                  const std::vector<uint8_t>& infected, int k,
                                  Rng& rng);

}  // namespace srcloc
