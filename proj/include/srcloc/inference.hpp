/// Source localization: block matching, latent aggregation, refinement.
#pragma once

#include <vector>

#include "srcloc/cascade.hpp"
#include "srcloc/model.hpp"

namespace srcloc {

/// Archived training blocks: every member's source vector and final result,
/// plus the node-wise mean result used as the block representative.
struct MatchIndex {
  struct Block {
    std::vector<Matrix> sources;      // (1 x n) binary rows
    std::vector<Matrix> results;      // (1 x n) binary rows
    Eigen::VectorXd mean_result;      // node-wise mean over members
  };
  std::vector<Block> blocks;
};

MatchIndex build_match_index(const Model& model, const DatasetBundle& data);

/// Mean absolute difference of the sorted values (1-D optimal transport with
/// uniform weights).
double wasserstein_1d(const std::vector<double>& a, const std::vector<double>& b);

struct MatchConfig {
  bool hamming = false;  // mean absolute difference without sorting
  bool rep_min = false;  // min distance over members instead of the mean vector
};

/// Index of the closest block (ties resolved toward the lower index).
int match_block(const MatchIndex& index, const std::vector<double>& result,
                const MatchConfig& cfg = {});

/// Mean of the posterior means of the block's source vectors, each encoded
/// against the test snapshots with zero noise. (1 x K).
Matrix aggregate_latent(const Model& model, const MatchIndex::Block& block,
                        const Matrix& snaps_row);

struct RefineConfig {
  double lr = 0.001;
  int epochs = 15;
  double threshold = 0.5;  // binarize strictly above
  int top_k = 0;           // when > 0, predict exactly the k most probable nodes
  MatchConfig match;
};

struct RefineResult {
  int block = -1;
  Matrix z_bar;                 // aggregated latent (1 x K)
  std::vector<double> probs;    // refined source probabilities
  std::vector<uint8_t> pred;    // binarized prediction
  std::vector<double> trace;    // objective value per refinement epoch
};

/// Gradient refinement of the generated source estimate: descends
/// log(mse(result, propagate(s))) - logsumexp_j loglik(s | generator sample j)
/// with respect to s only; model parameters stay untouched.
RefineResult refine(const Model& model, const MatchIndex::Block& block,
                    const Matrix& z_bar, const Cascade& test,
                    const RefineConfig& cfg);

/// Full pipeline for one test cascade: match, aggregate, refine.
RefineResult localize(const Model& model, const MatchIndex& index,
                      const Cascade& test, const RefineConfig& cfg);

}  // namespace srcloc
