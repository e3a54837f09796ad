#include "srcloc/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace srcloc {

MatchIndex build_match_index(const Model& model, const DatasetBundle& data) {
  if (data.train.empty())
    throw std::invalid_argument("build_match_index: no training cascades");
  MatchIndex index;
  for (const auto& [begin, end] : data.block_ranges()) {
    MatchIndex::Block block;
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(data.n);
    for (int i = begin; i < end; ++i) {
      const Cascade& c = data.train[i];
      block.sources.push_back(model.source_row(c));
      block.results.push_back(Model::indicator_row(c.result));
      for (int v = 0; v < data.n; ++v) mean(v) += c.result[v] ? 1.0 : 0.0;
    }
    block.mean_result = mean / static_cast<double>(end - begin);
    index.blocks.push_back(std::move(block));
  }
  return index;
}

double wasserstein_1d(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.empty())
    throw std::invalid_argument("wasserstein_1d: vectors must share a positive length");
  std::vector<double> sa = a, sb = b;
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  double total = 0.0;
  for (size_t i = 0; i < sa.size(); ++i) total += std::abs(sa[i] - sb[i]);
  return total / static_cast<double>(sa.size());
}

namespace {

double hamming_mean(const std::vector<double>& a, const Eigen::VectorXd& b) {
  double total = 0.0;
  for (size_t i = 0; i < a.size(); ++i) total += std::abs(a[i] - b(static_cast<int>(i)));
  return total / static_cast<double>(a.size());
}

double block_distance(const std::vector<double>& result,
                      const MatchIndex::Block& block, const MatchConfig& cfg) {
  auto to_vec = [](const Eigen::VectorXd& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
  };
  if (!cfg.rep_min) {
    if (cfg.hamming) return hamming_mean(result, block.mean_result);
    return wasserstein_1d(result, to_vec(block.mean_result));
  }
  double best = std::numeric_limits<double>::infinity();
  for (const Matrix& member : block.results) {
    const Eigen::VectorXd mv = member.row(0).transpose();
    const double d = cfg.hamming ? hamming_mean(result, mv)
                                 : wasserstein_1d(result, to_vec(mv));
    best = std::min(best, d);
  }
  return best;
}

}  // namespace

int match_block(const MatchIndex& index, const std::vector<double>& result,
                const MatchConfig& cfg) {
  if (index.blocks.empty()) throw std::invalid_argument("match_block: empty index");
  int best = 0;
  double best_dist = block_distance(result, index.blocks[0], cfg);
  for (size_t b = 1; b < index.blocks.size(); ++b) {
    const double d = block_distance(result, index.blocks[b], cfg);
    if (d < best_dist) {
      best_dist = d;
      best = static_cast<int>(b);
    }
  }
  return best;
}

Matrix aggregate_latent(const Model& model, const MatchIndex::Block& block,
                        const Matrix& snaps_row) {
  if (block.sources.empty())
    throw std::invalid_argument("aggregate_latent: empty block");
  Matrix acc = Matrix::Zero(1, model.config().latent_dim);
  for (const Matrix& s : block.sources) {
    Tape tape;
    Model::Bound bound = model.bind(tape);
    Tensor s_t = tape.input(s);
    Tensor snaps_t = tape.input(snaps_row);
    Model::Latent lat = model.encode(tape, bound, s_t, snaps_t, nullptr);
    acc += lat.mu.value();
  }
  return acc / static_cast<double>(block.sources.size());
}

RefineResult refine(const Model& model, const MatchIndex::Block& block,
                    const Matrix& z_bar, const Cascade& test,
                    const RefineConfig& cfg) {
  const int n = model.n();
  const Matrix snaps_row = model.snapshot_row(test);
  const Matrix snap_cols = model.snapshot_cols(test);
  const Matrix y_true = Model::indicator_row(test.result);

  // Initial estimate: generate from the aggregated latent.
  Matrix current;
  {
    Tape tape;
    Model::Bound bound = model.bind(tape);
    Tensor z = tape.input(z_bar);
    Tensor snaps = tape.input(snaps_row);
    current = model.generate(tape, bound, z, snaps).value();
  }

  // Per-member generator outputs are constant across refinement epochs.
  const int members = static_cast<int>(block.sources.size());
  Matrix log_g(members, n), log_one_minus_g(members, n);
  for (int j = 0; j < members; ++j) {
    Tape tape;
    Model::Bound bound = model.bind(tape);
    Tensor s_t = tape.input(block.sources[j]);
    Tensor snaps_t = tape.input(snaps_row);
    Model::Latent lat = model.encode(tape, bound, s_t, snaps_t, nullptr);
    Tensor g = model.generate(tape, bound, lat.z, snaps_t);
    Matrix gv = g.value().cwiseMax(1e-7).cwiseMin(1.0 - 1e-7);
    log_g.row(j) = gv.array().log().matrix();
    log_one_minus_g.row(j) = (1.0 - gv.array()).log().matrix();
  }

  RefineResult res;
  res.z_bar = z_bar;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    Tape tape;
    Model::Bound bound = model.bind(tape);
    Tensor s_star = tape.input(current);
    Tensor y_hat = model.propagate(tape, bound, s_star, snap_cols);
    Tensor fit = log(loss_fp(tape.input(y_true), y_hat));
    Tensor st = transpose(s_star);
    Tensor ones = tape.input(Matrix::Ones(n, 1));
    Tensor loglik = add(matmul(tape.input(log_g), st),
                        matmul(tape.input(log_one_minus_g), sub(ones, st)));
    Tensor objective = sub(fit, logsumexp(loglik));
    tape.backward(objective);
    res.trace.push_back(objective.value()(0, 0));
    current -= cfg.lr * s_star.grad();
    current = current.cwiseMax(1e-6).cwiseMin(1.0 - 1e-6);
  }

  res.probs.assign(current.data(), current.data() + n);
  res.pred.assign(n, 0);
  if (cfg.top_k > 0) {
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return res.probs[a] > res.probs[b];
    });
    for (int i = 0; i < std::min(cfg.top_k, n); ++i) res.pred[order[i]] = 1;
  } else {
    for (int v = 0; v < n; ++v) res.pred[v] = res.probs[v] > cfg.threshold ? 1 : 0;
  }
  return res;
}

RefineResult localize(const Model& model, const MatchIndex& index,
                      const Cascade& test, const RefineConfig& cfg) {
  std::vector<double> result(test.result.size());
  for (size_t i = 0; i < test.result.size(); ++i) result[i] = test.result[i] ? 1.0 : 0.0;
  const int block_id = match_block(index, result, cfg.match);
  const Matrix snaps_row = model.snapshot_row(test);
  const Matrix z_bar = aggregate_latent(model, index.blocks[block_id], snaps_row);
  RefineResult res = refine(model, index.blocks[block_id], z_bar, test, cfg);
  res.block = block_id;
  return res;
}

}  // namespace srcloc
