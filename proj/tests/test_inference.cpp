#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "srcloc/inference.hpp"

using namespace srcloc;

namespace {

Graph toy_graph(int n, uint64_t seed) {
  Rng rng(seed);
  Graph g = barabasi_albert(n, 2, rng);
  Rng wr = rng.derive(1);
  assign_edge_weights(g, wr);
  return g;
}

MatchIndex::Block block_of(const std::vector<std::vector<double>>& results) {
  MatchIndex::Block b;
  const int n = static_cast<int>(results[0].size());
  b.mean_result = Eigen::VectorXd::Zero(n);
  for (const auto& r : results) {
    Matrix row(1, n);
    for (int j = 0; j < n; ++j) row(0, j) = r[j];
    b.results.push_back(row);
    b.sources.push_back(Matrix::Zero(1, n));
    for (int j = 0; j < n; ++j) b.mean_result(j) += r[j];
  }
  b.mean_result /= static_cast<double>(results.size());
  return b;
}

// Path 0-1-2-3-4-5 with uniform weights 0.6: a threshold cascade from any
// single source sweeps the whole path, so the result is the complement of
// the source and the snapshots are its growing neighborhoods.
Cascade path_cascade(const Graph& g, int source, int snapshot_count) {
  SimConfig cfg;
  cfg.mechanism = Mechanism::glt;
  cfg.snapshot_count = snapshot_count;
  Cascade c = simulate_glt(g, {source}, cfg);
  partition_snapshots(g.n(), c, cfg);
  return c;
}

}  // namespace

TEST_CASE("sorted transport distance on hand examples") {
  CHECK(wasserstein_1d({0, 1}, {1, 0}) == 0.0);  // same multiset
  CHECK(wasserstein_1d({0, 0}, {0.5, 0}) == doctest::Approx(0.25));
  CHECK(wasserstein_1d({1, 2, 3}, {1, 2, 3}) == 0.0);
  CHECK(wasserstein_1d({0, 0, 0}, {1, 1, 1}) == doctest::Approx(1.0));
  CHECK_THROWS_AS(wasserstein_1d({1.0}, {1.0, 2.0}), std::invalid_argument);
}

TEST_CASE("sorted transport distance is a pseudometric on random pairs") {
  Rng rng(500);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + static_cast<int>(rng.below(12));
    std::vector<double> a(n), b(n), c(n);
    for (int i = 0; i < n; ++i) {
      a[i] = rng.uniform();
      b[i] = rng.uniform();
      c[i] = rng.uniform();
    }
    const double dab = wasserstein_1d(a, b);
    const double dba = wasserstein_1d(b, a);
    CHECK(dab >= 0.0);
    CHECK(dab == doctest::Approx(dba).epsilon(1e-12));
    CHECK(wasserstein_1d(a, a) == 0.0);
    // permutation invariance
    std::vector<double> ap = a;
    std::reverse(ap.begin(), ap.end());
    CHECK(wasserstein_1d(ap, b) == doctest::Approx(dab).epsilon(1e-12));
    // triangle inequality
    CHECK(dab <= wasserstein_1d(a, c) + wasserstein_1d(c, b) + 1e-12);
  }
}

TEST_CASE("block matching picks the closest representative") {
  MatchIndex index;
  index.blocks.push_back(block_of({{0.0, 0.0, 0.0, 0.0}}));
  index.blocks.push_back(block_of({{1.0, 1.0, 0.0, 0.0}}));
  index.blocks.push_back(block_of({{1.0, 1.0, 1.0, 1.0}}));

  CHECK(match_block(index, {1.0, 1.0, 0.0, 0.0}) == 1);
  CHECK(match_block(index, {1.0, 0.9, 1.0, 0.9}) == 2);
  CHECK(match_block(index, {0.0, 0.1, 0.0, 0.0}) == 0);

  // exact tie (blocks 0 and 2 are equidistant from half-ones): lowest index
  CHECK(match_block(index, {0.5, 0.5, 0.5, 0.5}) == 0);

  MatchIndex empty;
  CHECK_THROWS_AS(match_block(empty, {0.0}), std::invalid_argument);
}

TEST_CASE("sorted matching cannot see positions but positional matching can") {
  MatchIndex index;
  index.blocks.push_back(block_of({{1.0, 0.0, 0.0, 0.0}}));
  index.blocks.push_back(block_of({{0.0, 0.0, 0.0, 1.0}}));
  // same multiset as both blocks: sorted distance ties to block 0
  CHECK(match_block(index, {0.0, 0.0, 0.0, 1.0}) == 0);
  MatchConfig pos;
  pos.hamming = true;
  CHECK(match_block(index, {0.0, 0.0, 0.0, 1.0}, pos) == 1);
}

TEST_CASE("member-wise matching uses the closest member") {
  MatchIndex index;
  // block 0 mean sits at 0.5 but its members are the extremes
  index.blocks.push_back(block_of({{0.0, 0.0}, {1.0, 1.0}}));
  index.blocks.push_back(block_of({{0.7, 0.7}}));
  MatchConfig cfg;
  CHECK(match_block(index, {1.0, 1.0}, cfg) == 1);  // mean dist 0.5 vs 0.3
  cfg.rep_min = true;
  CHECK(match_block(index, {1.0, 1.0}, cfg) == 0);  // exact member hit
}

TEST_CASE("latent aggregation averages posterior means") {
  Graph g = toy_graph(10, 70);
  ModelConfig cfg;
  cfg.latent_dim = 3;
  cfg.hidden_dim = 6;
  cfg.feature_dim = 4;
  cfg.gcn_layers = 1;
  Model model(g, cfg, 42);

  Matrix snaps = Matrix::Zero(1, 3 * 10);
  snaps(0, 2) = 1.0;
  auto mu_of = [&](const Matrix& source) {
    Tape tape;
    Model::Bound bound = model.bind(tape);
    return model
        .encode(tape, bound, tape.input(source), tape.input(snaps), nullptr)
        .mu.value();
  };

  Matrix s1 = Matrix::Zero(1, 10);
  s1(0, 1) = 1.0;
  Matrix s2 = Matrix::Zero(1, 10);
  s2(0, 7) = 1.0;

  MatchIndex::Block single;
  single.sources = {s1};
  single.results = {Matrix::Zero(1, 10)};
  Matrix z1 = aggregate_latent(model, single, snaps);
  CHECK((z1 - mu_of(s1)).cwiseAbs().maxCoeff() < 1e-14);

  MatchIndex::Block dup;
  dup.sources = {s1, s1};
  dup.results = {Matrix::Zero(1, 10), Matrix::Zero(1, 10)};
  Matrix z2 = aggregate_latent(model, dup, snaps);
  CHECK((z2 - z1).cwiseAbs().maxCoeff() < 1e-14);

  MatchIndex::Block pair;
  pair.sources = {s1, s2};
  pair.results = {Matrix::Zero(1, 10), Matrix::Zero(1, 10)};
  Matrix z3 = aggregate_latent(model, pair, snaps);
  Matrix mid = 0.5 * (mu_of(s1) + mu_of(s2));
  CHECK((z3 - mid).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("match index mirrors the training blocks") {
  Graph g = toy_graph(20, 71);
  ModelConfig cfg;
  cfg.latent_dim = 2;
  cfg.hidden_dim = 4;
  cfg.feature_dim = 4;
  cfg.gcn_layers = 1;
  Model model(g, cfg, 1);
  SimConfig sim;
  sim.cascade_count = 9;
  sim.block_size = 3;
  DatasetBundle data = build_dataset(g, sim, Rng(2));
  MatchIndex index = build_match_index(model, data);
  REQUIRE(index.blocks.size() == 3);  // 7 train cascades in blocks of 3
  CHECK(index.blocks[0].sources.size() == 3);
  CHECK(index.blocks[1].sources.size() == 3);
  CHECK(index.blocks[2].sources.size() == 1);
  // block mean equals the member mean
  Eigen::VectorXd manual = Eigen::VectorXd::Zero(20);
  for (const Matrix& r : index.blocks[0].results) manual += r.row(0).transpose();
  manual /= 3.0;
  CHECK((index.blocks[0].mean_result - manual).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("refinement respects the epoch budget and freezes parameters") {
  Graph g = toy_graph(12, 72);
  ModelConfig cfg;
  cfg.latent_dim = 3;
  cfg.hidden_dim = 5;
  cfg.feature_dim = 4;
  cfg.gcn_layers = 1;
  Model model(g, cfg, 77);
  SimConfig sim;
  sim.cascade_count = 5;
  sim.block_size = 2;
  DatasetBundle data = build_dataset(g, sim, Rng(3));
  MatchIndex index = build_match_index(model, data);
  const Cascade& test = data.test[0];

  ParamSet before;
  for (const auto& e : model.params().entries()) before.add(e.name, e.value);

  RefineConfig rc;
  rc.epochs = 6;
  RefineResult res = localize(model, index, test, rc);
  CHECK(res.block >= 0);
  CHECK(res.block < static_cast<int>(index.blocks.size()));
  CHECK(res.trace.size() == 6);
  for (double v : res.trace) CHECK(std::isfinite(v));
  for (double p : res.probs) {
    CHECK(p >= 1e-6);
    CHECK(p <= 1.0 - 1e-6);
  }
  CHECK(model.params().same_values(before));  // inference never trains

  // zero epochs: the prediction is the binarized initial generation
  RefineConfig rc0;
  rc0.epochs = 0;
  RefineResult res0 = localize(model, index, test, rc0);
  CHECK(res0.trace.empty());
  Matrix z = aggregate_latent(model, index.blocks[res0.block],
                              model.snapshot_row(test));
  Tape tape;
  Model::Bound bound = model.bind(tape);
  Matrix init =
      model.generate(tape, bound, tape.input(z), tape.input(model.snapshot_row(test)))
          .value();
  for (int j = 0; j < 12; ++j) {
    CHECK(res0.probs[j] == doctest::Approx(std::clamp(init(0, j), 1e-6, 1.0 - 1e-6))
                               .epsilon(1e-12));
    CHECK(res0.pred[j] == (res0.probs[j] > 0.5 ? 1 : 0));
  }

  // determinism
  RefineResult res2 = localize(model, index, test, rc);
  CHECK(res2.block == res.block);
  CHECK(res2.probs == res.probs);
  CHECK(res2.pred == res.pred);
  CHECK(res2.trace == res.trace);
}

TEST_CASE("top-k binarization predicts exactly k nodes") {
  Graph g = toy_graph(12, 73);
  ModelConfig cfg;
  cfg.latent_dim = 2;
  cfg.hidden_dim = 4;
  cfg.feature_dim = 4;
  cfg.gcn_layers = 1;
  Model model(g, cfg, 5);
  SimConfig sim;
  sim.cascade_count = 5;
  sim.block_size = 2;
  DatasetBundle data = build_dataset(g, sim, Rng(4));
  MatchIndex index = build_match_index(model, data);
  RefineConfig rc;
  rc.epochs = 2;
  rc.top_k = 3;
  RefineResult res = localize(model, index, data.test[0], rc);
  int ones = 0;
  for (uint8_t b : res.pred) ones += b;
  CHECK(ones == 3);
}

TEST_CASE("a trained model recovers the source on the separable path fixture") {
  // six nodes in a line, every source produces a distinct cascade shape
  std::vector<Edge> edges;
  for (int i = 0; i + 1 < 6; ++i) edges.push_back({i, i + 1, 0.6});
  Graph g(6, false, edges);

  const int T = 4;  // three observed snapshots plus the result
  DatasetBundle data;
  data.n = 6;
  data.mechanism = Mechanism::glt;
  data.snapshot_count = T;
  data.block_size = 3;
  for (int source = 0; source < 6; ++source) {
    Cascade c = path_cascade(g, source, T);
    for (int copy = 0; copy < 3; ++copy) data.train.push_back(c);
  }
  data.test.push_back(path_cascade(g, 2, T));

  ModelConfig cfg;
  cfg.latent_dim = 4;
  cfg.hidden_dim = 16;
  cfg.feature_dim = 16;
  cfg.gcn_layers = 1;
  cfg.rk4_steps = 1;
  cfg.train_epochs = 80;
  Model model(g, cfg, 424242);
  Rng noise(99);
  TrainStats stats = model.train(data, noise);
  CHECK(stats.epoch_loss.back() < stats.epoch_loss.front());

  MatchIndex index = build_match_index(model, data);
  RefineConfig rc;
  rc.epochs = 15;
  rc.top_k = 1;
  rc.match.hamming = true;  // sorted matching cannot distinguish complements
  RefineResult res = localize(model, index, data.test[0], rc);
  CHECK(res.block == 2);  // blocks are one source each, in id order
  CHECK(res.pred[2] == 1);
}
