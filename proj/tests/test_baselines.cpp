#include <doctest.h>

#include <algorithm>
#include <map>
#include <vector>

#include "srcloc/baselines.hpp"

using namespace srcloc;

namespace {

Graph path_graph(int n) {
  std::vector<Edge> edges;
  for (int i = 0; i + 1 < n; ++i) edges.push_back({i, i + 1, 0.5});
  return Graph(n, false, edges);
}

int popcount(const std::vector<uint8_t>& v) {
  int c = 0;
  for (uint8_t b : v) c += b;
  return c;
}

}  // namespace

TEST_CASE("baseline names round-trip") {
  for (Baseline b : {Baseline::all_negative, Baseline::random_k,
                     Baseline::degree_top_k, Baseline::jordan_center_k})
    CHECK(baseline_from_string(to_string(b)) == b);
  CHECK_THROWS_AS(baseline_from_string("lpsi"), std::invalid_argument);
}

TEST_CASE("the all-negative baseline predicts nothing") {
  Graph g = path_graph(5);
  std::vector<uint8_t> infected{1, 1, 1, 0, 0};
  Rng rng(1);
  std::vector<uint8_t> pred =
      run_baseline(Baseline::all_negative, g, infected, 2, rng);
  CHECK(popcount(pred) == 0);
}

TEST_CASE("random-k picks k distinct infected nodes") {
  Graph g = path_graph(10);
  std::vector<uint8_t> infected(10, 0);
  for (int v : {1, 3, 4, 7, 8}) infected[v] = 1;
  Rng rng(5);
  std::map<int, int> chosen_counts;
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<uint8_t> pred =
        run_baseline(Baseline::random_k, g, infected, 3, rng);
    CHECK(popcount(pred) == 3);
    for (int v = 0; v < 10; ++v)
      if (pred[v]) {
        CHECK(infected[v] == 1);
        ++chosen_counts[v];
      }
  }
  CHECK(chosen_counts.size() == 5);  // every infected node shows up eventually
}

TEST_CASE("degree baseline prefers hubs and breaks ties by id") {
  // star around 0 plus an extra edge 1-2 making their degrees 2
  Graph g(6, false,
          {{0, 1, 0.5}, {0, 2, 0.5}, {0, 3, 0.5}, {0, 4, 0.5}, {0, 5, 0.5}, {1, 2, 0.5}});
  std::vector<uint8_t> infected(6, 1);
  Rng rng(2);
  std::vector<uint8_t> pred =
      run_baseline(Baseline::degree_top_k, g, infected, 1, rng);
  CHECK(pred == std::vector<uint8_t>{1, 0, 0, 0, 0, 0});

  pred = run_baseline(Baseline::degree_top_k, g, infected, 3, rng);
  CHECK(pred == std::vector<uint8_t>{1, 1, 1, 0, 0, 0});  // tie 3,4,5 -> none

  // only infected nodes are eligible even when a hub is uninfected
  std::vector<uint8_t> partial(6, 1);
  partial[0] = 0;
  pred = run_baseline(Baseline::degree_top_k, g, partial, 1, rng);
  CHECK(pred == std::vector<uint8_t>{0, 1, 0, 0, 0, 0});
}

TEST_CASE("jordan center on the fully infected path is the midpoint") {
  Graph g = path_graph(3);
  std::vector<uint8_t> infected{1, 1, 1};
  Rng rng(3);
  std::vector<uint8_t> pred =
      run_baseline(Baseline::jordan_center_k, g, infected, 1, rng);
  CHECK(pred == std::vector<uint8_t>{0, 1, 0});
}

TEST_CASE("jordan center works inside the infected-induced subgraph") {
  // path 0-1-2-3-4 plus an uninfected hub 5 adjacent to everything. Going
  // through the hub would collapse all eccentricities to 2 and the tie rule
  // would pick node 0; restricted to infected nodes the center is node 2.
  std::vector<Edge> edges;
  for (int i = 0; i + 1 < 5; ++i) edges.push_back({i, i + 1, 0.5});
  for (int i = 0; i < 5; ++i) edges.push_back({i, 5, 0.5});
  Graph g(6, false, edges);
  std::vector<uint8_t> infected{1, 1, 1, 1, 1, 0};
  Rng rng(4);
  std::vector<uint8_t> pred =
      run_baseline(Baseline::jordan_center_k, g, infected, 1, rng);
  CHECK(pred == std::vector<uint8_t>{0, 0, 1, 0, 0, 0});
}

TEST_CASE("disconnected infected sets fall back to the id tie rule") {
  // {0} and {2,3,4} cannot reach each other, so every eccentricity is the
  // unreachable sentinel and the lowest id wins
  Graph g = path_graph(5);
  std::vector<uint8_t> infected{1, 0, 1, 1, 1};
  Rng rng(4);
  std::vector<uint8_t> pred =
      run_baseline(Baseline::jordan_center_k, g, infected, 1, rng);
  CHECK(pred == std::vector<uint8_t>{1, 0, 0, 0, 0});
}

TEST_CASE("jordan center is invariant to relabeling up to the tie rule") {
  // path 0-1-2-3-4: center 2. Relabeled by v -> 4-v: center still node
  // labeled 2 in the new graph.
  Graph g = path_graph(5);
  std::vector<Edge> relabeled;
  for (const Edge& e : g.edges()) relabeled.push_back({4 - e.u, 4 - e.v, e.w});
  Graph h(5, false, relabeled);
  std::vector<uint8_t> infected(5, 1);
  Rng r1(5), r2(5);
  std::vector<uint8_t> pg = run_baseline(Baseline::jordan_center_k, g, infected, 1, r1);
  std::vector<uint8_t> ph = run_baseline(Baseline::jordan_center_k, h, infected, 1, r2);
  CHECK(pg == ph);  // the center is its own mirror image here
  CHECK(pg[2] == 1);
}

TEST_CASE("k-parameterized baselines reject an undersized infected set") {
  Graph g = path_graph(5);
  std::vector<uint8_t> infected{1, 1, 0, 0, 0};
  Rng rng(6);
  CHECK_THROWS_AS(run_baseline(Baseline::random_k, g, infected, 3, rng),
                  std::runtime_error);
  CHECK_THROWS_AS(run_baseline(Baseline::degree_top_k, g, infected, 3, rng),
                  std::runtime_error);
  CHECK_THROWS_AS(run_baseline(Baseline::jordan_center_k, g, infected, 3, rng),
                  std::runtime_error);
  CHECK_NOTHROW(run_baseline(Baseline::all_negative, g, infected, 3, rng));
  CHECK_THROWS_AS(run_baseline(Baseline::random_k, g, infected, 0, rng),
                  std::invalid_argument);
}

TEST_CASE("every baseline prediction is a subset of the infected set") {
  Rng seed(7);
  Graph g = barabasi_albert(40, 2, seed);
  std::vector<uint8_t> infected(40, 0);
  for (int v = 0; v < 40; v += 2) infected[v] = 1;
  for (Baseline b : {Baseline::random_k, Baseline::degree_top_k,
                     Baseline::jordan_center_k}) {
    Rng rng(8);
    std::vector<uint8_t> pred = run_baseline(b, g, infected, 5, rng);
    CHECK(popcount(pred) == 5);
    for (int v = 0; v < 40; ++v)
      if (pred[v]) CHECK(infected[v] == 1);
  }
}
