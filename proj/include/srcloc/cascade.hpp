/// Diffusion simulators (SI, SIR, threshold) and the snapshot dataset protocol.
#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "srcloc/graph.hpp"
#include "srcloc/rng.hpp"

namespace srcloc {

enum class Mechanism { si, sir, glt };

Mechanism mechanism_from_string(const std::string& s);
std::string mechanism_to_string(Mechanism m);

struct SimConfig {
  Mechanism mechanism = Mechanism::si;
  double source_ratio = 0.05;   // used when source_count == 0
  int source_count = 0;         // fixed number of sources when > 0
  int snapshot_count = 4;       // T: T-1 intermediate snapshots plus the result
  double min_coverage = 0.4;    // keep cascades infecting >= this fraction of nodes
  int max_rounds = 0;           // 0 = 4n safety cap
  double sir_recovery = 0.1;    // per-round recovery probability
  double glt_base = 0.5;        // threshold tau_v = glt_base^deg(v)
  bool sources_in_snapshots = false;
  int cascade_count = 100;
  double train_fraction = 0.8;
  int block_size = 32;
  int retry_factor = 50;        // attempt budget = retry_factor * cascade_count
};

struct Cascade {
  Mechanism mechanism = Mechanism::si;
  std::vector<int> sources;                     // ascending ids
  std::vector<std::pair<int, int>> order;       // (round, node) for non-source infections
  std::vector<std::vector<uint8_t>> snapshots;  // cumulative indicators, length n each
  std::vector<uint8_t> result;                  // final infected indicator, length n
  uint64_t stream = 0;                          // rng stream that produced it
};

/// Draws the source set: ceil(source_ratio*n) nodes (or source_count), without
/// replacement. Threshold cascades restrict eligibility to the top half of ids.
std::vector<int> sample_sources(const Graph& g, const SimConfig& cfg, Rng& rng);

/// Per-round stochastic infection: every infected u attempts each susceptible
/// out-neighbor v with probability w(u,v); new infections activate next round.
Cascade simulate_si(const Graph& g, const std::vector<int>& sources,
                    const SimConfig& cfg, Rng& rng);

/// SI plus recovery: each infectious node draws recovery (prob sir_recovery)
/// right after its own attempts. The result marks ever-infected nodes. With
/// sir_recovery == 0 no recovery randomness is consumed, so the trajectory
/// matches simulate_si under the same seed.
Cascade simulate_sir(const Graph& g, const std::vector<int>& sources,
                     const SimConfig& cfg, Rng& rng);

/// Deterministic threshold cascade: v activates once the weight sum over its
/// infected in-neighbors reaches tau_v = glt_base^(in-neighbor count).
Cascade simulate_glt(const Graph& g, const std::vector<int>& sources,
                     const SimConfig& cfg);

Cascade simulate(const Graph& g, const std::vector<int>& sources,
                 const SimConfig& cfg, Rng& rng);

/// Coverage filter: sources plus infections must reach min_coverage * n nodes.
bool filter_valid(int n, const Cascade& c, const SimConfig& cfg);

/// Sorts non-source infections by (round, id), cuts them into snapshot_count
/// equal groups (remainder to the last), and fills cumulative snapshots plus
/// the result vector. Errors when there are fewer infections than groups.
void partition_snapshots(int n, Cascade& c, const SimConfig& cfg);

struct DatasetBundle {
  int n = 0;
  Mechanism mechanism = Mechanism::si;
  int snapshot_count = 4;
  int block_size = 32;
  std::vector<Cascade> train;
  std::vector<Cascade> test;

  /// Contiguous training blocks as (begin, end) index ranges.
  std::vector<std::pair<int, int>> block_ranges() const;
};

/// Simulates until cascade_count valid cascades are collected (bounded by the
/// retry budget), shuffles, and splits train/test by train_fraction.
DatasetBundle build_dataset(const Graph& g, const SimConfig& cfg, const Rng& base);

struct DatasetFile {
  DatasetBundle bundle;
  std::string graph_file;     // relative sibling name
  std::string manifest_hash;  // hash of the configuration that produced it
};

void save_dataset(const std::string& path, const DatasetFile& file);
DatasetFile load_dataset(const std::string& path);

}  // namespace srcloc
