#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "srcloc/manifest.hpp"

namespace srcloc {

/// One line of the metrics table. seed and cascade hold numbers or "mean".
struct MetricRow {
  std::string dataset;
  std::string mechanism;
  std::string method;
  std::string seed;
  std::string cascade;
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f1 = 0.0;
  double accuracy = 0.0;
  double aed = 0.0;
};

std::string metrics_csv(const std::vector<MetricRow>& rows);
void write_metrics_csv(const std::string& path, const std::vector<MetricRow>& rows);

/// One localization record from results.jsonl.
struct ResultRecord {
  int index = 0;
  uint64_t stream = 0;
  int block = -1;
  std::vector<int> sources;     // true source ids (echoed for convenience)
  std::vector<int> pred;        // predicted source ids
  std::vector<double> probs;    // refined probabilities, length n
  std::vector<double> trace;    // refinement objective per epoch
};

/// Reads results.jsonl; when expect_hash is non-empty the file's recorded
/// configuration digest must match it.
std::vector<ResultRecord> load_results(const std::string& path,
                                       const std::string& expect_hash);

/// Generate (or load) the graph and simulate the cascade dataset.
/// Writes graph.txt, dataset.txt, manifest.ini under m.out.
void cmd_simulate(const ExperimentManifest& m);

/// Train the model on the simulated dataset.
/// Writes checkpoint.txt and loss_trace.csv under m.out.
void cmd_train(const ExperimentManifest& m);

/// Localize sources for every test cascade.
/// Writes results.jsonl under m.out.
void cmd_infer(const ExperimentManifest& m);

/// Score the inference results (and any requested baselines) against the
/// test cascades. Writes metrics.csv under m.out and returns its rows.
std::vector<MetricRow> cmd_evaluate(const ExperimentManifest& m);

/// Run the full pipeline once per seed (outputs under m.out/seed_<s>/) and
/// write a combined report.csv with per-seed aggregate rows plus one mean
/// row per method.
std::vector<MetricRow> cmd_report(const ExperimentManifest& m,
                                  const std::vector<uint64_t>& seeds);

}  // namespace srcloc
