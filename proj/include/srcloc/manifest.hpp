#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "srcloc/cascade.hpp"
#include "srcloc/inference.hpp"
#include "srcloc/model.hpp"

namespace srcloc {

/// Full experiment configuration. Serialized as key=value text next to every
/// run's outputs; re-running from that file reproduces the outputs byte for
/// byte.
struct ExperimentManifest {
  // io
  std::string out = "out";
  std::string graph;  // edge-list path; empty means generate a BA graph
  bool directed = false;
  int ba_nodes = 200;
  int ba_attach = 2;
  // simulation
  std::string mechanism = "si";
  double source_ratio = 0.05;
  int source_count = 0;  // overrides ratio when > 0
  int snapshots = 3;     // observed intermediate snapshots (result is extra)
  int cascades = 100;
  double min_coverage = 0.4;
  int block_size = 32;
  double train_fraction = 0.8;
  double sir_recovery = 0.1;
  double glt_base = 0.5;
  bool sources_in_snapshots = false;
  int max_rounds = 0;  // 0 means 4*n
  int retry_factor = 50;
  // model
  int latent_dim = 64;
  int hidden_dim = 128;
  int feature_dim = 128;
  int gcn_layers = 2;
  int rk4_steps = 2;
  int readout_hidden = 128;
  double l2_coeff = 1e-4;
  double train_lr = 0.03;
  int train_epochs = 100;
  bool use_sgd = false;
  // inference
  double infer_lr = 0.001;
  int infer_epochs = 15;
  double threshold = 0.5;
  int top_k = 0;  // 0 means threshold binarization
  std::string match_metric = "wasserstein";  // or "hamming"
  bool match_rep_min = false;
  // bookkeeping
  uint64_t seed = 1;
  std::vector<std::string> methods = {"model"};  // evaluate-only selection
};

uint64_t fnv1a64(const std::string& text);

/// key=value rendering of every field, in declaration order; parseable back
/// by the CLI's --config option.
std::string manifest_text(const ExperimentManifest& m);

/// 16-hex-digit digest of the semantic fields (everything except the output
/// directory and the evaluate method list).
std::string manifest_hash(const ExperimentManifest& m);

void save_manifest(const ExperimentManifest& m, const std::string& path);

SimConfig to_sim_config(const ExperimentManifest& m);
ModelConfig to_model_config(const ExperimentManifest& m);
MatchConfig to_match_config(const ExperimentManifest& m);
RefineConfig to_refine_config(const ExperimentManifest& m);

}  // namespace srcloc
