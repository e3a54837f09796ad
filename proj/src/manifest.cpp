#include "srcloc/manifest.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace srcloc {

namespace {

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void kv(std::ostringstream& os, const char* key, const std::string& v) {
  os << key << "=" << v << "\n";
}
void kv(std::ostringstream& os, const char* key, const char* v) {
  os << key << "=" << v << "\n";
}
void kv(std::ostringstream& os, const char* key, bool v) {
  os << key << "=" << (v ? "true" : "false") << "\n";
}
void kv(std::ostringstream& os, const char* key, int v) {
  os << key << "=" << v << "\n";
}
void kv(std::ostringstream& os, const char* key, uint64_t v) {
  os << key << "=" << v << "\n";
}
void kv(std::ostringstream& os, const char* key, double v) {
  os << key << "=" << fmt_double(v) << "\n";
}

// Everything that influences computed bytes, in a fixed order. The output
// directory and the evaluate method list are presentation-only.
std::string semantic_text(const ExperimentManifest& m) {
  std::ostringstream os;
  kv(os, "graph", m.graph);
  kv(os, "directed", m.directed);
  kv(os, "ba_nodes", m.ba_nodes);
  kv(os, "ba_attach", m.ba_attach);
  kv(os, "mechanism", m.mechanism);
  kv(os, "source_ratio", m.source_ratio);
  kv(os, "source_count", m.source_count);
  kv(os, "snapshots", m.snapshots);
  kv(os, "cascades", m.cascades);
  kv(os, "min_coverage", m.min_coverage);
  kv(os, "block_size", m.block_size);
  kv(os, "train_fraction", m.train_fraction);
  kv(os, "sir_recovery", m.sir_recovery);
  kv(os, "glt_base", m.glt_base);
  kv(os, "sources_in_snapshots", m.sources_in_snapshots);
  kv(os, "max_rounds", m.max_rounds);
  kv(os, "retry_factor", m.retry_factor);
  kv(os, "latent_dim", m.latent_dim);
  kv(os, "hidden_dim", m.hidden_dim);
  kv(os, "feature_dim", m.feature_dim);
  kv(os, "gcn_layers", m.gcn_layers);
  kv(os, "rk4_steps", m.rk4_steps);
  kv(os, "readout_hidden", m.readout_hidden);
  kv(os, "l2_coeff", m.l2_coeff);
  kv(os, "train_lr", m.train_lr);
  kv(os, "train_epochs", m.train_epochs);
  kv(os, "use_sgd", m.use_sgd);
  kv(os, "infer_lr", m.infer_lr);
  kv(os, "infer_epochs", m.infer_epochs);
  kv(os, "threshold", m.threshold);
  kv(os, "top_k", m.top_k);
  kv(os, "match_metric", m.match_metric);
  kv(os, "match_rep_min", m.match_rep_min);
  kv(os, "seed", m.seed);
  return os.str();
}

}  // namespace

uint64_t fnv1a64(const std::string& text) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string manifest_text(const ExperimentManifest& m) {
  std::ostringstream os;
  kv(os, "out", m.out);
  os << semantic_text(m);
  std::string joined;
  for (size_t i = 0; i < m.methods.size(); ++i) {
    if (i) joined += ",";
    joined += m.methods[i];
  }
  kv(os, "methods", joined);
  return os.str();
}

std::string manifest_hash(const ExperimentManifest& m) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(semantic_text(m))));
  return buf;
}

void save_manifest(const ExperimentManifest& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write manifest: " + path);
  out << "# srcloc manifest (hash " << manifest_hash(m) << ")\n";
  out << manifest_text(m);
  if (!out) throw std::runtime_error("write failed: " + path);
}

SimConfig to_sim_config(const ExperimentManifest& m) {
  SimConfig cfg;
  cfg.mechanism = mechanism_from_string(m.mechanism);
  cfg.source_ratio = m.source_ratio;
  cfg.source_count = m.source_count;
  cfg.snapshot_count = m.snapshots + 1;  // observed snapshots plus the result
  cfg.min_coverage = m.min_coverage;
  cfg.max_rounds = m.max_rounds;
  cfg.sir_recovery = m.sir_recovery;
  cfg.glt_base = m.glt_base;
  cfg.sources_in_snapshots = m.sources_in_snapshots;
  cfg.cascade_count = m.cascades;
  cfg.train_fraction = m.train_fraction;
  cfg.block_size = m.block_size;
  cfg.retry_factor = m.retry_factor;
  return cfg;
}

ModelConfig to_model_config(const ExperimentManifest& m) {
  ModelConfig cfg;
  cfg.latent_dim = m.latent_dim;
  cfg.hidden_dim = m.hidden_dim;
  cfg.feature_dim = m.feature_dim;
  cfg.gcn_layers = m.gcn_layers;
  cfg.rk4_steps = m.rk4_steps;
  cfg.readout_hidden = m.readout_hidden;
  cfg.snapshots = m.snapshots;
  cfg.l2_coeff = m.l2_coeff;
  cfg.train_lr = m.train_lr;
  cfg.train_epochs = m.train_epochs;
  cfg.use_sgd = m.use_sgd;
  return cfg;
}

MatchConfig to_match_config(const ExperimentManifest& m) {
  MatchConfig cfg;
  if (m.match_metric == "hamming")
    cfg.hamming = true;
  else if (m.match_metric != "wasserstein")
    throw std::invalid_argument("unknown match metric: " + m.match_metric);
  cfg.rep_min = m.match_rep_min;
  return cfg;
}

RefineConfig to_refine_config(const ExperimentManifest& m) {
  RefineConfig cfg;
  cfg.lr = m.infer_lr;
  cfg.epochs = m.infer_epochs;
  cfg.threshold = m.threshold;
  cfg.top_k = m.top_k;
  cfg.match = to_match_config(m);
  return cfg;
}

}  // namespace srcloc
