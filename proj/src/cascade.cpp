#include "srcloc/cascade.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <stdexcept>

namespace srcloc {

using json = nlohmann::json;

Mechanism mechanism_from_string(const std::string& s) {
  if (s == "si") return Mechanism::si;
  if (s == "sir") return Mechanism::sir;
  if (s == "glt") return Mechanism::glt;
  throw std::invalid_argument("unknown mechanism: " + s);
}

std::string mechanism_to_string(Mechanism m) {
  switch (m) {
    case Mechanism::si: return "si";
    case Mechanism::sir: return "sir";
    case Mechanism::glt: return "glt";
  }
  throw std::invalid_argument("unknown mechanism value");
}

std::vector<int> sample_sources(const Graph& g, const SimConfig& cfg, Rng& rng) {
  const int n = g.n();
  int count = cfg.source_count > 0
                  ? cfg.source_count
                  : static_cast<int>(std::ceil(cfg.source_ratio * n - 1e-9));
  if (count < 1) throw std::invalid_argument("sample_sources: count must be positive");
  std::vector<int> pool;
  if (cfg.mechanism == Mechanism::glt) {
    for (int v = n - n / 2; v < n; ++v) pool.push_back(v);
  } else {
    for (int v = 0; v < n; ++v) pool.push_back(v);
  }
  if (count > static_cast<int>(pool.size()))
    throw std::invalid_argument("sample_sources: not enough eligible nodes");
  for (int i = 0; i < count; ++i) {
    size_t j = i + rng.below(pool.size() - i);
    std::swap(pool[i], pool[j]);
  }
  std::vector<int> sources(pool.begin(), pool.begin() + count);
  std::sort(sources.begin(), sources.end());
  return sources;
}

namespace {

enum NodeState : uint8_t { kSusceptible = 0, kInfected = 1, kRecovered = 2 };

void check_sources(int n, const std::vector<int>& sources) {
  if (sources.empty()) throw std::invalid_argument("simulate: empty source set");
  for (size_t i = 0; i < sources.size(); ++i) {
    if (sources[i] < 0 || sources[i] >= n)
      throw std::invalid_argument("simulate: source id out of range");
    if (i > 0 && sources[i] <= sources[i - 1])
      throw std::invalid_argument("simulate: sources must be strictly increasing");
  }
}

// Shared SI/SIR loop; recovery < 0 disables the recovered state entirely.
Cascade spread_contagion(const Graph& g, const std::vector<int>& sources,
                         const SimConfig& cfg, Rng& rng, double recovery) {
  const int n = g.n();
  check_sources(n, sources);
  if (!g.weights_assigned())
    throw std::invalid_argument("simulate: edge weights not assigned");
  Cascade c;
  c.mechanism = recovery < 0 ? Mechanism::si : Mechanism::sir;
  c.sources = sources;
  std::vector<uint8_t> state(n, kSusceptible);
  std::vector<int> infectious = sources;
  for (int s : sources) state[s] = kInfected;
  const int cap = cfg.max_rounds > 0 ? cfg.max_rounds : 4 * n;
  std::vector<uint8_t> newly(n, 0);
  std::vector<int> newly_ids;
  for (int round = 1; round <= cap && !infectious.empty(); ++round) {
    std::fill(newly.begin(), newly.end(), 0);
    newly_ids.clear();
    for (int u : infectious) {
      for (const auto& [v, w] : g.out_neighbors(u)) {
        if (state[v] != kSusceptible || newly[v]) continue;
        if (rng.uniform() < w) {
          newly[v] = 1;
          newly_ids.push_back(v);
        }
      }
      if (recovery > 0.0 && rng.uniform() < recovery) state[u] = kRecovered;
    }
    for (int v : newly_ids) {
      state[v] = kInfected;
      c.order.push_back({round, v});
    }
    if (recovery >= 0.0)
      std::erase_if(infectious, [&](int u) { return state[u] != kInfected; });
    for (int v : newly_ids) infectious.push_back(v);
    std::sort(infectious.begin(), infectious.end());
    if (newly_ids.empty()) {
      bool progress_possible = false;
      for (int u : infectious) {
        for (const auto& [v, w] : g.out_neighbors(u)) {
          (void)w;
          if (state[v] == kSusceptible) {
            progress_possible = true;
            break;
          }
        }
        if (progress_possible) break;
      }
      if (!progress_possible) break;
    }
  }
  return c;
}

}  // namespace

Cascade simulate_si(const Graph& g, const std::vector<int>& sources,
                    const SimConfig& cfg, Rng& rng) {
  return spread_contagion(g, sources, cfg, rng, -1.0);
}

Cascade simulate_sir(const Graph& g, const std::vector<int>& sources,
                     const SimConfig& cfg, Rng& rng) {
  if (cfg.sir_recovery < 0.0 || cfg.sir_recovery > 1.0)
    throw std::invalid_argument("simulate_sir: recovery probability out of range");
  Cascade c = spread_contagion(g, sources, cfg, rng, cfg.sir_recovery);
  c.mechanism = Mechanism::sir;
  return c;
}

Cascade simulate_glt(const Graph& g, const std::vector<int>& sources,
                     const SimConfig& cfg) {
  const int n = g.n();
  check_sources(n, sources);
  if (!g.weights_assigned())
    throw std::invalid_argument("simulate: edge weights not assigned");
  if (cfg.glt_base <= 0.0 || cfg.glt_base >= 1.0)
    throw std::invalid_argument("simulate_glt: base must lie in (0, 1)");
  Cascade c;
  c.mechanism = Mechanism::glt;
  c.sources = sources;
  std::vector<uint8_t> infected(n, 0);
  for (int s : sources) infected[s] = 1;
  std::vector<double> tau(n);
  for (int v = 0; v < n; ++v)
    tau[v] = std::pow(cfg.glt_base, static_cast<double>(g.in_neighbors(v).size()));
  const int cap = cfg.max_rounds > 0 ? cfg.max_rounds : 4 * n;
  std::vector<int> newly;
  for (int round = 1; round <= cap; ++round) {
    newly.clear();
    for (int v = 0; v < n; ++v) {
      if (infected[v]) continue;
      double influence = 0.0;
      for (const auto& [u, w] : g.in_neighbors(v))
        if (infected[u]) influence += w;
      if (influence >= tau[v] - 1e-12) newly.push_back(v);
    }
    if (newly.empty()) break;
    for (int v : newly) {
      infected[v] = 1;
      c.order.push_back({round, v});
    }
  }
  return c;
}

Cascade simulate(const Graph& g, const std::vector<int>& sources,
                 const SimConfig& cfg, Rng& rng) {
  switch (cfg.mechanism) {
    case Mechanism::si: return simulate_si(g, sources, cfg, rng);
    case Mechanism::sir: return simulate_sir(g, sources, cfg, rng);
    case Mechanism::glt: return simulate_glt(g, sources, cfg);
  }
  throw std::invalid_argument("unknown mechanism value");
}

bool filter_valid(int n, const Cascade& c, const SimConfig& cfg) {
  double total = static_cast<double>(c.sources.size() + c.order.size());
  return total >= cfg.min_coverage * n - 1e-9;
}

void partition_snapshots(int n, Cascade& c, const SimConfig& cfg) {
  const int t = cfg.snapshot_count;
  if (t < 1) throw std::invalid_argument("partition_snapshots: snapshot count must be >= 1");
  const int m = static_cast<int>(c.order.size());
  if (m < t)
    throw std::invalid_argument("partition_snapshots: fewer infections than snapshot groups");
  std::sort(c.order.begin(), c.order.end());
  const int base = m / t;
  c.snapshots.clear();
  std::vector<uint8_t> cum(n, 0);
  if (cfg.sources_in_snapshots)
    for (int s : c.sources) cum[s] = 1;
  int pos = 0;
  for (int gidx = 0; gidx < t; ++gidx) {
    int size = (gidx == t - 1) ? m - base * (t - 1) : base;
    for (int i = 0; i < size; ++i, ++pos) cum[c.order[pos].second] = 1;
    if (gidx < t - 1)
      c.snapshots.push_back(cum);
    else
      c.result = cum;
  }
}

std::vector<std::pair<int, int>> DatasetBundle::block_ranges() const {
  std::vector<std::pair<int, int>> ranges;
  const int total = static_cast<int>(train.size());
  for (int begin = 0; begin < total; begin += block_size)
    ranges.push_back({begin, std::min(begin + block_size, total)});
  return ranges;
}

DatasetBundle build_dataset(const Graph& g, const SimConfig& cfg, const Rng& base) {
  if (cfg.cascade_count < 1)
    throw std::invalid_argument("build_dataset: cascade count must be positive");
  if (cfg.block_size < 1)
    throw std::invalid_argument("build_dataset: block size must be positive");
  if (cfg.train_fraction <= 0.0 || cfg.train_fraction >= 1.0)
    throw std::invalid_argument("build_dataset: train fraction must lie in (0, 1)");
  std::vector<Cascade> collected;
  const long long budget =
      static_cast<long long>(cfg.retry_factor) * cfg.cascade_count;
  long long attempt = 0;
  while (static_cast<int>(collected.size()) < cfg.cascade_count) {
    if (attempt >= budget)
      throw std::runtime_error(
          "build_dataset: retry budget exhausted; cascades keep failing the coverage filter");
    ++attempt;
    Rng stream = base.derive(static_cast<uint64_t>(attempt));
    std::vector<int> sources = sample_sources(g, cfg, stream);
    Cascade c = simulate(g, sources, cfg, stream);
    c.stream = static_cast<uint64_t>(attempt);
    if (!filter_valid(g.n(), c, cfg)) continue;
    if (static_cast<int>(c.order.size()) < cfg.snapshot_count) continue;
    partition_snapshots(g.n(), c, cfg);
    collected.push_back(std::move(c));
  }
  Rng shuffle_rng = base.derive(0);
  for (size_t i = 0; i + 1 < collected.size(); ++i) {
    size_t j = i + shuffle_rng.below(collected.size() - i);
    std::swap(collected[i], collected[j]);
  }
  const int count = cfg.cascade_count;
  const int n_train = static_cast<int>(std::llround(cfg.train_fraction * count));
  if (n_train < 1 || n_train >= count)
    throw std::invalid_argument("build_dataset: split leaves an empty side");
  DatasetBundle bundle;
  bundle.n = g.n();
  bundle.mechanism = cfg.mechanism;
  bundle.snapshot_count = cfg.snapshot_count;
  bundle.block_size = cfg.block_size;
  bundle.train.assign(collected.begin(), collected.begin() + n_train);
  bundle.test.assign(collected.begin() + n_train, collected.end());
  return bundle;
}

namespace {

std::vector<int> indicator_to_ids(const std::vector<uint8_t>& v) {
  std::vector<int> ids;
  for (size_t i = 0; i < v.size(); ++i)
    if (v[i]) ids.push_back(static_cast<int>(i));
  return ids;
}

std::vector<uint8_t> ids_to_indicator(const std::vector<int>& ids, int n) {
  std::vector<uint8_t> v(n, 0);
  for (int i : ids) {
    if (i < 0 || i >= n) throw std::runtime_error("dataset: node id out of range");
    v[i] = 1;
  }
  return v;
}

json cascade_to_json(const Cascade& c, const std::string& kind) {
  json rec;
  rec["kind"] = kind;
  rec["mechanism"] = mechanism_to_string(c.mechanism);
  rec["stream"] = c.stream;
  rec["sources"] = c.sources;
  json snaps = json::array();
  for (const auto& s : c.snapshots) snaps.push_back(indicator_to_ids(s));
  rec["snapshots"] = snaps;
  rec["result"] = indicator_to_ids(c.result);
  return rec;
}

Cascade cascade_from_json(const json& rec, int n) {
  Cascade c;
  c.mechanism = mechanism_from_string(rec.at("mechanism").get<std::string>());
  c.stream = rec.at("stream").get<uint64_t>();
  c.sources = rec.at("sources").get<std::vector<int>>();
  for (const auto& snap : rec.at("snapshots"))
    c.snapshots.push_back(ids_to_indicator(snap.get<std::vector<int>>(), n));
  c.result = ids_to_indicator(rec.at("result").get<std::vector<int>>(), n);
  return c;
}

}  // namespace

void save_dataset(const std::string& path, const DatasetFile& file) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write dataset: " + path);
  const DatasetBundle& b = file.bundle;
  json meta;
  meta["graph"] = file.graph_file;
  meta["manifest_hash"] = file.manifest_hash;
  meta["n"] = b.n;
  meta["mechanism"] = mechanism_to_string(b.mechanism);
  meta["snapshot_count"] = b.snapshot_count;
  meta["block_size"] = b.block_size;
  meta["train"] = b.train.size();
  meta["test"] = b.test.size();
  f << "# srcloc-dataset v1\n";
  f << "#meta " << meta.dump() << '\n';
  for (const Cascade& c : b.train) f << cascade_to_json(c, "train").dump() << '\n';
  for (const Cascade& c : b.test) f << cascade_to_json(c, "test").dump() << '\n';
  if (!f) throw std::runtime_error("write failed: " + path);
}

DatasetFile load_dataset(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open dataset: " + path);
  std::string line;
  if (!std::getline(f, line) || line != "# srcloc-dataset v1")
    throw std::runtime_error("dataset: bad or missing version header: " + path);
  if (!std::getline(f, line) || line.rfind("#meta ", 0) != 0)
    throw std::runtime_error("dataset: missing meta header: " + path);
  json meta = json::parse(line.substr(6));
  DatasetFile file;
  file.graph_file = meta.at("graph").get<std::string>();
  file.manifest_hash = meta.at("manifest_hash").get<std::string>();
  DatasetBundle& b = file.bundle;
  b.n = meta.at("n").get<int>();
  b.mechanism = mechanism_from_string(meta.at("mechanism").get<std::string>());
  b.snapshot_count = meta.at("snapshot_count").get<int>();
  b.block_size = meta.at("block_size").get<int>();
  const size_t n_train = meta.at("train").get<size_t>();
  const size_t n_test = meta.at("test").get<size_t>();
  while (std::getline(f, line)) {
    if (line.empty() || line[0] == '#') continue;
    json rec = json::parse(line);
    Cascade c = cascade_from_json(rec, b.n);
    if (rec.at("kind") == "train")
      b.train.push_back(std::move(c));
    else
      b.test.push_back(std::move(c));
  }
  if (b.train.size() != n_train || b.test.size() != n_test)
    throw std::runtime_error("dataset: record counts disagree with header: " + path);
  return file;
}

}  // namespace srcloc
