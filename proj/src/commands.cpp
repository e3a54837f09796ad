#include "srcloc/commands.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <stdexcept>

#include "srcloc/baselines.hpp"
#include "srcloc/inference.hpp"
#include "srcloc/metrics.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace srcloc {

namespace {

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

fs::path out_file(const ExperimentManifest& m, const char* name) {
  return fs::path(m.out) / name;
}

std::string dataset_label(const ExperimentManifest& m) {
  if (m.graph.empty()) return "ba" + std::to_string(m.ba_nodes);
  return fs::path(m.graph).stem().string();
}

Graph load_run_graph(const ExperimentManifest& m, const std::string& name) {
  return Graph::load_edge_list((fs::path(m.out) / name).string(), m.directed);
}

DatasetFile load_run_dataset(const ExperimentManifest& m) {
  const std::string path = out_file(m, "dataset.txt").string();
  DatasetFile ds = load_dataset(path);
  const std::string want = manifest_hash(m);
  if (ds.manifest_hash != want)
    throw std::runtime_error("dataset " + path + " came from configuration " +
                             ds.manifest_hash + " but the current manifest hashes to " +
                             want + "; re-run simulate");
  return ds;
}

std::vector<int> indicator_to_ids(const std::vector<uint8_t>& ind) {
  std::vector<int> ids;
  for (size_t i = 0; i < ind.size(); ++i)
    if (ind[i]) ids.push_back(static_cast<int>(i));
  return ids;
}

}  // namespace

std::string metrics_csv(const std::vector<MetricRow>& rows) {
  std::string out =
      "dataset,mechanism,method,seed,cascade,"
      "macro_precision,macro_recall,macro_f1,accuracy,aed\n";
  for (const MetricRow& r : rows) {
    out += r.dataset + "," + r.mechanism + "," + r.method + "," + r.seed + "," +
           r.cascade + "," + fmt_double(r.macro_precision) + "," +
           fmt_double(r.macro_recall) + "," + fmt_double(r.macro_f1) + "," +
           fmt_double(r.accuracy) + "," + fmt_double(r.aed) + "\n";
  }
  return out;
}

void write_metrics_csv(const std::string& path, const std::vector<MetricRow>& rows) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write metrics: " + path);
  f << metrics_csv(rows);
  if (!f) throw std::runtime_error("write failed: " + path);
}

std::vector<ResultRecord> load_results(const std::string& path,
                                       const std::string& expect_hash) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open results: " + path);
  std::string line;
  if (!std::getline(f, line) || line != "# srcloc-results v1")
    throw std::runtime_error("results: bad or missing version header: " + path);
  if (!std::getline(f, line) || line.rfind("#meta ", 0) != 0)
    throw std::runtime_error("results: missing meta header: " + path);
  const json meta = json::parse(line.substr(6));
  const std::string hash = meta.at("manifest_hash").get<std::string>();
  if (!expect_hash.empty() && hash != expect_hash)
    throw std::runtime_error("results " + path + " came from configuration " + hash +
                             " but the current manifest hashes to " + expect_hash);
  std::vector<ResultRecord> records;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    const json j = json::parse(line);
    ResultRecord r;
    r.index = j.at("index").get<int>();
    r.stream = j.at("stream").get<uint64_t>();
    r.block = j.at("block").get<int>();
    r.sources = j.at("sources").get<std::vector<int>>();
    r.pred = j.at("pred").get<std::vector<int>>();
    r.probs = j.at("probs").get<std::vector<double>>();
    r.trace = j.at("trace").get<std::vector<double>>();
    records.push_back(std::move(r));
  }
  if (records.size() != meta.at("count").get<size_t>())
    throw std::runtime_error("results: record count disagrees with meta header: " + path);
  return records;
}

void cmd_simulate(const ExperimentManifest& m) {
  fs::create_directories(m.out);
  const Rng master(m.seed);
  Graph g = [&] {
    if (m.graph.empty()) {
      Rng gr = master.derive(1);
      return barabasi_albert(m.ba_nodes, m.ba_attach, gr);
    }
    return Graph::load_edge_list(m.graph, m.directed);
  }();
  if (!g.weights_assigned()) {
    Rng wr = master.derive(2);
    assign_edge_weights(g, wr);
  }
  DatasetFile file;
  file.bundle = build_dataset(g, to_sim_config(m), master.derive(3));
  file.graph_file = "graph.txt";
  file.manifest_hash = manifest_hash(m);
  g.save_edge_list(out_file(m, "graph.txt").string());
  save_dataset(out_file(m, "dataset.txt").string(), file);
  save_manifest(m, out_file(m, "manifest.ini").string());
}

void cmd_train(const ExperimentManifest& m) {
  const DatasetFile ds = load_run_dataset(m);
  const Graph g = load_run_graph(m, ds.graph_file);
  if (g.n() != ds.bundle.n)
    throw std::runtime_error("graph and dataset disagree on node count");
  Model model(g, to_model_config(m), Rng(m.seed).derive(4).seed());
  Rng noise = Rng(m.seed).derive(5);
  const TrainStats stats = model.train(ds.bundle, noise);
  model.save_checkpoint(out_file(m, "checkpoint.txt").string(), manifest_hash(m));
  std::ofstream trace(out_file(m, "loss_trace.csv"));
  if (!trace) throw std::runtime_error("cannot write loss trace");
  trace << "epoch,loss\n";
  for (size_t i = 0; i < stats.epoch_loss.size(); ++i)
    trace << (i + 1) << "," << fmt_double(stats.epoch_loss[i]) << "\n";
  save_manifest(m, out_file(m, "manifest.ini").string());
}

void cmd_infer(const ExperimentManifest& m) {
  const DatasetFile ds = load_run_dataset(m);
  const Graph g = load_run_graph(m, ds.graph_file);
  if (g.n() != ds.bundle.n)
    throw std::runtime_error("graph and dataset disagree on node count");
  Model::Checkpoint ckpt = Model::load_checkpoint(out_file(m, "checkpoint.txt").string());
  const std::string want = manifest_hash(m);
  if (ckpt.manifest_hash != want)
    throw std::runtime_error("checkpoint came from configuration " + ckpt.manifest_hash +
                             " but the current manifest hashes to " + want +
                             "; re-run train");
  const Model model(g, ckpt.cfg, std::move(ckpt.params));
  const MatchIndex index = build_match_index(model, ds.bundle);
  const RefineConfig rcfg = to_refine_config(m);

  std::ofstream f(out_file(m, "results.jsonl"));
  if (!f) throw std::runtime_error("cannot write results");
  f << "# srcloc-results v1\n";
  json meta;
  meta["manifest_hash"] = want;
  meta["count"] = ds.bundle.test.size();
  f << "#meta " << meta.dump() << "\n";
  for (size_t i = 0; i < ds.bundle.test.size(); ++i) {
    const Cascade& c = ds.bundle.test[i];
    const RefineResult r = localize(model, index, c, rcfg);
    json rec;
    rec["index"] = i;
    rec["stream"] = c.stream;
    rec["block"] = r.block;
    rec["sources"] = c.sources;
    rec["pred"] = indicator_to_ids(r.pred);
    rec["probs"] = r.probs;
    rec["trace"] = r.trace;
    f << rec.dump() << "\n";
  }
  if (!f) throw std::runtime_error("write failed: results.jsonl");
  save_manifest(m, out_file(m, "manifest.ini").string());
}

std::vector<MetricRow> cmd_evaluate(const ExperimentManifest& m) {
  const DatasetFile ds = load_run_dataset(m);
  const Graph g = load_run_graph(m, ds.graph_file);
  const bool wants_model =
      std::find(m.methods.begin(), m.methods.end(), "model") != m.methods.end();
  std::vector<ResultRecord> records;
  if (wants_model) {
    records = load_results(out_file(m, "results.jsonl").string(), manifest_hash(m));
    if (records.size() != ds.bundle.test.size())
      throw std::runtime_error("results and dataset disagree on test cascade count");
  }
  const int n = ds.bundle.n;
  const std::string label = dataset_label(m);
  const std::string seed_str = std::to_string(m.seed);

  std::vector<MetricRow> rows;
  for (const std::string& method : m.methods) {
    MetricRow agg{label, m.mechanism, method, seed_str, "mean"};
    for (size_t i = 0; i < ds.bundle.test.size(); ++i) {
      const Cascade& c = ds.bundle.test[i];
      std::vector<uint8_t> truth(n, 0);
      for (int s : c.sources) truth[s] = 1;

      std::vector<uint8_t> pred(n, 0);
      std::vector<double> probs;
      if (method == "model") {
        const ResultRecord& r = records[i];
        if (r.stream != c.stream)
          throw std::runtime_error("results and dataset disagree on cascade order");
        for (int id : r.pred) pred.at(id) = 1;
        probs = r.probs;
        if (static_cast<int>(probs.size()) != n)
          throw std::runtime_error("results probability vector length mismatch");
      } else {
        const Baseline kind = baseline_from_string(method);
        Rng r = Rng(m.seed).derive(6000 + static_cast<uint64_t>(i));
        pred = run_baseline(kind, g, c.result, static_cast<int>(c.sources.size()), r);
        probs.assign(pred.begin(), pred.end());
      }

      const MacroScores sc = macro_scores(truth, pred);
      const double aed = average_error_distance(g, c.sources, probs);
      rows.push_back({label, m.mechanism, method, seed_str, std::to_string(i),
                      sc.precision, sc.recall, sc.f1, sc.accuracy, aed});
      agg.macro_precision += sc.precision;
      agg.macro_recall += sc.recall;
      agg.macro_f1 += sc.f1;
      agg.accuracy += sc.accuracy;
      agg.aed += aed;
    }
    const double cnt = static_cast<double>(ds.bundle.test.size());
    agg.macro_precision /= cnt;
    agg.macro_recall /= cnt;
    agg.macro_f1 /= cnt;
    agg.accuracy /= cnt;
    agg.aed /= cnt;
    rows.push_back(agg);
  }
  write_metrics_csv(out_file(m, "metrics.csv").string(), rows);
  save_manifest(m, out_file(m, "manifest.ini").string());
  return rows;
}

std::vector<MetricRow> cmd_report(const ExperimentManifest& m,
                                  const std::vector<uint64_t>& seeds) {
  if (seeds.empty()) throw std::invalid_argument("report: need at least one seed");
  fs::create_directories(m.out);
  std::vector<MetricRow> combined;
  for (uint64_t s : seeds) {
    ExperimentManifest sub = m;
    sub.seed = s;
    sub.out = (fs::path(m.out) / ("seed_" + std::to_string(s))).string();
    cmd_simulate(sub);
    cmd_train(sub);
    cmd_infer(sub);
    for (const MetricRow& r : cmd_evaluate(sub))
      if (r.cascade == "mean") combined.push_back(r);
  }
  const std::string label = dataset_label(m);
  for (const std::string& method : m.methods) {
    MetricRow mean{label, m.mechanism, method, "mean", "mean"};
    int cnt = 0;
    for (const MetricRow& r : combined) {
      if (r.method != method) continue;
      mean.macro_precision += r.macro_precision;
      mean.macro_recall += r.macro_recall;
      mean.macro_f1 += r.macro_f1;
      mean.accuracy += r.accuracy;
      mean.aed += r.aed;
      ++cnt;
    }
    mean.macro_precision /= cnt;
    mean.macro_recall /= cnt;
    mean.macro_f1 /= cnt;
    mean.accuracy /= cnt;
    mean.aed /= cnt;
    combined.push_back(mean);
  }
  write_metrics_csv(out_file(m, "report.csv").string(), combined);
  return combined;
}

}  // namespace srcloc
