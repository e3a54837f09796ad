// Command-line pipeline driver: simulate | train | infer | evaluate | report.
#include <CLI11.hpp>
#include <cstdio>
#include <exception>

#include "srcloc/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"srcloc: diffusion source localization on graphs"};
  app.require_subcommand(1);
  app.set_config("--config", "", "read options from a saved manifest");

  srcloc::ExperimentManifest m;
  std::vector<uint64_t> seeds = {1, 2, 3};

  app.add_option("--out", m.out, "output directory");
  app.add_option("--graph", m.graph,
                 "edge-list file; omit to generate a scale-free graph");
  app.add_flag("--directed", m.directed, "treat edges as directed");
  app.add_option("--ba_nodes", m.ba_nodes, "generated graph size");
  app.add_option("--ba_attach", m.ba_attach, "edges per new node");
  app.add_option("--mechanism", m.mechanism, "si | sir | glt");
  app.add_option("--source_ratio", m.source_ratio, "source fraction per cascade");
  app.add_option("--source_count", m.source_count,
                 "fixed source count (overrides ratio when > 0)");
  app.add_option("--snapshots", m.snapshots, "observed snapshots per cascade");
  app.add_option("--cascades", m.cascades, "valid cascades to generate");
  app.add_option("--min_coverage", m.min_coverage, "retention threshold");
  app.add_option("--block_size", m.block_size, "training block size");
  app.add_option("--train_fraction", m.train_fraction, "train split fraction");
  app.add_option("--sir_recovery", m.sir_recovery, "sir recovery probability");
  app.add_option("--glt_base", m.glt_base, "threshold base k (tau = k^deg)");
  app.add_flag("--sources_in_snapshots", m.sources_in_snapshots,
               "mark sources as infected in snapshots");
  app.add_option("--max_rounds", m.max_rounds, "simulation round cap (0 = 4n)");
  app.add_option("--retry_factor", m.retry_factor,
                 "attempt budget multiplier for the coverage filter");
  app.add_option("--latent_dim", m.latent_dim, "latent width K");
  app.add_option("--hidden_dim", m.hidden_dim, "encoder/generator hidden width");
  app.add_option("--feature_dim", m.feature_dim, "propagator feature width");
  app.add_option("--gcn_layers", m.gcn_layers, "graph conv layers");
  app.add_option("--rk4_steps", m.rk4_steps, "integrator steps");
  app.add_option("--readout_hidden", m.readout_hidden, "readout hidden width");
  app.add_option("--l2_coeff", m.l2_coeff, "parameter penalty weight");
  app.add_option("--train_lr", m.train_lr, "training learning rate");
  app.add_option("--train_epochs", m.train_epochs, "training epochs");
  app.add_flag("--use_sgd", m.use_sgd, "plain gradient descent instead of adam");
  app.add_option("--infer_lr", m.infer_lr, "refinement learning rate");
  app.add_option("--infer_epochs", m.infer_epochs, "refinement epochs");
  app.add_option("--threshold", m.threshold, "binarization threshold");
  app.add_option("--top_k", m.top_k, "predict exactly k nodes (0 = threshold)");
  app.add_option("--match_metric", m.match_metric, "wasserstein | hamming");
  app.add_flag("--match_rep_min", m.match_rep_min,
               "match against closest member instead of the block mean");
  app.add_option("--seed", m.seed, "master seed");
  app.add_option("--methods", m.methods, "evaluate methods (model and baselines)")
      ->delimiter(',');
  app.add_option("--seeds", seeds, "report seeds")->delimiter(',');

  app.add_subcommand("simulate", "generate graph and cascade dataset")
      ->fallthrough()
      ->callback([&] { srcloc::cmd_simulate(m); });
  app.add_subcommand("train", "fit the model on the dataset")
      ->fallthrough()
      ->callback([&] { srcloc::cmd_train(m); });
  app.add_subcommand("infer", "localize sources for the test cascades")
      ->fallthrough()
      ->callback([&] { srcloc::cmd_infer(m); });
  app.add_subcommand("evaluate", "score results and baselines")
      ->fallthrough()
      ->callback([&] { srcloc::cmd_evaluate(m); });
  app.add_subcommand("report", "full pipeline across seeds plus mean rows")
      ->fallthrough()
      ->callback([&] { srcloc::cmd_report(m, seeds); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
