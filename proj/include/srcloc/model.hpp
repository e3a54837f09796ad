/// Conditional VAE with a graph neural ODE forward propagator.
///
/// Encoder: [s | snapshots] -> (mu, logvar); latent z = mu + exp(logvar/2)*eps.
/// Generator: [z | snapshots] -> source probability vector.
/// Propagator: per-node features [s | snapshots] -> RK4-integrated GCN
/// dynamics -> rowwise MLP readout of final infection probabilities.
#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "srcloc/cascade.hpp"
#include "srcloc/graph.hpp"
#include "srcloc/optim.hpp"
#include "srcloc/tensor.hpp"

namespace srcloc {

struct ModelConfig {
  int latent_dim = 64;      // K
  int hidden_dim = 128;     // H, encoder/generator hidden width
  int feature_dim = 128;    // d, propagator state width
  int gcn_layers = 2;       // L
  int rk4_steps = 2;        // unit-length integration steps
  int readout_hidden = 128;
  int snapshots = 3;        // observed intermediate snapshots (T-1)
  double l2_coeff = 1e-4;
  double train_lr = 0.03;
  int train_epochs = 100;
  bool use_sgd = false;     // plain gradient descent ablation
};

/// Classic fourth-order Runge-Kutta over tape ops: integrates dH/dt = f(H)
/// from h0 across t_total in `steps` equal steps, differentiably.
Tensor rk4_integrate(const std::function<Tensor(const Tensor&)>& f, Tensor h0,
                     double t_total, int steps);

/// Mean over all entries of (exp(logvar) + mu^2 - logvar - 1) / 2.
Tensor loss_kl(const Tensor& mu, const Tensor& logvar);
/// Bernoulli negative log-likelihood: per-sample sum over nodes, mean over
/// batch rows; probabilities clamped to [1e-7, 1-1e-7].
Tensor loss_re(const Tensor& s_true, const Tensor& s_star);
/// Mean squared error over all entries.
Tensor loss_fp(const Tensor& y_true, const Tensor& y_hat);

struct TrainStats {
  std::vector<double> epoch_loss;
};

class Model {
 public:
  /// Builds the normalized adjacency and Glorot-initializes parameters.
  Model(const Graph& g, const ModelConfig& cfg, uint64_t init_seed);
  /// Restores a model around an existing parameter set (shape-checked).
  Model(const Graph& g, const ModelConfig& cfg, ParamSet params);

  const ModelConfig& config() const { return cfg_; }
  int n() const { return n_; }
  ParamSet& params() { return params_; }
  const ParamSet& params() const { return params_; }
  const SpMat& propagation_matrix() const { return a_hat_; }

  /// Per-tape handles for every parameter, in ParamSet order.
  struct Bound {
    std::vector<Tensor> slots;
    Tensor enc_w1, enc_b1, enc_w2, enc_b2;
    Tensor gen_w1, gen_b1, gen_w2, gen_b2;
    Tensor ode_win;
    std::vector<Tensor> ode_w;
    Tensor out_w1, out_b1, out_w2, out_b2, out_w3, out_b3;
  };
  Bound bind(Tape& tape) const;
  /// Adds each bound tensor's gradient into the ParamSet grads.
  void accumulate_grads(const Bound& bound);

  struct Latent {
    Tensor mu, logvar, z;
  };
  /// s: (B x n) sources, snaps: (B x snapshots*n) flattened snapshots,
  /// eps: optional (B x K) noise; z = mu when eps is null.
  Latent encode(Tape& tape, const Bound& bound, const Tensor& s,
                const Tensor& snaps, const Matrix* eps) const;

  /// z: (B x K), snaps: (B x snapshots*n) -> (B x n) source probabilities.
  Tensor generate(Tape& tape, const Bound& bound, const Tensor& z,
                  const Tensor& snaps) const;

  /// s_star: (1 x n), snap_cols: (n x snapshots) -> (1 x n) predicted final
  /// infection probabilities after RK4 integration and readout.
  Tensor propagate(Tape& tape, const Bound& bound, const Tensor& s_star,
                   const Matrix& snap_cols) const;

  /// Total objective: kl + re + fp + l2_coeff * sum of squared parameters.
  Tensor loss_total(Tape& tape, const Bound& bound, const Tensor& kl,
                    const Tensor& re, const Tensor& fp) const;

  /// Mini-batch training: one optimizer step per block, per-cascade tapes,
  /// fresh reparameterization noise per cascade per epoch.
  TrainStats train(const DatasetBundle& data, Rng& rng);

  /// Flattened (1 x snapshots*n) row of a cascade's snapshots.
  Matrix snapshot_row(const Cascade& c) const;
  /// (n x snapshots) column layout used by the propagator.
  Matrix snapshot_cols(const Cascade& c) const;
  static Matrix indicator_row(const std::vector<uint8_t>& v);
  Matrix source_row(const Cascade& c) const;

  void save_checkpoint(const std::string& path, const std::string& manifest_hash) const;
  struct Checkpoint {
    ModelConfig cfg;
    ParamSet params;
    int n = 0;
    std::string manifest_hash;
  };
  static Checkpoint load_checkpoint(const std::string& path);

 private:
  const Graph* graph_;
  ModelConfig cfg_;
  int n_;
  SpMat a_hat_;
  ParamSet params_;

  void validate_shapes() const;
};

}  // namespace srcloc
