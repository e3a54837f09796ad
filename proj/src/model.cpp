#include "srcloc/model.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace srcloc {

Tensor rk4_integrate(const std::function<Tensor(const Tensor&)>& f, Tensor h0,
                     double t_total, int steps) {
  if (steps < 1) throw std::invalid_argument("rk4_integrate: steps must be positive");
  if (t_total <= 0.0) throw std::invalid_argument("rk4_integrate: span must be positive");
  const double dt = t_total / steps;
  Tensor h = h0;
  for (int s = 0; s < steps; ++s) {
    Tensor k1 = f(h);
    Tensor k2 = f(add(h, scale(k1, dt / 2.0)));
    Tensor k3 = f(add(h, scale(k2, dt / 2.0)));
    Tensor k4 = f(add(h, scale(k3, dt)));
    Tensor combined = add(add(k1, scale(k2, 2.0)), add(scale(k3, 2.0), k4));
    h = add(h, scale(combined, dt / 6.0));
  }
  return h;
}

Tensor loss_kl(const Tensor& mu, const Tensor& logvar) {
  Tape* t = mu.tape();
  Tensor ones = t->input(Matrix::Ones(mu.rows(), mu.cols()));
  Tensor term = sub(add(exp(logvar), square(mu)), add(logvar, ones));
  return mean(scale(term, 0.5));
}

Tensor loss_re(const Tensor& s_true, const Tensor& s_star) {
  Tape* t = s_true.tape();
  const int batch = s_true.rows();
  Tensor p = clamp(s_star, 1e-7, 1.0 - 1e-7);
  Tensor ones = t->input(Matrix::Ones(s_true.rows(), s_true.cols()));
  Tensor ll = add(elementwise_mul(s_true, log(p)),
                  elementwise_mul(sub(ones, s_true), log(sub(ones, p))));
  return scale(sum(ll), -1.0 / batch);
}

Tensor loss_fp(const Tensor& y_true, const Tensor& y_hat) {
  return mean(square(sub(y_true, y_hat)));
}

namespace {

struct Dim {
  std::string name;
  int rows, cols;
};

std::vector<Dim> expected_shapes(const ModelConfig& cfg, int n) {
  const int t_in = (cfg.snapshots + 1);  // source column plus snapshots
  const int enc_in = t_in * n;
  const int gen_in = cfg.latent_dim + cfg.snapshots * n;
  std::vector<Dim> dims = {
      {"enc.w1", enc_in, cfg.hidden_dim},
      {"enc.b1", 1, cfg.hidden_dim},
      {"enc.w2", cfg.hidden_dim, 2 * cfg.latent_dim},
      {"enc.b2", 1, 2 * cfg.latent_dim},
      {"gen.w1", gen_in, cfg.hidden_dim},
      {"gen.b1", 1, cfg.hidden_dim},
      {"gen.w2", cfg.hidden_dim, n},
      {"gen.b2", 1, n},
      {"ode.win", t_in, cfg.feature_dim},
  };
  for (int l = 1; l <= cfg.gcn_layers; ++l)
    dims.push_back({"ode.w" + std::to_string(l), cfg.feature_dim, cfg.feature_dim});
  dims.push_back({"out.w1", cfg.feature_dim, cfg.readout_hidden});
  dims.push_back({"out.b1", 1, cfg.readout_hidden});
  dims.push_back({"out.w2", cfg.readout_hidden, cfg.readout_hidden});
  dims.push_back({"out.b2", 1, cfg.readout_hidden});
  dims.push_back({"out.w3", cfg.readout_hidden, 1});
  dims.push_back({"out.b3", 1, 1});
  return dims;
}

void check_config(const ModelConfig& cfg) {
  if (cfg.latent_dim < 1 || cfg.hidden_dim < 1 || cfg.feature_dim < 1 ||
      cfg.gcn_layers < 1 || cfg.rk4_steps < 1 || cfg.readout_hidden < 1 ||
      cfg.snapshots < 0 || cfg.train_epochs < 0)
    throw std::invalid_argument("model: config dimensions must be positive");
  if (cfg.l2_coeff < 0.0 || cfg.train_lr <= 0.0)
    throw std::invalid_argument("model: bad coefficient");
}

}  // namespace

Model::Model(const Graph& g, const ModelConfig& cfg, uint64_t init_seed)
    : graph_(&g), cfg_(cfg), n_(g.n()) {
  check_config(cfg_);
  a_hat_ = normalized_adjacency(g).sparseView();
  Rng rng(init_seed);
  for (const Dim& d : expected_shapes(cfg_, n_)) {
    const bool is_bias = d.name[4] == 'b';
    params_.add(d.name, is_bias ? Matrix::Zero(d.rows, d.cols)
                                : glorot_init(d.rows, d.cols, rng));
  }
}

Model::Model(const Graph& g, const ModelConfig& cfg, ParamSet params)
    : graph_(&g), cfg_(cfg), n_(g.n()), params_(std::move(params)) {
  check_config(cfg_);
  a_hat_ = normalized_adjacency(g).sparseView();
  validate_shapes();
}

void Model::validate_shapes() const {
  const std::vector<Dim> dims = expected_shapes(cfg_, n_);
  if (dims.size() != params_.entries().size())
    throw std::invalid_argument("model: parameter count disagrees with config");
  for (size_t i = 0; i < dims.size(); ++i) {
    const auto& e = params_.entries()[i];
    if (e.name != dims[i].name || e.value.rows() != dims[i].rows ||
        e.value.cols() != dims[i].cols)
      throw std::invalid_argument("model: parameter " + e.name +
                               " has an unexpected shape for this config");
  }
}

Model::Bound Model::bind(Tape& tape) const {
  Bound b;
  for (const auto& e : params_.entries()) b.slots.push_back(tape.input(e.value));
  size_t i = 0;
  b.enc_w1 = b.slots[i++];
  b.enc_b1 = b.slots[i++];
  b.enc_w2 = b.slots[i++];
  b.enc_b2 = b.slots[i++];
  b.gen_w1 = b.slots[i++];
  b.gen_b1 = b.slots[i++];
  b.gen_w2 = b.slots[i++];
  b.gen_b2 = b.slots[i++];
  b.ode_win = b.slots[i++];
  for (int l = 0; l < cfg_.gcn_layers; ++l) b.ode_w.push_back(b.slots[i++]);
  b.out_w1 = b.slots[i++];
  b.out_b1 = b.slots[i++];
  b.out_w2 = b.slots[i++];
  b.out_b2 = b.slots[i++];
  b.out_w3 = b.slots[i++];
  b.out_b3 = b.slots[i++];
  return b;
}

void Model::accumulate_grads(const Bound& bound) {
  auto& entries = params_.entries();
  for (size_t i = 0; i < entries.size(); ++i) entries[i].grad += bound.slots[i].grad();
}

Model::Latent Model::encode(Tape& tape, const Bound& bound, const Tensor& s,
                            const Tensor& snaps, const Matrix* eps) const {
  Tensor in = cfg_.snapshots > 0 ? concat_cols(s, snaps) : s;
  Tensor h = relu(add_rowvec(matmul(in, bound.enc_w1), bound.enc_b1));
  Tensor out = add_rowvec(matmul(h, bound.enc_w2), bound.enc_b2);
  Latent lat;
  lat.mu = slice_cols(out, 0, cfg_.latent_dim);
  // Smooth bound keeps the variance head inside [-kLogVarCap, kLogVarCap];
  // near zero it is the identity, so a converged head is unaffected, but a hot
  // initial draw cannot blow up exp(logvar) in the KL term.
  constexpr double kLogVarCap = 6.0;
  lat.logvar = scale(
      tanh(scale(slice_cols(out, cfg_.latent_dim, cfg_.latent_dim),
                 1.0 / kLogVarCap)),
      kLogVarCap);
  if (eps) {
    Tensor sigma = exp(scale(lat.logvar, 0.5));
    lat.z = add(lat.mu, elementwise_mul(sigma, tape.input(*eps)));
  } else {
    lat.z = lat.mu;
  }
  return lat;
}

Tensor Model::generate(Tape& tape, const Bound& bound, const Tensor& z,
                       const Tensor& snaps) const {
  (void)tape;
  Tensor in = cfg_.snapshots > 0 ? concat_cols(z, snaps) : z;
  Tensor h = relu(add_rowvec(matmul(in, bound.gen_w1), bound.gen_b1));
  return sigmoid(add_rowvec(matmul(h, bound.gen_w2), bound.gen_b2));
}

Tensor Model::propagate(Tape& tape, const Bound& bound, const Tensor& s_star,
                        const Matrix& snap_cols) const {
  Tensor x = transpose(s_star);
  if (cfg_.snapshots > 0) {
    if (snap_cols.rows() != n_ || snap_cols.cols() != cfg_.snapshots)
      throw std::invalid_argument("propagate: snapshot block has wrong shape");
    x = concat_cols(x, tape.input(snap_cols));
  }
  Tensor h0 = matmul(x, bound.ode_win);
  auto dynamics = [this, &bound](const Tensor& h) {
    Tensor cur = h;
    for (const Tensor& w : bound.ode_w) cur = tanh(spmm(a_hat_, matmul(cur, w)));
    return cur;
  };
  Tensor hs = rk4_integrate(dynamics, h0, static_cast<double>(cfg_.rk4_steps),
                            cfg_.rk4_steps);
  Tensor r = relu(add_rowvec(matmul(hs, bound.out_w1), bound.out_b1));
  r = relu(add_rowvec(matmul(r, bound.out_w2), bound.out_b2));
  Tensor out = sigmoid(add_rowvec(matmul(r, bound.out_w3), bound.out_b3));
  return transpose(out);
}

Tensor Model::loss_total(Tape& tape, const Bound& bound, const Tensor& kl,
                         const Tensor& re, const Tensor& fp) const {
  (void)tape;
  Tensor total = add(add(kl, re), fp);
  if (cfg_.l2_coeff > 0.0) {
    Tensor reg = sum(square(bound.slots[0]));
    for (size_t i = 1; i < bound.slots.size(); ++i)
      reg = add(reg, sum(square(bound.slots[i])));
    total = add(total, scale(reg, cfg_.l2_coeff));
  }
  return total;
}

Matrix Model::indicator_row(const std::vector<uint8_t>& v) {
  Matrix m(1, static_cast<int>(v.size()));
  for (size_t i = 0; i < v.size(); ++i) m(0, static_cast<int>(i)) = v[i] ? 1.0 : 0.0;
  return m;
}

Matrix Model::source_row(const Cascade& c) const {
  Matrix m = Matrix::Zero(1, n_);
  for (int s : c.sources) m(0, s) = 1.0;
  return m;
}

Matrix Model::snapshot_row(const Cascade& c) const {
  if (static_cast<int>(c.snapshots.size()) != cfg_.snapshots)
    throw std::invalid_argument("model: cascade snapshot count disagrees with config");
  Matrix m(1, cfg_.snapshots * n_);
  for (int t = 0; t < cfg_.snapshots; ++t)
    for (int v = 0; v < n_; ++v) m(0, t * n_ + v) = c.snapshots[t][v] ? 1.0 : 0.0;
  return m;
}

Matrix Model::snapshot_cols(const Cascade& c) const {
  if (static_cast<int>(c.snapshots.size()) != cfg_.snapshots)
    throw std::invalid_argument("model: cascade snapshot count disagrees with config");
  Matrix m(n_, cfg_.snapshots);
  for (int t = 0; t < cfg_.snapshots; ++t)
    for (int v = 0; v < n_; ++v) m(v, t) = c.snapshots[t][v] ? 1.0 : 0.0;
  return m;
}

TrainStats Model::train(const DatasetBundle& data, Rng& rng) {
  if (data.n != n_) throw std::invalid_argument("train: dataset node count mismatch");
  if (data.train.empty()) throw std::invalid_argument("train: no training cascades");
  const auto blocks = data.block_ranges();
  TrainStats stats;
  for (int epoch = 1; epoch <= cfg_.train_epochs; ++epoch) {
    double epoch_sum = 0.0;
    for (size_t bi = 0; bi < blocks.size(); ++bi) {
      const auto [begin, end] = blocks[bi];
      const int bsize = end - begin;
      params_.zero_grads();
      double block_loss = 0.0;
      for (int idx = begin; idx < end; ++idx) {
        const Cascade& c = data.train[idx];
        Matrix eps(1, cfg_.latent_dim);
        for (int k = 0; k < cfg_.latent_dim; ++k) eps(0, k) = rng.normal();
        try {
          Tape tape;
          Bound bound = bind(tape);
          Tensor s = tape.input(source_row(c));
          Tensor snaps = tape.input(snapshot_row(c));
          Latent lat = encode(tape, bound, s, snaps, &eps);
          Tensor s_star = generate(tape, bound, lat.z, snaps);
          Tensor y_hat = propagate(tape, bound, s_star, snapshot_cols(c));
          Tensor y_true = tape.input(indicator_row(c.result));
          Tensor total = loss_total(tape, bound, loss_kl(lat.mu, lat.logvar),
                                    loss_re(s, s_star), loss_fp(y_true, y_hat));
          Tensor scaled = scale(total, 1.0 / bsize);
          tape.backward(scaled);
          accumulate_grads(bound);
          block_loss += scaled.value()(0, 0);
        } catch (const std::exception& e) {
          throw std::runtime_error("training aborted at epoch " + std::to_string(epoch) +
                                   ", block " + std::to_string(bi) + ": " + e.what());
        }
      }
      if (cfg_.use_sgd)
        params_.sgd_step(cfg_.train_lr);
      else
        params_.adam_step(cfg_.train_lr);
      epoch_sum += block_loss;
    }
    stats.epoch_loss.push_back(epoch_sum / static_cast<double>(blocks.size()));
  }
  return stats;
}

void Model::save_checkpoint(const std::string& path,
                            const std::string& manifest_hash) const {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write checkpoint: " + path);
  char buf[64];
  f << "srcloc-checkpoint v1\n";
  f << "manifest_hash " << (manifest_hash.empty() ? "-" : manifest_hash) << '\n';
  f << "n " << n_ << '\n';
  f << "config latent_dim=" << cfg_.latent_dim << " hidden_dim=" << cfg_.hidden_dim
    << " feature_dim=" << cfg_.feature_dim << " gcn_layers=" << cfg_.gcn_layers
    << " rk4_steps=" << cfg_.rk4_steps << " readout_hidden=" << cfg_.readout_hidden
    << " snapshots=" << cfg_.snapshots;
  std::snprintf(buf, sizeof(buf), " l2_coeff=%.17g", cfg_.l2_coeff);
  f << buf;
  std::snprintf(buf, sizeof(buf), " train_lr=%.17g", cfg_.train_lr);
  f << buf;
  f << " train_epochs=" << cfg_.train_epochs << " use_sgd=" << (cfg_.use_sgd ? 1 : 0)
    << '\n';
  params_.write(f);
  if (!f) throw std::runtime_error("write failed: " + path);
}

Model::Checkpoint Model::load_checkpoint(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open checkpoint: " + path);
  std::string line;
  if (!std::getline(f, line) || line != "srcloc-checkpoint v1")
    throw std::runtime_error("checkpoint: bad or missing version header: " + path);
  Checkpoint ck;
  std::string tag;
  if (!(f >> tag >> ck.manifest_hash) || tag != "manifest_hash")
    throw std::runtime_error("checkpoint: missing manifest_hash: " + path);
  if (ck.manifest_hash == "-") ck.manifest_hash.clear();
  if (!(f >> tag >> ck.n) || tag != "n")
    throw std::runtime_error("checkpoint: missing node count: " + path);
  std::getline(f, line);
  if (!std::getline(f, line) || line.rfind("config ", 0) != 0)
    throw std::runtime_error("checkpoint: missing config line: " + path);
  std::istringstream cs(line.substr(7));
  std::string kv;
  while (cs >> kv) {
    const size_t eq = kv.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("checkpoint: malformed config entry: " + kv);
    const std::string key = kv.substr(0, eq);
    const std::string val = kv.substr(eq + 1);
    ModelConfig& c = ck.cfg;
    if (key == "latent_dim") c.latent_dim = std::stoi(val);
    else if (key == "hidden_dim") c.hidden_dim = std::stoi(val);
    else if (key == "feature_dim") c.feature_dim = std::stoi(val);
    else if (key == "gcn_layers") c.gcn_layers = std::stoi(val);
    else if (key == "rk4_steps") c.rk4_steps = std::stoi(val);
    else if (key == "readout_hidden") c.readout_hidden = std::stoi(val);
    else if (key == "snapshots") c.snapshots = std::stoi(val);
    else if (key == "l2_coeff") c.l2_coeff = std::stod(val);
    else if (key == "train_lr") c.train_lr = std::stod(val);
    else if (key == "train_epochs") c.train_epochs = std::stoi(val);
    else if (key == "use_sgd") c.use_sgd = (val == "1");
    else throw std::runtime_error("checkpoint: unknown config key: " + key);
  }
  ck.params = ParamSet::read(f);
  return ck;
}

}  // namespace srcloc
