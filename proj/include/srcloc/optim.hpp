/// Named parameter store, Adam/SGD steps, and exact-decimal persistence.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "srcloc/rng.hpp"
#include "srcloc/tensor.hpp"

namespace srcloc {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

class ParamSet {
 public:
  struct Entry {
    std::string name;
    Matrix value;
    Matrix grad;  // accumulated across a block, zeroed before each step
    Matrix m1;    // Adam first moment
    Matrix m2;    // Adam second moment
  };

  Entry& add(const std::string& name, Matrix init);
  Entry& at(const std::string& name);
  const Entry& at(const std::string& name) const;

  std::vector<Entry>& entries() { return entries_; }
  const std::vector<Entry>& entries() const { return entries_; }
  int64_t step() const { return step_; }

  void zero_grads();

  /// Adam update from the accumulated grads; bias-corrected, one shared step counter.
  void adam_step(double lr, const AdamConfig& cfg = {});
  /// Plain gradient descent, kept as the optimizer ablation.
  void sgd_step(double lr);

  /// Text format with %.17g values; round-trips doubles exactly.
  void save(const std::string& path) const;
  static ParamSet load(const std::string& path);
  void write(std::ostream& out) const;
  static ParamSet read(std::istream& in);

  bool same_values(const ParamSet& other) const;

 private:
  std::vector<Entry> entries_;
  int64_t step_ = 0;
};

/// Uniform(-a, a) with a = sqrt(6 / (fan_in + fan_out)).
Matrix glorot_init(int rows, int cols, Rng& rng);

}  // namespace srcloc
