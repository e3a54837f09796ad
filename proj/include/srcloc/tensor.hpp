/// Reverse-mode autodiff over dense 2-D double matrices.
///
/// A Tape owns the recorded nodes; Tensor is a cheap handle into it. Ops
/// append nodes in topological order, so backward() is a single reverse
/// sweep. Every op checks its result for NaN/Inf and throws with the op name.
#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace srcloc {

using Matrix = Eigen::MatrixXd;
using SpMat = Eigen::SparseMatrix<double>;

class Tape;

class Tensor {
 public:
  Tensor() = default;
  Tensor(Tape* tape, int id) : tape_(tape), id_(id) {}
  const Matrix& value() const;
  /// Accumulated gradient (zeros if this node never received one).
  Matrix grad() const;
  int rows() const { return static_cast<int>(value().rows()); }
  int cols() const { return static_cast<int>(value().cols()); }
  bool valid() const { return tape_ != nullptr; }
  Tape* tape() const { return tape_; }
  int id() const { return id_; }

 private:
  Tape* tape_ = nullptr;
  int id_ = -1;
};

class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Leaf node. Parameters and constants alike enter through here; gradients
  /// can be read back from any node after backward().
  Tensor input(Matrix value) { return emit(std::move(value), "input", {}); }

  /// Reverse sweep from a scalar (1x1) node; accumulates into every ancestor.
  /// Consumes the recorded closures, so it can run only once per tape.
  void backward(const Tensor& loss);

  size_t size() const { return nodes_.size(); }

  // Plumbing for op implementations; not meant for normal callers.
  Tensor emit(Matrix value, const char* op, std::function<void()> back);
  void accumulate(int id, const Matrix& delta);
  const Matrix& value_of(int id) const { return nodes_.at(id).value; }
  const Matrix* grad_of(int id) const;

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    bool has_grad = false;
    std::function<void()> back;
    const char* op = "input";
  };

  std::vector<Node> nodes_;
  bool finished_ = false;
};

Tensor matmul(const Tensor& a, const Tensor& b);
/// Constant sparse left factor; gradient flows into the dense operand only.
Tensor spmm(const SpMat& s, const Tensor& b);
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
/// Adds a 1xC row vector to every row of an RxC matrix.
Tensor add_rowvec(const Tensor& a, const Tensor& bias);
Tensor scale(const Tensor& a, double k);
Tensor elementwise_mul(const Tensor& a, const Tensor& b);
Tensor concat_cols(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);
Tensor slice_cols(const Tensor& a, int begin, int len);
Tensor slice_rows(const Tensor& a, int begin, int len);
Tensor sigmoid(const Tensor& a);
Tensor tanh(const Tensor& a);
Tensor relu(const Tensor& a);
Tensor exp(const Tensor& a);
Tensor log(const Tensor& a);
Tensor square(const Tensor& a);
/// Clips values to [lo, hi]; gradient passes only through the strict interior.
Tensor clamp(const Tensor& a, double lo, double hi);
Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);
/// log(sum(exp())) over all entries, max-shifted for stability.
Tensor logsumexp(const Tensor& a);

}  // namespace srcloc
