#include "srcloc/tensor.hpp"

#include <cmath>

namespace srcloc {

namespace {

void check_finite(const Matrix& m, const char* op) {
  if (!m.allFinite())
    throw std::runtime_error(std::string("non-finite values produced by op '") + op + "'");
}

[[noreturn]] void shape_error(const char* op, const Tensor& a, const Tensor& b) {
  throw std::invalid_argument(std::string("shape mismatch in op '") + op + "': " +
                              std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                              " vs " + std::to_string(b.rows()) + "x" +
                              std::to_string(b.cols()));
}

void require_same_tape(const char* op, const Tensor& a, const Tensor& b) {
  if (!a.valid() || !b.valid() || a.tape() != b.tape())
    throw std::invalid_argument(std::string("op '") + op +
                                "' requires operands from the same tape");
}

void require_valid(const char* op, const Tensor& a) {
  if (!a.valid())
    throw std::invalid_argument(std::string("op '") + op + "' got an empty tensor");
}

// Elementwise op with dy/dx expressed from (x, y).
Tensor unary_op(const char* op, const Tensor& a,
                Matrix value,
                std::function<Matrix(const Matrix&, const Matrix&)> dydx) {
  Tape* t = a.tape();
  const int aid = a.id();
  const int oid = static_cast<int>(t->size());
  auto back = [t, aid, oid, dydx = std::move(dydx)]() {
    const Matrix& g = *t->grad_of(oid);
    t->accumulate(aid, g.cwiseProduct(dydx(t->value_of(aid), t->value_of(oid))));
  };
  return t->emit(std::move(value), op, std::move(back));
}

}  // namespace

const Matrix& Tensor::value() const {
  if (!tape_) throw std::runtime_error("Tensor: empty handle");
  return tape_->value_of(id_);
}

Matrix Tensor::grad() const {
  if (!tape_) throw std::runtime_error("Tensor: empty handle");
  const Matrix* g = tape_->grad_of(id_);
  if (g) return *g;
  return Matrix::Zero(value().rows(), value().cols());
}

Tensor Tape::emit(Matrix value, const char* op, std::function<void()> back) {
  check_finite(value, op);
  Node node;
  node.value = std::move(value);
  node.back = std::move(back);
  node.op = op;
  nodes_.push_back(std::move(node));
  return Tensor(this, static_cast<int>(nodes_.size()) - 1);
}

void Tape::accumulate(int id, const Matrix& delta) {
  Node& node = nodes_.at(id);
  if (node.has_grad) {
    node.grad += delta;
  } else {
    node.grad = delta;
    node.has_grad = true;
  }
}

const Matrix* Tape::grad_of(int id) const {
  const Node& node = nodes_.at(id);
  return node.has_grad ? &node.grad : nullptr;
}

void Tape::backward(const Tensor& loss) {
  if (finished_) throw std::logic_error("Tape: backward already ran");
  if (!loss.valid() || loss.tape() != this)
    throw std::invalid_argument("Tape: loss tensor belongs to another tape");
  if (loss.rows() != 1 || loss.cols() != 1)
    throw std::invalid_argument("Tape: backward requires a 1x1 loss");
  finished_ = true;
  accumulate(loss.id(), Matrix::Ones(1, 1));
  for (int id = loss.id(); id >= 0; --id) {
    Node& node = nodes_[id];
    if (node.has_grad && node.back) node.back();
    node.back = nullptr;
  }
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_same_tape("matmul", a, b);
  if (a.cols() != b.rows()) shape_error("matmul", a, b);
  Tape* t = a.tape();
  const int aid = a.id(), bid = b.id();
  const int oid = static_cast<int>(t->size());
  auto back = [t, aid, bid, oid]() {
    const Matrix& g = *t->grad_of(oid);
    t->accumulate(aid, g * t->value_of(bid).transpose());
    t->accumulate(bid, t->value_of(aid).transpose() * g);
  };
  return t->emit(a.value() * b.value(), "matmul", std::move(back));
}

Tensor spmm(const SpMat& s, const Tensor& b) {
  require_valid("spmm", b);
  if (s.cols() != b.rows())
    throw std::invalid_argument("shape mismatch in op 'spmm': sparse " +
                                std::to_string(s.rows()) + "x" + std::to_string(s.cols()) +
                                " vs " + std::to_string(b.rows()) + "x" +
                                std::to_string(b.cols()));
  Tape* t = b.tape();
  const int bid = b.id();
  const int oid = static_cast<int>(t->size());
  SpMat st = s.transpose();
  auto back = [t, bid, oid, st = std::move(st)]() {
    t->accumulate(bid, st * (*t->grad_of(oid)));
  };
  return t->emit(s * b.value(), "spmm", std::move(back));
}

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_tape("add", a, b);
  if (a.rows() != b.rows() || a.cols() != b.cols()) shape_error("add", a, b);
  Tape* t = a.tape();
  const int aid = a.id(), bid = b.id();
  const int oid = static_cast<int>(t->size());
  auto back = [t, aid, bid, oid]() {
    const Matrix& g = *t->grad_of(oid);
    t->accumulate(aid, g);
    t->accumulate(bid, g);
  };
  return t->emit(a.value() + b.value(), "add", std::move(back));
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_tape("sub", a, b);
  if (a.rows() != b.rows() || a.cols() != b.cols()) shape_error("sub", a, b);
  Tape* t = a.tape();
  const int aid = a.id(), bid = b.id();
  const int oid = static_cast<int>(t->size());
  auto back = [t, aid, bid, oid]() {
    const Matrix& g = *t->grad_of(oid);
    t->accumulate(aid, g);
    t->accumulate(bid, -g);
  };
  return t->emit(a.value() - b.value(), "sub", std::move(back));
}

Tensor add_rowvec(const Tensor& a, const Tensor& bias) {
  require_same_tape("add_rowvec", a, bias);
  if (bias.rows() != 1 || bias.cols() != a.cols()) shape_error("add_rowvec", a, bias);
  Tape* t = a.tape();
  const int aid = a.id(), bid = bias.id();
  const int oid = static_cast<int>(t->size());
  auto back = [t, aid, bid, oid]() {
    const Matrix& g = *t->grad_of(oid);
    t->accumulate(aid, g);
    t->accumulate(bid, g.colwise().sum());
  };
  return t->emit(a.value().rowwise() + bias.value().row(0), "add_rowvec", std::move(back));
}

Tensor scale(const Tensor& a, double k) {
  require_valid("scale", a);
  Tape* t = a.tape();
  const int aid = a.id();
  const int oid = static_cast<int>(t->size());
  auto back = [t, aid, oid, k]() { t->accumulate(aid, k * (*t->grad_of(oid))); };
  return t->emit(k * a.value(), "scale", std::move(back));
}

Tensor elementwise_mul(const Tensor& a, const Tensor& b) {
  require_same_tape("elementwise_mul", a, b);
  if (a.rows() != b.rows() || a.cols() != b.cols()) shape_error("elementwise_mul", a, b);
  Tape* t = a.tape();
  const int aid = a.id(), bid = b.id();
  const int oid = static_cast<int>(t->size());
  auto back = [t, aid, bid, oid]() {
    const Matrix& g = *t->grad_of(oid);
    t->accumulate(aid, g.cwiseProduct(t->value_of(bid)));
    t->accumulate(bid, g.cwiseProduct(t->value_of(aid)));
  };
  return t->emit(a.value().cwiseProduct(b.value()), "elementwise_mul", std::move(back));
}

Tensor concat_cols(const Tensor& a, const Tensor& b) {
  require_same_tape("concat_cols", a, b);
  if (a.rows() != b.rows()) shape_error("concat_cols", a, b);
  Tape* t = a.tape();
  const int aid = a.id(), bid = b.id();
  const int ac = a.cols(), bc = b.cols();
  const int oid = static_cast<int>(t->size());
  Matrix value(a.rows(), ac + bc);
  value << a.value(), b.value();
  auto back = [t, aid, bid, oid, ac, bc]() {
    const Matrix& g = *t->grad_of(oid);
    t->accumulate(aid, g.leftCols(ac));
    t->accumulate(bid, g.rightCols(bc));
  };
  return t->emit(std::move(value), "concat_cols", std::move(back));
}

Tensor transpose(const Tensor& a) {
  require_valid("transpose", a);
  Tape* t = a.tape();
  const int aid = a.id();
  const int oid = static_cast<int>(t->size());
  auto back = [t, aid, oid]() { t->accumulate(aid, t->grad_of(oid)->transpose()); };
  return t->emit(a.value().transpose(), "transpose", std::move(back));
}

Tensor slice_cols(const Tensor& a, int begin, int len) {
  require_valid("slice_cols", a);
  if (begin < 0 || len < 1 || begin + len > a.cols())
    throw std::invalid_argument("slice_cols: range out of bounds");
  Tape* t = a.tape();
  const int aid = a.id();
  const int rows = a.rows(), cols = a.cols();
  const int oid = static_cast<int>(t->size());
  auto back = [t, aid, oid, begin, len, rows, cols]() {
    Matrix g = Matrix::Zero(rows, cols);
    g.middleCols(begin, len) = *t->grad_of(oid);
    t->accumulate(aid, g);
  };
  return t->emit(a.value().middleCols(begin, len), "slice_cols", std::move(back));
}

Tensor slice_rows(const Tensor& a, int begin, int len) {
  require_valid("slice_rows", a);
  if (begin < 0 || len < 1 || begin + len > a.rows())
    throw std::invalid_argument("slice_rows: range out of bounds");
  Tape* t = a.tape();
  const int aid = a.id();
  const int rows = a.rows(), cols = a.cols();
  const int oid = static_cast<int>(t->size());
  auto back = [t, aid, oid, begin, len, rows, cols]() {
    Matrix g = Matrix::Zero(rows, cols);
    g.middleRows(begin, len) = *t->grad_of(oid);
    t->accumulate(aid, g);
  };
  return t->emit(a.value().middleRows(begin, len), "slice_rows", std::move(back));
}

Tensor sigmoid(const Tensor& a) {
  require_valid("sigmoid", a);
  Matrix y = (1.0 + (-a.value().array()).exp()).inverse().matrix();
  return unary_op("sigmoid", a, std::move(y),
                  [](const Matrix&, const Matrix& y) -> Matrix {
                    return (y.array() * (1.0 - y.array())).matrix();
                  });
}

Tensor tanh(const Tensor& a) {
  require_valid("tanh", a);
  Matrix y = a.value().array().tanh().matrix();
  return unary_op("tanh", a, std::move(y),
                  [](const Matrix&, const Matrix& y) -> Matrix {
                    return (1.0 - y.array().square()).matrix();
                  });
}

Tensor relu(const Tensor& a) {
  require_valid("relu", a);
  Matrix y = a.value().cwiseMax(0.0);
  return unary_op("relu", a, std::move(y),
                  [](const Matrix& x, const Matrix&) -> Matrix {
                    return (x.array() > 0.0).cast<double>().matrix();
                  });
}

Tensor exp(const Tensor& a) {
  require_valid("exp", a);
  Matrix y = a.value().array().exp().matrix();
  return unary_op("exp", a, std::move(y),
                  [](const Matrix&, const Matrix& y) -> Matrix { return y; });
}

Tensor log(const Tensor& a) {
  require_valid("log", a);
  Matrix y = a.value().array().log().matrix();
  return unary_op("log", a, std::move(y),
                  [](const Matrix& x, const Matrix&) -> Matrix {
                    return x.array().inverse().matrix();
                  });
}

Tensor square(const Tensor& a) {
  require_valid("square", a);
  Matrix y = a.value().array().square().matrix();
  return unary_op("square", a, std::move(y),
                  [](const Matrix& x, const Matrix&) -> Matrix { return 2.0 * x; });
}

Tensor clamp(const Tensor& a, double lo, double hi) {
  require_valid("clamp", a);
  if (!(lo < hi)) throw std::invalid_argument("clamp: lo must be below hi");
  Matrix y = a.value().cwiseMax(lo).cwiseMin(hi);
  return unary_op("clamp", a, std::move(y),
                  [lo, hi](const Matrix& x, const Matrix&) -> Matrix {
                    return ((x.array() > lo) && (x.array() < hi)).cast<double>().matrix();
                  });
}

Tensor sum(const Tensor& a) {
  require_valid("sum", a);
  Tape* t = a.tape();
  const int aid = a.id();
  const int rows = a.rows(), cols = a.cols();
  const int oid = static_cast<int>(t->size());
  Matrix value(1, 1);
  value(0, 0) = a.value().sum();
  auto back = [t, aid, oid, rows, cols]() {
    t->accumulate(aid, (*t->grad_of(oid))(0, 0) * Matrix::Ones(rows, cols));
  };
  return t->emit(std::move(value), "sum", std::move(back));
}

Tensor mean(const Tensor& a) {
  require_valid("mean", a);
  Tape* t = a.tape();
  const int aid = a.id();
  const int rows = a.rows(), cols = a.cols();
  const double inv = 1.0 / (static_cast<double>(rows) * cols);
  const int oid = static_cast<int>(t->size());
  Matrix value(1, 1);
  value(0, 0) = a.value().mean();
  auto back = [t, aid, oid, rows, cols, inv]() {
    t->accumulate(aid, (*t->grad_of(oid))(0, 0) * inv * Matrix::Ones(rows, cols));
  };
  return t->emit(std::move(value), "mean", std::move(back));
}

Tensor logsumexp(const Tensor& a) {
  require_valid("logsumexp", a);
  Tape* t = a.tape();
  const int aid = a.id();
  const int oid = static_cast<int>(t->size());
  const double shift = a.value().maxCoeff();
  Matrix value(1, 1);
  value(0, 0) = shift + std::log((a.value().array() - shift).exp().sum());
  auto back = [t, aid, oid]() {
    const double y = t->value_of(oid)(0, 0);
    Matrix softmax = (t->value_of(aid).array() - y).exp().matrix();
    t->accumulate(aid, (*t->grad_of(oid))(0, 0) * softmax);
  };
  return t->emit(std::move(value), "logsumexp", std::move(back));
}

}  // namespace srcloc
