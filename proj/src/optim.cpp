#include "srcloc/optim.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace srcloc {

ParamSet::Entry& ParamSet::add(const std::string& name, Matrix init) {
  for (const Entry& e : entries_)
    if (e.name == name)
      throw std::invalid_argument("ParamSet: duplicate parameter name: " + name);
  Entry e;
  e.name = name;
  e.grad = Matrix::Zero(init.rows(), init.cols());
  e.m1 = Matrix::Zero(init.rows(), init.cols());
  e.m2 = Matrix::Zero(init.rows(), init.cols());
  e.value = std::move(init);
  entries_.push_back(std::move(e));
  return entries_.back();
}

ParamSet::Entry& ParamSet::at(const std::string& name) {
  for (Entry& e : entries_)
    if (e.name == name) return e;
  throw std::invalid_argument("ParamSet: unknown parameter: " + name);
}

const ParamSet::Entry& ParamSet::at(const std::string& name) const {
  for (const Entry& e : entries_)
    if (e.name == name) return e;
  throw std::invalid_argument("ParamSet: unknown parameter: " + name);
}

void ParamSet::zero_grads() {
  for (Entry& e : entries_) e.grad.setZero();
}

void ParamSet::adam_step(double lr, const AdamConfig& cfg) {
  ++step_;
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step_));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step_));
  for (Entry& e : entries_) {
    e.m1 = cfg.beta1 * e.m1 + (1.0 - cfg.beta1) * e.grad;
    e.m2 = cfg.beta2 * e.m2.array() + (1.0 - cfg.beta2) * e.grad.array().square();
    e.value.array() -=
        lr * (e.m1.array() / c1) / ((e.m2.array() / c2).sqrt() + cfg.eps);
  }
}

void ParamSet::sgd_step(double lr) {
  ++step_;
  for (Entry& e : entries_) e.value -= lr * e.grad;
}

void ParamSet::write(std::ostream& out) const {
  out << "srcloc-params v1\n";
  out << "count " << entries_.size() << '\n';
  char buf[64];
  for (const Entry& e : entries_) {
    out << e.name << ' ' << e.value.rows() << ' ' << e.value.cols() << '\n';
    for (Eigen::Index r = 0; r < e.value.rows(); ++r) {
      for (Eigen::Index c = 0; c < e.value.cols(); ++c) {
        std::snprintf(buf, sizeof(buf), "%.17g", e.value(r, c));
        out << buf << (c + 1 == e.value.cols() ? "" : " ");
      }
      out << '\n';
    }
  }
}

ParamSet ParamSet::read(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "srcloc-params v1")
    throw std::runtime_error("params: bad or missing version header");
  size_t count = 0;
  std::string tag;
  if (!(in >> tag >> count) || tag != "count")
    throw std::runtime_error("params: missing count line");
  ParamSet ps;
  for (size_t i = 0; i < count; ++i) {
    std::string name;
    Eigen::Index rows = 0, cols = 0;
    if (!(in >> name >> rows >> cols) || rows < 1 || cols < 1)
      throw std::runtime_error("params: malformed entry header");
    Matrix m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
      for (Eigen::Index c = 0; c < cols; ++c)
        if (!(in >> m(r, c)))
          throw std::runtime_error("params: truncated values for " + name);
    ps.add(name, std::move(m));
  }
  return ps;
}

void ParamSet::save(const std::string& path) const {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write params: " + path);
  write(f);
  if (!f) throw std::runtime_error("write failed: " + path);
}

ParamSet ParamSet::load(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open params: " + path);
  return read(f);
}

bool ParamSet::same_values(const ParamSet& other) const {
  if (entries_.size() != other.entries_.size()) return false;
  for (size_t i = 0; i < entries_.size(); ++i) {
    const Entry& a = entries_[i];
    const Entry& b = other.entries_[i];
    if (a.name != b.name || a.value.rows() != b.value.rows() ||
        a.value.cols() != b.value.cols())
      return false;
    if (std::memcmp(a.value.data(), b.value.data(),
                    sizeof(double) * a.value.size()) != 0)
      return false;
  }
  return true;
}

Matrix glorot_init(int rows, int cols, Rng& rng) {
  const double a = std::sqrt(6.0 / (rows + cols));
  Matrix m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = rng.uniform(-a, a);
  return m;
}

}  // namespace srcloc
