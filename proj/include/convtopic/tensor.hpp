#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace convtopic {

class Rng;

/// Thrown when operand shapes disagree.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Rank <= 2 row-major array of doubles. Vectors are rows x 1.
class Tensor {
 public:
  Tensor() = default;
  Tensor(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Tensor vector(std::span<const double> values);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool same_shape(const Tensor& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }

  void fill(double v);
  void fill_uniform(Rng& rng, double lo, double hi);

  bool operator==(const Tensor&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// A trainable tensor with its gradient and ADAM moment estimates.
struct Parameter {
  Parameter() = default;
  Parameter(std::string name, std::size_t rows, std::size_t cols)
      : name(std::move(name)),
        value(rows, cols),
        grad(rows, cols),
        adam_m(rows, cols),
        adam_v(rows, cols) {}

  std::string name;
  Tensor value;
  Tensor grad;
  Tensor adam_m;
  Tensor adam_v;
  long step = 0;

  std::size_t rows() const { return value.rows(); }
  std::size_t cols() const { return value.cols(); }
  void zero_grad() { grad.fill(0.0); }
};

// y = W x (+ y when accumulate). W is rows x cols, x has cols entries.
void matvec(const Tensor& w, std::span<const double> x, std::span<double> y, bool accumulate = false);
// y = W^T x (+ y when accumulate).
void matvec_transposed(const Tensor& w, std::span<const double> x, std::span<double> y,
                       bool accumulate = false);
// W += a b^T.
void add_outer(Tensor& w, std::span<const double> a, std::span<const double> b);
// y += alpha * x.
void axpy(double alpha, std::span<const double> x, std::span<double> y);
double dot(std::span<const double> a, std::span<const double> b);

void require_shape(bool ok, const std::string& what);

}  // namespace convtopic
