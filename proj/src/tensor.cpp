#include "convtopic/tensor.hpp"

#include <algorithm>

#include "convtopic/rng.hpp"

namespace convtopic {

Tensor Tensor::vector(std::span<const double> values) {
  Tensor t(values.size(), 1);
  std::copy(values.begin(), values.end(), t.data_.begin());
  return t;
}

void Tensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

void Tensor::fill_uniform(Rng& rng, double lo, double hi) {
  for (auto& x : data_) x = rng.uniform(lo, hi);
}

void require_shape(bool ok, const std::string& what) {
  if (!ok) throw ShapeError("shape mismatch: " + what);
}

void matvec(const Tensor& w, std::span<const double> x, std::span<double> y, bool accumulate) {
  require_shape(w.cols() == x.size() && w.rows() == y.size(), "matvec");
  for (std::size_t r = 0; r < w.rows(); ++r) {
    const double s = dot(w.row(r), x);
    y[r] = accumulate ? y[r] + s : s;
  }
}

void matvec_transposed(const Tensor& w, std::span<const double> x, std::span<double> y,
                       bool accumulate) {
  require_shape(w.rows() == x.size() && w.cols() == y.size(), "matvec_transposed");
  if (!accumulate) std::fill(y.begin(), y.end(), 0.0);
  for (std::size_t r = 0; r < w.rows(); ++r) {
    if (x[r] != 0.0) axpy(x[r], w.row(r), y);
  }
}

void add_outer(Tensor& w, std::span<const double> a, std::span<const double> b) {
  require_shape(w.rows() == a.size() && w.cols() == b.size(), "add_outer");
  for (std::size_t r = 0; r < w.rows(); ++r) {
    if (a[r] != 0.0) axpy(a[r], b, w.row(r));
  }
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  require_shape(x.size() == y.size(), "axpy");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

double dot(std::span<const double> a, std::span<const double> b) {
  require_shape(a.size() == b.size(), "dot");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace convtopic
