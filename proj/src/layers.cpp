#include "convtopic/layers.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "convtopic/rng.hpp"

namespace convtopic {

std::vector<double> dense_forward(std::span<const double> x, const Parameter& w, const Parameter& b,
                                  Activation activation, DenseCache* cache) {
  require_shape(w.cols() == x.size(), "dense input width " + std::to_string(x.size()) +
                                          " vs weight cols " + std::to_string(w.cols()));
  require_shape(b.value.size() == w.rows(), "dense bias");
  std::vector<double> pre(b.value.values().begin(), b.value.values().end());
  matvec(w.value, x, pre, /*accumulate=*/true);
  std::vector<double> out = pre;
  if (activation == Activation::kRelu) {
    for (auto& v : out) v = v < 0.0 ? 0.0 : v;  // NaN passes through so divergence is detected
  }
  if (cache != nullptr) {
    cache->input.assign(x.begin(), x.end());
    cache->pre_activation = std::move(pre);
    cache->activation = activation;
  }
  return out;
}

std::vector<double> dense_backward(const DenseCache& cache, std::span<const double> upstream,
                                   Parameter& w, Parameter& b) {
  require_shape(upstream.size() == w.rows() && cache.input.size() == w.cols(), "dense_backward");
  std::vector<double> dpre(upstream.begin(), upstream.end());
  if (cache.activation == Activation::kRelu) {
    for (std::size_t i = 0; i < dpre.size(); ++i) {
      if (!(cache.pre_activation[i] > 0.0)) dpre[i] = 0.0;
    }
  }
  add_outer(w.grad, dpre, cache.input);
  axpy(1.0, dpre, b.grad.values());
  std::vector<double> dx(w.cols());
  matvec_transposed(w.value, dpre, dx);
  return dx;
}

std::vector<double> softmax(std::span<const double> logits) {
  if (logits.empty()) throw std::domain_error("softmax of empty vector");
  double mx = logits[0];
  for (double v : logits) {
    if (std::isnan(v)) throw std::domain_error("softmax input contains NaN");
    mx = std::max(mx, v);
  }
  std::vector<double> out(logits.size());
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - mx);
    total += out[i];
  }
  for (auto& v : out) v /= total;
  return out;
}

std::vector<double> softmax_backward(std::span<const double> probs, std::span<const double> dprobs) {
  require_shape(probs.size() == dprobs.size(), "softmax_backward");
  const double inner = dot(probs, dprobs);
  std::vector<double> d(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i) d[i] = probs[i] * (dprobs[i] - inner);
  return d;
}

CrossEntropy cross_entropy(std::span<const double> probs, std::size_t label) {
  if (label >= probs.size()) {
    throw std::out_of_range("label " + std::to_string(label) + " out of range for " +
                            std::to_string(probs.size()) + " classes");
  }
  CrossEntropy ce;
  ce.loss = -std::log(std::max(probs[label], kMinProbability));
  ce.dlogits.assign(probs.begin(), probs.end());
  ce.dlogits[label] -= 1.0;
  return ce;
}

DropoutResult dropout(std::span<const double> x, double rate, Rng& rng, bool training) {
  if (!(rate >= 0.0 && rate < 1.0)) {
    throw std::invalid_argument("dropout rate must be in [0, 1), got " + std::to_string(rate));
  }
  DropoutResult d;
  d.output.assign(x.begin(), x.end());
  d.mask.assign(x.size(), 1.0);
  if (!training || rate == 0.0) return d;
  d.scale = 1.0 / (1.0 - rate);
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (rng.uniform() < rate) {
      d.mask[i] = 0.0;
      d.output[i] = 0.0;
    } else {
      d.output[i] *= d.scale;
    }
  }
  return d;
}

std::vector<double> dropout_backward(const DropoutResult& d, std::span<const double> upstream) {
  require_shape(upstream.size() == d.mask.size(), "dropout_backward");
  std::vector<double> dx(upstream.size());
  for (std::size_t i = 0; i < dx.size(); ++i) dx[i] = upstream[i] * d.mask[i] * d.scale;
  return dx;
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

LstmParams::LstmParams(const std::string& prefix, std::size_t input_dim, std::size_t hidden)
    : wx(prefix + ".wx", 4 * hidden, input_dim),
      wh(prefix + ".wh", 4 * hidden, hidden),
      b(prefix + ".b", 4 * hidden, 1) {}

LstmState lstm_cell_forward(std::span<const double> x, std::span<const double> h_prev,
                            std::span<const double> c_prev, const LstmParams& p, LstmCache* cache) {
  const std::size_t hidden = p.hidden();
  require_shape(x.size() == p.input_dim(), "lstm input");
  require_shape(h_prev.size() == hidden && c_prev.size() == hidden, "lstm state");

  std::vector<double> z(p.b.value.values().begin(), p.b.value.values().end());
  matvec(p.wx.value, x, z, true);
  matvec(p.wh.value, h_prev, z, true);

  std::vector<double> i(hidden), f(hidden), o(hidden), g(hidden), c(hidden), tc(hidden), h(hidden);
  for (std::size_t k = 0; k < hidden; ++k) {
    i[k] = sigmoid(z[k]);
    f[k] = sigmoid(z[hidden + k]);
    o[k] = sigmoid(z[2 * hidden + k]);
    g[k] = std::tanh(z[3 * hidden + k]);
    c[k] = f[k] * c_prev[k] + i[k] * g[k];
    tc[k] = std::tanh(c[k]);
    h[k] = o[k] * tc[k];
  }
  if (cache != nullptr) {
    cache->x.assign(x.begin(), x.end());
    cache->h_prev.assign(h_prev.begin(), h_prev.end());
    cache->c_prev.assign(c_prev.begin(), c_prev.end());
    cache->i = i;
    cache->f = f;
    cache->o = o;
    cache->g = g;
    cache->c = c;
    cache->tanh_c = tc;
  }
  return {std::move(h), std::move(c)};
}

LstmCellGrads lstm_cell_backward(const LstmCache& cache, std::span<const double> dh,
                                 std::span<const double> dc, LstmParams& p) {
  const std::size_t hidden = p.hidden();
  require_shape(dh.size() == hidden && dc.size() == hidden, "lstm_cell_backward");

  std::vector<double> dz(4 * hidden);
  LstmCellGrads out;
  out.dc_prev.resize(hidden);
  for (std::size_t k = 0; k < hidden; ++k) {
    const double tc = cache.tanh_c[k];
    const double dc_total = dc[k] + dh[k] * cache.o[k] * (1.0 - tc * tc);
    const double d_o = dh[k] * tc;
    const double d_i = dc_total * cache.g[k];
    const double d_f = dc_total * cache.c_prev[k];
    const double d_g = dc_total * cache.i[k];
    dz[k] = d_i * cache.i[k] * (1.0 - cache.i[k]);
    dz[hidden + k] = d_f * cache.f[k] * (1.0 - cache.f[k]);
    dz[2 * hidden + k] = d_o * cache.o[k] * (1.0 - cache.o[k]);
    dz[3 * hidden + k] = d_g * (1.0 - cache.g[k] * cache.g[k]);
    out.dc_prev[k] = dc_total * cache.f[k];
  }
  add_outer(p.wx.grad, dz, cache.x);
  add_outer(p.wh.grad, dz, cache.h_prev);
  axpy(1.0, dz, p.b.grad.values());
  out.dx.resize(p.input_dim());
  out.dh_prev.resize(hidden);
  matvec_transposed(p.wx.value, dz, out.dx);
  matvec_transposed(p.wh.value, dz, out.dh_prev);
  return out;
}

}  // namespace convtopic
