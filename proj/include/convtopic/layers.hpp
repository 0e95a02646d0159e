#pragma once

// Forward and hand-derived backward passes for the layers the classifiers are
// built from. Backward functions accumulate into Parameter::grad and return
// the gradient with respect to their inputs.

#include <cstddef>
#include <span>
#include <vector>

#include "convtopic/tensor.hpp"

namespace convtopic {

class Rng;

enum class Activation { kNone, kRelu };

struct DenseCache {
  std::vector<double> input;
  std::vector<double> pre_activation;
  Activation activation = Activation::kNone;
};

/// act(W x + b). Fills `cache` when non-null.
std::vector<double> dense_forward(std::span<const double> x, const Parameter& w, const Parameter& b,
                                  Activation activation, DenseCache* cache = nullptr);

/// Accumulates dW and db into the parameters and returns dx.
std::vector<double> dense_backward(const DenseCache& cache, std::span<const double> upstream,
                                   Parameter& w, Parameter& b);

/// Numerically stable softmax. Throws std::domain_error on NaN or empty input.
std::vector<double> softmax(std::span<const double> logits);

/// Backward of softmax: returns dlogits given dprobs and the softmax output.
std::vector<double> softmax_backward(std::span<const double> probs, std::span<const double> dprobs);

struct CrossEntropy {
  double loss = 0.0;
  std::vector<double> dlogits;  // probs - one_hot(label), valid when fused with softmax
};

inline constexpr double kMinProbability = 1e-12;

/// -ln probs[label], clamped at kMinProbability. Throws std::out_of_range on a bad label.
CrossEntropy cross_entropy(std::span<const double> probs, std::size_t label);

struct DropoutResult {
  std::vector<double> output;
  std::vector<double> mask;  // 1 where kept, 0 where dropped
  double scale = 1.0;        // survivors are multiplied by this
};

/// Inverted dropout. Identity when !training or rate == 0. Throws for rate
/// outside [0, 1).
DropoutResult dropout(std::span<const double> x, double rate, Rng& rng, bool training);

/// Backward of dropout: upstream * mask * scale.
std::vector<double> dropout_backward(const DropoutResult& d, std::span<const double> upstream);

// ---------------------------------------------------------------------------
// LSTM

/// One LSTM cell. Gate rows are stacked [input; forget; output; candidate],
/// so each weight has 4*hidden rows.
struct LstmParams {
  LstmParams() = default;
  LstmParams(const std::string& prefix, std::size_t input_dim, std::size_t hidden);

  std::size_t input_dim() const { return wx.cols(); }
  std::size_t hidden() const { return wh.cols(); }

  Parameter wx;  // 4H x Din
  Parameter wh;  // 4H x H
  Parameter b;   // 4H x 1
};

struct LstmCache {
  std::vector<double> x, h_prev, c_prev;
  std::vector<double> i, f, o, g;  // post-nonlinearity gates
  std::vector<double> c, tanh_c;
};

struct LstmState {
  std::vector<double> h;
  std::vector<double> c;
};

LstmState lstm_cell_forward(std::span<const double> x, std::span<const double> h_prev,
                            std::span<const double> c_prev, const LstmParams& p,
                            LstmCache* cache = nullptr);

struct LstmCellGrads {
  std::vector<double> dx;
  std::vector<double> dh_prev;
  std::vector<double> dc_prev;
};

/// Given dL/dh_t and dL/dc_t (the latter from the next step), accumulates
/// parameter gradients and returns gradients for x, h_prev and c_prev.
LstmCellGrads lstm_cell_backward(const LstmCache& cache, std::span<const double> dh,
                                 std::span<const double> dc, LstmParams& p);

double sigmoid(double x);

}  // namespace convtopic
