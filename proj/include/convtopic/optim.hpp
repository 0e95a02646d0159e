#pragma once

#include <functional>
#include <span>
#include <vector>

#include "convtopic/tensor.hpp"

namespace convtopic {

struct AdamConfig {
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Increments p.step, applies the bias-corrected ADAM update from p.grad and
/// clears the gradient.
void adam_step(Parameter& p, const AdamConfig& config = {});

/// Scalar function that also writes its analytic gradient into `grad`
/// (same length as x) when grad is non-null.
using GradFunction = std::function<double(std::span<const double> x, std::vector<double>* grad)>;

/// |a - n| / max(1e-12, |a| + |n|)
double relative_error(double analytic, double numeric);

/// Max relative error between the analytic gradient of f at x and the central
/// difference (f(x + h e_i) - f(x - h e_i)) / 2h over every coordinate.
double grad_check(const GradFunction& f, std::span<const double> x, double h = 1e-6);

/// Same check over the entries of a set of parameters. `loss` must zero and
/// repopulate the parameter gradients when `with_grad` is true and return the
/// scalar loss. Only entries whose index is a multiple of `stride` are probed.
struct ParameterCheckResult {
  double max_relative_error = 0.0;
  std::size_t probed = 0;
};
ParameterCheckResult grad_check_parameters(const std::vector<Parameter*>& params,
                                           const std::function<double(bool with_grad)>& loss,
                                           double h = 1e-6, std::size_t stride = 1);

}  // namespace convtopic
