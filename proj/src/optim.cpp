#include "convtopic/optim.hpp"

#include <algorithm>
#include <cmath>

namespace convtopic {

void adam_step(Parameter& p, const AdamConfig& config) {
  ++p.step;
  const double c1 = 1.0 - std::pow(config.beta1, static_cast<double>(p.step));
  const double c2 = 1.0 - std::pow(config.beta2, static_cast<double>(p.step));
  auto value = p.value.values();
  auto grad = p.grad.values();
  auto m = p.adam_m.values();
  auto v = p.adam_v.values();
  for (std::size_t i = 0; i < value.size(); ++i) {
    const double g = grad[i];
    m[i] = config.beta1 * m[i] + (1.0 - config.beta1) * g;
    v[i] = config.beta2 * v[i] + (1.0 - config.beta2) * g * g;
    const double m_hat = m[i] / c1;
    const double v_hat = v[i] / c2;
    value[i] -= config.learning_rate * m_hat / (std::sqrt(v_hat) + config.epsilon);
  }
  p.zero_grad();
}

double relative_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max(1e-12, std::abs(analytic) + std::abs(numeric));
}

double grad_check(const GradFunction& f, std::span<const double> x, double h) {
  std::vector<double> point(x.begin(), x.end());
  std::vector<double> analytic(x.size(), 0.0);
  f(point, &analytic);
  double worst = 0.0;
  for (std::size_t i = 0; i < point.size(); ++i) {
    const double saved = point[i];
    point[i] = saved + h;
    const double up = f(point, nullptr);
    point[i] = saved - h;
    const double down = f(point, nullptr);
    point[i] = saved;
    worst = std::max(worst, relative_error(analytic[i], (up - down) / (2.0 * h)));
  }
  return worst;
}

ParameterCheckResult grad_check_parameters(const std::vector<Parameter*>& params,
                                           const std::function<double(bool)>& loss, double h,
                                           std::size_t stride) {
  loss(true);
  std::vector<Tensor> analytic;
  analytic.reserve(params.size());
  for (const Parameter* p : params) analytic.push_back(p->grad);

  ParameterCheckResult result;
  std::size_t flat = 0;
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto values = params[k]->value.values();
    for (std::size_t i = 0; i < values.size(); ++i, ++flat) {
      if (stride > 1 && flat % stride != 0) continue;
      const double saved = values[i];
      values[i] = saved + h;
      const double up = loss(false);
      values[i] = saved - h;
      const double down = loss(false);
      values[i] = saved;
      const double numeric = (up - down) / (2.0 * h);
      result.max_relative_error =
          std::max(result.max_relative_error, relative_error(analytic[k][i], numeric));
      ++result.probed;
    }
  }
  return result;
}

}  // namespace convtopic
