#include <cmath>

#include "convtopic/layers.hpp"
#include "convtopic/optim.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace convtopic;

namespace {

Parameter filled(const std::string& name, std::size_t r, std::size_t c, Rng& rng) {
  Parameter p(name, r, c);
  p.value.fill_uniform(rng, -1.0, 1.0);
  return p;
}

std::vector<double> random_vector(std::size_t n, Rng& rng) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(-1.0, 1.0);
  return v;
}

// Central-difference check of every entry of `p` against its accumulated grad.
double check_parameter(Parameter& p, const std::function<double()>& loss, double h = 1e-6) {
  double worst = 0.0;
  for (std::size_t i = 0; i < p.value.size(); ++i) {
    const double keep = p.value[i];
    p.value[i] = keep + h;
    const double up = loss();
    p.value[i] = keep - h;
    const double down = loss();
    p.value[i] = keep;
    worst = std::max(worst, relative_error(p.grad[i], (up - down) / (2 * h)));
  }
  return worst;
}

}  // namespace

TEST_CASE("rng streams are reproducible") {
  Rng a(42), b(42), c(43);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
  CHECK(Rng(42).next_u64() != c.next_u64());
  Rng r(1);
  for (int i = 0; i < 1000; ++i) {
    const double u = r.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    CHECK(r.below(7) < 7);
  }
}

TEST_CASE("dense_forward hand cases") {
  Parameter w("w", 2, 2), b("b", 2, 1);
  w.value(0, 0) = w.value(1, 1) = 1.0;
  CHECK(dense_forward(std::vector<double>{1, -2}, w, b, Activation::kRelu) == std::vector<double>{1, 0});

  Rng rng(3);
  Parameter w1 = filled("w", 1, 2, rng), b1("b", 1, 1);
  b1.value(0, 0) = 3.0;
  CHECK(dense_forward(std::vector<double>{0, 0}, w1, b1, Activation::kNone)[0] == 3.0);

  Parameter w2("w", 1, 2), b2("b", 1, 1);
  w2.value(0, 0) = 1.0;
  w2.value(0, 1) = 2.0;
  b2.value(0, 0) = 0.5;
  CHECK(dense_forward(std::vector<double>{1, 1}, w2, b2, Activation::kNone)[0] == doctest::Approx(3.5));
}

TEST_CASE("dense_backward matches finite differences") {
  Rng rng(11);
  Parameter w = filled("w", 4, 3, rng), b = filled("b", 4, 1, rng);
  std::vector<double> x = random_vector(3, rng), up = random_vector(4, rng);
  for (Activation act : {Activation::kNone, Activation::kRelu}) {
    auto loss = [&] { return dot(up, dense_forward(x, w, b, act)); };
    w.zero_grad();
    b.zero_grad();
    DenseCache cache;
    dense_forward(x, w, b, act, &cache);
    auto dx = dense_backward(cache, up, w, b);
    CHECK(check_parameter(w, loss) < 1e-6);
    CHECK(check_parameter(b, loss) < 1e-6);
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double keep = x[i];
      x[i] = keep + 1e-6;
      const double hi = loss();
      x[i] = keep - 1e-6;
      const double lo = loss();
      x[i] = keep;
      CHECK(relative_error(dx[i], (hi - lo) / 2e-6) < 1e-6);
    }
  }
}

TEST_CASE("dense_backward degenerate upstream and dead relu") {
  Rng rng(12);
  Parameter w = filled("w", 3, 2, rng), b("b", 3, 1);
  DenseCache cache;
  dense_forward(std::vector<double>{0.3, -0.4}, w, b, Activation::kRelu, &cache);
  auto dx = dense_backward(cache, std::vector<double>(3, 0.0), w, b);
  for (double g : dx) CHECK(g == 0.0);
  for (double g : w.grad.values()) CHECK(g == 0.0);

  b.value.fill(-100.0);
  dense_forward(std::vector<double>{0.3, -0.4}, w, b, Activation::kRelu, &cache);
  dx = dense_backward(cache, std::vector<double>{1, 1, 1}, w, b);
  for (double g : dx) CHECK(g == 0.0);
}

TEST_CASE("softmax") {
  auto p = softmax(std::vector<double>{0, 0});
  CHECK(p[0] == doctest::Approx(0.5));
  p = softmax(std::vector<double>{1000, 0});
  CHECK(p[0] == doctest::Approx(1.0));
  CHECK(p[1] >= 0.0);
  CHECK(std::isfinite(p[1]));
  p = softmax(std::vector<double>{std::log(1.0), std::log(3.0)});
  CHECK(p[0] == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(p[1] == doctest::Approx(0.75).epsilon(1e-12));
  CHECK_THROWS_AS(softmax(std::vector<double>{}), std::domain_error);
  CHECK_THROWS_AS(softmax(std::vector<double>{NAN, 0}), std::domain_error);
}

TEST_CASE("cross_entropy") {
  CHECK(cross_entropy(std::vector<double>{0, 1, 0}, 1).loss == doctest::Approx(0.0));
  CHECK(cross_entropy(std::vector<double>{0.5, 0.5}, 0).loss == doctest::Approx(std::log(2.0)));
  CHECK_THROWS_AS(cross_entropy(std::vector<double>{0.5, 0.5}, 2), std::out_of_range);

  Rng rng(5);
  std::vector<double> z = random_vector(5, rng);
  auto ce = cross_entropy(softmax(z), 3);
  for (std::size_t i = 0; i < z.size(); ++i) {
    auto zp = z, zm = z;
    zp[i] += 1e-6;
    zm[i] -= 1e-6;
    const double num = (cross_entropy(softmax(zp), 3).loss - cross_entropy(softmax(zm), 3).loss) / 2e-6;
    CHECK(relative_error(ce.dlogits[i], num) < 1e-6);
  }
}

TEST_CASE("dropout") {
  Rng rng(9);
  std::vector<double> x{1, 2, 3};
  auto d = dropout(x, 0.0, rng, true);
  CHECK(d.output == x);
  CHECK(d.mask == std::vector<double>{1, 1, 1});
  CHECK(dropout(x, 0.5, rng, false).output == x);
  CHECK_THROWS(dropout(x, 1.0, rng, true));

  const std::size_t n = 100000;
  std::vector<double> ones(n, 1.0);
  auto big = dropout(ones, 0.5, rng, true);
  double mean = 0.0;
  for (double v : big.output) mean += v;
  mean /= static_cast<double>(n);
  // Each output is 0 or 2 with equal probability: sd of the mean is 1/sqrt(n).
  CHECK(std::abs(mean - 1.0) < 3.0 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("lstm cell: zero parameters give zero state") {
  LstmParams p("lstm", 3, 2);
  auto s = lstm_cell_forward(std::vector<double>{1, 2, 3}, std::vector<double>(2, 0.0),
                             std::vector<double>(2, 0.0), p);
  for (double v : s.h) CHECK(v == 0.0);
  for (double v : s.c) CHECK(v == 0.0);
}

TEST_CASE("lstm cell backward matches finite differences") {
  Rng rng(21);
  LstmParams p("lstm", 3, 2);
  for (Parameter* q : {&p.wx, &p.wh, &p.b}) q->value.fill_uniform(rng, -1.0, 1.0);
  auto x = random_vector(3, rng), h0 = random_vector(2, rng), c0 = random_vector(2, rng);
  auto gh = random_vector(2, rng), gc = random_vector(2, rng);
  auto loss = [&] {
    auto s = lstm_cell_forward(x, h0, c0, p);
    return dot(gh, s.h) + dot(gc, s.c);
  };
  LstmCache cache;
  lstm_cell_forward(x, h0, c0, p, &cache);
  auto g = lstm_cell_backward(cache, gh, gc, p);
  CHECK(check_parameter(p.wx, loss) < 1e-6);
  CHECK(check_parameter(p.wh, loss) < 1e-6);
  CHECK(check_parameter(p.b, loss) < 1e-6);
  auto probe = [&](std::vector<double>& v, const std::vector<double>& analytic) {
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double keep = v[i];
      v[i] = keep + 1e-6;
      const double hi = loss();
      v[i] = keep - 1e-6;
      const double lo = loss();
      v[i] = keep;
      CHECK(relative_error(analytic[i], (hi - lo) / 2e-6) < 1e-6);
    }
  };
  probe(x, g.dx);
  probe(h0, g.dh_prev);
  probe(c0, g.dc_prev);

  LstmParams q = p;
  for (Parameter* r : {&q.wx, &q.wh, &q.b}) r->zero_grad();
  lstm_cell_backward(cache, std::vector<double>(2, 0.0), std::vector<double>(2, 0.0), q);
  for (Parameter* r : {&q.wx, &q.wh, &q.b})
    for (double v : r->grad.values()) CHECK(v == 0.0);
}

TEST_CASE("adam step") {
  Parameter p("p", 1, 1);
  p.value(0, 0) = 0.5;
  adam_step(p);
  CHECK(p.value(0, 0) == 0.5);
  CHECK(p.adam_m(0, 0) == 0.0);
  CHECK(p.adam_v(0, 0) == 0.0);

  Parameter q("q", 1, 1);
  q.value(0, 0) = 0.5;
  q.grad(0, 0) = 1.0;
  adam_step(q);
  CHECK(q.value(0, 0) == doctest::Approx(0.5 - 0.001 / (1.0 + 1e-8)).epsilon(1e-12));
  CHECK(q.value(0, 0) == doctest::Approx(0.499000).epsilon(1e-9));
  CHECK(q.grad(0, 0) == 0.0);
  CHECK(q.step == 1);

  Parameter a("a", 2, 1), b("b", 2, 1);
  for (int t = 0; t < 5; ++t) {
    a.grad(0, 0) = b.grad(0, 0) = 0.3 * t - 0.2;
    a.grad(1, 0) = b.grad(1, 0) = 1.0 / (t + 1);
    adam_step(a);
    adam_step(b);
  }
  CHECK(a.value == b.value);
}

TEST_CASE("grad_check closed forms") {
  GradFunction square = [](std::span<const double> x, std::vector<double>* g) {
    if (g) (*g)[0] = 2 * x[0];
    return x[0] * x[0];
  };
  CHECK(grad_check(square, std::vector<double>{3.0}) < 1e-9);
  GradFunction constant = [](std::span<const double>, std::vector<double>* g) {
    if (g) std::fill(g->begin(), g->end(), 0.0);
    return 4.0;
  };
  CHECK(grad_check(constant, std::vector<double>{1.0, 2.0}) == 0.0);
  GradFunction wrong = [](std::span<const double> x, std::vector<double>* g) {
    if (g) (*g)[0] = 3 * x[0];
    return x[0] * x[0];
  };
  CHECK(grad_check(wrong, std::vector<double>{3.0}) > 0.1);
}
