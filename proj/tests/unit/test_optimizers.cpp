#include <doctest.h>

#include <cmath>
#include <random>

#include "mmpinn/adam.hpp"
#include "mmpinn/lbfgs.hpp"

using namespace mmpinn;

namespace {

/// f(x) = 0.5 ||x - c||^2.
struct Quadratic {
  std::vector<double> c;
  double operator()(const std::vector<double>& x, std::vector<double>& g) const {
    double f = 0.0;
    g.resize(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      g[i] = x[i] - c[i];
      f += 0.5 * g[i] * g[i];
    }
    return f;
  }
};

struct Rosenbrock {
  double operator()(const std::vector<double>& x, std::vector<double>& g) const {
    const double a = x[0], b = x[1];
    g.resize(2);
    g[0] = -400.0 * a * (b - a * a) - 2.0 * (1.0 - a);
    g[1] = 200.0 * (b - a * a);
    return 100.0 * (b - a * a) * (b - a * a) + (1.0 - a) * (1.0 - a);
  }
};

}  // namespace

TEST_CASE("adam: zero gradient leaves parameters unchanged") {
  AdamConfig cfg;
  Adam<double> adam(3, cfg);
  std::vector<double> params = {1.0, -2.0, 0.5};
  std::vector<double> grad = {0.0, 0.0, 0.0};
  auto before = params;
  adam.step(params, grad, 0);
  CHECK(params == before);
}

TEST_CASE("adam: first-step magnitude matches the closed form") {
  AdamConfig cfg;
  Adam<double> adam(4, cfg);
  std::vector<double> params(4, 0.0);
  std::vector<double> grad(4, 1.0);
  adam.step(params, grad, 0);
  // Bias-corrected m-hat = v-hat = 1, so the step is lr / (1 + eps).
  const double expect = -1e-3 / (1.0 + 1e-8);
  for (double p : params) CHECK(std::abs(p - expect) <= 1e-12);
}

TEST_CASE("adam: exponential decay schedule") {
  AdamConfig cfg;
  cfg.decay = true;
  cfg.decay_rate = 0.9;
  cfg.decay_interval = 1000;
  Adam<double> adam(1, cfg);
  std::vector<double> params = {0.0};
  std::vector<double> grad = {1.0};
  CHECK(adam.step(params, grad, 0) == doctest::Approx(1e-3));
  CHECK(adam.step(params, grad, 999) == doctest::Approx(1e-3));
  CHECK(adam.step(params, grad, 1000) == doctest::Approx(0.9e-3));
  CHECK(adam.step(params, grad, 2000) == doctest::Approx(1e-3 * 0.81));
}

TEST_CASE("adam: gradient-scale equivariance with eps = 0") {
  AdamConfig cfg;
  cfg.eps = 0.0;
  Adam<double> a(5, cfg), b(5, cfg);
  std::vector<double> xa(5, 1.0), xb(5, 1.0);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> uni(0.1, 2.0);
  for (long it = 0; it < 50; ++it) {
    std::vector<double> g(5), gs(5);
    for (int i = 0; i < 5; ++i) {
      g[i] = uni(rng) - 1.0;
      if (g[i] == 0.0) g[i] = 0.3;
      gs[i] = 100.0 * g[i];
    }
    a.step(xa, g, it);
    b.step(xb, gs, it);
  }
  for (int i = 0; i < 5; ++i) CHECK(std::abs(xa[i] - xb[i]) <= 1e-10);
}

TEST_CASE("adam: non-finite gradient raises a divergence error") {
  Adam<double> adam(2, AdamConfig{});
  std::vector<double> params = {0.0, 0.0};
  std::vector<double> grad = {1.0, std::nan("")};
  CHECK_THROWS_AS(adam.step(params, grad, 7), DivergenceError);
}

TEST_CASE("lbfgs: quadratic converges to the center in a few iterations") {
  Quadratic q{{1.0, -2.0, 3.0, 0.25}};
  std::vector<double> x = {5.0, 5.0, -5.0, 2.0};
  LbfgsConfig cfg;
  auto res = lbfgs_minimize<double>(q, x, cfg, [](const LbfgsIterate<double>&,
                                                  const std::vector<double>&) {});
  CHECK(res.iterations <= 3);
  CHECK(res.final_f <= 1e-18);
  for (int i = 0; i < 4; ++i) CHECK(x[i] == doctest::Approx(q.c[i]).epsilon(1e-9));
}

TEST_CASE("lbfgs: rosenbrock reaches 1e-10 within 100 iterations") {
  Rosenbrock f;
  std::vector<double> x = {-1.2, 1.0};
  LbfgsConfig cfg;
  cfg.f_tol = 0.0;  // run down to the gradient tolerance
  long accepted = 0;
  auto res = lbfgs_minimize<double>(f, x, cfg,
                                    [&](const LbfgsIterate<double>&,
                                        const std::vector<double>&) { ++accepted; });
  CHECK(res.final_f < 1e-10);
  CHECK(res.iterations <= 100);
  CHECK(accepted == res.iterations);
  CHECK(x[0] == doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("lbfgs: strong wolfe conditions hold at every accepted step") {
  Rosenbrock f;
  std::vector<double> x = {-1.2, 1.0};
  LbfgsConfig cfg;
  cfg.f_tol = 0.0;
  bool all_wolfe = true;
  bool non_increasing = true;
  auto res = lbfgs_minimize<double>(
      f, x, cfg, [&](const LbfgsIterate<double>& rec, const std::vector<double>&) {
        const bool decrease = rec.f <= rec.f_prev + cfg.c1 * rec.alpha * rec.dphi0 + 1e-14;
        const bool curvature = std::abs(rec.dphi_alpha) <= cfg.c2 * std::abs(rec.dphi0) + 1e-14;
        all_wolfe = all_wolfe && decrease && curvature;
        non_increasing = non_increasing && rec.f <= rec.f_prev;
      });
  CHECK(res.iterations >= 10);
  CHECK(all_wolfe);
  CHECK(non_increasing);
}

TEST_CASE("lbfgs: starting at the minimum returns immediately") {
  Quadratic q{{0.5, 0.5}};
  std::vector<double> x = {0.5, 0.5};
  auto res = lbfgs_minimize<double>(q, x, LbfgsConfig{},
                                    [](const LbfgsIterate<double>&,
                                       const std::vector<double>&) {});
  CHECK(res.stop == LbfgsStop::AlreadyMinimized);
  CHECK(res.iterations == 0);
}

TEST_CASE("lbfgs: unbounded descent ends with a clean line-search status") {
  auto linear = [](const std::vector<double>& x, std::vector<double>& g) {
    g.assign(1, -1.0);
    return -x[0];
  };
  std::vector<double> x = {0.0};
  auto res = lbfgs_minimize<double>(linear, x, LbfgsConfig{},
                                    [](const LbfgsIterate<double>&,
                                       const std::vector<double>&) {});
  CHECK(res.stop == LbfgsStop::LineSearchFailed);
}

TEST_CASE("lbfgs: non-finite start reports divergence") {
  auto bad = [](const std::vector<double>& x, std::vector<double>& g) {
    g.assign(1, std::nan(""));
    return std::nan("");
  };
  std::vector<double> x = {1.0};
  auto res = lbfgs_minimize<double>(bad, x, LbfgsConfig{},
                                    [](const LbfgsIterate<double>&,
                                       const std::vector<double>&) {});
  CHECK(res.stop == LbfgsStop::Diverged);
}

TEST_CASE("lbfgs: relative-decrease tolerance ends the run once progress stalls") {
  Rosenbrock f;
  std::vector<double> x = {-1.2, 1.0};
  LbfgsConfig cfg;  // default f_tol = 1e-9 fires near the optimum
  auto res = lbfgs_minimize<double>(f, x, cfg, [](const LbfgsIterate<double>&,
                                                  const std::vector<double>&) {});
  CHECK(res.stop == LbfgsStop::FunctionTol);
  CHECK(res.final_f < 1e-8);
}

TEST_CASE("invalid optimizer configs are rejected") {
  AdamConfig a;
  a.beta1 = 1.5;
  CHECK_THROWS_AS(validate(a), ConfigError);
  LbfgsConfig l;
  l.c1 = 0.95;  // violates c1 < c2
  CHECK_THROWS_AS(validate(l), ConfigError);
  LbfgsConfig l2;
  l2.memory = 0;
  CHECK_THROWS_AS(validate(l2), ConfigError);
}
