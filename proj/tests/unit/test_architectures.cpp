#include <doctest.h>

#include <cmath>
#include <cstring>
#include <random>

#include "mmpinn/evaluator.hpp"
#include "test_support.hpp"

using namespace mmpinn;
using namespace testsupport;

TEST_CASE("init_params is deterministic under seed") {
  auto spec = inn_spec(2, 3, 10, {1.0, 5.0}, {{0}, {1}}, 5, CombineRule::CoordinateProduct);
  auto a = init_params<double>(spec, 42);
  auto b = init_params<double>(spec, 42);
  CHECK(a.theta.data == b.theta.data);
  CHECK(a.embeddings == b.embeddings);
  auto c = init_params<double>(spec, 43);
  CHECK(a.theta.data != c.theta.data);
}

TEST_CASE("xavier bound and variance for a 50x50 layer") {
  auto spec = dnn_spec(2, 5, 50);  // W2..W5 are 50x50
  const double bound = std::sqrt(6.0 / 100.0);
  CHECK(bound == doctest::Approx(0.2449).epsilon(1e-3));
  double max_abs = 0.0, sum = 0.0, sum2 = 0.0;
  std::size_t n = 0;
  for (std::uint64_t seed = 0; seed < 2; ++seed) {
    auto p = init_params<double>(spec, seed);
    for (const auto& seg : p.theta.segments) {
      if (seg.rows != 50 || seg.cols != 50) continue;
      const double* w = p.theta.at(seg);
      for (std::size_t i = 0; i < seg.size(); ++i) {
        max_abs = std::max(max_abs, std::abs(w[i]));
        sum += w[i];
        sum2 += w[i] * w[i];
        ++n;
      }
    }
  }
  CHECK(n >= 10000);
  CHECK(max_abs <= bound);
  const double mean = sum / n;
  const double var = sum2 / n - mean * mean;
  CHECK(var == doctest::Approx(bound * bound / 3.0).epsilon(0.10));
}

TEST_CASE("biases start at zero") {
  auto spec = mff_spec(2, 3, 8, {2.0}, {{0, 1}}, 4);
  auto p = init_params<double>(spec, 7);
  for (const auto& seg : p.theta.segments) {
    if (seg.cols != 0) continue;
    for (std::size_t i = 0; i < seg.size(); ++i) CHECK(p.theta.at(seg)[i] == 0.0);
  }
}

TEST_CASE("fourier matrix entries follow the requested sigma") {
  ArchitectureSpec spec = mff_spec(1, 2, 8, {25.0}, {{0}}, 12000);
  auto p = init_params<double>(spec, 13);
  const auto& B = p.embeddings[0];
  REQUIRE(B.size() >= 10000);
  double sum = 0.0, sum2 = 0.0;
  for (double v : B) {
    sum += v;
    sum2 += v * v;
  }
  const double mean = sum / B.size();
  const double sd = std::sqrt(sum2 / B.size() - mean * mean);
  CHECK(sd == doctest::Approx(25.0).epsilon(0.05));
}

TEST_CASE("fourier_embed outputs sin block then cos block") {
  constexpr double pi = 3.141592653589793238462643383279502884;
  FourierEmbedding emb;
  emb.sigma = 1.0;
  emb.rows = 2;
  emb.target_coords = {0};
  std::vector<double> B = {0.0, pi};  // two rows, one column
  double x[1] = {1.0};
  auto f = fourier_embed(emb, B, x);
  REQUIRE(f.size() == 4);
  CHECK(f[0] == 0.0);                                    // sin 0
  CHECK(f[1] == doctest::Approx(0.0).epsilon(1e-12));    // sin pi
  CHECK(f[2] == 1.0);                                    // cos 0
  CHECK(f[3] == doctest::Approx(-1.0));                  // cos pi
}

TEST_CASE("fourier_embed entries stay in [-1, 1]") {
  FourierEmbedding emb;
  emb.sigma = 10.0;
  emb.rows = 16;
  emb.target_coords = {0, 1};
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g(0.0, 10.0);
  std::vector<double> B(32);
  for (auto& v : B) v = g(rng);
  std::uniform_real_distribution<double> uni(-5.0, 5.0);
  for (int trial = 0; trial < 100; ++trial) {
    double x[2] = {uni(rng), uni(rng)};
    for (double v : fourier_embed(emb, B, x)) {
      CHECK(v >= -1.0);
      CHECK(v <= 1.0);
    }
  }
}

TEST_CASE("dnn parameter count formula") {
  // d*w + w + (hidden-1)(w^2+w) + w + 1
  for (int d : {1, 2}) {
    for (int hidden : {1, 3, 4}) {
      for (int w : {5, 20}) {
        auto spec = dnn_spec(d, hidden, w);
        std::size_t expect = static_cast<std::size_t>(d) * w + w +
                             static_cast<std::size_t>(hidden - 1) * (w * w + w) + w + 1;
        CHECK(param_count(spec) == expect);
      }
    }
  }
}

TEST_CASE("segments tile the parameter vector exactly") {
  for (int dim : {1, 2}) {
    for (const auto& spec : oracle_specs(dim)) {
      auto segs = param_layout(spec);
      std::size_t off = 0;
      for (const auto& s : segs) {
        CHECK(s.offset == off);
        off += s.size();
      }
      CHECK(off == param_count(spec));
    }
  }
}

TEST_CASE("hidden activations bound the output by the final layer weights") {
  auto spec = dnn_spec(2, 4, 20);
  auto p = init_params<double>(spec, 3);
  const auto& wout = p.theta.segment("Wout");
  const auto& bout = p.theta.segment("bout");
  double bound = std::abs(p.theta.at(bout)[0]);
  for (std::size_t i = 0; i < wout.size(); ++i) bound += std::abs(p.theta.at(wout)[i]);
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    double x[2] = {uni(rng), uni(rng)};
    double u = forward(spec, p, x);
    CHECK(std::isfinite(u));
    CHECK(std::abs(u) <= bound);
  }
}

TEST_CASE("invalid specs are rejected") {
  CHECK_THROWS_AS(validate_spec(mff_spec(2, 2, 8, {}, {}, 4)), ConfigError);
  auto bad_rows = mff_spec(2, 2, 8, {1.0, 2.0}, {{0}, {1}}, 4);
  bad_rows.embeddings[1].rows = 5;
  CHECK_THROWS_AS(validate_spec(bad_rows), ConfigError);
  // product requires a partition of the coordinates
  auto overlap = mff_spec(2, 2, 8, {1.0, 2.0}, {{0, 1}, {1}}, 4,
                          CombineRule::CoordinateProduct);
  CHECK_THROWS_AS(validate_spec(overlap), ConfigError);
  auto dnn_with_emb = dnn_spec(2, 2, 8);
  dnn_with_emb.embeddings.push_back({1.0, 4, {0}});
  CHECK_THROWS_AS(validate_spec(dnn_with_emb), ConfigError);
}

TEST_CASE("mismatched parameter vector is a configuration error") {
  auto spec = dnn_spec(2, 2, 8);
  auto p = init_params<double>(spec, 1);
  p.theta.data.pop_back();
  double x[2] = {0.1, 0.2};
  CHECK_THROWS_AS((eval_jet<double, 2>(spec, p, x)), ConfigError);
}

TEST_CASE("mff concat vs manual branch evaluation") {
  // One branch reduces to a plain tanh stack on the embedded input.
  auto spec = mff_spec(1, 2, 4, {1.0}, {{0}}, 3);
  auto p = init_params<double>(spec, 19);
  double x[1] = {0.6};
  auto F = fourier_embed(spec.embeddings[0], p.embeddings[0], x);
  const auto& w1 = p.theta.segment("W1");
  const auto& b1 = p.theta.segment("b1");
  const auto& w2 = p.theta.segment("W2");
  const auto& b2 = p.theta.segment("b2");
  const auto& wout = p.theta.segment("Wout");
  const auto& bout = p.theta.segment("bout");
  std::vector<double> h1(4), h2(4);
  for (int i = 0; i < 4; ++i) {
    double z = p.theta.at(b1)[i];
    for (int j = 0; j < 6; ++j) z += p.theta.at(w1)[i * 6 + j] * F[j];
    h1[i] = tanh_activation(z);
  }
  for (int i = 0; i < 4; ++i) {
    double z = p.theta.at(b2)[i];
    for (int j = 0; j < 4; ++j) z += p.theta.at(w2)[i * 4 + j] * h1[j];
    h2[i] = tanh_activation(z);
  }
  double expect = p.theta.at(bout)[0];
  for (int i = 0; i < 4; ++i) expect += p.theta.at(wout)[i] * h2[i];
  CHECK(forward(spec, p, x) == doctest::Approx(expect).epsilon(1e-15));
}
