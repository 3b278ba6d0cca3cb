#include <doctest.h>

#include <cmath>

#include "mmpinn/jet.hpp"

using namespace mmpinn;

namespace {

using J = Jet<double, 1>;

J var(double x) { return seed_jet<double, 1>(x, 0); }

}  // namespace

TEST_CASE("jet product rule") {
  // f(x) = x^2: f' = 2x, f'' = 2.
  auto x = var(3.0);
  auto r = x * x;
  CHECK(r.v == 9.0);
  CHECK(r.d1[0] == 6.0);
  CHECK(r.d2[0] == 2.0);
}

TEST_CASE("jet cube via pow_int") {
  auto x = var(2.0);
  auto r = pow_int(x, 3);
  CHECK(r.v == 8.0);
  CHECK(r.d1[0] == 12.0);
  CHECK(r.d2[0] == 12.0);
}

TEST_CASE("jet tanh derivatives") {
  double a = 0.4;
  auto r = tanh(var(a));
  double t = std::tanh(a), s = 1 - t * t;
  CHECK(r.v == doctest::Approx(t));
  CHECK(r.d1[0] == doctest::Approx(s));
  CHECK(r.d2[0] == doctest::Approx(-2 * t * s));
}

TEST_CASE("jet sin/cos/exp chain") {
  double a = 1.1;
  auto s = sin(var(a));
  CHECK(s.d1[0] == doctest::Approx(std::cos(a)));
  CHECK(s.d2[0] == doctest::Approx(-std::sin(a)));
  auto c = cos(var(a));
  CHECK(c.d1[0] == doctest::Approx(-std::sin(a)));
  CHECK(c.d2[0] == doctest::Approx(-std::cos(a)));
  auto e = exp(var(a));
  CHECK(e.d2[0] == doctest::Approx(std::exp(a)));
}

TEST_CASE("composite: sin(x)*exp(x) second derivative") {
  double a = 0.7;
  auto r = sin(var(a)) * exp(var(a));
  // (sin e)'' = 2 cos(x) e(x).
  CHECK(r.d2[0] == doctest::Approx(2 * std::cos(a) * std::exp(a)));
}

TEST_CASE("2d jets keep coordinates independent") {
  Jet<double, 2> x = seed_jet<double, 2>(0.5, 0);
  Jet<double, 2> y = seed_jet<double, 2>(-0.3, 1);
  auto r = x * y;  // u = x*y: u_x = y, u_y = x, u_xx = u_yy = 0 (diagonal only)
  CHECK(r.d1[0] == -0.3);
  CHECK(r.d1[1] == 0.5);
  CHECK(r.d2[0] == 0.0);
  CHECK(r.d2[1] == 0.0);
}

TEST_CASE("finite() flags nan entries") {
  J ok = var(1.0);
  CHECK(ok.finite());
  J bad = ok;
  bad.d2[0] = std::nan("");
  CHECK(!bad.finite());
}
