#include <doctest.h>

#include <map>

#include "mmpinn/sampling.hpp"

using namespace mmpinn;

TEST_CASE("heat training set has the requested locus layout") {
  auto p = make_problem("heat-large-gradient");
  auto ts = sample_training_set<double>(p, {700, 1400, 3000}, 9);
  REQUIRE(ts.supervised_size() == 700 + 1400);
  REQUIRE(ts.residual_size() == 3000);

  int initial = 0, at_minus1 = 0, at_plus1 = 0;
  for (std::size_t i = 0; i < ts.supervised_size(); ++i) {
    const double* x = ts.supervised_points.data() + i * 2;
    if (p.conditions[ts.supervised_condition[i]].kind == ConditionKind::InitialValue) {
      ++initial;
      CHECK(x[1] == 0.0);
      CHECK(x[0] > -1.0);
      CHECK(x[0] < 1.0);
    } else {
      if (x[0] == -1.0) ++at_minus1;
      if (x[0] == 1.0) ++at_plus1;
      CHECK(x[1] > 0.0);
      CHECK(x[1] <= 1.0);
    }
  }
  CHECK(initial == 700);
  CHECK(at_minus1 == 700);
  CHECK(at_plus1 == 700);

  for (std::size_t i = 0; i < ts.residual_size(); ++i) {
    const double* x = ts.residual_points.data() + i * 2;
    CHECK(x[0] > -1.0);
    CHECK(x[0] < 1.0);
    CHECK(x[1] > 0.0);
    CHECK(x[1] <= 1.0);
  }
}

TEST_CASE("sampling is deterministic under seed") {
  auto p = make_problem("helmholtz-highfreq");
  auto a = sample_training_set<double>(p, {0, 400, 1000}, 4);
  auto b = sample_training_set<double>(p, {0, 400, 1000}, 4);
  CHECK(a.supervised_points == b.supervised_points);
  CHECK(a.residual_points == b.residual_points);
  auto c = sample_training_set<double>(p, {0, 400, 1000}, 5);
  CHECK(a.residual_points != c.residual_points);
}

TEST_CASE("klein-gordon draws both initial condition sets") {
  auto p = make_problem("klein-gordon");
  auto ts = sample_training_set<double>(p, {100, 200, 300}, 2);
  std::map<int, int> per_condition;
  for (std::size_t i = 0; i < ts.supervised_size(); ++i)
    per_condition[ts.supervised_condition[i]]++;
  CHECK(per_condition[0] == 100);  // u(x, 0)
  CHECK(per_condition[1] == 100);  // u_t(x, 0)
  CHECK(per_condition[2] == 200);  // boundary
}

TEST_CASE("initial points for stationary problems are a configuration error") {
  auto p = make_problem("poisson-multifreq");
  CHECK_THROWS_AS((sample_training_set<double>(p, {10, 20, 30}, 1)), ConfigError);
  auto heat = make_problem("heat-large-gradient");
  CHECK_THROWS_AS((sample_training_set<double>(heat, {0, 20, 30}, 1)), ConfigError);
}

TEST_CASE("1d boundary sampling duplicates the endpoint faces") {
  auto p = make_problem("poisson-multifreq");
  auto ts = sample_training_set<double>(p, {0, 8, 16}, 3);
  int left = 0, right = 0;
  for (std::size_t i = 0; i < ts.supervised_size(); ++i) {
    if (ts.supervised_points[i] == 0.0) ++left;
    if (ts.supervised_points[i] == 1.0) ++right;
  }
  CHECK(left == 4);
  CHECK(right == 4);
}

TEST_CASE("grouping: no cut points leaves the set unchanged") {
  auto p = make_problem("poisson-gaussian-spike");
  auto ts = sample_training_set<double>(p, {0, 40, 99}, 6);
  auto grouped = assign_groups(ts, GroupingSpec{0, {}}, p, false);
  CHECK(grouped.group_count == 1);
  CHECK(grouped.residual_points == ts.residual_points);
  for (int g : grouped.group_of) CHECK(g == 0);
}

TEST_CASE("grouping with equalize yields exactly equal group sizes") {
  auto p = make_problem("poisson-gaussian-spike");
  auto ts = sample_training_set<double>(p, {0, 100, 30000}, 12);
  auto grouped = assign_groups(ts, GroupingSpec{0, {0.4, 0.6}}, p, true);
  CHECK(grouped.group_count == 3);
  std::array<int, 3> sizes{};
  for (std::size_t i = 0; i < grouped.residual_size(); ++i) {
    int h = grouped.group_of[i];
    sizes[h]++;
    double x = grouped.residual_points[i * 2];
    if (h == 0) CHECK(x <= 0.4);
    if (h == 1) {
      CHECK(x > 0.4);
      CHECK(x <= 0.6);
    }
    if (h == 2) CHECK(x > 0.6);
  }
  CHECK(sizes[0] == 10000);
  CHECK(sizes[1] == 10000);
  CHECK(sizes[2] == 10000);
}

TEST_CASE("a point exactly on a cut belongs to the left interval") {
  auto p = make_problem("poisson-gaussian-spike");
  TrainingSet<double> ts;
  ts.dim = 2;
  ts.seed = 1;
  ts.supervised_points = {0.0, 0.5};
  ts.supervised_condition = {0};
  ts.residual_points = {0.4, 0.5, 0.41, 0.5, 0.2, 0.5, 0.9, 0.5};
  ts.group_of = {0, 0, 0, 0};
  ts.counts = {0, 1, 4};
  auto grouped = assign_groups(ts, GroupingSpec{0, {0.4, 0.6}}, p, false);
  CHECK(grouped.group_of[0] == 0);  // exactly at the cut
  CHECK(grouped.group_of[1] == 1);
  CHECK(grouped.group_of[2] == 0);
  CHECK(grouped.group_of[3] == 2);
}

TEST_CASE("empty group without equalize is a configuration error") {
  auto p = make_problem("poisson-gaussian-spike");
  TrainingSet<double> ts;
  ts.dim = 2;
  ts.residual_points = {0.1, 0.5, 0.2, 0.5};
  ts.group_of = {0, 0};
  ts.counts = {0, 1, 2};
  CHECK_THROWS_AS(assign_groups(ts, GroupingSpec{0, {0.4, 0.6}}, p, false), ConfigError);
}

TEST_CASE("grouping cuts must be interior and ascending") {
  auto p = make_problem("poisson-gaussian-spike");
  auto ts = sample_training_set<double>(p, {0, 16, 60}, 6);
  CHECK_THROWS_AS(assign_groups(ts, GroupingSpec{0, {0.0, 0.5}}, p, false), ConfigError);
  CHECK_THROWS_AS(assign_groups(ts, GroupingSpec{0, {0.6, 0.4}}, p, false), ConfigError);
  CHECK_THROWS_AS(assign_groups(ts, GroupingSpec{3, {0.5}}, p, false), ConfigError);
}

TEST_CASE("test grid covers the closure including corners") {
  auto p = make_problem("poisson-gaussian-spike");
  auto g = test_grid(p, {3, 3});
  REQUIRE(g.exact.size() == 9);
  bool corner = false;
  for (int i = 0; i < 9; ++i)
    if (g.points[i * 2] == 0.0 && g.points[i * 2 + 1] == 0.0) corner = true;
  CHECK(corner);
  // Grid exact values match the boundary targets on boundary points.
  for (int i = 0; i < 9; ++i) {
    const double* x = g.points.data() + i * 2;
    bool on_boundary = x[0] == 0.0 || x[0] == 1.0 || x[1] == 0.0 || x[1] == 1.0;
    if (!on_boundary) continue;
    CHECK(g.exact[i] ==
          doctest::Approx(p.condition_target(0, x)).epsilon(1e-14));
  }
}

TEST_CASE("test grid rejects degenerate resolutions") {
  auto p = make_problem("poisson-multifreq");
  CHECK_THROWS_AS(test_grid(p, {1}), ConfigError);
  CHECK_THROWS_AS(test_grid(p, {4, 4}), ConfigError);
}
