#include <doctest.h>

#include <charconv>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "mmpinn/reporting.hpp"

using namespace mmpinn;

namespace {

/// Independent reference implementation: reversed iteration order, long
/// double accumulation.
double relative_l2_reference(const std::vector<double>& pred,
                             const std::vector<double>& exact) {
  long double num = 0.0L, den = 0.0L;
  for (std::size_t i = pred.size(); i-- > 0;) {
    long double d = static_cast<long double>(pred[i]) - exact[i];
    num += d * d;
    den += static_cast<long double>(exact[i]) * exact[i];
  }
  return static_cast<double>(std::sqrt(static_cast<long double>(num) / den));
}

std::vector<std::string> read_lines(const std::filesystem::path& p) {
  std::ifstream in(p);
  REQUIRE(in.good());
  std::vector<std::string> lines;
  std::string l;
  while (std::getline(in, l)) lines.push_back(l);
  return lines;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(tok);
  return out;
}

TrainResult tiny_result() {
  TrainResult result;
  result.group_count = 1;
  result.grid.dim = 1;
  result.grid.resolution = {3};
  result.grid.points = {0.0, 0.5, 1.0};
  result.grid.exact = {1.0, 2.0, 3.0};
  RepeatResult rep;
  rep.seed = 11;
  rep.relative_l2 = 0.125;
  rep.wall_seconds = 1.5;
  rep.grid_predictions = {1.0, 2.25, 2.75};
  for (int i = 0; i < 4; ++i) {
    IterationRow row;
    row.iteration = i;
    row.level = 1;
    row.phase = i < 2 ? "adam" : "lbfgs";
    row.ls = 0.1 * (i + 1);
    row.lr = 1e6 / (i + 1);
    row.groups = {row.lr};
    row.regularized = row.ls + std::cbrt(row.lr);
    row.lr_effective = 1e-3;
    rep.rows.push_back(row);
  }
  result.repeats.push_back(rep);
  result.config_echo = "benchmark = poisson-multifreq\n";
  return result;
}

}  // namespace

TEST_CASE("relative_l2 trivial identities") {
  std::vector<double> exact = {1.0, -2.0, 3.0};
  CHECK(relative_l2(exact, exact) == 0.0);
  std::vector<double> zero = {0.0, 0.0, 0.0};
  CHECK(relative_l2(zero, exact) == 1.0);
  std::vector<double> twice = {2.0, -4.0, 6.0};
  CHECK(relative_l2(twice, exact) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("relative_l2 matches an independent reimplementation") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> uni(-5.0, 5.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> pred(257), exact(257);
    for (std::size_t i = 0; i < pred.size(); ++i) {
      pred[i] = uni(rng);
      exact[i] = uni(rng);
    }
    double a = relative_l2(pred, exact);
    double b = relative_l2_reference(pred, exact);
    CHECK(std::abs(a - b) <= 1e-15 * std::max(a, 1e-300));
  }
}

TEST_CASE("relative_l2 rejects degenerate inputs") {
  std::vector<double> zero = {0.0, 0.0};
  std::vector<double> one = {1.0, 1.0};
  CHECK_THROWS_AS(relative_l2(one, zero), ConfigError);
  std::vector<double> shorter = {1.0};
  CHECK_THROWS_AS(relative_l2(shorter, one), ConfigError);
  CHECK_THROWS_AS(relative_l2({}, {}), ConfigError);
}

TEST_CASE("summarize_repeats: two-sample mean and standard deviation") {
  TrainResult result;
  for (double l2 : {1e-4, 3e-4}) {
    RepeatResult rep;
    rep.relative_l2 = l2;
    result.repeats.push_back(rep);
  }
  auto s = summarize_repeats(result);
  CHECK(s.mean_l2 == doctest::Approx(2e-4).epsilon(1e-12));
  CHECK(s.std_l2 == doctest::Approx(std::sqrt(2.0) * 1e-4).epsilon(1e-12));
  CHECK(s.failed_count == 0);
}

TEST_CASE("summarize_repeats: single sample and failures") {
  TrainResult result;
  RepeatResult ok;
  ok.relative_l2 = 5e-3;
  result.repeats.push_back(ok);
  auto s1 = summarize_repeats(result);
  CHECK(s1.single_sample);
  CHECK(s1.std_l2 == 0.0);

  for (int i = 0; i < 3; ++i) result.repeats.push_back(ok);
  RepeatResult bad;
  bad.failed = true;
  result.repeats.push_back(bad);
  auto s2 = summarize_repeats(result);
  CHECK(s2.per_repeat_l2.size() == 4);
  CHECK(s2.failed_count == 1);

  TrainResult none;
  none.repeats.push_back(bad);
  CHECK(summarize_repeats(none).all_failed);
}

TEST_CASE("export_run writes the documented files with exact row counts") {
  auto result = tiny_result();
  auto dir = std::filesystem::temp_directory_path() / "mmpinn_export_test";
  std::filesystem::remove_all(dir);
  export_run(result, dir);

  auto losses = read_lines(dir / "repeat0" / "losses.csv");
  CHECK(losses.size() == 1 + 4);  // header + one row per iteration
  CHECK(losses[0] == "iteration,phase,level,L_s,L_r,group_0,regularized_total,lr_effective");

  auto grid = read_lines(dir / "repeat0" / "grid.csv");
  CHECK(grid.size() == 1 + 3);  // header + one row per grid point
  CHECK(grid[0] == "x0,prediction,exact,abs_error");

  auto summary = read_lines(dir / "summary.csv");
  CHECK(summary.size() == 2);
  auto metrics = read_lines(dir / "metrics.csv");
  CHECK(metrics.size() == 2);
  CHECK(read_lines(dir / "config.cfg").size() == 1);
  std::filesystem::remove_all(dir);
}

TEST_CASE("exported numbers reload to bitwise-identical values") {
  auto result = tiny_result();
  auto dir = std::filesystem::temp_directory_path() / "mmpinn_roundtrip_test";
  std::filesystem::remove_all(dir);
  export_run(result, dir);

  auto grid = read_lines(dir / "repeat0" / "grid.csv");
  for (std::size_t i = 1; i < grid.size(); ++i) {
    auto cols = split_csv(grid[i]);
    REQUIRE(cols.size() == 4);
    double pred = 0.0;
    auto [ptr, ec] = std::from_chars(cols[1].data(), cols[1].data() + cols[1].size(), pred);
    CHECK(ec == std::errc());
    CHECK(pred == result.repeats[0].grid_predictions[i - 1]);
  }

  auto losses = read_lines(dir / "repeat0" / "losses.csv");
  for (std::size_t i = 1; i < losses.size(); ++i) {
    auto cols = split_csv(losses[i]);
    double lr = 0.0;
    std::from_chars(cols[4].data(), cols[4].data() + cols[4].size(), lr);
    CHECK(lr == result.repeats[0].rows[i - 1].lr);
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("re-export is byte-identical") {
  auto result = tiny_result();
  auto dir1 = std::filesystem::temp_directory_path() / "mmpinn_idem_a";
  auto dir2 = std::filesystem::temp_directory_path() / "mmpinn_idem_b";
  std::filesystem::remove_all(dir1);
  std::filesystem::remove_all(dir2);
  export_run(result, dir1);
  export_run(result, dir2);
  for (const char* rel : {"repeat0/losses.csv", "repeat0/grid.csv", "summary.csv",
                          "metrics.csv", "config.cfg"}) {
    std::ifstream a(dir1 / rel, std::ios::binary), b(dir2 / rel, std::ios::binary);
    std::stringstream sa, sb;
    sa << a.rdbuf();
    sb << b.rdbuf();
    CHECK(sa.str() == sb.str());
    CHECK(!sa.str().empty());
  }
  std::filesystem::remove_all(dir1);
  std::filesystem::remove_all(dir2);
}
