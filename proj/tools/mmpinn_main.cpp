// Command-line entry point: train benchmark runs from config files, sweep the
// residual regularization exponent, run the derivative checker, list the
// built-in benchmarks.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mmpinn/config.hpp"
#include "mmpinn/derivative_check.hpp"
#include "mmpinn/reporting.hpp"
#include "mmpinn/trainer.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitTraining = 2;
constexpr int kExitCheck = 3;

std::vector<double> parse_n_values(const std::string& text) {
  std::vector<double> out;
  std::size_t dots = text.find("..");
  if (dots != std::string::npos) {
    int a = std::stoi(text.substr(0, dots));
    int b = std::stoi(text.substr(dots + 2));
    for (int v = a; v <= b; ++v) out.push_back(v);
    return out;
  }
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(std::stod(tok));
  if (out.empty()) throw mmpinn::ConfigError("--n: no values given");
  return out;
}

int run_command(const std::string& config_path, const std::string& out_dir,
                const std::vector<std::string>& overrides) {
  mmpinn::RunConfig cfg = mmpinn::parse_config_file(config_path, overrides);
  std::printf("benchmark %s | %s %dx%d | N=(%d,%d,%d) | m=%g n=%g | repeats=%d seed=%llu\n",
              cfg.benchmark.c_str(), mmpinn::family_name(cfg.arch.family).c_str(),
              cfg.arch.hidden_layers, cfg.arch.width, cfg.counts.n_initial,
              cfg.counts.n_boundary, cfg.counts.n_residual, cfg.loss.m, cfg.loss.n,
              cfg.repeats, static_cast<unsigned long long>(cfg.master_seed));
  std::fflush(stdout);

  mmpinn::TrainResult result = mmpinn::train(cfg);
  result.config_echo = mmpinn::echo_config(cfg);
  mmpinn::export_run(result, out_dir);

  int failures = 0;
  for (std::size_t k = 0; k < result.repeats.size(); ++k) {
    const auto& rep = result.repeats[k];
    if (rep.failed) {
      ++failures;
      std::printf("repeat %zu: FAILED (%s)\n", k, rep.fail_reason.c_str());
    } else {
      std::printf("repeat %zu: rel_l2 = %.6e  (%.1fs, %zu iterations, %s)\n", k,
                  rep.relative_l2, rep.wall_seconds, rep.rows.size(),
                  rep.lbfgs_stop.empty() ? "adam-only" : rep.lbfgs_stop.c_str());
    }
    std::fflush(stdout);
  }
  mmpinn::MetricsSummary s = mmpinn::summarize_repeats(result);
  if (s.all_failed) {
    std::fprintf(stderr, "all repeats diverged\n");
    return kExitTraining;
  }
  std::printf("mean rel_l2 = %.6e  std = %.6e  (%zu/%zu repeats)\n", s.mean_l2, s.std_l2,
              s.per_repeat_l2.size(), result.repeats.size());
  std::printf("artifacts written to %s\n", out_dir.c_str());
  return kExitOk;
}

int sweep_command(const std::string& config_path, const std::string& n_text,
                  const std::string& out_dir, int repeats_override,
                  const std::vector<std::string>& overrides) {
  mmpinn::RunConfig base = mmpinn::parse_config_file(config_path, overrides);
  if (repeats_override > 0) base.repeats = repeats_override;
  std::vector<double> n_values = parse_n_values(n_text);

  std::filesystem::create_directories(out_dir);
  std::ofstream csv(std::filesystem::path(out_dir) / "sweep.csv", std::ios::binary);
  csv << "n,mean_l2,std_l2,successes,failed\n";
  csv.flush();
  std::printf("%8s %14s %14s %10s\n", "n", "mean_l2", "std_l2", "failed");

  for (double n : n_values) {
    mmpinn::RunConfig cfg = base;
    cfg.loss.n = n;
    for (auto& level : cfg.levels) level.n = n;
    mmpinn::TrainResult result = mmpinn::train(cfg);
    mmpinn::MetricsSummary s = mmpinn::summarize_repeats(result);
    csv << mmpinn::format_shortest(n) << ',' << mmpinn::format_shortest(s.mean_l2) << ','
        << mmpinn::format_shortest(s.std_l2) << ',' << s.per_repeat_l2.size() << ','
        << s.failed_count << '\n';
    csv.flush();  // keep partial sweep results on interruption
    std::printf("%8g %14.6e %14.6e %10d\n", n, s.mean_l2, s.std_l2, s.failed_count);
    std::fflush(stdout);
  }
  std::printf("sweep table written to %s/sweep.csv\n", out_dir.c_str());
  return kExitOk;
}

int check_command(const std::string& arch, std::uint64_t seed) {
  using namespace mmpinn;
  struct Case {
    std::string label;
    ArchitectureSpec spec;
  };
  std::vector<Case> cases;
  auto add = [&](const std::string& label, Family fam, int dim, CombineRule comb,
                 std::vector<std::vector<int>> targets) {
    ArchitectureSpec s;
    s.family = fam;
    s.input_dim = dim;
    s.hidden_layers = 3;
    s.width = 8;
    s.combine = comb;
    for (std::size_t i = 0; i < targets.size(); ++i) {
      FourierEmbedding e;
      e.sigma = 1.0 + 2.0 * static_cast<double>(i);
      e.rows = 4;
      e.target_coords = targets[i];
      s.embeddings.push_back(std::move(e));
    }
    cases.push_back({label, std::move(s)});
  };
  if (arch == "dnn") {
    add("dnn d=1", Family::Dnn, 1, CombineRule::Concat, {});
    add("dnn d=2", Family::Dnn, 2, CombineRule::Concat, {});
  } else if (arch == "mff") {
    add("mff d=1 concat", Family::Mff, 1, CombineRule::Concat, {{0}, {0}});
    add("mff d=2 concat", Family::Mff, 2, CombineRule::Concat, {{0, 1}, {0, 1}});
    add("mff d=2 product", Family::Mff, 2, CombineRule::CoordinateProduct, {{0}, {1}});
  } else if (arch == "inn") {
    add("inn d=1 concat", Family::Inn, 1, CombineRule::Concat, {{0}, {0}});
    add("inn d=2 concat", Family::Inn, 2, CombineRule::Concat, {{0, 1}, {0, 1}});
    add("inn d=2 product", Family::Inn, 2, CombineRule::CoordinateProduct, {{0}, {1}});
  } else {
    throw ConfigError("--arch: expected dnn, mff or inn");
  }

  bool ok = true;
  for (const auto& c : cases) {
    auto params = init_params<double>(c.spec, seed);
    auto points = random_check_points(c.spec.input_dim, 20, seed + 1);
    DerivCheckReport rep;
    if (c.spec.input_dim == 1)
      rep = check_derivatives<1>(c.spec, params, points, 1e-4);
    else
      rep = check_derivatives<2>(c.spec, params, points, 1e-4);
    bool pass = rep.max_rel_err_d1 <= 1e-6 && rep.max_rel_err_d2 <= 1e-5 &&
                rep.max_rel_err_param_grad <= 1e-5;
    ok = ok && pass;
    std::printf("%-18s points=%zu  d1=%.3e  d2=%.3e  param_grad=%.3e  [%s]\n",
                c.label.c_str(), rep.points_checked, rep.max_rel_err_d1, rep.max_rel_err_d2,
                rep.max_rel_err_param_grad, pass ? "ok" : "FAIL");
  }
  return ok ? kExitOk : kExitCheck;
}

int list_command() {
  std::printf("%-24s %-6s %s\n", "id", "dim", "description");
  std::printf("%-24s %-6s %s\n", "heat-large-gradient", "x,t",
              "heat equation with a steep interior transient (epsilon)");
  std::printf("%-24s %-6s %s\n", "poisson-multifreq", "x",
              "1d poisson with low+high frequency solution (a1, a2)");
  std::printf("%-24s %-6s %s\n", "helmholtz-highfreq", "x,y",
              "helmholtz with anisotropic frequencies (k, a1, a2)");
  std::printf("%-24s %-6s %s\n", "klein-gordon", "x,t",
              "nonlinear klein-gordon, cubic term (alpha, beta, gamma, k, a)");
  std::printf("%-24s %-6s %s\n", "heat-varying-freq", "x,t",
              "heat equation with position-dependent frequency");
  std::printf("%-24s %-6s %s\n", "poisson-gaussian-spike", "x,y",
              "2d poisson with a narrow gaussian spike (h)");
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"PINN training workbench: power-regularized multi-magnitude losses, "
               "multi-level schedules, grouped regularization, Fourier-feature and "
               "integrated architectures. Thread count caps via MMPINN_THREADS."};
  app.require_subcommand(1);

  std::string config_path, out_dir = "out", n_text = "1..8", arch = "dnn";
  std::vector<std::string> overrides;
  int repeats = -1;
  long seed = -1;

  auto* run = app.add_subcommand("run", "train a benchmark from a config file");
  run->add_option("--config", config_path, "config file")->required();
  run->add_option("--out", out_dir, "output directory");
  run->add_option("--set", overrides, "override config values (section.key=value)");
  run->add_option("--seed", seed, "master seed override");
  run->add_option("--repeats", repeats, "repeat count override");

  auto* sweep = app.add_subcommand("sweep-n", "run the config across residual exponents n");
  sweep->add_option("--config", config_path, "config file")->required();
  sweep->add_option("--n", n_text, "exponents, e.g. 1..8 or 1,3,8");
  sweep->add_option("--out", out_dir, "output directory for sweep.csv");
  sweep->add_option("--repeats", repeats, "repeat count override");
  sweep->add_option("--set", overrides, "override config values (section.key=value)");

  auto* check = app.add_subcommand("check-derivatives",
                                   "verify analytic jets and gradients against finite differences");
  check->add_option("--arch", arch, "architecture family: dnn, mff or inn");
  check->add_option("--seed", seed, "rng seed");

  auto* list = app.add_subcommand("list-benchmarks", "print the built-in benchmark ids");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (run->parsed()) {
      if (seed >= 0) overrides.push_back("seed=" + std::to_string(seed));
      if (repeats > 0) overrides.push_back("repeats=" + std::to_string(repeats));
      return run_command(config_path, out_dir, overrides);
    }
    if (sweep->parsed()) return sweep_command(config_path, n_text, out_dir, repeats, overrides);
    if (check->parsed())
      return check_command(arch, seed >= 0 ? static_cast<std::uint64_t>(seed) : 7);
    if (list->parsed()) return list_command();
  } catch (const mmpinn::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const mmpinn::IoError& e) {
    std::fprintf(stderr, "io error: %s\n", e.what());
    return kExitConfig;
  } catch (const mmpinn::DivergenceError& e) {
    std::fprintf(stderr, "training failure: %s\n", e.what());
    return kExitTraining;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitTraining;
  }
  return kExitConfig;
}
