#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mmpinn/adam.hpp"
#include "mmpinn/common.hpp"
#include "mmpinn/lbfgs.hpp"
#include "mmpinn/losses.hpp"
#include "mmpinn/problems.hpp"
#include "mmpinn/sampling.hpp"

namespace mmpinn {

/// One optimization level: its exponents and which optimizer phases run.
/// Level 1 of the default schedule runs Adam then L-BFGS; later levels are
/// L-BFGS-only re-optimizations warm-started from the previous level.
struct LevelSpec {
  double m = 1.0;
  double n = 1.0;
  std::vector<double> group_n;  // per-group exponents; empty = ungrouped
  bool run_adam = true;
  bool run_lbfgs = true;
};

struct RunConfig {
  std::string benchmark;
  std::map<std::string, double> problem_params;
  ArchitectureSpec arch;
  SampleCounts counts;
  std::optional<GroupingSpec> grouping;
  bool equalize = true;
  LossConfig loss;
  bool minibatch = false;
  SampleCounts batch;  // per-iteration Adam batch when minibatch is on
  AdamConfig adam;
  LbfgsConfig lbfgs;
  std::vector<LevelSpec> levels;
  int repeats = 5;
  std::uint64_t master_seed = 1;
  std::vector<int> grid_resolution;
  std::string precision = "float64";
};

struct IterationRow {
  long iteration = 0;   // global, monotone across phases and levels
  int level = 1;
  std::string phase;    // "adam" | "lbfgs"
  double ls = 0.0;
  double lr = 0.0;
  std::vector<double> groups;  // raw per-group terms (size = group count)
  double regularized = 0.0;
  double lr_effective = 0.0;   // adam: effective lr; lbfgs: accepted step
  double grad_inf = 0.0;
};

/// Loss snapshot taken at the start of each level, before any of its
/// optimizer phases run. Entry 0 is the state at initialization; for level
/// k+1 the raw terms must equal the final raw terms of level k (warm start).
struct LevelTransition {
  int level = 1;
  double ls = 0.0;
  double lr = 0.0;
  std::vector<double> groups;
  double regularized = 0.0;  // under this level's exponents
};

struct RepeatResult {
  std::uint64_t seed = 0;
  bool failed = false;
  std::string fail_reason;
  std::vector<IterationRow> rows;
  std::vector<LevelTransition> transitions;
  std::vector<double> final_params;
  std::vector<double> grid_predictions;
  double relative_l2 = 0.0;
  double wall_seconds = 0.0;
  std::string lbfgs_stop;  // termination tag of the last L-BFGS phase
};

struct TrainResult {
  RunConfig config;
  std::string config_echo;  // filled by the config layer before export
  TestGrid grid;
  int group_count = 1;
  std::vector<RepeatResult> repeats;
};

namespace detail {

constexpr std::uint64_t kSeedSampling = 0x53414d50ULL;
constexpr std::uint64_t kSeedInit = 0x494e4954ULL;
constexpr std::uint64_t kSeedBatch = 0x42415443ULL;

template <class T, int D>
RepeatResult train_repeat(const RunConfig& cfg, const PdeProblem& problem,
                          const TestGrid& grid, std::uint64_t seed, int* group_count_out) {
  RepeatResult rep;
  rep.seed = seed;
  const auto t_start = std::chrono::steady_clock::now();

  TrainingSet<T> full = sample_training_set<T>(problem, cfg.counts,
                                               derive_seed(seed, kSeedSampling));
  if (cfg.grouping) full = assign_groups(full, *cfg.grouping, problem, cfg.equalize);
  if (group_count_out) *group_count_out = full.group_count;

  NetworkParams<T> net = init_params<T>(cfg.arch, derive_seed(seed, kSeedInit));
  std::vector<T> theta = net.theta.data;

  LossConfig level_loss = cfg.loss;
  if (!cfg.levels.empty()) {
    level_loss.m = cfg.levels.front().m;
    level_loss.n = cfg.levels.front().n;
    level_loss.group_n = cfg.levels.front().group_n;
  }
  PinnObjective<T, D> obj(problem, cfg.arch, net, level_loss);
  obj.set_training_set(&full);

  std::mt19937_64 batch_rng(derive_seed(seed, kSeedBatch));
  long global_iter = 0;

  auto record = [&](int level, const char* phase, const LossBreakdown<T>& b, double lr_eff,
                    double grad_inf) {
    IterationRow row;
    row.iteration = global_iter++;
    row.level = level;
    row.phase = phase;
    row.ls = static_cast<double>(b.ls);
    row.lr = static_cast<double>(b.lr);
    row.groups.reserve(b.per_group.size());
    for (T g : b.per_group) row.groups.push_back(static_cast<double>(g));
    row.regularized = static_cast<double>(b.regularized);
    row.lr_effective = lr_eff;
    row.grad_inf = grad_inf;
    rep.rows.push_back(std::move(row));
  };

  try {
    std::vector<LevelSpec> levels = cfg.levels;
    if (levels.empty())
      levels.push_back(LevelSpec{cfg.loss.m, cfg.loss.n, cfg.loss.group_n, true, true});
    for (std::size_t li = 0; li < levels.size(); ++li) {
      const LevelSpec& level = levels[li];
      LossConfig lc = cfg.loss;
      lc.m = level.m;
      lc.n = level.n;
      lc.group_n = level.group_n;
      obj.set_loss_config(lc);

      {
        LossBreakdown<T> b = obj.breakdown(theta);
        LevelTransition tr;
        tr.level = static_cast<int>(li + 1);
        tr.ls = static_cast<double>(b.ls);
        tr.lr = static_cast<double>(b.lr);
        for (T g : b.per_group) tr.groups.push_back(static_cast<double>(g));
        tr.regularized = static_cast<double>(b.regularized);
        rep.transitions.push_back(std::move(tr));
      }

      if (level.run_adam && cfg.adam.iterations > 0) {
        Adam<T> adam(theta.size(), cfg.adam);
        std::vector<T> grad;
        TrainingSet<T> batch_set;
        for (long it = 0; it < cfg.adam.iterations; ++it) {
          if (cfg.minibatch) {
            batch_set = sample_training_set<T>(problem, cfg.batch, batch_rng());
            if (cfg.grouping)
              batch_set = assign_groups(batch_set, *cfg.grouping, problem, true);
            obj.set_training_set(&batch_set);
          }
          T f = obj.value_and_grad(theta, grad);
          if (!std::isfinite(static_cast<double>(f)))
            throw DivergenceError("non-finite loss in adam phase", global_iter);
          T lr_eff = adam.step(theta, grad, it);
          T ginf = T(0);
          for (T g : grad) ginf = std::max(ginf, std::abs(g));
          record(static_cast<int>(li + 1), "adam", obj.last_breakdown(),
                 static_cast<double>(lr_eff), static_cast<double>(ginf));
        }
        if (cfg.minibatch) obj.set_training_set(&full);  // L-BFGS runs full-batch
      }

      if (level.run_lbfgs) {
        auto objective = [&](const std::vector<T>& x, std::vector<T>& g) {
          return obj.value_and_grad(x, g);
        };
        auto result = lbfgs_minimize<T>(
            objective, theta, cfg.lbfgs,
            [&](const LbfgsIterate<T>& rec, const std::vector<T>& x) {
              // The accepted point is the line search's last evaluation, so
              // the cached breakdown matches; re-derive defensively if not.
              LossBreakdown<T> b = obj.last_breakdown();
              if (b.regularized != rec.f) b = obj.breakdown(x);
              record(static_cast<int>(li + 1), "lbfgs", b, static_cast<double>(rec.alpha),
                     static_cast<double>(rec.grad_inf));
            });
        rep.lbfgs_stop = to_string(result.stop);
        if (result.stop == LbfgsStop::Diverged)
          throw DivergenceError("non-finite loss at l-bfgs start", global_iter);
      }
    }

    // Final metric on the test grid.
    Evaluator<T, 0> ev0(cfg.arch);
    net.theta.data = theta;
    const std::size_t npts = grid.exact.size();
    std::vector<T> pts(grid.points.size());
    for (std::size_t i = 0; i < grid.points.size(); ++i)
      pts[i] = static_cast<T>(grid.points[i]);
    std::vector<T> pred(npts);
    parallel_chunks((npts + Evaluator<T, 0>::kBlock - 1) / Evaluator<T, 0>::kBlock, 16,
                    [&](std::size_t b0, std::size_t b1, std::size_t) {
                      auto ws = ev0.make_workspace();
                      Jet<T, 0> jets[Evaluator<T, 0>::kBlock];
                      for (std::size_t bi = b0; bi < b1; ++bi) {
                        std::size_t i0 = bi * Evaluator<T, 0>::kBlock;
                        int nb = static_cast<int>(
                            std::min<std::size_t>(Evaluator<T, 0>::kBlock, npts - i0));
                        ev0.forward_block(net, pts.data() + i0 * problem.dim, nb, jets, ws);
                        for (int b = 0; b < nb; ++b) pred[i0 + b] = jets[b].v;
                      }
                    });
    rep.grid_predictions.assign(npts, 0.0);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < npts; ++i) {
      rep.grid_predictions[i] = static_cast<double>(pred[i]);
      double diff = rep.grid_predictions[i] - grid.exact[i];
      num += diff * diff;
      den += grid.exact[i] * grid.exact[i];
    }
    rep.relative_l2 = std::sqrt(num) / std::sqrt(den);
    rep.final_params.assign(theta.size(), 0.0);
    for (std::size_t i = 0; i < theta.size(); ++i)
      rep.final_params[i] = static_cast<double>(theta[i]);
    if (!std::isfinite(rep.relative_l2))
      throw DivergenceError("non-finite prediction on the test grid", global_iter);
  } catch (const DivergenceError& e) {
    rep.failed = true;
    rep.fail_reason = e.what();
  }

  rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
                         .count();
  return rep;
}

template <class T, int D>
TrainResult train_impl(const RunConfig& cfg) {
  TrainResult result;
  result.config = cfg;
  PdeProblem problem = make_problem(cfg.benchmark, cfg.problem_params);
  if (cfg.arch.input_dim != problem.dim)
    throw ConfigError("architecture input_dim must be " + std::to_string(problem.dim) +
                      " for " + problem.name);
  result.grid = test_grid(problem, cfg.grid_resolution);
  if (cfg.repeats < 1) throw ConfigError("repeats must be >= 1");
  for (int r = 0; r < cfg.repeats; ++r) {
    int gc = 1;
    result.repeats.push_back(
        train_repeat<T, D>(cfg, problem, result.grid, cfg.master_seed + r, &gc));
    result.group_count = gc;
  }
  return result;
}

}  // namespace detail

/// Full training run: repeats, levels, logging and the final test metric.
/// Dispatches on precision and the benchmark's input dimension.
inline TrainResult train(const RunConfig& cfg) {
  validate(cfg.loss);
  validate(cfg.adam);
  validate(cfg.lbfgs);
  for (const auto& level : cfg.levels) {
    if (!(level.m > 0.0) || !(level.n > 0.0))
      throw ConfigError("levels: exponents require m > 0, n > 0");
    for (double nh : level.group_n)
      if (!(nh > 0.0)) throw ConfigError("levels: group exponents must be > 0");
  }
  PdeProblem probe = make_problem(cfg.benchmark, cfg.problem_params);
  const bool f32 = cfg.precision == "float32";
  if (!f32 && cfg.precision != "float64")
    throw ConfigError("precision must be float32 or float64");
  if (probe.dim == 1) return f32 ? detail::train_impl<float, 1>(cfg)
                                 : detail::train_impl<double, 1>(cfg);
  return f32 ? detail::train_impl<float, 2>(cfg) : detail::train_impl<double, 2>(cfg);
}

/// Multi-level schedule; levels after the first warm-start from the previous
/// level's final parameters (the parameter vector is carried over in place,
/// so the chaining is bitwise). A single-level list degenerates to train.
inline TrainResult multi_level_train(const RunConfig& cfg) {
  return train(cfg);
}

}  // namespace mmpinn
