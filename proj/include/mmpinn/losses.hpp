#pragma once

#include <array>
#include <cmath>
#include <cstring>
#include <vector>

#include "mmpinn/common.hpp"
#include "mmpinn/evaluator.hpp"
#include "mmpinn/problems.hpp"
#include "mmpinn/sampling.hpp"

namespace mmpinn {

/// Loss weights and regularization exponents. The exponents act as 1/m and
/// 1/n powers on the raw mean-square terms, compressing their magnitudes so
/// that terms of very different size are optimized together. group_n /
/// group_w configure the per-subdomain variant; when group_n is non-empty the
/// residual term is the weighted sum of per-group powers and the outer n is
/// unused.
struct LossConfig {
  double w_s = 1.0, w_r = 1.0;
  double m = 1.0, n = 1.0;
  std::vector<double> group_n;
  std::vector<double> group_w;
  double smoothing_eps = 1e-12;
};

inline void validate(const LossConfig& c) {
  if (!(c.m > 0.0) || !(c.n > 0.0)) throw ConfigError("loss: exponents require m > 0, n > 0");
  if (!(c.w_s > 0.0) || !(c.w_r > 0.0)) throw ConfigError("loss: weights must be positive");
  if (c.smoothing_eps < 0.0) throw ConfigError("loss: smoothing_eps must be >= 0");
  for (double nh : c.group_n)
    if (!(nh > 0.0)) throw ConfigError("loss: group exponents must be > 0");
  for (double w : c.group_w)
    if (!(w > 0.0)) throw ConfigError("loss: group weights must be > 0");
  if (!c.group_w.empty() && c.group_w.size() != c.group_n.size())
    throw ConfigError("loss: group_w length must match group_n");
}

template <class T>
struct LossBreakdown {
  T ls = T(0);                // supervised raw term (sum of per-kind means)
  T lr = T(0);                // residual raw term (pooled mean)
  std::vector<T> per_group;   // raw per-group means
  T regularized = T(0);
  T standard = T(0);          // w_s*ls + w_r*lr
};

/// (raw + eps)^(1/n); n == 1 short-circuits so the degenerate case is exact.
template <class T>
T reg_pow(T raw, double n, double eps) {
  T shifted = raw + static_cast<T>(eps);
  if (n == 1.0) return shifted;
  return std::pow(shifted, static_cast<T>(1.0 / n));
}

/// d/draw (raw + eps)^(1/n); bounded by (1/n)*eps^(1/n-1) for raw >= 0.
template <class T>
T reg_pow_deriv(T raw, double n, double eps) {
  if (n == 1.0) return T(1);
  T shifted = raw + static_cast<T>(eps);
  return static_cast<T>(1.0 / n) * std::pow(shifted, static_cast<T>(1.0 / n - 1.0));
}

template <class T>
T regularized_total(const LossBreakdown<T>& b, const LossConfig& c) {
  T total = static_cast<T>(c.w_s) * reg_pow(b.ls, c.m, c.smoothing_eps);
  if (!c.group_n.empty()) {
    if (b.per_group.size() != c.group_n.size())
      throw ConfigError("loss: breakdown has " + std::to_string(b.per_group.size()) +
                        " groups, config expects " + std::to_string(c.group_n.size()));
    for (std::size_t h = 0; h < c.group_n.size(); ++h) {
      double w = c.group_w.empty() ? 1.0 : c.group_w[h];
      total += static_cast<T>(w) * reg_pow(b.per_group[h], c.group_n[h], c.smoothing_eps);
    }
  } else {
    total += static_cast<T>(c.w_r) * reg_pow(b.lr, c.n, c.smoothing_eps);
  }
  return total;
}

/// Full training objective: raw loss terms, the regularized total, and its
/// exact parameter gradient via reverse accumulation.
///
/// Evaluation is data-parallel over point blocks with per-thread gradient
/// accumulators; the scalar loss terms are reduced sequentially in ascending
/// point index, and thread partials combine in thread order, so results are
/// reproducible for a fixed thread count.
template <class T, int D>
class PinnObjective {
 public:
  PinnObjective(const PdeProblem& problem, const ArchitectureSpec& spec,
                const NetworkParams<T>& params, LossConfig config)
      : problem_(problem), eval_(spec), net_(params), config_(std::move(config)) {
    validate(config_);
    if (problem_.dim != spec.input_dim)
      throw ConfigError("objective: architecture input_dim does not match the benchmark");
    const int threads = max_threads();
    workspaces_.reserve(threads);
    for (int t = 0; t < threads; ++t) workspaces_.push_back(eval_.make_workspace());
  }

  void set_training_set(const TrainingSet<T>* ts) {
    ts_ = ts;
    if (!ts_) return;
    if (ts_->supervised_size() == 0)
      throw ConfigError("objective: empty supervised set");
    if (ts_->residual_size() == 0)
      throw ConfigError("objective: empty residual set");
    if (!config_.group_n.empty() &&
        static_cast<int>(config_.group_n.size()) != ts_->group_count)
      throw ConfigError("loss: group_n has " + std::to_string(config_.group_n.size()) +
                        " entries, training set has " + std::to_string(ts_->group_count) +
                        " groups");
  }

  void set_loss_config(LossConfig c) {
    validate(c);
    config_ = std::move(c);
    if (ts_) set_training_set(ts_);  // re-check group arity
  }
  const LossConfig& loss_config() const { return config_; }

  std::size_t param_count() const { return eval_.param_count(); }
  const Evaluator<T, D>& evaluator() const { return eval_; }
  const NetworkParams<T>& network() const { return net_; }

  T value(const std::vector<T>& theta) { return compute(theta, nullptr); }

  T value_and_grad(const std::vector<T>& theta, std::vector<T>& grad) {
    grad.assign(theta.size(), T(0));
    return compute(theta, grad.data());
  }

  const LossBreakdown<T>& last_breakdown() const { return breakdown_; }

  LossBreakdown<T> breakdown(const std::vector<T>& theta) {
    compute(theta, nullptr);
    return breakdown_;
  }

 private:
  static constexpr int kB = Evaluator<T, D>::kBlock;

  T compute(const std::vector<T>& theta, T* grad) {
    if (!ts_) throw ConfigError("objective: no training set bound");
    if (theta.size() != eval_.param_count())
      throw ConfigError("objective: parameter vector size mismatch");
    net_.theta.data = theta;

    const TrainingSet<T>& ts = *ts_;
    const std::size_t n_sup = ts.supervised_size();
    const std::size_t n_res = ts.residual_size();
    const int groups = ts.group_count;
    const int dim = problem_.dim;

    // Per condition-kind counts (means are per kind, then summed).
    std::array<std::size_t, 3> kind_count{};
    for (std::size_t i = 0; i < n_sup; ++i)
      kind_count[kind_index(ts.supervised_condition[i])]++;
    std::vector<std::size_t> group_size(groups, 0);
    for (std::size_t i = 0; i < n_res; ++i) group_size[ts.group_of[i]]++;
    for (int h = 0; h < groups; ++h)
      if (group_size[h] == 0)
        throw ConfigError("loss: residual group " + std::to_string(h) + " is empty");

    const int terms = grad ? 1 + groups : 0;
    const std::size_t P = eval_.param_count();
    if (grad) {
      accum_.assign(static_cast<std::size_t>(max_threads()) * terms * P, T(0));
    }
    sup_res_.assign(n_sup, T(0));
    res_res_.assign(n_res, T(0));

    // Supervised pass.
    const std::size_t sup_blocks = (n_sup + kB - 1) / kB;
    parallel_chunks(sup_blocks, 8, [&](std::size_t b0, std::size_t b1, std::size_t tid) {
      auto& ws = workspaces_[tid];
      Jet<T, D> jets[kB], adj[kB];
      for (std::size_t bi = b0; bi < b1; ++bi) {
        const std::size_t i0 = bi * kB;
        const int nb = static_cast<int>(std::min<std::size_t>(kB, n_sup - i0));
        const T* xs = ts.supervised_points.data() + i0 * dim;
        eval_.forward_block(net_, xs, nb, jets, ws);
        for (int b = 0; b < nb; ++b) {
          const std::size_t i = i0 + b;
          const int ci = ts.supervised_condition[i];
          T r = problem_.condition_residual(ci, jets[b], xs + b * dim);
          sup_res_[i] = r;
          if (grad) {
            T scale = T(2) * r / static_cast<T>(kind_count[kind_index(ci)]);
            adj[b] = problem_.template condition_adjoint<T, D>(ci, scale);
          }
        }
        if (grad)
          eval_.backward_block(net_, adj, nb, ws, accum_.data() + tid * terms * P);
      }
    });

    // Residual pass.
    const std::size_t res_blocks = (n_res + kB - 1) / kB;
    parallel_chunks(res_blocks, 8, [&](std::size_t b0, std::size_t b1, std::size_t tid) {
      auto& ws = workspaces_[tid];
      Jet<T, D> jets[kB], adj[kB];
      for (std::size_t bi = b0; bi < b1; ++bi) {
        const std::size_t i0 = bi * kB;
        const int nb = static_cast<int>(std::min<std::size_t>(kB, n_res - i0));
        const T* xs = ts.residual_points.data() + i0 * dim;
        eval_.forward_block(net_, xs, nb, jets, ws);
        for (int b = 0; b < nb; ++b) {
          const std::size_t i = i0 + b;
          T r = problem_.residual(jets[b], xs + b * dim);
          res_res_[i] = r;
          if (grad) {
            const int h = ts.group_of[i];
            T scale = T(2) * r / static_cast<T>(group_size[h]);
            adj[b] = problem_.residual_adjoint(jets[b], scale);
          }
        }
        if (grad) {
          // Group of the block's first point; blocks can mix groups, so seed
          // into per-point accumulators via one backward call per group run.
          backward_grouped(ts, adj, i0, nb, ws,
                           accum_.data() + tid * terms * P, P);
        }
      }
    });

    // Sequential reductions, ascending point index.
    std::array<T, 3> kind_sum{};
    for (std::size_t i = 0; i < n_sup; ++i) {
      T r = sup_res_[i];
      kind_sum[kind_index(ts.supervised_condition[i])] += r * r;
    }
    T ls = T(0);
    for (int k = 0; k < 3; ++k)
      if (kind_count[k] > 0) ls += kind_sum[k] / static_cast<T>(kind_count[k]);

    std::vector<T> group_sum(groups, T(0));
    for (std::size_t i = 0; i < n_res; ++i) {
      T r = res_res_[i];
      group_sum[ts.group_of[i]] += r * r;
    }
    T pooled = T(0);
    for (int h = 0; h < groups; ++h) pooled += group_sum[h];
    T lr = pooled / static_cast<T>(n_res);

    breakdown_.ls = ls;
    breakdown_.lr = lr;
    breakdown_.per_group.assign(groups, T(0));
    for (int h = 0; h < groups; ++h)
      breakdown_.per_group[h] = group_sum[h] / static_cast<T>(group_size[h]);
    breakdown_.standard = static_cast<T>(config_.w_s) * ls + static_cast<T>(config_.w_r) * lr;
    breakdown_.regularized = regularized_total(breakdown_, config_);

    if (grad) {
      std::vector<T> coeff(terms, T(0));
      coeff[0] = static_cast<T>(config_.w_s) * reg_pow_deriv(ls, config_.m, config_.smoothing_eps);
      if (!config_.group_n.empty()) {
        for (int h = 0; h < groups; ++h) {
          double w = config_.group_w.empty() ? 1.0 : config_.group_w[h];
          coeff[1 + h] = static_cast<T>(w) *
                         reg_pow_deriv(breakdown_.per_group[h], config_.group_n[h],
                                       config_.smoothing_eps);
        }
      } else {
        // Pooled term: accumulator h holds the gradient of the group-h mean,
        // so d(lr)/d(theta) needs the group-size / n_res reweighting.
        T c_r = static_cast<T>(config_.w_r) *
                reg_pow_deriv(lr, config_.n, config_.smoothing_eps);
        for (int h = 0; h < groups; ++h)
          coeff[1 + h] = c_r * static_cast<T>(group_size[h]) / static_cast<T>(n_res);
      }
      const int threads = max_threads();
      for (std::size_t i = 0; i < P; ++i) {
        T g = T(0);
        for (int t = 0; t < terms; ++t) {
          T s = T(0);
          for (int tid = 0; tid < threads; ++tid)
            s += accum_[(static_cast<std::size_t>(tid) * terms + t) * P + i];
          g += coeff[t] * s;
        }
        grad[i] = g;
      }
    }
    return breakdown_.regularized;
  }

  /// Backward for one block whose points may span several groups: the seeds
  /// are already scaled per point; runs of equal group id share one call.
  void backward_grouped(const TrainingSet<T>& ts, Jet<T, D>* adj, std::size_t i0, int nb,
                        typename Evaluator<T, D>::Workspace& ws, T* accum_base,
                        std::size_t P) {
    int b = 0;
    while (b < nb) {
      int h = ts.group_of[i0 + b];
      int e = b + 1;
      while (e < nb && ts.group_of[i0 + e] == h) ++e;
      if (b == 0 && e == nb) {
        eval_.backward_block(net_, adj, nb, ws, accum_base + (1 + h) * P);
        return;
      }
      // Mask out other points of the block by zero seeds.
      Jet<T, D> masked[kB];
      for (int i = 0; i < nb; ++i) masked[i] = Jet<T, D>{};
      for (int i = b; i < e; ++i) masked[i] = adj[i];
      eval_.backward_block(net_, masked, nb, ws, accum_base + (1 + h) * P);
      b = e;
    }
  }

  std::size_t kind_index(int cond) const {
    switch (problem_.conditions.at(cond).kind) {
      case ConditionKind::InitialValue: return 0;
      case ConditionKind::DirichletBoundary: return 1;
      case ConditionKind::InitialTimeDerivative: return 2;
    }
    return 0;
  }

  const PdeProblem& problem_;
  Evaluator<T, D> eval_;
  NetworkParams<T> net_;
  LossConfig config_;
  const TrainingSet<T>* ts_ = nullptr;
  std::vector<typename Evaluator<T, D>::Workspace> workspaces_;
  std::vector<T> accum_;
  std::vector<T> sup_res_, res_res_;
  LossBreakdown<T> breakdown_;
};

// ---- value-only operations (independent loops, used directly by tests) ----

template <class T, int D>
T supervised_loss(const PdeProblem& p, const ArchitectureSpec& spec,
                  const NetworkParams<T>& params, const TrainingSet<T>& ts) {
  if (ts.supervised_size() == 0) throw ConfigError("supervised_loss: empty supervised set");
  Evaluator<T, D> ev(spec);
  auto ws = ev.make_workspace();
  constexpr int B = Evaluator<T, D>::kBlock;
  Jet<T, D> jets[B];
  std::array<T, 3> sum{};
  std::array<std::size_t, 3> count{};
  auto kind_of = [&](int ci) -> std::size_t {
    switch (p.conditions.at(ci).kind) {
      case ConditionKind::InitialValue: return 0;
      case ConditionKind::DirichletBoundary: return 1;
      case ConditionKind::InitialTimeDerivative: return 2;
    }
    return 0;
  };
  const std::size_t n = ts.supervised_size();
  for (std::size_t i0 = 0; i0 < n; i0 += B) {
    const int nb = static_cast<int>(std::min<std::size_t>(B, n - i0));
    const T* xs = ts.supervised_points.data() + i0 * p.dim;
    ev.forward_block(params, xs, nb, jets, ws);
    for (int b = 0; b < nb; ++b) {
      int ci = ts.supervised_condition[i0 + b];
      T r = p.condition_residual(ci, jets[b], xs + b * p.dim);
      sum[kind_of(ci)] += r * r;
      count[kind_of(ci)]++;
    }
  }
  T ls = T(0);
  for (int k = 0; k < 3; ++k)
    if (count[k] > 0) ls += sum[k] / static_cast<T>(count[k]);
  return ls;
}

template <class T, int D>
std::vector<T> residual_values(const PdeProblem& p, const ArchitectureSpec& spec,
                               const NetworkParams<T>& params, const TrainingSet<T>& ts) {
  if (ts.residual_size() == 0) throw ConfigError("residual_loss: empty residual set");
  Evaluator<T, D> ev(spec);
  auto ws = ev.make_workspace();
  constexpr int B = Evaluator<T, D>::kBlock;
  Jet<T, D> jets[B];
  const std::size_t n = ts.residual_size();
  std::vector<T> out(n);
  for (std::size_t i0 = 0; i0 < n; i0 += B) {
    const int nb = static_cast<int>(std::min<std::size_t>(B, n - i0));
    const T* xs = ts.residual_points.data() + i0 * p.dim;
    ev.forward_block(params, xs, nb, jets, ws);
    for (int b = 0; b < nb; ++b) out[i0 + b] = p.residual(jets[b], xs + b * p.dim);
  }
  return out;
}

template <class T, int D>
T residual_loss(const PdeProblem& p, const ArchitectureSpec& spec,
                const NetworkParams<T>& params, const TrainingSet<T>& ts) {
  auto r = residual_values<T, D>(p, spec, params, ts);
  T sum = T(0);
  for (T v : r) sum += v * v;
  return sum / static_cast<T>(r.size());
}

/// Raw per-group means and the combined term sum_h w_h*(L_h + eps)^(1/n_h).
template <class T, int D>
std::pair<std::vector<T>, T> grouped_residual_loss(const PdeProblem& p,
                                                   const ArchitectureSpec& spec,
                                                   const NetworkParams<T>& params,
                                                   const TrainingSet<T>& ts,
                                                   const LossConfig& config) {
  validate(config);
  if (static_cast<int>(config.group_n.size()) != ts.group_count)
    throw ConfigError("grouped_residual_loss: group_n arity mismatch");
  auto r = residual_values<T, D>(p, spec, params, ts);
  std::vector<T> sum(ts.group_count, T(0));
  std::vector<std::size_t> size(ts.group_count, 0);
  for (std::size_t i = 0; i < r.size(); ++i) {
    sum[ts.group_of[i]] += r[i] * r[i];
    size[ts.group_of[i]]++;
  }
  std::vector<T> means(ts.group_count);
  T combined = T(0);
  for (int h = 0; h < ts.group_count; ++h) {
    if (size[h] == 0)
      throw ConfigError("grouped_residual_loss: group " + std::to_string(h) + " is empty");
    means[h] = sum[h] / static_cast<T>(size[h]);
    double w = config.group_w.empty() ? 1.0 : config.group_w[h];
    combined += static_cast<T>(w) * reg_pow(means[h], config.group_n[h], config.smoothing_eps);
  }
  return {means, combined};
}

}  // namespace mmpinn
