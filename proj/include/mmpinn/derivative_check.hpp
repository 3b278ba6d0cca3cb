#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "mmpinn/evaluator.hpp"

namespace mmpinn {

struct DerivCheckReport {
  double max_rel_err_d1 = 0.0;
  double max_rel_err_d2 = 0.0;
  double max_rel_err_param_grad = 0.0;
  std::size_t points_checked = 0;
};

/// Relative error with a unit-floored denominator on the analytic value.
inline double rel_err(double analytic, double reference) {
  return std::abs(analytic - reference) / std::max(std::abs(analytic), 1.0);
}

/// Compares analytic jets against central finite differences of the plain
/// forward pass, and the reverse-accumulated parameter gradient of a probe
/// functional against central differences over the parameters. The probe
/// mixes value, first and second derivatives so every adjoint path is
/// exercised:  probe = mean_p (u + 0.5*sum_k u_k + 0.25*sum_k u_kk)^2.
template <int D>
DerivCheckReport check_derivatives(const ArchitectureSpec& spec,
                                   const NetworkParams<double>& params,
                                   const std::vector<double>& points, double fd_step) {
  if (fd_step <= 0.0) throw ConfigError("check_derivatives: fd_step must be > 0");
  const std::size_t n = points.size() / spec.input_dim;
  if (n == 0) throw ConfigError("check_derivatives: no points given");

  DerivCheckReport report;
  report.points_checked = n;
  Evaluator<double, D> ev(spec);
  Evaluator<double, 0> ev0(spec);
  auto ws = ev.make_workspace();
  auto ws0 = ev0.make_workspace();

  auto value_at = [&](const double* x) {
    Jet<double, 0> out;
    ev0.forward_block(params, x, 1, &out, ws0);
    return out.v;
  };

  for (std::size_t i = 0; i < n; ++i) {
    const double* x = points.data() + i * spec.input_dim;
    Jet<double, D> jet;
    ev.forward_block(params, x, 1, &jet, ws);
    double xp[2];
    for (int k = 0; k < spec.input_dim; ++k) {
      for (int c = 0; c < spec.input_dim; ++c) xp[c] = x[c];
      xp[k] = x[k] + fd_step;
      const double fp = value_at(xp);
      xp[k] = x[k] - fd_step;
      const double fm = value_at(xp);
      const double f0 = jet.v;
      const double fd1 = (fp - fm) / (2.0 * fd_step);
      const double fd2 = (fp - 2.0 * f0 + fm) / (fd_step * fd_step);
      report.max_rel_err_d1 = std::max(report.max_rel_err_d1, rel_err(jet.d1[k], fd1));
      report.max_rel_err_d2 = std::max(report.max_rel_err_d2, rel_err(jet.d2[k], fd2));
    }
  }

  // Probe functional over all points; analytic gradient via reverse
  // accumulation, reference via central differences per parameter.
  auto probe = [&](const NetworkParams<double>& np, double* grad) {
    auto pws = ev.make_workspace();
    constexpr int B = Evaluator<double, D>::kBlock;
    Jet<double, D> jets[B], adj[B];
    double acc = 0.0;
    for (std::size_t i0 = 0; i0 < n; i0 += B) {
      const int nb = static_cast<int>(std::min<std::size_t>(B, n - i0));
      ev.forward_block(np, points.data() + i0 * spec.input_dim, nb, jets, pws);
      for (int b = 0; b < nb; ++b) {
        double mix = jets[b].v;
        for (int k = 0; k < D; ++k) mix += 0.5 * jets[b].d1[k] + 0.25 * jets[b].d2[k];
        acc += mix * mix / static_cast<double>(n);
        if (grad) {
          const double scale = 2.0 * mix / static_cast<double>(n);
          adj[b].v = scale;
          for (int k = 0; k < D; ++k) {
            adj[b].d1[k] = 0.5 * scale;
            adj[b].d2[k] = 0.25 * scale;
          }
        }
      }
      if (grad) ev.backward_block(np, adj, nb, pws, grad);
    }
    return acc;
  };

  std::vector<double> grad(ev.param_count(), 0.0);
  probe(params, grad.data());
  NetworkParams<double> shifted = params;
  for (std::size_t i = 0; i < ev.param_count(); ++i) {
    const double orig = shifted.theta.data[i];
    shifted.theta.data[i] = orig + fd_step;
    const double fp = probe(shifted, nullptr);
    shifted.theta.data[i] = orig - fd_step;
    const double fm = probe(shifted, nullptr);
    shifted.theta.data[i] = orig;
    const double fd = (fp - fm) / (2.0 * fd_step);
    report.max_rel_err_param_grad = std::max(report.max_rel_err_param_grad, rel_err(grad[i], fd));
  }
  return report;
}

/// Random interior points in [-1, 1]^dim (the standard check box).
inline std::vector<double> random_check_points(int dim, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-0.9, 0.9);
  std::vector<double> pts(n * dim);
  for (auto& v : pts) v = uni(rng);
  return pts;
}

}  // namespace mmpinn
