#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <vector>

#include "mmpinn/common.hpp"

namespace mmpinn {

struct LbfgsConfig {
  int memory = 50;
  long max_iterations = 50000;
  double c1 = 1e-4;  // sufficient-decrease coefficient
  double c2 = 0.9;   // curvature coefficient
  double f_tol = 1e-9;   // relative decrease threshold
  double g_tol = 1e-10;  // gradient infinity-norm threshold
  int max_line_search = 40;
};

inline void validate(const LbfgsConfig& c) {
  if (c.memory < 1) throw ConfigError("lbfgs: memory must be >= 1");
  if (!(c.c1 > 0.0 && c.c1 < c.c2 && c.c2 < 1.0))
    throw ConfigError("lbfgs: wolfe coefficients require 0 < c1 < c2 < 1");
  if (c.max_iterations < 0) throw ConfigError("lbfgs: max_iterations must be >= 0");
  if (c.f_tol < 0.0 || c.g_tol < 0.0) throw ConfigError("lbfgs: tolerances must be >= 0");
}

enum class LbfgsStop {
  GradientTol,
  FunctionTol,
  MaxIterations,
  LineSearchFailed,
  AlreadyMinimized,
  Diverged,
};

inline const char* to_string(LbfgsStop s) {
  switch (s) {
    case LbfgsStop::GradientTol: return "gradient-tolerance";
    case LbfgsStop::FunctionTol: return "function-tolerance";
    case LbfgsStop::MaxIterations: return "max-iterations";
    case LbfgsStop::LineSearchFailed: return "line-search-failed";
    case LbfgsStop::AlreadyMinimized: return "already-minimized";
    case LbfgsStop::Diverged: return "diverged";
  }
  return "?";
}

/// Everything the caller needs to log one accepted iterate (and to verify the
/// strong Wolfe conditions from actually evaluated quantities).
template <class T>
struct LbfgsIterate {
  long iteration = 0;
  T f_prev = T(0);
  T f = T(0);
  T grad_inf = T(0);
  T alpha = T(0);
  T dphi0 = T(0);      // directional derivative at alpha = 0
  T dphi_alpha = T(0); // directional derivative at the accepted alpha
};

template <class T>
struct LbfgsResult {
  LbfgsStop stop = LbfgsStop::MaxIterations;
  long iterations = 0;
  T final_f = T(0);
  long evaluations = 0;
};

namespace detail {

template <class T>
T inf_norm(const std::vector<T>& v) {
  T m = T(0);
  for (T x : v) m = std::max(m, std::abs(x));
  return m;
}

template <class T>
T dot(const std::vector<T>& a, const std::vector<T>& b) {
  T s = T(0);
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

/// Safeguarded cubic interpolation of a minimizer in (a, b); falls back to
/// bisection when the model step is outside or hugs an endpoint.
template <class T>
T interpolate_step(T a, T fa, T da, T b, T fb, T db) {
  const T d1 = da + db - T(3) * (fa - fb) / (a - b);
  const T disc = d1 * d1 - da * db;
  T lo = std::min(a, b), hi = std::max(a, b);
  if (disc >= T(0)) {
    const T d2 = std::copysign(std::sqrt(disc), b - a);
    T cand = b - (b - a) * ((db + d2 - d1) / (db - da + T(2) * d2));
    const T margin = T(0.1) * (hi - lo);
    if (std::isfinite(static_cast<double>(cand)) && cand > lo + margin && cand < hi - margin)
      return cand;
  }
  return (a + b) / T(2);
}

}  // namespace detail

/// Limited-memory BFGS with a strong-Wolfe line search (two-loop recursion
/// for the direction, bracket + zoom for the step). Objective must be a
/// deterministic callable f(x, grad_out) -> value. Non-finite trial values
/// are treated as failed sufficient decrease, so the search backs off rather
/// than aborting. Accepted iterates have strictly decreasing loss.
///
/// on_iterate(const LbfgsIterate<T>&, const std::vector<T>& x) fires after
/// every accepted step.
template <class T, class Objective, class Callback>
LbfgsResult<T> lbfgs_minimize(Objective&& objective, std::vector<T>& x, const LbfgsConfig& cfg,
                              Callback&& on_iterate) {
  validate(cfg);
  const std::size_t n = x.size();
  LbfgsResult<T> result;

  std::vector<T> g(n), g_new(n), x_new(n), d(n), q(n);
  std::deque<std::vector<T>> s_hist, y_hist;
  std::deque<T> rho_hist;

  T f = objective(x, g);
  result.evaluations = 1;
  if (!std::isfinite(static_cast<double>(f)) || !all_finite(g)) {
    result.stop = LbfgsStop::Diverged;
    result.final_f = f;
    return result;
  }
  if (detail::inf_norm(g) <= static_cast<T>(cfg.g_tol)) {
    result.stop = LbfgsStop::AlreadyMinimized;
    result.final_f = f;
    return result;
  }

  // Two-loop recursion, maintaining dir == -r so d comes out as the descent
  // direction directly.
  auto two_loop = [&](std::vector<T>& dir) {
    q = g;
    const std::size_t m = s_hist.size();
    std::vector<T> alpha(m);
    for (std::size_t i = m; i-- > 0;) {
      alpha[i] = rho_hist[i] * detail::dot(s_hist[i], q);
      for (std::size_t j = 0; j < n; ++j) q[j] -= alpha[i] * y_hist[i][j];
    }
    T gamma = T(1);
    if (m > 0) {
      T yy = detail::dot(y_hist[m - 1], y_hist[m - 1]);
      if (yy > T(0)) gamma = T(1) / (rho_hist[m - 1] * yy);
    }
    for (std::size_t j = 0; j < n; ++j) dir[j] = -gamma * q[j];
    for (std::size_t i = 0; i < m; ++i) {
      // beta here is -beta of the textbook recursion since dir == -r.
      T beta = rho_hist[i] * detail::dot(y_hist[i], dir);
      for (std::size_t j = 0; j < n; ++j) dir[j] -= s_hist[i][j] * (beta + alpha[i]);
    }
  };

  for (long iter = 1; iter <= cfg.max_iterations; ++iter) {
    if (s_hist.empty()) {
      for (std::size_t j = 0; j < n; ++j) d[j] = -g[j];
    } else {
      two_loop(d);
    }
    T dphi0 = detail::dot(g, d);
    if (!(dphi0 < T(0))) {
      // Not a descent direction; drop the history and restart on -g.
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      for (std::size_t j = 0; j < n; ++j) d[j] = -g[j];
      dphi0 = -detail::dot(g, g);
      if (!(dphi0 < T(0))) {
        result.stop = LbfgsStop::GradientTol;
        break;
      }
    }

    // First step has no curvature information; scale by the gradient size.
    T alpha = s_hist.empty() ? std::min(T(1), T(1) / std::max(detail::inf_norm(g), T(1e-12)))
                             : T(1);
    const T phi0 = f;
    const T c1 = static_cast<T>(cfg.c1), c2 = static_cast<T>(cfg.c2);

    auto eval_at = [&](T a, T& phi, T& dphi) {
      for (std::size_t j = 0; j < n; ++j) x_new[j] = x[j] + a * d[j];
      phi = objective(x_new, g_new);
      ++result.evaluations;
      dphi = detail::dot(g_new, d);
    };

    // Bracketing phase (then zoom) for the strong Wolfe conditions.
    bool accepted = false;
    T a_prev = T(0), phi_prev = phi0, dphi_prev = dphi0;
    T a_cur = alpha, phi_cur = T(0), dphi_cur = T(0);
    T a_lo = T(0), phi_lo = phi0, dphi_lo = dphi0;
    T a_hi = T(0), phi_hi = T(0), dphi_hi = T(0);
    bool bracketed = false;
    T accepted_alpha = T(0), accepted_phi = T(0), accepted_dphi = T(0);

    for (int ls = 0; ls < cfg.max_line_search && !accepted; ++ls) {
      if (!bracketed) {
        eval_at(a_cur, phi_cur, dphi_cur);
        const bool finite = std::isfinite(static_cast<double>(phi_cur));
        if (!finite || phi_cur > phi0 + c1 * a_cur * dphi0 || (ls > 0 && phi_cur >= phi_prev)) {
          a_lo = a_prev; phi_lo = phi_prev; dphi_lo = dphi_prev;
          a_hi = a_cur;
          phi_hi = finite ? phi_cur : std::numeric_limits<T>::max() / T(4);
          dphi_hi = dphi_cur;
          bracketed = true;
          continue;
        }
        if (std::abs(dphi_cur) <= -c2 * dphi0) {
          accepted = true;
          accepted_alpha = a_cur; accepted_phi = phi_cur; accepted_dphi = dphi_cur;
          break;
        }
        if (dphi_cur >= T(0)) {
          a_lo = a_cur; phi_lo = phi_cur; dphi_lo = dphi_cur;
          a_hi = a_prev; phi_hi = phi_prev; dphi_hi = dphi_prev;
          bracketed = true;
          continue;
        }
        a_prev = a_cur; phi_prev = phi_cur; dphi_prev = dphi_cur;
        a_cur = std::min(a_cur * T(2), T(1e10));
      } else {
        if (std::abs(a_hi - a_lo) < T(1e-16) * std::max(T(1), std::abs(a_lo))) break;
        T a_j = detail::interpolate_step(a_lo, phi_lo, dphi_lo, a_hi, phi_hi, dphi_hi);
        T phi_j, dphi_j;
        eval_at(a_j, phi_j, dphi_j);
        const bool finite = std::isfinite(static_cast<double>(phi_j));
        if (!finite || phi_j > phi0 + c1 * a_j * dphi0 || phi_j >= phi_lo) {
          a_hi = a_j;
          phi_hi = finite ? phi_j : std::numeric_limits<T>::max() / T(4);
          dphi_hi = dphi_j;
        } else {
          if (std::abs(dphi_j) <= -c2 * dphi0) {
            accepted = true;
            accepted_alpha = a_j; accepted_phi = phi_j; accepted_dphi = dphi_j;
            break;
          }
          if (dphi_j * (a_hi - a_lo) >= T(0)) {
            a_hi = a_lo; phi_hi = phi_lo; dphi_hi = dphi_lo;
          }
          a_lo = a_j; phi_lo = phi_j; dphi_lo = dphi_j;
        }
      }
    }

    if (!accepted) {
      result.stop = LbfgsStop::LineSearchFailed;
      break;
    }

    // x_new / g_new hold the state at the accepted step (the line search's
    // last evaluation); adopt that point bitwise rather than recomputing
    // x + alpha*d, so callbacks observe exactly the evaluated iterate.
    std::vector<T> s(n), y(n);
    T sy = T(0), ss = T(0), yy = T(0);
    for (std::size_t j = 0; j < n; ++j) {
      s[j] = x_new[j] - x[j];
      y[j] = g_new[j] - g[j];
      sy += s[j] * y[j];
      ss += s[j] * s[j];
      yy += y[j] * y[j];
    }
    x.swap(x_new);
    const T f_prev = f;
    f = accepted_phi;
    g.swap(g_new);

    // Positive-definiteness guard on the curvature pair.
    if (sy > T(1e-10) * std::sqrt(ss) * std::sqrt(yy)) {
      s_hist.push_back(s);
      y_hist.push_back(y);
      rho_hist.push_back(T(1) / sy);
      if (static_cast<int>(s_hist.size()) > cfg.memory) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }

    result.iterations = iter;
    LbfgsIterate<T> rec;
    rec.iteration = iter;
    rec.f_prev = f_prev;
    rec.f = f;
    rec.grad_inf = detail::inf_norm(g);
    rec.alpha = accepted_alpha;
    rec.dphi0 = dphi0;
    rec.dphi_alpha = accepted_dphi;
    on_iterate(rec, x);

    if (rec.grad_inf <= static_cast<T>(cfg.g_tol)) {
      result.stop = LbfgsStop::GradientTol;
      break;
    }
    const T denom = std::max({std::abs(f_prev), std::abs(f), T(1)});
    if (f_prev - f <= static_cast<T>(cfg.f_tol) * denom) {
      result.stop = LbfgsStop::FunctionTol;
      break;
    }
    if (iter == cfg.max_iterations) result.stop = LbfgsStop::MaxIterations;
  }

  result.final_f = f;
  return result;
}

}  // namespace mmpinn
