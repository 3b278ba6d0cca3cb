#pragma once

#include <array>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "mmpinn/common.hpp"
#include "mmpinn/jet.hpp"

namespace mmpinn {

enum class BenchmarkId {
  HeatLargeGradient,
  PoissonMultifreq,
  HelmholtzHighfreq,
  KleinGordon,
  HeatVaryingFreq,
  PoissonGaussianSpike,
};

enum class ConditionKind { DirichletBoundary, InitialValue, InitialTimeDerivative };

struct Condition {
  ConditionKind kind;
};

/// One benchmark: box domain, closed-form exact solution, analytic source
/// term, residual operator, condition set. The source terms are hand-derived
/// from the exact solutions and gated by a finite-difference oracle in the
/// test suite.
struct PdeProblem {
  BenchmarkId id;
  std::string name;
  int dim = 0;
  std::array<double, 2> lo{}, hi{};
  bool has_time = false;
  int time_axis = -1;
  std::map<std::string, double> params;
  std::vector<Condition> conditions;

  // Residual operator r = sum_k c1[k]*u_k + sum_k c2[k]*u_kk
  //                       + lin*u + pow_coef*u^pow_k - f(x).
  std::array<double, 2> c1{}, c2{};
  double lin = 0.0;
  double pow_coef = 0.0;
  int pow_k = 0;

  double param(const std::string& key) const {
    auto it = params.find(key);
    if (it == params.end())
      throw ConfigError("benchmark " + name + " has no parameter '" + key + "'");
    return it->second;
  }

  double exact(const double* x) const;
  double source(const double* x) const;
  /// Closed-form value and first/diagonal-second derivatives of the exact
  /// solution (slots beyond dim stay zero).
  Jet<double, 2> exact_jet(const double* x) const;

  double condition_target(std::size_t cond_index, const double* x) const;

  template <class T, int D>
  T residual(const Jet<T, D>& jet, const T* x) const {
    static_assert(D >= 1);
    T r = T(0);
    for (int k = 0; k < dim; ++k)
      r += static_cast<T>(c1[k]) * jet.d1[k] + static_cast<T>(c2[k]) * jet.d2[k];
    if (lin != 0.0) r += static_cast<T>(lin) * jet.v;
    if (pow_coef != 0.0) r += static_cast<T>(pow_coef) * ipow(jet.v, pow_k);
    double xd[2];
    for (int k = 0; k < dim; ++k) xd[k] = static_cast<double>(x[k]);
    return r - static_cast<T>(source(xd));
  }

  /// d(residual)/d(jet fields), scaled; the seed for reverse accumulation.
  template <class T, int D>
  Jet<T, D> residual_adjoint(const Jet<T, D>& jet, T scale) const {
    Jet<T, D> adj;
    T dv = static_cast<T>(lin);
    if (pow_coef != 0.0)
      dv += static_cast<T>(pow_coef) * static_cast<T>(pow_k) * ipow(jet.v, pow_k - 1);
    adj.v = scale * dv;
    for (int k = 0; k < dim; ++k) {
      adj.d1[k] = scale * static_cast<T>(c1[k]);
      adj.d2[k] = scale * static_cast<T>(c2[k]);
    }
    return adj;
  }

  template <class T, int D>
  T condition_residual(std::size_t cond_index, const Jet<T, D>& jet, const T* x) const {
    check_on_locus(cond_index, x);
    const Condition& c = conditions.at(cond_index);
    if (c.kind == ConditionKind::InitialTimeDerivative) return jet.d1[time_axis];
    double xd[2];
    for (int k = 0; k < dim; ++k) xd[k] = static_cast<double>(x[k]);
    return jet.v - static_cast<T>(condition_target(cond_index, xd));
  }

  template <class T, int D>
  Jet<T, D> condition_adjoint(std::size_t cond_index, T scale) const {
    Jet<T, D> adj;
    if (conditions.at(cond_index).kind == ConditionKind::InitialTimeDerivative)
      adj.d1[time_axis] = scale;
    else
      adj.v = scale;
    return adj;
  }

  template <class T>
  void check_on_locus(std::size_t cond_index, const T* x) const {
    const Condition& c = conditions.at(cond_index);
    const double tol = 1e-9;
    if (c.kind == ConditionKind::DirichletBoundary) {
      for (int k = 0; k < dim; ++k) {
        if (has_time && k == time_axis) continue;
        double v = static_cast<double>(x[k]);
        if (std::abs(v - lo[k]) <= tol * span(k) || std::abs(v - hi[k]) <= tol * span(k))
          return;
      }
      throw ConfigError("condition_residual: point is not on the spatial boundary of " + name);
    }
    double t = static_cast<double>(x[time_axis]);
    if (std::abs(t - lo[time_axis]) > tol * span(time_axis))
      throw ConfigError("condition_residual: point is not on the initial slice of " + name);
  }

  double span(int k) const { return hi[k] - lo[k]; }

 private:
  template <class T>
  static T ipow(T base, int e) {
    T r = T(1);
    for (int i = 0; i < e; ++i) r *= base;
    return r;
  }
};

inline const std::vector<std::string>& benchmark_ids() {
  static const std::vector<std::string> ids = {
      "heat-large-gradient", "poisson-multifreq",  "helmholtz-highfreq",
      "klein-gordon",        "heat-varying-freq",  "poisson-gaussian-spike",
  };
  return ids;
}

/// Builds a benchmark with its default model constants; `overrides` replaces
/// individual constants. Unknown names are rejected.
PdeProblem make_problem(const std::string& id,
                        const std::map<std::string, double>& overrides = {});

// ---------------------------------------------------------------------------

namespace detail {

inline constexpr double kPi = 3.141592653589793238462643383279502884;

inline PdeProblem base_problem(BenchmarkId id) {
  PdeProblem p;
  p.id = id;
  switch (id) {
    case BenchmarkId::HeatLargeGradient:
      p.name = "heat-large-gradient";
      p.dim = 2;
      p.lo = {-1.0, 0.0};
      p.hi = {1.0, 1.0};
      p.has_time = true;
      p.time_axis = 1;
      p.params = {{"epsilon", 0.3}};
      p.conditions = {{ConditionKind::InitialValue}, {ConditionKind::DirichletBoundary}};
      p.c1 = {0.0, 1.0};   // u_t
      p.c2 = {-1.0, 0.0};  // -u_xx
      break;
    case BenchmarkId::PoissonMultifreq:
      p.name = "poisson-multifreq";
      p.dim = 1;
      p.lo = {0.0, 0.0};
      p.hi = {1.0, 0.0};
      p.params = {{"a1", 4.0}, {"a2", 150.0}};
      p.conditions = {{ConditionKind::DirichletBoundary}};
      p.c2 = {1.0, 0.0};  // u_xx
      break;
    case BenchmarkId::HelmholtzHighfreq:
      p.name = "helmholtz-highfreq";
      p.dim = 2;
      p.lo = {-1.0, -1.0};
      p.hi = {1.0, 1.0};
      p.params = {{"k", 1.0}, {"a1", 1.0}, {"a2", 8.0}};
      p.conditions = {{ConditionKind::DirichletBoundary}};
      p.c2 = {1.0, 1.0};
      break;
    case BenchmarkId::KleinGordon:
      p.name = "klein-gordon";
      p.dim = 2;
      p.lo = {0.0, 0.0};
      p.hi = {1.0, 1.0};
      p.has_time = true;
      p.time_axis = 1;
      p.params = {{"alpha", -1.0}, {"beta", 0.0}, {"gamma", 1.0}, {"k", 3.0}, {"a", 5.0}};
      p.conditions = {{ConditionKind::InitialValue},
                      {ConditionKind::InitialTimeDerivative},
                      {ConditionKind::DirichletBoundary}};
      break;
    case BenchmarkId::HeatVaryingFreq:
      p.name = "heat-varying-freq";
      p.dim = 2;
      p.lo = {-1.0, 0.0};
      p.hi = {1.0, 1.0};
      p.has_time = true;
      p.time_axis = 1;
      p.conditions = {{ConditionKind::InitialValue}, {ConditionKind::DirichletBoundary}};
      p.c1 = {0.0, 1.0};
      p.c2 = {-1.0, 0.0};
      break;
    case BenchmarkId::PoissonGaussianSpike:
      p.name = "poisson-gaussian-spike";
      p.dim = 2;
      p.lo = {0.0, 0.0};
      p.hi = {1.0, 1.0};
      p.params = {{"h", 0.02}};
      p.conditions = {{ConditionKind::DirichletBoundary}};
      p.c2 = {1.0, 1.0};
      break;
  }
  return p;
}

}  // namespace detail

inline double PdeProblem::exact(const double* x) const {
  using detail::kPi;
  switch (id) {
    case BenchmarkId::HeatLargeGradient: {
      double eps = param("epsilon");
      double s = 2.0 * x[1] - 1.0;
      return (1.0 - x[0] * x[0]) * std::exp(1.0 / (s * s + eps));
    }
    case BenchmarkId::PoissonMultifreq: {
      double a1 = param("a1"), a2 = param("a2");
      return std::sin(a1 * kPi * x[0]) + 0.1 * std::sin(a2 * kPi * x[0]);
    }
    case BenchmarkId::HelmholtzHighfreq: {
      double a1 = param("a1"), a2 = param("a2");
      return std::sin(a1 * kPi * x[0]) * std::sin(a2 * kPi * x[1]);
    }
    case BenchmarkId::KleinGordon: {
      double a = param("a");
      double xt = x[0] * x[1];
      return x[0] * std::cos(a * kPi * x[1]) + xt * xt * xt;
    }
    case BenchmarkId::HeatVaryingFreq: {
      double w = 20.0 * kPi / (1.0 + 9.0 * x[0] * x[0]);
      return std::sin(w * x[1]);
    }
    case BenchmarkId::PoissonGaussianSpike: {
      double h = param("h");
      double dx = x[0] - 0.5;
      return 1.0 + (1000.0 + x[1] * x[1]) * std::exp(-dx * dx / (2.0 * h * h));
    }
  }
  return 0.0;
}

inline Jet<double, 2> PdeProblem::exact_jet(const double* x) const {
  using detail::kPi;
  Jet<double, 2> j;
  switch (id) {
    case BenchmarkId::HeatLargeGradient: {
      double eps = param("epsilon");
      double s = 2.0 * x[1] - 1.0;
      double g = s * s + eps;
      double E = std::exp(1.0 / g);
      double q = 1.0 - x[0] * x[0];
      j.v = q * E;
      j.d1[0] = -2.0 * x[0] * E;
      j.d2[0] = -2.0 * E;
      double dEdt = -4.0 * s / (g * g) * E;
      j.d1[1] = q * dEdt;
      j.d2[1] = q * E * (16.0 * s * s / (g * g * g * g) - 8.0 / (g * g) +
                         32.0 * s * s / (g * g * g));
      break;
    }
    case BenchmarkId::PoissonMultifreq: {
      double a1 = param("a1") * kPi, a2 = param("a2") * kPi;
      j.v = std::sin(a1 * x[0]) + 0.1 * std::sin(a2 * x[0]);
      j.d1[0] = a1 * std::cos(a1 * x[0]) + 0.1 * a2 * std::cos(a2 * x[0]);
      j.d2[0] = -a1 * a1 * std::sin(a1 * x[0]) - 0.1 * a2 * a2 * std::sin(a2 * x[0]);
      break;
    }
    case BenchmarkId::HelmholtzHighfreq: {
      double a1 = param("a1") * kPi, a2 = param("a2") * kPi;
      double sx = std::sin(a1 * x[0]), cx = std::cos(a1 * x[0]);
      double sy = std::sin(a2 * x[1]), cy = std::cos(a2 * x[1]);
      j.v = sx * sy;
      j.d1[0] = a1 * cx * sy;
      j.d2[0] = -a1 * a1 * sx * sy;
      j.d1[1] = a2 * sx * cy;
      j.d2[1] = -a2 * a2 * sx * sy;
      break;
    }
    case BenchmarkId::KleinGordon: {
      double a = param("a") * kPi;
      double c = std::cos(a * x[1]), s = std::sin(a * x[1]);
      double x2 = x[0] * x[0], t2 = x[1] * x[1];
      j.v = x[0] * c + x2 * x[0] * t2 * x[1];
      j.d1[0] = c + 3.0 * x2 * t2 * x[1];
      j.d2[0] = 6.0 * x[0] * t2 * x[1];
      j.d1[1] = -a * x[0] * s + 3.0 * x2 * x[0] * t2;
      j.d2[1] = -a * a * x[0] * c + 6.0 * x2 * x[0] * x[1];
      break;
    }
    case BenchmarkId::HeatVaryingFreq: {
      double v = 1.0 + 9.0 * x[0] * x[0];
      double w = 20.0 * kPi / v;
      double wp = -360.0 * kPi * x[0] / (v * v);
      double wpp = -360.0 * kPi * (1.0 - 27.0 * x[0] * x[0]) / (v * v * v);
      double th = w * x[1];
      double sn = std::sin(th), cn = std::cos(th);
      j.v = sn;
      j.d1[0] = x[1] * wp * cn;
      j.d2[0] = x[1] * wpp * cn - x[1] * x[1] * wp * wp * sn;
      j.d1[1] = w * cn;
      j.d2[1] = -w * w * sn;
      break;
    }
    case BenchmarkId::PoissonGaussianSpike: {
      double h = param("h");
      double dx = x[0] - 0.5;
      double G = std::exp(-dx * dx / (2.0 * h * h));
      double a = 1000.0 + x[1] * x[1];
      j.v = 1.0 + a * G;
      j.d1[0] = -a * dx / (h * h) * G;
      j.d2[0] = a * G * (dx * dx - h * h) / (h * h * h * h);
      j.d1[1] = 2.0 * x[1] * G;
      j.d2[1] = 2.0 * G;
      break;
    }
  }
  return j;
}

/// Analytic source obtained by applying the PDE operator to the exact
/// solution. For poisson-multifreq with the default frequencies this equals
/// the printed closed form -16*pi^2*sin(4*pi*x) - 2250*pi^2*sin(150*pi*x).
inline double PdeProblem::source(const double* x) const {
  Jet<double, 2> j = exact_jet(x);
  double f = 0.0;
  for (int k = 0; k < dim; ++k) f += c1[k] * j.d1[k] + c2[k] * j.d2[k];
  if (lin != 0.0) f += lin * j.v;
  if (pow_coef != 0.0) {
    double u = j.v, acc = 1.0;
    for (int i = 0; i < pow_k; ++i) acc *= u;
    f += pow_coef * acc;
  }
  return f;
}

inline double PdeProblem::condition_target(std::size_t cond_index, const double* x) const {
  using detail::kPi;
  const Condition& c = conditions.at(cond_index);
  if (c.kind == ConditionKind::InitialTimeDerivative) return 0.0;
  switch (id) {
    case BenchmarkId::HeatLargeGradient:
      if (c.kind == ConditionKind::InitialValue) {
        double eps = param("epsilon");
        return (1.0 - x[0] * x[0]) * std::exp(1.0 / (1.0 + eps));
      }
      return 0.0;  // u(+-1, t) = 0
    case BenchmarkId::PoissonMultifreq:
      return 0.0;  // u(0) = u(1) = 0
    case BenchmarkId::HelmholtzHighfreq:
      return exact(x);
    case BenchmarkId::KleinGordon:
      if (c.kind == ConditionKind::InitialValue) return x[0];
      return exact(x);
    case BenchmarkId::HeatVaryingFreq:
      if (c.kind == ConditionKind::InitialValue) return 0.0;
      return std::sin(2.0 * kPi * x[1]);  // u(+-1, t) = sin(2*pi*t)
    case BenchmarkId::PoissonGaussianSpike:
      return exact(x);
  }
  return 0.0;
}

inline PdeProblem make_problem(const std::string& id,
                               const std::map<std::string, double>& overrides) {
  BenchmarkId bid;
  if (id == "heat-large-gradient") bid = BenchmarkId::HeatLargeGradient;
  else if (id == "poisson-multifreq") bid = BenchmarkId::PoissonMultifreq;
  else if (id == "helmholtz-highfreq") bid = BenchmarkId::HelmholtzHighfreq;
  else if (id == "klein-gordon") bid = BenchmarkId::KleinGordon;
  else if (id == "heat-varying-freq") bid = BenchmarkId::HeatVaryingFreq;
  else if (id == "poisson-gaussian-spike") bid = BenchmarkId::PoissonGaussianSpike;
  else throw ConfigError("unknown benchmark '" + id + "'");

  PdeProblem p = detail::base_problem(bid);
  for (const auto& [key, value] : overrides) {
    if (p.params.find(key) == p.params.end())
      throw ConfigError("benchmark " + id + " has no parameter '" + key + "'");
    p.params[key] = value;
  }
  if (bid == BenchmarkId::HeatLargeGradient && p.param("epsilon") <= 0.0)
    throw ConfigError("heat-large-gradient requires epsilon > 0");
  if (bid == BenchmarkId::PoissonGaussianSpike && p.param("h") <= 0.0)
    throw ConfigError("poisson-gaussian-spike requires h > 0");
  if (bid == BenchmarkId::KleinGordon) {
    p.c2 = {p.param("alpha"), 1.0};  // u_tt + alpha*u_xx
    p.lin = p.param("beta");
    p.pow_coef = p.param("gamma");
    double kf = p.param("k");
    p.pow_k = static_cast<int>(kf);
    if (p.pow_k < 1 || static_cast<double>(p.pow_k) != kf)
      throw ConfigError("klein-gordon power k must be a positive integer");
  }
  if (bid == BenchmarkId::HelmholtzHighfreq) {
    double k = p.param("k");
    p.lin = k * k;
  }
  return p;
}

}  // namespace mmpinn
