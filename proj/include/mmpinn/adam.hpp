#pragma once

#include <cmath>
#include <vector>

#include "mmpinn/common.hpp"

namespace mmpinn {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  bool decay = false;
  double decay_rate = 0.9;
  long decay_interval = 1000;
  long iterations = 2000;
};

inline void validate(const AdamConfig& c) {
  if (!(c.lr > 0.0)) throw ConfigError("adam: lr must be > 0");
  if (!(c.beta1 > 0.0 && c.beta1 < 1.0) || !(c.beta2 > 0.0 && c.beta2 < 1.0))
    throw ConfigError("adam: betas must lie in (0, 1)");
  if (c.eps < 0.0) throw ConfigError("adam: eps must be >= 0");
  if (c.decay && (!(c.decay_rate > 0.0) || c.decay_interval < 1))
    throw ConfigError("adam: decay_rate must be > 0 and decay_interval >= 1");
  if (c.iterations < 0) throw ConfigError("adam: iterations must be >= 0");
}

/// Adam with bias correction and optional step-wise exponential lr decay
/// (lr * rate^floor(iteration / interval)).
template <class T>
class Adam {
 public:
  Adam(std::size_t n, AdamConfig config) : cfg_(config), m_(n, T(0)), v_(n, T(0)) {
    validate(cfg_);
  }

  /// One update; `iteration` is the 0-based step index. Returns the
  /// effective learning rate. Throws DivergenceError on non-finite gradient.
  T step(std::vector<T>& params, const std::vector<T>& grad, long iteration) {
    if (params.size() != m_.size() || grad.size() != m_.size())
      throw ConfigError("adam: gradient length does not match parameter count");
    double lr_eff = cfg_.lr;
    if (cfg_.decay) lr_eff *= std::pow(cfg_.decay_rate, iteration / cfg_.decay_interval);
    const T b1 = static_cast<T>(cfg_.beta1), b2 = static_cast<T>(cfg_.beta2);
    const long t = iteration + 1;
    const T corr1 = T(1) - static_cast<T>(std::pow(cfg_.beta1, t));
    const T corr2 = T(1) - static_cast<T>(std::pow(cfg_.beta2, t));
    const T eps = static_cast<T>(cfg_.eps);
    const T lr = static_cast<T>(lr_eff);
    for (std::size_t i = 0; i < params.size(); ++i) {
      const T g = grad[i];
      if (!std::isfinite(static_cast<double>(g)))
        throw DivergenceError("adam: non-finite gradient entry", iteration);
      m_[i] = b1 * m_[i] + (T(1) - b1) * g;
      v_[i] = b2 * v_[i] + (T(1) - b2) * g * g;
      const T mhat = m_[i] / corr1;
      const T vhat = v_[i] / corr2;
      params[i] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
    return lr;
  }

  const AdamConfig& config() const { return cfg_; }

 private:
  AdamConfig cfg_;
  std::vector<T> m_, v_;
};

}  // namespace mmpinn
