#pragma once

#include <array>
#include <cmath>

#include "mmpinn/common.hpp"

namespace mmpinn {

/// Value plus exact first and diagonal-second derivatives with respect to the
/// D input coordinates, all at one evaluation point. Mixed second derivatives
/// are not carried; no supported residual operator needs them.
template <class T, int D>
struct Jet {
  T v{};
  std::array<T, D> d1{};
  std::array<T, D> d2{};

  bool finite() const {
    if (!std::isfinite(static_cast<double>(v))) return false;
    for (int k = 0; k < D; ++k)
      if (!std::isfinite(static_cast<double>(d1[k])) ||
          !std::isfinite(static_cast<double>(d2[k])))
        return false;
    return true;
  }
};

/// Seeds coordinate k of an input point as a jet (d x_k / d x_k = 1).
template <class T, int D>
Jet<T, D> seed_jet(T value, int coord) {
  Jet<T, D> j;
  j.v = value;
  j.d1[coord] = T(1);
  return j;
}

template <class T, int D>
Jet<T, D> operator+(const Jet<T, D>& a, const Jet<T, D>& b) {
  Jet<T, D> r;
  r.v = a.v + b.v;
  for (int k = 0; k < D; ++k) {
    r.d1[k] = a.d1[k] + b.d1[k];
    r.d2[k] = a.d2[k] + b.d2[k];
  }
  return r;
}

template <class T, int D>
Jet<T, D> operator-(const Jet<T, D>& a, const Jet<T, D>& b) {
  Jet<T, D> r;
  r.v = a.v - b.v;
  for (int k = 0; k < D; ++k) {
    r.d1[k] = a.d1[k] - b.d1[k];
    r.d2[k] = a.d2[k] - b.d2[k];
  }
  return r;
}

template <class T, int D>
Jet<T, D> operator*(T c, const Jet<T, D>& a) {
  Jet<T, D> r;
  r.v = c * a.v;
  for (int k = 0; k < D; ++k) {
    r.d1[k] = c * a.d1[k];
    r.d2[k] = c * a.d2[k];
  }
  return r;
}

/// Product rule; diagonal second derivatives stay closed under products.
template <class T, int D>
Jet<T, D> operator*(const Jet<T, D>& a, const Jet<T, D>& b) {
  Jet<T, D> r;
  r.v = a.v * b.v;
  for (int k = 0; k < D; ++k) {
    r.d1[k] = a.d1[k] * b.v + a.v * b.d1[k];
    r.d2[k] = a.d2[k] * b.v + T(2) * a.d1[k] * b.d1[k] + a.v * b.d2[k];
  }
  return r;
}

/// Chain rule for a scalar map with known first/second derivative at a.v.
template <class T, int D>
Jet<T, D> apply_chain(const Jet<T, D>& a, T f, T df, T ddf) {
  Jet<T, D> r;
  r.v = f;
  for (int k = 0; k < D; ++k) {
    r.d1[k] = df * a.d1[k];
    r.d2[k] = df * a.d2[k] + ddf * a.d1[k] * a.d1[k];
  }
  return r;
}

template <class T, int D>
Jet<T, D> tanh(const Jet<T, D>& a) {
  T t = tanh_activation(a.v);
  T s = T(1) - t * t;
  return apply_chain(a, t, s, T(-2) * t * s);
}

template <class T, int D>
Jet<T, D> sin(const Jet<T, D>& a) {
  T s = std::sin(a.v), c = std::cos(a.v);
  return apply_chain(a, s, c, -s);
}

template <class T, int D>
Jet<T, D> cos(const Jet<T, D>& a) {
  T s = std::sin(a.v), c = std::cos(a.v);
  return apply_chain(a, c, -s, -c);
}

template <class T, int D>
Jet<T, D> exp(const Jet<T, D>& a) {
  T e = std::exp(a.v);
  return apply_chain(a, e, e, e);
}

/// Integer power, n >= 0.
template <class T, int D>
Jet<T, D> pow_int(const Jet<T, D>& a, int n) {
  Jet<T, D> r;
  r.v = T(1);
  Jet<T, D> base = a;
  int e = n;
  while (e > 0) {
    if (e & 1) r = r * base;
    base = base * base;
    e >>= 1;
  }
  return r;
}

}  // namespace mmpinn
