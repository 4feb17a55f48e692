#pragma once

#include <cmath>

namespace autonorm::smooth {

// The C^infinity building blocks of the expression language and their first
// two derivatives in closed form. Every function returns exactly 0 outside
// its support; no tolerance-based clipping.

template <typename Scalar>
Scalar sigma(Scalar t) {
  return t > Scalar(0) ? std::exp(Scalar(-1) / t) : Scalar(0);
}

template <typename Scalar>
Scalar sigma_d1(Scalar t) {
  return t > Scalar(0) ? sigma(t) / (t * t) : Scalar(0);
}

template <typename Scalar>
Scalar sigma_d2(Scalar t) {
  if (!(t > Scalar(0))) return Scalar(0);
  const Scalar inv = Scalar(1) / t;
  return sigma(t) * (inv * inv * inv * inv - Scalar(2) * inv * inv * inv);
}

/// bump(t) = exp(1 - 1/(1 - t^2)) on |t| < 1, else 0; bump(0) = 1.
template <typename Scalar>
Scalar bump(Scalar t) {
  if (!(std::abs(t) < Scalar(1))) return Scalar(0);
  return std::exp(Scalar(1) - Scalar(1) / (Scalar(1) - t * t));
}

template <typename Scalar>
Scalar bump_d1(Scalar t) {
  if (!(std::abs(t) < Scalar(1))) return Scalar(0);
  const Scalar s = Scalar(1) - t * t;
  return bump(t) * (Scalar(-2) * t) / (s * s);
}

template <typename Scalar>
Scalar bump_d2(Scalar t) {
  if (!(std::abs(t) < Scalar(1))) return Scalar(0);
  const Scalar s = Scalar(1) - t * t;
  const Scalar s2 = s * s;
  return bump(t) * (Scalar(4) * t * t / (s2 * s2) - Scalar(2) / s2 - Scalar(8) * t * t / (s2 * s));
}

/// step(t) = sigma(t) / (sigma(t) + sigma(1 - t)): 0 for t <= 0, 1 for t >= 1.
template <typename Scalar>
Scalar step(Scalar t) {
  const Scalar p = sigma(t);
  return p / (p + sigma(Scalar(1) - t));
}

template <typename Scalar>
Scalar step_d1(Scalar t) {
  const Scalar u = Scalar(1) - t;
  const Scalar q = sigma(t) + sigma(u);
  return (sigma_d1(t) * sigma(u) + sigma(t) * sigma_d1(u)) / (q * q);
}

template <typename Scalar>
Scalar step_d2(Scalar t) {
  const Scalar u = Scalar(1) - t;
  const Scalar q = sigma(t) + sigma(u);
  const Scalar dq = sigma_d1(t) - sigma_d1(u);
  const Scalar num = sigma_d1(t) * sigma(u) + sigma(t) * sigma_d1(u);
  const Scalar dnum = sigma_d2(t) * sigma(u) - sigma(t) * sigma_d2(u);
  return (dnum * q - Scalar(2) * num * dq) / (q * q * q);
}

/// Value and first derivative of step in one pass.
template <typename Scalar>
Scalar step_with_d1(Scalar t, Scalar& d1) {
  const Scalar u = Scalar(1) - t;
  const Scalar p = sigma(t);
  const Scalar q = sigma(u);
  const Scalar dp = p > Scalar(0) ? p / (t * t) : Scalar(0);
  const Scalar dq = q > Scalar(0) ? q / (u * u) : Scalar(0);
  const Scalar s = p + q;
  d1 = (dp * q + p * dq) / (s * s);
  return p / s;
}

/// Value and first derivative of bump in one pass.
template <typename Scalar>
Scalar bump_with_d1(Scalar t, Scalar& d1) {
  if (!(std::abs(t) < Scalar(1))) {
    d1 = Scalar(0);
    return Scalar(0);
  }
  const Scalar s = Scalar(1) - t * t;
  const Scalar b = std::exp(Scalar(1) - Scalar(1) / s);
  d1 = b * (Scalar(-2) * t) / (s * s);
  return b;
}

}  // namespace autonorm::smooth
