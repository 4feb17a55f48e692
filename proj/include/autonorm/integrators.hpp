#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace autonorm {

enum class Scheme { RungeKutta4, ImplicitMidpoint };

std::string to_string(Scheme s);
Scheme scheme_from_string(const std::string& name);

/// Fixed-step integration settings. A duration t is covered by
/// ceil(|t| / step) substeps, the last one shortened to land exactly on t.
struct IntegratorConfig {
  Scheme scheme = Scheme::RungeKutta4;
  double step = 1e-3;
  std::int64_t max_steps = 10'000'000;
};

class IntegrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Classical fourth-order Runge-Kutta step for an autonomous field.
template <typename Vector, typename Field>
Vector rk4_step(const Field& field, const Vector& z, double dt) {
  const Vector k1 = field(z);
  const Vector k2 = field(Vector(z + (0.5 * dt) * k1));
  const Vector k3 = field(Vector(z + (0.5 * dt) * k2));
  const Vector k4 = field(Vector(z + dt * k3));
  return z + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

/// Implicit midpoint z' = z + dt * X((z + z') / 2), solved by fixed-point
/// iteration (contractive for dt * Lip(X) < 1).
template <typename Vector, typename Field>
Vector implicit_midpoint_step(const Field& field, const Vector& z, double dt, int max_iterations = 100,
                              double tolerance = 1e-15) {
  Vector next = z + dt * field(z);
  for (int it = 0; it < max_iterations; ++it) {
    const Vector candidate = z + dt * field(Vector(0.5 * (z + next)));
    const double change = (candidate - next).template lpNorm<Eigen::Infinity>();
    next = candidate;
    if (change <= tolerance * (1.0 + next.template lpNorm<Eigen::Infinity>())) return next;
  }
  throw IntegrationError("implicit midpoint: fixed-point iteration did not converge");
}

/// Number of substeps used to cover |duration|, and the size of the last one.
struct StepPlan {
  std::int64_t count = 0;
  double last = 0.0;
};

inline StepPlan plan_steps(double duration, const IntegratorConfig& cfg) {
  if (!(cfg.step > 0.0)) throw IntegrationError("integrator step must be positive");
  if (!std::isfinite(duration)) throw IntegrationError("flow duration must be finite");
  const double span = std::abs(duration);
  if (span == 0.0) return {};
  const double ratio = span / cfg.step;
  if (ratio > static_cast<double>(cfg.max_steps)) {
    throw IntegrationError("step-count overflow: " + std::to_string(std::ceil(ratio)) + " steps exceed max_steps " +
                           std::to_string(cfg.max_steps));
  }
  // Guard against ratio landing a hair above an integer through rounding.
  auto count = static_cast<std::int64_t>(std::ceil(ratio * (1.0 - 1e-12)));
  if (count < 1) count = 1;
  const double last = span - static_cast<double>(count - 1) * cfg.step;
  return {count, last};
}

/// Integrate the autonomous `field` for `duration`, calling
/// `on_step(elapsed, state)` after each accepted substep.
template <typename Vector, typename Field, typename Observer>
Vector integrate(const Field& field, Vector z, double duration, const IntegratorConfig& cfg,
                 Observer&& on_step) {
  const StepPlan plan = plan_steps(duration, cfg);
  const double sign = duration < 0.0 ? -1.0 : 1.0;
  double elapsed = 0.0;
  for (std::int64_t k = 0; k < plan.count; ++k) {
    const double h = (k + 1 == plan.count ? plan.last : cfg.step);
    const double dt = sign * h;
    z = cfg.scheme == Scheme::RungeKutta4 ? rk4_step(field, z, dt) : implicit_midpoint_step(field, z, dt);
    elapsed += h;
    on_step(elapsed, static_cast<const Vector&>(z));
  }
  return z;
}

template <typename Vector, typename Field>
Vector integrate(const Field& field, Vector z, double duration, const IntegratorConfig& cfg) {
  return integrate(field, std::move(z), duration, cfg, [](double, const Vector&) {});
}

}  // namespace autonorm
