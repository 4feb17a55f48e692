#pragma once

#include "autonorm/expr.hpp"
#include "autonorm/geometry.hpp"

#include <optional>
#include <vector>

namespace autonorm {

/// Parameters of the displacing Hamiltonian: ball radius r, number of factors
/// m, half-dimension n, translation length L per application and profile
/// transition width eps.
struct DisplacementSpec {
  double r = 1.0;
  int m = 1;
  int n = 1;
  double L = 3.0;
  double eps = 0.5;
  /// Permit L <= 2r; only meaningful for demonstrating the overlap failure.
  bool allow_short_translation = false;

  int dim() const { return 2 * n; }
  /// Half-length of the x_1 plateau: (m + 2) L + r.
  double tube_half_length() const { return (m + 2) * L + r; }
  /// Region where every cutoff is identically 1 and X_H = L d/dx_1.
  Box tube() const;
  /// Throws ConstructionError on invalid parameters.
  void validate() const;
};

/// DisplacementSpec with L = 3r and eps = 0.5.
DisplacementSpec default_displacement(double r, int m, int n);

/// step((v - a + eps)/eps) * step((b + eps - v)/eps): 1 on [a, b], 0 outside
/// [a - eps, b + eps], smooth and monotone on each shoulder.
Expr plateau(const Expr& v, double a, double b, double eps);

/// H_1(y_1) = L * y_1 * plateau(y_1; -r, r, eps). Slope exactly L on [-r, r].
Expr build_profile(const DisplacementSpec& spec);

/// H(z) = H_1(y_1) * plateau(x_1; tube) * prod_{i >= 2} plateau(x_i) plateau(y_i).
Expr build_displacement_hamiltonian(const DisplacementSpec& spec);

/// The time-1 map of H as a one-letter word tagged as the displacing generator.
DiffeoWord displacement_word(const Expr& H, int dim);

struct DisplacementReport {
  int samples = 0;
  int powers = 0;                       ///< images h^k(B) checked for k = 0..powers
  double max_translation_error = 0.0;   ///< max |h^k z - (z + k L e_1)|
  double max_error_h1 = 0.0;            ///< same, k = 1 only
  double min_separation = 0.0;          ///< min distance between distinct image clouds
  double separation_bound = 0.0;        ///< L - 2r
  double tolerance = 0.0;
  bool analytic_disjoint = false;       ///< L - 2r - 2 * max_translation_error > 0
  bool sampled_disjoint = false;        ///< min_separation >= L - 2r - tolerance and > 0
  std::optional<PhasePoint> overlap_witness;  ///< z in B(r) with h(z) in B(r)
  bool pass = false;
};

/// Sample points on and inside the sphere of radius r (deterministic).
std::vector<PhasePoint> ball_samples(double r, int n, int count);

DisplacementReport verify_displacement(const DiffeoWord& h, const DisplacementSpec& spec, int samples,
                                       const IntegratorConfig& cfg, double tolerance = 1e-3);

}  // namespace autonorm
