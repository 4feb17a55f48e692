#pragma once

#include "autonorm/displacement.hpp"
#include "autonorm/expr.hpp"
#include "autonorm/geometry.hpp"
#include "autonorm/word_algebra.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace autonorm {

/// How a conjugate h^k a h^-k acquires its Hamiltonian.
enum class GlueConvention {
  /// F o h^-k: the Hamiltonian of psi a psi^-1 is F o psi^-1.
  PushForward,
  /// F o h^k, the literal reading of F_1 o h + F_2 o h^2 + ...
  PullBack,
};

/// G(z) = sum_i F_i(z - k_i L e_1) with k_i = i - m - 1 (PushForward) or the
/// mirrored shift (PullBack). Throws ConstructionError if the shifted support
/// boxes are not pairwise disjoint.
Expr glued_hamiltonian(std::span<const Expr> factors, const DisplacementSpec& spec,
                       GlueConvention convention = GlueConvention::PushForward);

/// An autonomous factor together with its autonomy witness: a single
/// Hamiltonian, in closed form when `hamiltonian` is set.
struct AutonomousFactor {
  std::string name;
  DiffeoWord word;
  std::string description;
  std::optional<Expr> hamiltonian;
};

struct PlanOptions {
  int n = 1;
  std::optional<double> L;        ///< absolute translation length
  std::optional<double> L_over_r; ///< translation length as a multiple of r
  double eps = 0.5;
  bool allow_short_translation = false;
  double radius_margin = 0.1;
};

struct FactorizationPlan {
  std::vector<Expr> inputs;
  std::vector<Box> input_supports;
  DisplacementSpec spec;
  Expr H;                       ///< displacing Hamiltonian
  std::vector<Letter> a;        ///< time-1 flows of the inputs, tagged 1..m
  DiffeoWord f;                 ///< a_1 o ... o a_m
  DiffeoWord h;
  DiffeoWord g;
  DiffeoWord b;                 ///< prod_i h^{k_i} a_i h^{-k_i} as a word
  Expr G;                       ///< glued Hamiltonian
  std::vector<Box> glued_supports;
  AutonomousFactor A1;          ///< g h g^-1, Hamiltonian H o g^-1
  AutonomousFactor A2;          ///< h^-1, Hamiltonian -H
  AutonomousFactor A3;          ///< time-1 flow of G

  int m() const { return static_cast<int>(inputs.size()); }
  int dim() const { return spec.dim(); }
  /// A1 o A2 o A3 as one word.
  DiffeoWord product() const { return A1.word * A2.word * A3.word; }
};

/// Map an abstract word to a numeric one: a_i -> a[i-1], h -> h_letter.
DiffeoWord instantiate(const GroupWord& w, std::span<const Letter> a, const Letter& h_letter, int dim);

/// Map a numeric word back to the abstract group; glued letters become
/// `glued`. Throws std::invalid_argument on untagged letters.
GroupWord abstract_word(const DiffeoWord& w, const GroupWord& glued);

/// Smallest origin-centred radius containing every box, plus `margin`.
double enclosing_radius(std::span<const Box> boxes, double margin);

FactorizationPlan plan_factorization(std::span<const Expr> factors, const PlanOptions& options);

/// Rebuild h, g, b, A1 and A2 around a different displacing Hamiltonian.
/// The new H must agree with the old one on the tube.
FactorizationPlan with_displacing_hamiltonian(const FactorizationPlan& plan, const Expr& H);

/// A1's Hamiltonian H o g^-1 evaluated at z.
double a1_hamiltonian(const FactorizationPlan& plan, const PhasePoint& z, const IntegratorConfig& cfg);

struct VerifyOptions {
  int samples = 200;
  std::uint64_t seed = 1;
  double tolerance = 1e-3;
  int glued_samples = 50;
  double glued_tolerance = 1e-4;
  int deep_check_points = 0;  ///< pushforward check of A1; expensive
  double deep_tolerance = 1e-4;
};

struct FactorizationReport {
  int samples = 0;
  double max_error = 0.0;
  double mean_error = 0.0;
  double tolerance = 0.0;
  long long h_evaluations = 0;
  long long tube_violations = 0;
  bool composition_pass = false;

  int glued_samples = 0;
  double glued_max_error = 0.0;            ///< flow(G) vs word b
  double glued_alternative_max_error = 0.0;  ///< flow(G_pullback) vs word b
  double glued_tolerance = 0.0;
  bool glued_pass = false;
  bool alternative_rejected = false;

  double a1_witness_drift = 0.0;  ///< max |H(g^-1 A1 z) - H(g^-1 z)|
  bool symbolic_coherence = false;
  bool identity_holds = false;

  int deep_check_points = 0;
  std::optional<double> deep_check_max_error;

  bool pass = false;
};

/// Seeded uniform double in [0, 1) built from the top 53 bits.
double unit_uniform(std::uint64_t bits);

/// Evaluation points: a deterministic grid over B(r) and seeded uniform points
/// in the part of the tube whose h-orbits stay on the tube.
std::vector<PhasePoint> composition_samples(const DisplacementSpec& spec, int samples, std::uint64_t seed);

FactorizationReport verify_factorization(const FactorizationPlan& plan, const VerifyOptions& options,
                                         const IntegratorConfig& cfg);

}  // namespace autonorm
