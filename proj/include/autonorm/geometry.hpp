#pragma once

#include "autonorm/expr.hpp"
#include "autonorm/integrators.hpp"
#include "autonorm/types.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace autonorm {

/// Hamiltonian vector field for omega = sum dx_i ^ dy_i with omega(X_F, .) = dF:
/// X_F = (dF/dy_1, -dF/dx_1, ..., dF/dy_n, -dF/dx_n).
Tangent vector_field(const Expr& F, const PhasePoint& z);

/// Matrix of omega in (x_1, y_1, ...) coordinates: omega(u, v) = u^T Omega v.
Jacobian symplectic_matrix(int n);

/// Generator tags carried by word letters, used to map numeric words back to
/// the abstract group.
inline constexpr int kDisplacingGenerator = 0;
inline constexpr int kUntagged = -1;
inline constexpr int kGluedGenerator = -2;

/// Time-`duration` flow of an autonomous Hamiltonian, with its certified
/// support box cached. Negative durations give the inverse map.
struct Letter {
  Expr hamiltonian;
  double duration = 1.0;
  int generator = kUntagged;  ///< 0 = h, i > 0 = a_i, kGluedGenerator = glued factor
  Box support;
};

/// Build a letter; throws ConstructionError unless the support is bounded.
Letter make_letter(const Expr& F, double duration, int dim, int generator = kUntagged);

/// A composable diffeomorphism: letters (w_1, ..., w_k) denote
/// w_1 o w_2 o ... o w_k, so the rightmost letter acts first.
class DiffeoWord {
 public:
  explicit DiffeoWord(int dim = 2) : dim_(dim) {}
  DiffeoWord(int dim, std::vector<Letter> letters);

  static DiffeoWord single(const Letter& l, int dim) { return DiffeoWord(dim, {l}); }

  int dim() const { return dim_; }
  const std::vector<Letter>& letters() const { return letters_; }
  std::size_t size() const { return letters_.size(); }
  bool empty() const { return letters_.empty(); }

  /// this o rhs
  friend DiffeoWord operator*(const DiffeoWord& lhs, const DiffeoWord& rhs);

 private:
  int dim_;
  std::vector<Letter> letters_;
};

DiffeoWord invert_word(const DiffeoWord& w);
/// by o w o by^{-1}
DiffeoWord conjugate_word(const DiffeoWord& w, const DiffeoWord& by);
/// w^k for any integer k.
DiffeoWord power(const DiffeoWord& w, int k);

using SubstepObserver = std::function<void(double dt, const PhasePoint& state)>;

/// Time-t flow of a letter's Hamiltonian. Points outside the support box are
/// returned unchanged without integration.
PhasePoint flow(const Letter& letter, double t, const PhasePoint& z, const IntegratorConfig& cfg,
                const SubstepObserver& on_substep = {});
PhasePoint flow(const Expr& F, double t, const PhasePoint& z, const IntegratorConfig& cfg);

/// Called once per letter with the point before and after the letter acts.
using LetterObserver = std::function<void(const Letter&, const PhasePoint& before, const PhasePoint& after)>;

PhasePoint evaluate_word(const DiffeoWord& w, const PhasePoint& z, const IntegratorConfig& cfg,
                         const LetterObserver& observer = {});

/// Image of z and the exact Jacobian of the discrete map, obtained by
/// integrating the variational equation dJ/dt = DX_F J with the same scheme
/// and steps as the state.
struct TangentPoint {
  PhasePoint point;
  Jacobian jacobian;
};

TangentPoint tangent_flow(const Letter& letter, double t, const PhasePoint& z, const IntegratorConfig& cfg);
TangentPoint tangent_word(const DiffeoWord& w, const PhasePoint& z, const IntegratorConfig& cfg);

/// Central finite-difference Jacobian of the map z -> w(z).
Jacobian jacobian(const DiffeoWord& w, const PhasePoint& z, double eps, const IntegratorConfig& cfg);

/// Same, for an arbitrary map; used for non-Hamiltonian fixtures.
Jacobian jacobian(const std::function<PhasePoint(const PhasePoint&)>& map, const PhasePoint& z, double eps);

struct SymplecticResidual {
  double form = 0.0;                  ///< max |J^T Omega J - Omega|
  std::optional<double> determinant;  ///< |det J - 1|, n = 1 only
};

SymplecticResidual symplectic_residual(const Jacobian& J);
SymplecticResidual symplectic_residual(const DiffeoWord& w, const PhasePoint& z, double eps,
                                       const IntegratorConfig& cfg);

/// Flow for time t of the pushed-forward field V(p) = Dpsi(q) X_F(q),
/// q = psi^{-1}(p). For symplectic psi this is the Hamiltonian field of
/// F o psi^{-1}, so the result should match psi o phi_F^t o psi^{-1}.
PhasePoint pushforward_flow(const DiffeoWord& psi, const Expr& F, double t, const PhasePoint& z,
                            const IntegratorConfig& outer, const IntegratorConfig& inner, double eps);

}  // namespace autonorm
