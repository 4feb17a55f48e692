#include "autonorm/geometry.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>

namespace autonorm {

std::string to_string(Scheme s) {
  return s == Scheme::RungeKutta4 ? "rk4" : "implicit_midpoint";
}

Scheme scheme_from_string(const std::string& name) {
  if (name == "rk4") return Scheme::RungeKutta4;
  if (name == "implicit_midpoint") return Scheme::ImplicitMidpoint;
  throw std::invalid_argument("unknown integrator scheme '" + name + "'");
}

Tangent vector_field(const Expr& F, const PhasePoint& z) {
  const auto dim = static_cast<int>(z.size());
  if (dim % 2 != 0) throw std::invalid_argument("vector_field: phase point must have even dimension");
  if (F.arity() > dim) throw std::invalid_argument("vector_field: Hamiltonian uses coordinates beyond the point");
  Tangent grad(dim);
  double value = 0.0;
  detail::gradient_tape(F.tape(), z.data(), &value, grad.data(), dim);
  Tangent x(dim);
  for (int i = 0; i < dim; i += 2) {
    x[i] = grad[i + 1];
    x[i + 1] = -grad[i];
  }
  return x;
}

Jacobian symplectic_matrix(int n) {
  Jacobian omega = Jacobian::Zero(2 * n, 2 * n);
  for (int i = 0; i < n; ++i) {
    omega(2 * i, 2 * i + 1) = 1.0;
    omega(2 * i + 1, 2 * i) = -1.0;
  }
  return omega;
}

Letter make_letter(const Expr& F, double duration, int dim, int generator) {
  if (!std::isfinite(duration)) throw ConstructionError("letter duration must be finite");
  Box support = support_bound(F, dim);
  if (!is_bounded(support)) {
    throw ConstructionError("Hamiltonian '" + print(F) + "' has no certified bounded support");
  }
  return Letter{F, duration, generator, std::move(support)};
}

DiffeoWord::DiffeoWord(int dim, std::vector<Letter> letters) : dim_(dim), letters_(std::move(letters)) {
  for (const Letter& l : letters_) {
    if (l.support.dim() != dim_) throw std::invalid_argument("DiffeoWord: letter dimension mismatch");
  }
}

DiffeoWord operator*(const DiffeoWord& lhs, const DiffeoWord& rhs) {
  if (lhs.dim_ != rhs.dim_) throw std::invalid_argument("DiffeoWord: composing words of different dimension");
  std::vector<Letter> letters = lhs.letters_;
  letters.insert(letters.end(), rhs.letters_.begin(), rhs.letters_.end());
  return DiffeoWord(lhs.dim_, std::move(letters));
}

DiffeoWord invert_word(const DiffeoWord& w) {
  std::vector<Letter> letters(w.letters().rbegin(), w.letters().rend());
  for (Letter& l : letters) l.duration = -l.duration;
  return DiffeoWord(w.dim(), std::move(letters));
}

DiffeoWord conjugate_word(const DiffeoWord& w, const DiffeoWord& by) { return by * w * invert_word(by); }

DiffeoWord power(const DiffeoWord& w, int k) {
  const DiffeoWord base = k < 0 ? invert_word(w) : w;
  DiffeoWord out(w.dim());
  for (int i = 0; i < std::abs(k); ++i) out = out * base;
  return out;
}

PhasePoint flow(const Letter& letter, double t, const PhasePoint& z, const IntegratorConfig& cfg,
                const SubstepObserver& on_substep) {
  if (z.size() != letter.support.dim()) throw std::invalid_argument("flow: dimension mismatch");
  if (t == 0.0 || !box_contains(letter.support, z)) {
    // Still validate the duration so errors do not depend on where z lies.
    plan_steps(t, cfg);
    return z;
  }
  const auto field = [&F = letter.hamiltonian](const PhasePoint& p) -> PhasePoint { return vector_field(F, p); };
  if (on_substep) {
    double previous = 0.0;
    return integrate(field, z, t, cfg, [&](double elapsed, const PhasePoint& state) {
      on_substep(elapsed - previous, state);
      previous = elapsed;
    });
  }
  return integrate(field, z, t, cfg);
}

PhasePoint flow(const Expr& F, double t, const PhasePoint& z, const IntegratorConfig& cfg) {
  return flow(make_letter(F, t, static_cast<int>(z.size())), t, z, cfg);
}

PhasePoint evaluate_word(const DiffeoWord& w, const PhasePoint& z, const IntegratorConfig& cfg,
                         const LetterObserver& observer) {
  PhasePoint p = z;
  const auto& letters = w.letters();
  for (auto it = letters.rbegin(); it != letters.rend(); ++it) {
    PhasePoint next = flow(*it, it->duration, p, cfg);
    if (observer) observer(*it, p, next);
    p = std::move(next);
  }
  return p;
}

TangentPoint tangent_flow(const Letter& letter, double t, const PhasePoint& z, const IntegratorConfig& cfg) {
  const auto dim = z.size();
  if (dim != letter.support.dim()) throw std::invalid_argument("tangent_flow: dimension mismatch");
  if (t == 0.0 || !box_contains(letter.support, z)) {
    plan_steps(t, cfg);
    return {z, Jacobian::Identity(dim, dim)};
  }
  const Expr& F = letter.hamiltonian;
  const Jacobian S = symplectic_matrix(static_cast<int>(dim / 2));
  // State layout: z followed by J in column-major order.
  const auto field = [&](const Eigen::VectorXd& s) -> Eigen::VectorXd {
    const PhasePoint p = s.head(dim);
    Tangent grad(dim);
    Jacobian hess(dim, dim);
    detail::hessian_tape(F.tape(), p.data(), grad.data(), hess.data(), static_cast<int>(dim));
    const Jacobian DX = S * hess;
    Eigen::VectorXd out(s.size());
    out.head(dim) = S * grad;
    out.tail(dim * dim) = (DX * Eigen::Map<const Eigen::MatrixXd>(s.data() + dim, dim, dim)).reshaped();
    return out;
  };
  Eigen::VectorXd s(dim + dim * dim);
  s.head(dim) = z;
  s.tail(dim * dim) = Eigen::MatrixXd::Identity(dim, dim).reshaped();
  s = integrate(field, std::move(s), t, cfg);
  return {s.head(dim), Eigen::Map<const Eigen::MatrixXd>(s.data() + dim, dim, dim)};
}

TangentPoint tangent_word(const DiffeoWord& w, const PhasePoint& z, const IntegratorConfig& cfg) {
  TangentPoint acc{z, Jacobian::Identity(z.size(), z.size())};
  const auto& letters = w.letters();
  for (auto it = letters.rbegin(); it != letters.rend(); ++it) {
    TangentPoint step = tangent_flow(*it, it->duration, acc.point, cfg);
    acc.point = std::move(step.point);
    acc.jacobian = step.jacobian * acc.jacobian;
  }
  return acc;
}

Jacobian jacobian(const std::function<PhasePoint(const PhasePoint&)>& map, const PhasePoint& z, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("jacobian: eps must be positive");
  const auto dim = z.size();
  Jacobian J(dim, dim);
  for (Eigen::Index k = 0; k < dim; ++k) {
    PhasePoint plus = z;
    PhasePoint minus = z;
    plus[k] += eps;
    minus[k] -= eps;
    J.col(k) = (map(plus) - map(minus)) / (2.0 * eps);
  }
  return J;
}

Jacobian jacobian(const DiffeoWord& w, const PhasePoint& z, double eps, const IntegratorConfig& cfg) {
  return jacobian([&](const PhasePoint& p) { return evaluate_word(w, p, cfg); }, z, eps);
}

SymplecticResidual symplectic_residual(const Jacobian& J) {
  const auto n = static_cast<int>(J.rows() / 2);
  const Jacobian omega = symplectic_matrix(n);
  SymplecticResidual r;
  r.form = (J.transpose() * omega * J - omega).cwiseAbs().maxCoeff();
  if (n == 1) r.determinant = std::abs(J.determinant() - 1.0);
  return r;
}

SymplecticResidual symplectic_residual(const DiffeoWord& w, const PhasePoint& z, double eps,
                                       const IntegratorConfig& cfg) {
  return symplectic_residual(jacobian(w, z, eps, cfg));
}

PhasePoint pushforward_flow(const DiffeoWord& psi, const Expr& F, double t, const PhasePoint& z,
                            const IntegratorConfig& outer, const IntegratorConfig& inner, double eps) {
  const DiffeoWord psi_inv = invert_word(psi);
  const auto field = [&](const PhasePoint& p) -> PhasePoint {
    const PhasePoint q = evaluate_word(psi_inv, p, inner);
    return jacobian(psi, q, eps, inner) * vector_field(F, q);
  };
  return integrate(field, z, t, outer);
}

}  // namespace autonorm
