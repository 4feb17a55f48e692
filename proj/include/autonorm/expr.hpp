#pragma once

#include "autonorm/smooth.hpp"
#include "autonorm/types.hpp"

#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace autonorm {

enum class Op : std::uint8_t {
  Constant,
  Variable,
  Add,
  Sub,
  Mul,
  Div,
  Pow,
  Neg,
  Exp,
  Bump,
  Step,
};

/// One tape entry. Children always precede their parent on the tape.
struct Node {
  Op op = Op::Constant;
  std::int32_t lhs = -1;
  std::int32_t rhs = -1;
  std::int32_t index = 0;  ///< coordinate for Variable, exponent for Pow
  double value = 0.0;      ///< payload for Constant
};

/// An immutable closed-form scalar field on R^{2n}, stored as a postfix tape.
///
/// Expressions are built with the usual operators plus `exp`, `bump`, `step`
/// and `pow`. Copies share the tape, so passing by value is cheap and the
/// object may be read from any number of threads.
///
/// Quotients are only formed when the denominator has a certified positive
/// lower bound (see `certified_range`); otherwise construction throws.
class Expr {
 public:
  /// The zero field.
  Expr();

  static Expr constant(double c);
  /// Coordinate `k` in the (x_1, y_1, ..., x_n, y_n) ordering, zero-based.
  static Expr variable(int k);
  static Expr x(int i) { return variable(x_index(i)); }
  static Expr y(int i) { return variable(y_index(i)); }

  Op op() const { return root().op; }
  const Node& root() const { return tape_->back(); }
  std::span<const Node> tape() const { return *tape_; }

  /// Child expressions of the root (copies of the corresponding sub-tapes).
  Expr lhs() const;
  Expr rhs() const;

  /// One past the largest coordinate index referenced, 0 for constants.
  int arity() const { return arity_; }

  bool is_constant() const { return op() == Op::Constant; }
  bool is_zero_constant() const { return is_constant() && root().value == 0.0; }

  friend Expr operator+(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a, const Expr& b);
  friend Expr operator*(const Expr& a, const Expr& b);
  friend Expr operator/(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a);
  friend Expr pow(const Expr& base, int exponent);
  friend Expr exp(const Expr& a);
  friend Expr bump(const Expr& a);
  friend Expr step(const Expr& a);

  /// Structural equality; constants compare bitwise.
  friend bool operator==(const Expr& a, const Expr& b);

 private:
  explicit Expr(std::shared_ptr<const std::vector<Node>> tape);
  static Expr unary(Op op, const Expr& a, std::int32_t index = 0);
  static Expr binary(Op op, const Expr& a, const Expr& b);
  Expr subtree(std::int32_t index) const;

  std::shared_ptr<const std::vector<Node>> tape_;
  int arity_ = 0;
};

inline Expr operator+(const Expr& a, double b) { return a + Expr::constant(b); }
inline Expr operator+(double a, const Expr& b) { return Expr::constant(a) + b; }
inline Expr operator-(const Expr& a, double b) { return a - Expr::constant(b); }
inline Expr operator-(double a, const Expr& b) { return Expr::constant(a) - b; }
inline Expr operator*(double a, const Expr& b) { return Expr::constant(a) * b; }
inline Expr operator*(const Expr& a, double b) { return a * Expr::constant(b); }
inline Expr operator/(const Expr& a, double b) { return a / Expr::constant(b); }

/// Closed interval enclosing every value an expression can take.
struct Range {
  double lo;
  double hi;
};

/// Interval-arithmetic enclosure of the expression's range over all of R^{2n}.
Range certified_range(const Expr& e);

/// Replace coordinate k by (coordinate k - offset[k]) everywhere, i.e. the
/// result is z -> e(z - offset).
Expr translate(const Expr& e, const PhasePoint& offset);

/// Box outside of which `e` evaluates exactly to zero. Sums take the hull of
/// their summands' boxes, products intersect, and bump/step of an affine
/// function of one coordinate bound that coordinate. Anything else certifies
/// nothing. Check `is_bounded` on the result.
Box support_bound(const Expr& e, int dim);

// --- evaluation -------------------------------------------------------------

namespace detail {
double evaluate_tape(std::span<const Node> tape, const double* z);
void gradient_tape(std::span<const Node> tape, const double* z, double* value, double* grad,
                   int dim);
void hessian_tape(std::span<const Node> tape, const double* z, double* grad, double* hess, int dim);
}  // namespace detail

template <typename Derived>
double evaluate(const Expr& e, const Eigen::MatrixBase<Derived>& z) {
  if (z.size() < e.arity()) throw std::invalid_argument("evaluate: point has too few coordinates");
  const PhasePoint p = z;
  return detail::evaluate_tape(e.tape(), p.data());
}

/// Exact gradient by forward-mode differentiation over the tape.
template <typename Derived>
Tangent gradient(const Expr& e, const Eigen::MatrixBase<Derived>& z) {
  if (z.size() < e.arity()) throw std::invalid_argument("gradient: point has too few coordinates");
  const PhasePoint p = z;
  Tangent g(p.size());
  double value = 0.0;
  detail::gradient_tape(e.tape(), p.data(), &value, g.data(), static_cast<int>(p.size()));
  return g;
}

/// Exact Hessian by second-order forward differentiation over the tape.
template <typename Derived>
Jacobian hessian(const Expr& e, const Eigen::MatrixBase<Derived>& z) {
  if (z.size() < e.arity()) throw std::invalid_argument("hessian: point has too few coordinates");
  const PhasePoint p = z;
  Tangent g(p.size());
  Jacobian h(p.size(), p.size());
  detail::hessian_tape(e.tape(), p.data(), g.data(), h.data(), static_cast<int>(p.size()));
  return h;
}

// --- text form --------------------------------------------------------------

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& message, std::size_t position);
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

/// Parse the expression grammar for a field on R^{2n}.
Expr parse(std::string_view text, int n);

/// Canonical, fully parenthesised text form; `parse(print(e), n) == e`.
std::string print(const Expr& e);

}  // namespace autonorm
