#pragma once

#include "autonorm/expr.hpp"

#include <random>

namespace autonorm::testing {

inline PhasePoint point(std::initializer_list<double> values) {
  PhasePoint z(static_cast<Eigen::Index>(values.size()));
  Eigen::Index k = 0;
  for (double v : values) z[k++] = v;
  return z;
}

inline PhasePoint uniform_point(std::mt19937_64& rng, int dim, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  PhasePoint z(dim);
  for (int k = 0; k < dim; ++k) z[k] = u(rng);
  return z;
}

/// Random expression over 2n coordinates. Leaves are coordinates and
/// constants; inner nodes use every operator except the quotient, which is
/// added with a strictly positive denominator.
inline Expr random_expr(std::mt19937_64& rng, int n, int depth) {
  std::uniform_int_distribution<int> pick(0, 9);
  std::uniform_int_distribution<int> coord(0, 2 * n - 1);
  std::uniform_real_distribution<double> c(-2.0, 2.0);
  if (depth == 0) return pick(rng) < 7 ? Expr::variable(coord(rng)) : Expr::constant(c(rng));
  const Expr a = random_expr(rng, n, depth - 1);
  switch (pick(rng)) {
    case 0: return a + random_expr(rng, n, depth - 1);
    case 1: return a - random_expr(rng, n, depth - 1);
    case 2: return a * random_expr(rng, n, depth - 1);
    case 3: return a / (1.5 + bump(random_expr(rng, n, depth - 1)));
    case 4: return pow(a, 1 + static_cast<int>(rng() % 3));
    case 5: return -a;
    case 6: return exp(0.3 * bump(a));
    case 7: return step(a);
    default: return bump(a);
  }
}

/// Random compactly supported expression: a random factor times bumps of
/// affine functions in every coordinate.
inline Expr random_compact_expr(std::mt19937_64& rng, int n, int depth) {
  std::uniform_real_distribution<double> centre(-0.5, 0.5);
  std::uniform_real_distribution<double> width(0.3, 0.9);
  Expr e = random_expr(rng, n, depth);
  for (int k = 0; k < 2 * n; ++k) e = e * bump((Expr::variable(k) - centre(rng)) / width(rng));
  return e;
}

}  // namespace autonorm::testing
