#include "autonorm/displacement.hpp"

#include "autonorm/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace autonorm {

Box DisplacementSpec::tube() const {
  Box b(dim());
  b.min().setConstant(-r);
  b.max().setConstant(r);
  b.min()[0] = -tube_half_length();
  b.max()[0] = tube_half_length();
  return b;
}

void DisplacementSpec::validate() const {
  if (!(r > 0.0) || !std::isfinite(r)) throw ConstructionError("displacement: r must be positive");
  if (m < 1) throw ConstructionError("displacement: m must be at least 1");
  if (n < 1 || n > kMaxHalfDim) throw ConstructionError("displacement: n out of range");
  if (!(eps > 0.0 && eps <= 1.0)) throw ConstructionError("displacement: eps must lie in (0, 1]");
  if (!(L > 0.0) || !std::isfinite(L)) throw ConstructionError("displacement: L must be positive");
  if (!(L > 2.0 * r) && !allow_short_translation) {
    throw ConstructionError("displacement: L = " + std::to_string(L) + " does not exceed 2r = " +
                            std::to_string(2.0 * r) + "; translated balls would overlap");
  }
}

DisplacementSpec default_displacement(double r, int m, int n) {
  DisplacementSpec spec;
  spec.r = r;
  spec.m = m;
  spec.n = n;
  spec.L = 3.0 * r;
  spec.eps = 0.5;
  return spec;
}

Expr plateau(const Expr& v, double a, double b, double eps) {
  if (!(a < b)) throw std::invalid_argument("plateau: need a < b");
  if (!(eps > 0.0)) throw std::invalid_argument("plateau: eps must be positive");
  return step((v - (a - eps)) / eps) * step(((b + eps) - v) / eps);
}

Expr build_profile(const DisplacementSpec& spec) {
  spec.validate();
  const Expr y = Expr::y(1);
  return spec.L * y * plateau(y, -spec.r, spec.r, spec.eps);
}

Expr build_displacement_hamiltonian(const DisplacementSpec& spec) {
  Expr H = build_profile(spec) * plateau(Expr::x(1), -spec.tube_half_length(), spec.tube_half_length(), 1.0);
  for (int i = 2; i <= spec.n; ++i) {
    H = H * plateau(Expr::x(i), -spec.r, spec.r, 1.0) * plateau(Expr::y(i), -spec.r, spec.r, 1.0);
  }
  return H;
}

DiffeoWord displacement_word(const Expr& H, int dim) {
  return DiffeoWord::single(make_letter(H, 1.0, dim, kDisplacingGenerator), dim);
}

std::vector<PhasePoint> ball_samples(double r, int n, int count) {
  const int dim = 2 * n;
  std::vector<PhasePoint> out;
  out.reserve(count);
  // Antipodal pair along x_1 first: it realises the minimal separation L - 2r.
  for (double s : {1.0, -1.0}) {
    if (static_cast<int>(out.size()) == count) break;
    PhasePoint z = PhasePoint::Zero(dim);
    z[0] = s * r;
    out.push_back(z);
  }
  // Half of the rest on the sphere, in the (x_i, y_i) planes in turn.
  const int sphere = (count - static_cast<int>(out.size())) / 2;
  for (int k = 0; k < sphere; ++k) {
    const double angle = 2.0 * std::numbers::pi * (k + 0.5) / sphere;
    const int plane = k % n;
    PhasePoint z = PhasePoint::Zero(dim);
    z[2 * plane] = r * std::cos(angle);
    z[2 * plane + 1] = r * std::sin(angle);
    out.push_back(z);
  }
  // Interior: a cubic grid restricted to the ball, refined until large enough.
  const int interior = count - static_cast<int>(out.size());
  for (int per_axis = 2; interior > 0; ++per_axis) {
    std::vector<PhasePoint> grid;
    std::vector<int> idx(dim, 0);
    for (;;) {
      PhasePoint z(dim);
      for (int k = 0; k < dim; ++k) z[k] = -r + 2.0 * r * (idx[k] + 0.5) / per_axis;
      if (z.norm() <= r) grid.push_back(z);
      int k = 0;
      while (k < dim && ++idx[k] == per_axis) idx[k++] = 0;
      if (k == dim) break;
    }
    if (static_cast<int>(grid.size()) >= interior) {
      for (int i = 0; i < interior; ++i) {
        out.push_back(grid[static_cast<std::size_t>(i) * grid.size() / interior]);
      }
      break;
    }
  }
  return out;
}

DisplacementReport verify_displacement(const DiffeoWord& h, const DisplacementSpec& spec, int samples,
                                       const IntegratorConfig& cfg, double tolerance) {
  if (samples < 1) throw std::invalid_argument("verify_displacement: samples must be positive");
  DisplacementReport rep;
  rep.samples = samples;
  rep.powers = spec.m + 1;
  rep.tolerance = tolerance;
  rep.separation_bound = spec.L - 2.0 * spec.r;

  const std::vector<PhasePoint> points = ball_samples(spec.r, spec.n, samples);
  const int powers = rep.powers;
  // images[k][s] = h^k(points[s])
  std::vector<std::vector<PhasePoint>> images(powers + 1, std::vector<PhasePoint>(points.size()));
  parallel_for(points.size(), [&](std::size_t s) {
    PhasePoint p = points[s];
    images[0][s] = p;
    for (int k = 1; k <= powers; ++k) {
      p = evaluate_word(h, p, cfg);
      images[k][s] = p;
    }
  });

  for (int k = 1; k <= powers; ++k) {
    for (std::size_t s = 0; s < points.size(); ++s) {
      PhasePoint expected = points[s];
      expected[0] += k * spec.L;
      const double err = (images[k][s] - expected).norm();
      rep.max_translation_error = std::max(rep.max_translation_error, err);
      if (k == 1) rep.max_error_h1 = std::max(rep.max_error_h1, err);
      if (!rep.overlap_witness && images[k][s].norm() <= spec.r * (1.0 + 1e-12)) {
        rep.overlap_witness = points[s];
      }
    }
  }

  double min_sep = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= powers; ++k) {
    for (int j = k + 1; j <= powers; ++j) {
      for (const PhasePoint& p : images[k]) {
        for (const PhasePoint& q : images[j]) min_sep = std::min(min_sep, (p - q).norm());
      }
    }
  }
  rep.min_separation = min_sep;
  rep.analytic_disjoint = rep.separation_bound - 2.0 * rep.max_translation_error > 0.0;
  rep.sampled_disjoint = min_sep > 0.0 && min_sep >= rep.separation_bound - tolerance &&
                         rep.separation_bound > 0.0;
  rep.pass = rep.analytic_disjoint && rep.sampled_disjoint && !rep.overlap_witness &&
             rep.max_translation_error <= tolerance;
  return rep;
}

}  // namespace autonorm
