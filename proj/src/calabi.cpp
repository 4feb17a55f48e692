#include "autonorm/calabi.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

namespace autonorm {

CalabiValue calabi(const Expr& F, int n, double spacing) {
  const int dim = 2 * n;
  const Box box = support_bound(F, dim);
  if (!is_bounded(box)) throw ConstructionError("calabi: '" + print(F) + "' has no certified bounded support");
  const auto integrand = [&F](const PhasePoint& z) { return evaluate(F, z); };
  CalabiValue v;
  v.spacing = spacing;
  v.value = midpoint_integral(box, spacing, integrand);
  v.refined_value = midpoint_integral(box, 0.5 * spacing, integrand);
  v.refinement_delta = std::abs(v.value - v.refined_value);
  return v;
}

double default_calabi_spacing(const FactorizationPlan& plan) { return (plan.spec.r + 1.0) / 256.0; }

namespace {

/// Boxes outside of which g is the identity: the input hull shifted to each
/// label -m..-1.
std::vector<Box> g_support_boxes(const FactorizationPlan& plan) {
  Box hull = empty_box(plan.dim());
  for (const Box& b : plan.input_supports) hull = hull.merged(b);
  std::vector<Box> boxes;
  if (hull.isEmpty()) return boxes;
  for (int k = -plan.m(); k <= -1; ++k) {
    Box b = hull;
    PhasePoint offset = PhasePoint::Zero(plan.dim());
    offset[0] = k * plan.spec.L;
    b.translate(offset);
    boxes.push_back(b);
  }
  return boxes;
}

}  // namespace

CalabiPlanReport calabi_of_plan(const FactorizationPlan& plan, const CalabiOptions& options,
                                const IntegratorConfig& cfg) {
  CalabiPlanReport rep;
  const int n = plan.spec.n;
  rep.spacing = options.spacing > 0.0 ? options.spacing : default_calabi_spacing(plan);
  for (const Expr& F : plan.inputs) {
    rep.inputs.push_back(calabi(F, n, rep.spacing));
    rep.inputs_sum += rep.inputs.back().value;
  }
  rep.glued = calabi(plan.G, n, rep.spacing);
  rep.displacing = calabi(plan.H, n, rep.spacing);
  rep.translation_error = std::abs(rep.glued.value - rep.inputs_sum);
  rep.translation_pass =
      rep.translation_error <= options.translation_tolerance * std::max(1.0, std::abs(rep.inputs_sum));

  // Substituting z = g(w): Cal(H o g^-1) = integral of H(w) det Dg(w) dw,
  // which differs from Cal(H) only where g moves points.
  const std::vector<Box> boxes = g_support_boxes(plan);
  Box hull = empty_box(plan.dim());
  for (const Box& b : boxes) hull = hull.merged(b);
  const auto correction = [&](const PhasePoint& w) {
    const bool inside = std::any_of(boxes.begin(), boxes.end(), [&](const Box& b) { return box_contains(b, w); });
    if (!inside) return 0.0;
    const double det = tangent_word(plan.g, w, cfg).jacobian.determinant();
    return evaluate(plan.H, w) * (det - 1.0);
  };
  const double coarse = options.coarse_spacing > 0.0 ? options.coarse_spacing : (plan.spec.r + 1.0) / 8.0;
  rep.coarse_spacing = coarse;
  rep.a1_measured = rep.displacing.value + midpoint_integral(hull, coarse, correction);
  rep.change_of_variables_error = std::abs(rep.a1_measured - rep.displacing.value);
  rep.change_of_variables_pass = rep.change_of_variables_error <=
                                 options.change_of_variables_tolerance * std::max(1.0, std::abs(rep.displacing.value));

  rep.factor[0] = rep.a1_measured;
  rep.factor[1] = -rep.displacing.value;
  rep.factor[2] = rep.glued.value;
  rep.a1_plus_a2 = rep.factor[0] + rep.factor[1];
  rep.pass = rep.translation_pass && rep.change_of_variables_pass;
  return rep;
}

Expr calabi_compensator(const DisplacementSpec& spec) {
  const double centre = spec.r + spec.eps + 2.0;
  Expr beta = bump(Expr::x(1)) * bump(Expr::y(1) - centre);
  for (int i = 2; i <= spec.n; ++i) beta = beta * bump(Expr::x(i)) * bump(Expr::y(i));
  return beta;
}

FactorizationPlan balance_calabi(const FactorizationPlan& plan, const CalabiOptions& options) {
  const double spacing = options.spacing > 0.0 ? options.spacing : default_calabi_spacing(plan);
  double sum = 0.0;
  for (const Expr& F : plan.inputs) sum += calabi(F, plan.spec.n, spacing).value;
  if (std::abs(sum) > options.kernel_tolerance) {
    std::ostringstream msg;
    msg << "balance_calabi: f is not in the Calabi kernel (sum of Cal(F_i) = " << std::setprecision(17) << sum << ")";
    throw ConstructionError(msg.str());
  }
  const Expr beta = calabi_compensator(plan.spec);
  const double kappa = calabi(plan.H, plan.spec.n, spacing).value / calabi(beta, plan.spec.n, spacing).value;
  return with_displacing_hamiltonian(plan, plan.H - kappa * beta);
}

}  // namespace autonorm
