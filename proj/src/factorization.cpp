#include "autonorm/factorization.hpp"

#include "autonorm/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace autonorm {

Expr glued_hamiltonian(std::span<const Expr> factors, const DisplacementSpec& spec, GlueConvention convention) {
  const int m = static_cast<int>(factors.size());
  if (m < 1) throw ConstructionError("glued_hamiltonian: need at least one factor");
  const int dim = spec.dim();
  Expr G = Expr::constant(0.0);
  std::vector<Box> boxes;
  for (int i = 1; i <= m; ++i) {
    const int k = i - m - 1;
    PhasePoint offset = PhasePoint::Zero(dim);
    offset[0] = (convention == GlueConvention::PushForward ? k : -k) * spec.L;
    const Expr& F = factors[i - 1];
    Box box = support_bound(F, dim);
    if (!is_bounded(box)) throw ConstructionError("glued_hamiltonian: factor " + std::to_string(i) + " has unbounded support");
    if (!box.isEmpty()) box.translate(offset);
    for (std::size_t j = 0; j < boxes.size(); ++j) {
      if (!boxes_disjoint(boxes[j], box)) {
        throw ConstructionError("glued_hamiltonian: shifted supports of factors " + std::to_string(j + 1) + " and " +
                                std::to_string(i) + " overlap (L <= 2r or support outside B(r))");
      }
    }
    boxes.push_back(box);
    const Expr shifted = translate(F, offset);
    G = i == 1 ? shifted : G + shifted;
  }
  return G;
}

DiffeoWord instantiate(const GroupWord& w, std::span<const Letter> a, const Letter& h_letter, int dim) {
  std::vector<Letter> letters;
  for (const Atom& atom : expand(w)) {
    if (atom.is_h) {
      Letter l = h_letter;
      l.duration = atom.value * std::abs(h_letter.duration);
      letters.push_back(std::move(l));
    } else {
      const auto idx = static_cast<std::size_t>(std::abs(atom.value));
      if (idx < 1 || idx > a.size()) throw std::invalid_argument("instantiate: generator index out of range");
      Letter l = a[idx - 1];
      l.duration = atom.value > 0 ? 1.0 : -1.0;
      letters.push_back(std::move(l));
    }
  }
  return DiffeoWord(dim, std::move(letters));
}

GroupWord abstract_word(const DiffeoWord& w, const GroupWord& glued) {
  GroupWord out;
  for (const Letter& l : w.letters()) {
    const double d = l.duration;
    if (d != 1.0 && d != -1.0) throw std::invalid_argument("abstract_word: only unit-time letters map to generators");
    const int sign = d > 0 ? 1 : -1;
    if (l.generator == kDisplacingGenerator) out = multiply(out, GroupWord::h(sign));
    else if (l.generator > 0) out = multiply(out, GroupWord::generator(sign * l.generator));
    else if (l.generator == kGluedGenerator) out = multiply(out, sign > 0 ? glued : invert(glued));
    else throw std::invalid_argument("abstract_word: untagged letter");
  }
  return out;
}

double enclosing_radius(std::span<const Box> boxes, double margin) {
  double r = 0.0;
  for (const Box& b : boxes) {
    if (b.isEmpty()) continue;
    const auto corner = b.min().cwiseAbs().cwiseMax(b.max().cwiseAbs());
    r = std::max(r, corner.norm());
  }
  return r + margin;
}

FactorizationPlan plan_factorization(std::span<const Expr> factors, const PlanOptions& options) {
  if (factors.empty()) throw ConstructionError("plan_factorization: need at least one factor (m >= 1)");
  if (options.n < 1 || options.n > kMaxHalfDim) throw ConstructionError("plan_factorization: n out of range");
  const int dim = 2 * options.n;
  FactorizationPlan plan;
  plan.inputs.assign(factors.begin(), factors.end());
  for (std::size_t i = 0; i < factors.size(); ++i) {
    if (factors[i].arity() > dim) {
      throw ConstructionError("factor " + std::to_string(i + 1) + " uses coordinates beyond n = " + std::to_string(options.n));
    }
    Box box = support_bound(factors[i], dim);
    if (!is_bounded(box)) {
      throw ConstructionError("factor " + std::to_string(i + 1) + " ('" + print(factors[i]) +
                              "') has no certified bounded support");
    }
    plan.input_supports.push_back(std::move(box));
  }

  const int m = plan.m();
  const double r = enclosing_radius(plan.input_supports, options.radius_margin);
  plan.spec = default_displacement(r, m, options.n);
  if (options.L) plan.spec.L = *options.L;
  else if (options.L_over_r) plan.spec.L = *options.L_over_r * r;
  plan.spec.eps = options.eps;
  plan.spec.allow_short_translation = options.allow_short_translation;
  plan.spec.validate();

  plan.H = build_displacement_hamiltonian(plan.spec);
  for (int i = 1; i <= m; ++i) plan.a.push_back(make_letter(plan.inputs[i - 1], 1.0, dim, i));
  plan.f = instantiate(build_f(m), plan.a, make_letter(plan.H, 1.0, dim, kDisplacingGenerator), dim);
  plan.G = glued_hamiltonian(plan.inputs, plan.spec, GlueConvention::PushForward);
  for (int i = 1; i <= m; ++i) {
    Box box = plan.input_supports[i - 1];
    PhasePoint offset = PhasePoint::Zero(dim);
    offset[0] = (i - m - 1) * plan.spec.L;
    if (!box.isEmpty()) box.translate(offset);
    plan.glued_supports.push_back(std::move(box));
  }
  plan.A3 = {"A3", DiffeoWord::single(make_letter(plan.G, 1.0, dim, kGluedGenerator), dim),
             "G = sum_i F_i(z - (i-m-1) L e_x1)", plan.G};
  return with_displacing_hamiltonian(plan, plan.H);
}

FactorizationPlan with_displacing_hamiltonian(const FactorizationPlan& plan, const Expr& H) {
  FactorizationPlan out = plan;
  const int m = out.m();
  const int dim = out.dim();
  out.H = H;
  out.h = displacement_word(H, dim);
  const Letter& h_letter = out.h.letters().front();
  out.g = instantiate(build_g(m), out.a, h_letter, dim);
  out.b = instantiate(build_b(m), out.a, h_letter, dim);
  out.A1 = {"A1", conjugate_word(out.h, out.g), "H o g^-1 (conjugate of the displacing flow by g)", std::nullopt};
  out.A2 = {"A2", invert_word(out.h), "-H", -H};
  return out;
}

double a1_hamiltonian(const FactorizationPlan& plan, const PhasePoint& z, const IntegratorConfig& cfg) {
  return evaluate(plan.H, evaluate_word(invert_word(plan.g), z, cfg));
}

double unit_uniform(std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

std::vector<PhasePoint> composition_samples(const DisplacementSpec& spec, int samples, std::uint64_t seed) {
  if (samples < 1) throw std::invalid_argument("composition_samples: samples must be positive");
  const int grid = (samples + 1) / 2;
  std::vector<PhasePoint> points = ball_samples(spec.r, spec.n, grid);
  std::mt19937_64 rng(seed);
  // x_1 range keeps every intermediate h-image on the tube: the deepest
  // excursions are -L (from A2) and +mL (inside g).
  const double lo = -(spec.m + 1) * spec.L;
  const double hi = 2.0 * spec.L;
  while (static_cast<int>(points.size()) < samples) {
    PhasePoint z(spec.dim());
    z[0] = lo + (hi - lo) * unit_uniform(rng());
    for (int k = 1; k < spec.dim(); ++k) z[k] = -spec.r + 2.0 * spec.r * unit_uniform(rng());
    points.push_back(z);
  }
  return points;
}

namespace {

std::vector<PhasePoint> glued_samples(const DisplacementSpec& spec, int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<PhasePoint> points;
  points.reserve(count);
  while (static_cast<int>(points.size()) < count) {
    const int i = 1 + static_cast<int>(unit_uniform(rng()) * spec.m);
    PhasePoint z(spec.dim());
    for (int k = 0; k < spec.dim(); ++k) z[k] = -spec.r + 2.0 * spec.r * unit_uniform(rng());
    if (z.norm() > spec.r) continue;
    z[0] += (i - spec.m - 1) * spec.L;
    points.push_back(z);
  }
  return points;
}

}  // namespace

FactorizationReport verify_factorization(const FactorizationPlan& plan, const VerifyOptions& options,
                                         const IntegratorConfig& cfg) {
  FactorizationReport rep;
  rep.tolerance = options.tolerance;
  rep.glued_tolerance = options.glued_tolerance;
  const DisplacementSpec& spec = plan.spec;
  const Box tube = spec.tube();
  const Box& h_support = plan.h.letters().front().support;

  // --- composition f vs A1 o A2 o A3 ---------------------------------------
  const std::vector<PhasePoint> points = composition_samples(spec, options.samples, options.seed);
  rep.samples = static_cast<int>(points.size());
  const DiffeoWord product = plan.product();
  std::vector<double> errors(points.size());
  std::vector<long long> h_evals(points.size(), 0);
  std::vector<long long> violations(points.size(), 0);
  parallel_for(points.size(), [&](std::size_t s) {
    const LetterObserver watch = [&](const Letter& l, const PhasePoint& before, const PhasePoint& after) {
      if (l.generator != kDisplacingGenerator) return;
      ++h_evals[s];
      if (box_contains(h_support, before) && !(box_contains(tube, before) && box_contains(tube, after))) {
        ++violations[s];
      }
    };
    const PhasePoint lhs = evaluate_word(plan.f, points[s], cfg);
    const PhasePoint rhs = evaluate_word(product, points[s], cfg, watch);
    errors[s] = (lhs - rhs).norm();
  });
  rep.max_error = *std::max_element(errors.begin(), errors.end());
  rep.mean_error = std::accumulate(errors.begin(), errors.end(), 0.0) / static_cast<double>(errors.size());
  rep.h_evaluations = std::accumulate(h_evals.begin(), h_evals.end(), 0LL);
  rep.tube_violations = std::accumulate(violations.begin(), violations.end(), 0LL);
  rep.composition_pass = rep.max_error <= options.tolerance && rep.tube_violations == 0;

  // --- glued factor vs the word b, under both conventions -------------------
  const Expr G_alt = glued_hamiltonian(plan.inputs, spec, GlueConvention::PullBack);
  const Letter alt_letter = make_letter(G_alt, 1.0, spec.dim(), kGluedGenerator);
  const Letter& glued_letter = plan.A3.word.letters().front();
  const std::vector<PhasePoint> gpoints = glued_samples(spec, options.glued_samples, options.seed);
  rep.glued_samples = static_cast<int>(gpoints.size());
  std::vector<double> gerr(gpoints.size());
  std::vector<double> aerr(gpoints.size());
  std::vector<double> drift(gpoints.size());
  const DiffeoWord g_inv = invert_word(plan.g);
  parallel_for(gpoints.size(), [&](std::size_t s) {
    const PhasePoint& z = gpoints[s];
    const PhasePoint by_word = evaluate_word(plan.b, z, cfg);
    gerr[s] = (flow(glued_letter, 1.0, z, cfg) - by_word).norm();
    aerr[s] = (flow(alt_letter, 1.0, z, cfg) - by_word).norm();
    // Autonomy witness of A1: H o g^-1 is conserved along A1.
    const double before = evaluate(plan.H, evaluate_word(g_inv, z, cfg));
    const double after = evaluate(plan.H, evaluate_word(g_inv, evaluate_word(plan.A1.word, z, cfg), cfg));
    drift[s] = std::abs(after - before);
  });
  if (!gpoints.empty()) {
    rep.glued_max_error = *std::max_element(gerr.begin(), gerr.end());
    rep.glued_alternative_max_error = *std::max_element(aerr.begin(), aerr.end());
    rep.a1_witness_drift = *std::max_element(drift.begin(), drift.end());
  }
  rep.glued_pass = rep.glued_max_error <= options.glued_tolerance;
  rep.alternative_rejected = rep.glued_alternative_max_error > options.glued_tolerance;

  // --- symbolic coherence ----------------------------------------------------
  const int m = plan.m();
  const GroupWord b = build_b(m);
  const GroupWord assembled = multiply(
      multiply(abstract_word(plan.A1.word, b), abstract_word(plan.A2.word, b)), abstract_word(plan.A3.word, b));
  rep.symbolic_coherence = assembled == build_f(m) && abstract_word(plan.f, b) == build_f(m);
  rep.identity_holds = verify_identity(m).holds;

  // --- optional pushforward check of A1 ---------------------------------------
  rep.deep_check_points = std::min(options.deep_check_points, rep.samples);
  if (rep.deep_check_points > 0) {
    // The pushed-forward field has steep higher derivatives near bump edges,
    // so the outer flow runs at the configured step as well.
    std::vector<double> derr(rep.deep_check_points);
    parallel_for(derr.size(), [&](std::size_t s) {
      const PhasePoint& z = points[s];
      derr[s] = (pushforward_flow(plan.g, plan.H, 1.0, z, cfg, cfg, 1e-5) -
                 evaluate_word(plan.A1.word, z, cfg)).norm();
    });
    rep.deep_check_max_error = *std::max_element(derr.begin(), derr.end());
  }

  rep.pass = rep.composition_pass && rep.glued_pass && rep.symbolic_coherence && rep.identity_holds &&
             (!rep.deep_check_max_error || *rep.deep_check_max_error <= options.deep_tolerance);
  return rep;
}

}  // namespace autonorm
