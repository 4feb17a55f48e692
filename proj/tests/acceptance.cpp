// Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any fails.

#include "autonorm/calabi.hpp"
#include "autonorm/displacement.hpp"
#include "autonorm/factorization.hpp"
#include "autonorm/scenario.hpp"
#include "autonorm/word_algebra.hpp"
#include "word_oracle.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>

using namespace autonorm;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

int failures = 0;

void report(const char* id, bool pass, const std::string& detail) {
  std::printf("%s %s  %s\n", id, pass ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

/// Runs `body`, turning an exception into a FAIL line.
void criterion(const char* id, const std::function<void()>& body) {
  try {
    body();
  } catch (const std::exception& e) {
    report(id, false, std::string("exception: ") + e.what());
  }
}

PhasePoint uniform_in(const Box& box, std::mt19937_64& rng) {
  PhasePoint z(box.dim());
  for (Eigen::Index k = 0; k < box.dim(); ++k) {
    z[k] = std::uniform_real_distribution<double>(box.min()[k], box.max()[k])(rng);
  }
  return z;
}

const std::string configs = AUTONORM_CONFIGS;

}  // namespace

int main() {
  const ScenarioConfig generic = load_scenario(configs + "/generic_m3.json");
  const FactorizationPlan plan = build_plan(generic);
  const std::vector<Expr> inputs = parse_factors(generic);

  criterion("AC1", [] {
    const auto start = Clock::now();
    bool all = true;
    for (int m = 1; m <= 64; ++m) all = all && verify_identity(m).holds && verify_commutator_split(m);
    const double t = seconds_since(start);
    report("AC1", all && t < 1.0,
           fmt("f = [g,h] b and [g,h] = (g h g^-1) h^-1 for m = 1..64: %s in %.3f s (limit 1 s)",
               all ? "hold" : "FAIL", t));
  });

  FactorizationReport composition;
  criterion("AC2", [&] {
    // Fixture conditions: supports inside B(1), amplitudes at most 1.
    double support_radius = 0.0;
    double amplitude = 0.0;
    std::mt19937_64 rng(17);
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      support_radius = std::max(support_radius, enclosing_radius(std::span(&plan.input_supports[i], 1), 0.0));
      for (int s = 0; s < 20000; ++s) {
        amplitude = std::max(amplitude, std::abs(evaluate(inputs[i], uniform_in(plan.input_supports[i], rng))));
      }
    }
    const bool fixture_ok = inputs.size() == 3 && support_radius <= 1.0 && amplitude <= 1.0;
    const auto start = Clock::now();
    composition = verify_factorization(plan, generic.verification, generic.integrator);
    const double t = seconds_since(start);
    report("AC2",
           fixture_ok && composition.samples == 200 && composition.max_error <= 1e-3 && composition.tube_violations == 0 &&
               generic.integrator.step == 1e-3 && t <= 60.0,
           fmt("m=3 overlapping bumps (support radius %.3f, amplitude %.3f): max |f - A1 A2 A3| = %.3e over %d "
               "points (tol 1e-3), RK4 step %g, %.1f s (limit 60 s)",
               support_radius, amplitude, composition.max_error, composition.samples, generic.integrator.step, t));
  });

  criterion("AC3", [] {
    const IntegratorConfig rk4;
    const DisplacementSpec spec = default_displacement(1.0, 3, 1);
    const DiffeoWord h = displacement_word(build_displacement_hamiltonian(spec), spec.dim());
    const DisplacementReport rep = verify_displacement(h, spec, 200, rk4);
    const bool positive = rep.pass && rep.powers == 4 && rep.min_separation >= spec.r - 1e-3 && rep.max_error_h1 <= 1e-6;

    DisplacementSpec short_spec = default_displacement(1.0, 3, 1);
    short_spec.L = short_spec.r;
    short_spec.allow_short_translation = true;
    const DiffeoWord h_short = displacement_word(build_displacement_hamiltonian(short_spec), 2);
    const DisplacementReport neg = verify_displacement(h_short, short_spec, 200, rk4);
    const bool negative = !neg.pass && neg.overlap_witness.has_value();
    report("AC3", positive && negative,
           fmt("L=3r: images h^k(B), k=0..%d, min separation %.6f (need >= r - 1e-3 = %.6f), |h z - (z + L e1)| <= "
               "%.2e (tol 1e-6); L=r: overlap %s",
               rep.powers, rep.min_separation, spec.r - 1e-3, rep.max_error_h1,
               negative ? "detected and reported" : "NOT detected"));
  });

  criterion("AC4", [&] {
    report("AC4",
           composition.glued_samples == 50 && composition.glued_max_error <= 1e-4 && composition.alternative_rejected,
           fmt("flow of G vs word prod (a_i)^(h^(i-m-1)) at %d points: max error %.3e (tol 1e-4); F_i o h^i reading "
               "off by %.3e and rejected",
               composition.glued_samples, composition.glued_max_error, composition.glued_alternative_max_error));
  });

  criterion("AC5", [&] {
    const IntegratorConfig rk4;
    std::vector<Expr> hamiltonians = inputs;
    hamiltonians.push_back(plan.G);
    std::mt19937_64 rng(23);
    double energy = 0.0;
    int energy_points = 0;
    for (int s = 0; s < 100; ++s) {
      const Expr& F = hamiltonians[s % hamiltonians.size()];
      const Letter a = make_letter(F, 1.0, 2);
      const PhasePoint z = uniform_in(a.support, rng);
      const double e0 = evaluate(F, z);
      flow(a, 1.0, z, rk4, [&](double, const PhasePoint& p) { energy = std::max(energy, std::abs(evaluate(F, p) - e0)); });
      ++energy_points;
    }
    double det = 0.0;
    for (int s = 0; s < 50; ++s) {
      const Letter a = make_letter(hamiltonians[s % hamiltonians.size()], 1.0, 2);
      const PhasePoint z = uniform_in(a.support, rng);
      det = std::max(det, *symplectic_residual(DiffeoWord::single(a, 2), z, 1e-6, rk4).determinant);
    }
    report("AC5", energy <= 1e-6 && det <= 1e-5,
           fmt("energy drift %.3e over t in [0,1] at %d points (tol 1e-6); |det J - 1| <= %.3e at 50 points (tol 1e-5)",
               energy, energy_points, det));
  });

  criterion("AC6", [&] {
    std::vector<Expr> fields = inputs;
    fields.push_back(plan.G);
    fields.push_back(plan.H);
    std::mt19937_64 rng(29);
    const auto central = [](const Expr& F, const PhasePoint& z, double h) {
      Tangent fd(z.size());
      for (Eigen::Index k = 0; k < z.size(); ++k) {
        PhasePoint plus = z;
        PhasePoint minus = z;
        plus[k] += h;
        minus[k] -= h;
        fd[k] = (evaluate(F, plus) - evaluate(F, minus)) / (2 * h);
      }
      return fd;
    };
    double worst = 0.0;
    double worst_richardson = 0.0;
    int points = 0;
    int attempts = 0;
    while (points < 100 && attempts < 100000) {
      ++attempts;
      const Expr& F = fields[attempts % fields.size()];
      const PhasePoint z = uniform_in(support_bound(F, 2), rng);
      const Tangent g = gradient(F, z);
      if (g.norm() <= 1e-3) continue;
      const Tangent fd = central(F, z, 1e-5);
      worst = std::max(worst, (g - fd).norm() / g.norm());
      // Extrapolated difference, O(h^4): separates oracle truncation from AD error.
      const Tangent rich = (4 * fd - central(F, z, 2e-5)) / 3;
      worst_richardson = std::max(worst_richardson, (g - rich).norm() / g.norm());
      ++points;
    }
    report("AC6", points == 100 && worst <= 1e-6,
           fmt("max relative |grad - central difference (h=1e-5)| = %.3e at %d points with |grad| > 1e-3 (tol 1e-6); "
               "vs Richardson difference %.3e",
               worst, points, worst_richardson));
  });

  criterion("AC7", [&] {
    const double spacing = default_calabi_spacing(plan);
    double sum = 0.0;
    for (const Expr& F : inputs) sum += calabi(F, 1, spacing).value;
    const double translation = std::abs(calabi(plan.G, 1, spacing).value - sum);
    const bool translation_ok = translation <= 1e-6 * std::max(1.0, std::abs(sum));

    const ScenarioConfig kernel = load_scenario(configs + "/kernel_m3.json");
    const FactorizationPlan balanced = build_plan(kernel);
    CalabiOptions options;
    options.spacing = kernel.calabi_spacing;
    const CalabiPlanReport cal = calabi_of_plan(balanced, options, kernel.integrator);
    double worst = 0.0;
    for (double v : cal.factor) worst = std::max(worst, std::abs(v));
    const FactorizationReport comp = verify_factorization(balanced, kernel.verification, kernel.integrator);
    report("AC7", translation_ok && worst <= 1e-5 && comp.max_error <= 1e-3 && comp.samples == 200,
           fmt("|Cal(G) - sum Cal(F_i)| = %.3e (tol %.1e); balanced kernel plan: max |Cal(A_k)| = %.3e (tol 1e-5), "
               "composition error %.3e (tol 1e-3)",
               translation, 1e-6 * std::max(1.0, std::abs(sum)), worst, comp.max_error));
  });

  criterion("AC8", [] {
    const auto start = Clock::now();
    const auto check = autonorm::testing::compare_with_matrix_model(6);
    const double t = seconds_since(start);
    report("AC8", check.consistent && check.words == 55987 && t < 10.0,
           fmt("normal forms vs faithful matrix model on all %zu words of <= 6 letters over {a1,a2,h}^(+-1): %s, "
               "%zu classes, %.2f s (limit 10 s)",
               check.words, check.consistent ? "same partition" : "MISMATCH", check.classes, t));
  });

  criterion("AC9", [&] {
    const std::string first = run_verify(generic).report.dump(2);
    const std::string second = run_verify(generic).report.dump(2);
    report("AC9", first == second, fmt("two verify runs of the generic scenario: reports %s (%zu bytes)",
                                       first == second ? "byte-identical" : "DIFFER", first.size()));
  });

  return failures == 0 ? 0 : 1;
}
