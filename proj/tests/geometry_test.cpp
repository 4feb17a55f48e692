#include "autonorm/displacement.hpp"
#include "autonorm/geometry.hpp"
#include "fixtures.hpp"

#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

using namespace autonorm;
using autonorm::testing::point;

namespace {

const IntegratorConfig rk4{};

// (x^2 + y^2)/2 cut off far from the unit circle: a clockwise rotation there.
Expr rotation_hamiltonian() {
  const Expr q = 0.5 * (pow(Expr::x(1), 2) + pow(Expr::y(1), 2));
  return q * plateau(Expr::x(1), -3.0, 3.0, 1.0) * plateau(Expr::y(1), -3.0, 3.0, 1.0);
}

Expr bump_at(double cx, double cy, double w, double amp) {
  return amp * bump((Expr::x(1) - cx) / w) * bump((Expr::y(1) - cy) / w);
}

std::vector<Expr> sample_hamiltonians() {
  return {
      bump_at(0.2, 0.1, 0.6, 0.8),
      0.6 * (Expr::x(1) + 0.3) * bump((Expr::x(1) + 0.1) / 0.6) * bump((Expr::y(1) + 0.2) / 0.6),
      0.9 * bump((Expr::x(1) - 0.1) / 0.5) * bump((Expr::y(1) + 0.15) / 0.7),
      pow(Expr::y(1), 2) * bump(Expr::x(1) / 0.8) * bump(Expr::y(1) / 0.8),
  };
}

}  // namespace

TEST_SUITE("geometry") {

TEST_CASE("vector field sign convention") {
  const PhasePoint z = point({1.5, -0.5});
  const Tangent X = vector_field(0.5 * (pow(Expr::x(1), 2) + pow(Expr::y(1), 2)), z);
  CHECK(X[0] == -0.5);
  CHECK(X[1] == -1.5);
  CHECK(vector_field(Expr(), z).isZero(0.0));

  // omega(X_F, v) = dF(v) for every v.
  const Expr F = sample_hamiltonians()[1];
  const PhasePoint p = point({0.1, -0.3});
  const Jacobian omega = symplectic_matrix(1);
  const Tangent XF = vector_field(F, p);
  const Tangent dF = gradient(F, p);
  for (int k = 0; k < 2; ++k) {
    Tangent v = Tangent::Zero(2);
    v[k] = 1.0;
    CHECK((XF.transpose() * omega * v)(0) == doctest::Approx(dF.dot(v)).epsilon(1e-15));
  }
}

TEST_CASE("profile with slope r gives r d/dx1") {
  DisplacementSpec spec = default_displacement(1.0, 1, 2);
  spec.L = spec.r;
  spec.allow_short_translation = true;
  const Expr H = build_displacement_hamiltonian(spec);
  for (const PhasePoint& z : {point({0.0, 0.0, 0.0, 0.0}), point({2.0, 0.7, -0.3, 0.9})}) {
    const Tangent X = vector_field(H, z);
    CHECK(X[0] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(X.tail(3).isZero(0.0));
  }
}

TEST_CASE("flow examples") {
  const PhasePoint z = point({0.3, -0.7});
  CHECK(flow(Expr(), 5.0, z, rk4) == z);

  const PhasePoint rotated = flow(rotation_hamiltonian(), std::numbers::pi / 2, point({1.0, 0.0}), rk4);
  CHECK((rotated - point({0.0, -1.0})).norm() <= 1e-8);

  IntegratorConfig midpoint;
  midpoint.scheme = Scheme::ImplicitMidpoint;
  const PhasePoint rotated_mp = flow(rotation_hamiltonian(), std::numbers::pi / 2, point({1.0, 0.0}), midpoint);
  CHECK((rotated_mp - point({0.0, -1.0})).norm() <= 1e-6);

  // Points outside the support box are returned untouched.
  CHECK(flow(bump_at(0.0, 0.0, 0.5, 1.0), 1.0, point({0.5, 0.0}), rk4) == point({0.5, 0.0}));
}

TEST_CASE("step plan shortens the last substep") {
  IntegratorConfig cfg;
  cfg.step = 0.3;
  const StepPlan p = plan_steps(1.0, cfg);
  CHECK(p.count == 4);
  CHECK(p.last == doctest::Approx(0.1));
  CHECK(3 * cfg.step + p.last == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(plan_steps(1.0, IntegratorConfig{}).count == 1000);
  CHECK(plan_steps(0.0, cfg).count == 0);

  IntegratorConfig tight;
  tight.max_steps = 10;
  CHECK_THROWS_AS(plan_steps(1.0, tight), IntegrationError);
  CHECK_THROWS_AS(flow(bump_at(0, 0, 1, 1), 1.0, point({0.0, 0.0}), tight), IntegrationError);
  // Overflow is reported regardless of where the point lies.
  CHECK_THROWS_AS(flow(bump_at(0, 0, 1, 1), 1.0, point({5.0, 0.0}), tight), IntegrationError);
}

TEST_CASE("letters need bounded support") {
  CHECK_THROWS_AS(make_letter(Expr::x(1), 1.0, 2), ConstructionError);
  CHECK_THROWS_AS(make_letter(bump(Expr::x(1)), 1.0, 2), ConstructionError);
  CHECK(make_letter(Expr(), 1.0, 2).support.isEmpty());
}

TEST_CASE("word evaluation") {
  const PhasePoint z = point({0.1, 0.2});
  CHECK(evaluate_word(DiffeoWord(2), z, rk4) == z);

  const Letter a = make_letter(bump_at(0.0, 0.0, 0.8, 1.0), 1.0, 2);
  const DiffeoWord w = DiffeoWord::single(a, 2);
  CHECK((evaluate_word(w * invert_word(w), z, rk4) - z).norm() <= 1e-8);

  const DiffeoWord u = DiffeoWord::single(make_letter(bump_at(-1.0, 0.0, 0.6, 1.0), 1.0, 2), 2);
  const DiffeoWord v = DiffeoWord::single(make_letter(bump_at(1.0, 0.0, 0.6, 0.7), 1.0, 2), 2);
  for (const PhasePoint& p : {point({-1.2, 0.1}), point({0.9, -0.2}), point({0.0, 0.0})}) {
    CHECK((evaluate_word(u * v, p, rk4) - evaluate_word(v * u, p, rk4)).norm() <= 1e-8);
  }

  // Rightmost letter acts first.
  const PhasePoint p = point({0.2, 0.3});
  CHECK(evaluate_word(u * w, p, rk4) == flow(u.letters()[0], 1.0, flow(a, 1.0, p, rk4), rk4));
}

TEST_CASE("inversion and conjugation") {
  CHECK(invert_word(DiffeoWord(2)).empty());
  const Expr F = bump_at(0.0, 0.0, 1.0, 1.0);
  const Expr G = bump_at(0.3, 0.0, 1.0, 0.5);
  const DiffeoWord w(2, {make_letter(F, 1.0, 2), make_letter(G, 1.0, 2)});
  const DiffeoWord inv = invert_word(w);
  REQUIRE(inv.size() == 2);
  CHECK(inv.letters()[0].hamiltonian == G);
  CHECK(inv.letters()[0].duration == -1.0);
  CHECK(inv.letters()[1].hamiltonian == F);
  CHECK(inv.letters()[1].duration == -1.0);

  const DiffeoWord by = DiffeoWord::single(make_letter(bump_at(0.4, -0.2, 0.9, 0.8), 0.7, 2), 2);
  const DiffeoWord c = conjugate_word(w, by);
  std::mt19937_64 rng(5);
  for (int s = 0; s < 20; ++s) {
    const PhasePoint z = autonorm::testing::uniform_point(rng, 2, -1.0, 1.0);
    const PhasePoint expected = evaluate_word(by, evaluate_word(w, evaluate_word(invert_word(by), z, rk4), rk4), rk4);
    CHECK((evaluate_word(c, z, rk4) - expected).norm() <= 1e-7);
  }

  CHECK(power(w, 0).empty());
  CHECK(power(w, 3).size() == 6);
  CHECK(power(w, -2).letters()[0].duration == -1.0);
}

TEST_CASE("Jacobian examples") {
  const PhasePoint z = point({0.2, -0.4});
  CHECK((jacobian(DiffeoWord(2), z, 1e-6, rk4) - Jacobian::Identity(2, 2)).cwiseAbs().maxCoeff() <= 1e-9);

  const DisplacementSpec spec = default_displacement(1.0, 3, 1);
  const DiffeoWord h = displacement_word(build_displacement_hamiltonian(spec), 2);
  CHECK((jacobian(h, z, 1e-5, rk4) - Jacobian::Identity(2, 2)).cwiseAbs().maxCoeff() <= 1e-6);

  const double t = 0.8;
  const DiffeoWord rot = DiffeoWord::single(make_letter(rotation_hamiltonian(), t, 2), 2);
  Jacobian expected(2, 2);
  expected << std::cos(t), std::sin(t), -std::sin(t), std::cos(t);
  CHECK((jacobian(rot, point({0.5, 0.3}), 1e-5, rk4) - expected).cwiseAbs().maxCoeff() <= 1e-6);
  CHECK((tangent_word(rot, point({0.5, 0.3}), rk4).jacobian - expected).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("symplectic residual") {
  const PhasePoint z = point({0.2, -0.4});
  const SymplecticResidual id = symplectic_residual(DiffeoWord(2), z, 1e-6, rk4);
  CHECK(id.form <= 1e-9);
  REQUIRE(id.determinant.has_value());
  CHECK(*id.determinant <= 1e-9);

  const auto doubling = [](const PhasePoint& p) -> PhasePoint { return 2.0 * p; };
  const SymplecticResidual d = symplectic_residual(jacobian(doubling, z, 1e-6));
  CHECK(d.form >= 1.0);
  CHECK(*d.determinant == doctest::Approx(3.0));

  std::mt19937_64 rng(9);
  for (const Expr& F : sample_hamiltonians()) {
    const DiffeoWord w = DiffeoWord::single(make_letter(F, 1.0, 2), 2);
    for (int s = 0; s < 10; ++s) {
      const PhasePoint p = autonorm::testing::uniform_point(rng, 2, -0.8, 0.8);
      const SymplecticResidual r = symplectic_residual(w, p, 1e-6, rk4);
      CHECK(r.form <= 1e-5);
      CHECK(*r.determinant <= 1e-5);
    }
  }

  // Four-dimensional residual has no determinant entry.
  const Expr F4 = bump(Expr::x(1)) * bump(Expr::y(1)) * bump(Expr::x(2)) * bump(Expr::y(2) - 0.2);
  const DiffeoWord w4 = DiffeoWord::single(make_letter(F4, 1.0, 4), 4);
  const SymplecticResidual r4 = symplectic_residual(w4, point({0.1, 0.2, -0.3, 0.1}), 1e-6, rk4);
  CHECK(r4.form <= 1e-5);
  CHECK_FALSE(r4.determinant.has_value());
}

TEST_CASE("tangent flow matches differences and is symplectic") {
  std::mt19937_64 rng(10);
  for (const Expr& F : sample_hamiltonians()) {
    const DiffeoWord w(2, {make_letter(F, 1.0, 2), make_letter(F, -0.4, 2)});
    for (int s = 0; s < 5; ++s) {
      const PhasePoint p = autonorm::testing::uniform_point(rng, 2, -0.8, 0.8);
      const TangentPoint tp = tangent_word(w, p, rk4);
      CHECK((tp.point - evaluate_word(w, p, rk4)).norm() <= 1e-13);
      CHECK((tp.jacobian - jacobian(w, p, 1e-6, rk4)).cwiseAbs().maxCoeff() <= 1e-6);
      CHECK(std::abs(tp.jacobian.determinant() - 1.0) <= 1e-9);
    }
  }
}

TEST_CASE("property: energy conservation") {
  std::mt19937_64 rng(11);
  for (const Expr& F : sample_hamiltonians()) {
    const Letter a = make_letter(F, 1.0, 2);
    for (int s = 0; s < 25; ++s) {
      const PhasePoint z = autonorm::testing::uniform_point(rng, 2, -1.0, 1.0);
      const double e0 = evaluate(F, z);
      double drift = 0.0;
      flow(a, 1.0, z, rk4, [&](double, const PhasePoint& p) { drift = std::max(drift, std::abs(evaluate(F, p) - e0)); });
      CHECK(drift <= 1e-6);
    }
  }
}

TEST_CASE("property: group law and flow additivity") {
  std::mt19937_64 rng(12);
  const auto hs = sample_hamiltonians();
  const DiffeoWord w(2, {make_letter(hs[0], 1.0, 2), make_letter(hs[1], 0.5, 2), make_letter(hs[2], -1.0, 2)});
  for (int s = 0; s < 20; ++s) {
    const PhasePoint z = autonorm::testing::uniform_point(rng, 2, -1.0, 1.0);
    CHECK((evaluate_word(w * invert_word(w), z, rk4) - z).norm() <= 1e-7);
    CHECK((evaluate_word(invert_word(w) * w, z, rk4) - z).norm() <= 1e-7);

    // s and t are multiples of the step so both sides take identical substeps.
    const Expr& F = hs[s % hs.size()];
    const PhasePoint joint = flow(F, 0.9, z, rk4);
    const PhasePoint split = flow(F, 0.5, flow(F, 0.4, z, rk4), rk4);
    CHECK((joint - split).norm() <= 1e-8);
  }
}

TEST_CASE("property: conjugate flow is the flow of the pushed-forward field") {
  const auto hs = sample_hamiltonians();
  // Moderate durations keep D psi small enough for a coarse outer step.
  const DiffeoWord psi(2, {make_letter(hs[2], 0.4, 2), make_letter(hs[3], 0.5, 2)});
  const Expr F = hs[0];
  const DiffeoWord conj = conjugate_word(DiffeoWord::single(make_letter(F, 1.0, 2), 2), psi);
  // The pushed-forward field inherits large higher derivatives near the bump
  // edges, so the outer flow keeps the default step.
  const IntegratorConfig outer = rk4;
  IntegratorConfig inner;
  inner.step = 1e-2;
  std::mt19937_64 rng(13);
  for (int s = 0; s < 6; ++s) {
    const PhasePoint z = autonorm::testing::uniform_point(rng, 2, -0.6, 0.6);
    const PhasePoint via_word = evaluate_word(conj, z, rk4);
    const PhasePoint via_field = pushforward_flow(psi, F, 1.0, z, outer, inner, 1e-6);
    CHECK((via_word - via_field).norm() <= 1e-4);
  }
}

}
