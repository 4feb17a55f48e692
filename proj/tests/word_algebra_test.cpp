#include "autonorm/word_algebra.hpp"
#include "word_oracle.hpp"

#include "doctest.h"

#include <array>
#include <chrono>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace autonorm;
using autonorm::testing::all_words;
using autonorm::testing::kAlphabet;

namespace {

GroupWord fold_multiply(const std::vector<Atom>& atoms) {
  GroupWord w;
  for (const Atom& a : atoms) w = multiply(w, a.is_h ? GroupWord::h(a.value) : GroupWord::generator(a.value));
  return w;
}

GroupWord random_word(std::mt19937_64& rng, int length) {
  std::vector<Atom> atoms;
  for (int i = 0; i < length; ++i) atoms.push_back(kAlphabet[rng() % kAlphabet.size()]);
  return reduce(atoms);
}

}  // namespace

TEST_SUITE("word_algebra") {

TEST_CASE("multiply examples") {
  const GroupWord w = multiply(GroupWord::generator(2, 3), GroupWord::h(-1));
  CHECK(multiply(w, GroupWord::identity()) == w);
  CHECK(multiply(GroupWord::identity(), w) == w);

  const GroupWord a1_0 = GroupWord::generator(1, 0);
  const GroupWord a2_1 = GroupWord::generator(2, 1);
  CHECK(multiply(a1_0, a2_1) == multiply(a2_1, a1_0));

  const GroupWord ha = multiply(GroupWord::h(), a1_0);
  CHECK(ha.h_exponent == 1);
  REQUIRE(ha.components.size() == 1);
  CHECK(ha.components.at(1) == ReducedWord{1});
  CHECK(ha == multiply(GroupWord::generator(1, 1), GroupWord::h()));

  // Same label does not commute.
  CHECK(multiply(a1_0, GroupWord::generator(2, 0)) != multiply(GroupWord::generator(2, 0), a1_0));
  CHECK(multiply(a1_0, GroupWord::generator(-1, 0)).is_identity());
}

TEST_CASE("invert and conjugate examples") {
  CHECK(invert(GroupWord::identity()).is_identity());
  const GroupWord c = conjugate_by_h_power(GroupWord::generator(1, 0), 2);
  CHECK(c.h_exponent == 0);
  CHECK(c.components.size() == 1);
  CHECK(c.components.at(2) == ReducedWord{1});
  CHECK(to_string(GroupWord::identity()) == "e");
}

TEST_CASE("property: inversion reverses products") {
  std::mt19937_64 rng(31);
  for (int s = 0; s < 2000; ++s) {
    const GroupWord u = random_word(rng, 1 + static_cast<int>(rng() % 6));
    const GroupWord v = random_word(rng, 1 + static_cast<int>(rng() % 6));
    CHECK(invert(multiply(u, v)) == multiply(invert(v), invert(u)));
    CHECK(multiply(u, invert(u)).is_identity());
    CHECK(multiply(multiply(u, v), u) == multiply(u, multiply(v, u)));
    CHECK(reduce(expand(u)) == u);
  }
}

TEST_CASE("g and b builders") {
  const GroupWord g1 = build_g(1);
  CHECK(g1.h_exponent == 0);
  REQUIRE(g1.components.size() == 1);
  CHECK(g1.components.at(-1) == ReducedWord{-1});
  const GroupWord b1 = build_b(1);
  REQUIRE(b1.components.size() == 1);
  CHECK(b1.components.at(-1) == ReducedWord{1});

  const GroupWord g2 = build_g(2);
  REQUIRE(g2.components.size() == 2);
  CHECK(g2.components.at(-2) == ReducedWord{-1});
  CHECK(g2.components.at(-1) == (ReducedWord{-2, -1}));

  for (int m = 1; m <= 64; ++m) {
    CHECK(build_b(m).h_exponent == 0);
    CHECK(build_g(m).h_exponent == 0);
  }
  CHECK_THROWS_AS(build_g(0), std::invalid_argument);
  CHECK_THROWS_AS(build_b(0), std::invalid_argument);
  CHECK_THROWS_AS(verify_identity(0), std::invalid_argument);
}

TEST_CASE("identity for small m") {
  const IdentityResult r1 = verify_identity(1);
  CHECK(r1.holds);
  CHECK(r1.lhs == build_f(1));
  CHECK(r1.lhs.components.at(0) == ReducedWord{1});

  const IdentityResult r2 = verify_identity(2);
  CHECK(r2.holds);
  CHECK(r2.lhs.components.size() == 1);
  CHECK(r2.lhs.components.at(0) == (ReducedWord{1, 2}));
  // The label -1 product c2^-1 c1 a2 collapses.
  const std::string summary = cancellation_summary(2);
  CHECK(summary.find("label -1: (a2^-1 a1^-1) . (a1) . (a2) = e") != std::string::npos);
}

TEST_CASE("identity and commutator split for m up to 64") {
  const auto start = std::chrono::steady_clock::now();
  for (int m = 1; m <= 64; ++m) {
    const IdentityResult r = verify_identity(m);
    CHECK(r.holds);
    CHECK(verify_commutator_split(m));
    // Label footprint: only -m..0 are ever touched.
    const auto [lo, hi] = r.trace.label_range();
    CHECK(lo == -m);
    CHECK(hi == 0);
    CHECK(replay(r.trace) == r.expected);
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  CHECK(seconds < 1.0);
}

TEST_CASE("commutator split negative control") {
  for (int m : {1, 2, 5}) CHECK_FALSE(verify_commutator_split_with_wrong_sign(m));
  CHECK(verify_commutator_split(5));
}

TEST_CASE("trace replay rejects tampering") {
  const IdentityResult r = verify_identity(3);
  REQUIRE(r.trace.steps.size() > 4);
  CHECK(r.trace.letters() > 0);
  const std::string text = serialize(r.trace);
  CHECK(static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')) == r.trace.steps.size());

  ProofTrace bad = r.trace;
  for (TraceStep& s : bad.steps) {
    if (s.rule == Rule::Append) {
      s.after.back() = s.after.back() == 1 ? 2 : 1;
      break;
    }
  }
  bool rejected = false;
  try {
    rejected = replay(bad) != r.expected;
  } catch (const std::logic_error&) {
    rejected = true;
  }
  CHECK(rejected);

  ProofTrace dropped = r.trace;
  dropped.steps.erase(dropped.steps.begin() + 1);
  CHECK_THROWS_AS(replay(dropped), std::logic_error);
}

TEST_CASE("property: normal forms match the matrix model on all short words") {
  const auto start = std::chrono::steady_clock::now();
  const auto check = autonorm::testing::compare_with_matrix_model(6);
  CHECK(check.words == 55987);
  CHECK(check.consistent);
  CHECK(check.classes < check.words);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  CHECK(seconds < 10.0);

  // Both products agree with each other as well.
  for (const auto& w : all_words(5)) CHECK(reduce(w) == fold_multiply(w));
}

}
