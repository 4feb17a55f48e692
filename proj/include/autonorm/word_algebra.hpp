#pragma once

#include <map>
#include <string>
#include <vector>

namespace autonorm {

/// Signed generator index: +i is a_i, -i is a_i^{-1}.
using Generator = int;
using ReducedWord = std::vector<Generator>;

/// Element of the group generated by a_1..a_m and h in which conjugates
/// h^k a h^-k and h^l b h^-l commute whenever k != l.
///
/// Normal form: (prod over labels k of h^k w_k h^-k) * h^e, every w_k freely
/// reduced and nonempty. Since distinct labels commute the product order over
/// k is immaterial.
struct GroupWord {
  int h_exponent = 0;
  std::map<int, ReducedWord> components;

  static GroupWord identity() { return {}; }
  /// a_i^{sign} sitting at `label`, i.e. h^label a_i^{sign} h^-label.
  static GroupWord generator(Generator g, int label = 0);
  static GroupWord h(int power = 1);

  bool is_identity() const { return h_exponent == 0 && components.empty(); }
  friend bool operator==(const GroupWord&, const GroupWord&) = default;
};

std::string to_string(const GroupWord& w);

/// Product u * v in normal form: v's labels shift by u.h_exponent.
GroupWord multiply(const GroupWord& u, const GroupWord& v);
GroupWord invert(const GroupWord& u);
/// h^k u h^-k
GroupWord conjugate_by_h_power(const GroupWord& u, int k);
/// [u, v] = u v u^-1 v^-1
GroupWord commutator(const GroupWord& u, const GroupWord& v);

/// a_1 a_2 ... a_m at label 0.
GroupWord build_f(int m);
/// g = prod_i h^{i-m-1} c_i^{-1} h^{-(i-m-1)} with c_i = a_1 ... a_i.
GroupWord build_g(int m);
/// b = prod_i h^{i-m-1} a_i h^{-(i-m-1)}.
GroupWord build_b(int m);

// --- expanded letter sequences ---------------------------------------------

/// One letter of a plain (unreduced) word: a_i^{+-1} or h^{+-1}.
struct Atom {
  bool is_h = false;
  int value = 0;  ///< signed generator for a-letters, +-1 for h
  friend bool operator==(const Atom&, const Atom&) = default;
};

/// A plain word whose product is `w`: for each label k, h^k w_k h^-k, then h^e.
std::vector<Atom> expand(const GroupWord& w);
/// Product of a plain word, computed letter by letter.
GroupWord reduce(const std::vector<Atom>& atoms);

// --- proof trace ------------------------------------------------------------

enum class Rule { ShiftH, Append, Cancel };

std::string to_string(Rule r);

/// One rewrite: either h_exponent before -> after (ShiftH), or the component
/// at `label` before -> after (Append of one letter, or Cancel of x x^-1).
struct TraceStep {
  Rule rule = Rule::Append;
  int label = 0;
  int h_before = 0;
  int h_after = 0;
  ReducedWord before;
  ReducedWord after;
};

struct ProofTrace {
  std::vector<TraceStep> steps;
  /// Total letters appended across all steps.
  std::size_t letters() const;
  /// Smallest and largest label touched (0, 0 if none).
  std::pair<int, int> label_range() const;
};

/// Product of a plain word, recording every rewrite.
GroupWord reduce_traced(const std::vector<Atom>& atoms, ProofTrace& trace);

/// Replay checks each step is a valid instance of its rule and chains onto
/// the previous state; returns the final normal form. Throws
/// std::logic_error on an invalid trace.
GroupWord replay(const ProofTrace& trace);

/// One rewrite per line, e.g. "append label=-1: a1^-1 -> a1^-1 a2^-1".
std::string serialize(const ProofTrace& trace);

struct IdentityResult {
  bool holds = false;
  GroupWord lhs;       ///< [g, h] * b in normal form
  GroupWord expected;  ///< f
  ProofTrace trace;
};

/// Checks f = [g, h] * b with the explicit g and b above.
IdentityResult verify_identity(int m);

/// Checks [g, h] = (g h g^-1) * h^-1 in normal form.
bool verify_commutator_split(int m);
/// The negative control: [g, h] = (g h g^-1) * h, expected false.
bool verify_commutator_split_with_wrong_sign(int m);

/// Per-label summary of the contributions to [g, h] * b and their product.
std::string cancellation_summary(int m);

std::string letter_name(Generator g);

}  // namespace autonorm
