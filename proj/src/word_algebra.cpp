#include "autonorm/word_algebra.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <stdexcept>

namespace autonorm {

namespace {

// Append x to w, cancelling against the last letter. Returns true on cancel.
bool push_reduced(ReducedWord& w, Generator x) {
  if (!w.empty() && w.back() == -x) {
    w.pop_back();
    return true;
  }
  w.push_back(x);
  return false;
}

std::string word_string(const ReducedWord& w) {
  if (w.empty()) return "e";
  std::string out;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (i) out += ' ';
    out += letter_name(w[i]);
  }
  return out;
}

ReducedWord inverse_word(const ReducedWord& w) {
  ReducedWord out(w.rbegin(), w.rend());
  for (Generator& g : out) g = -g;
  return out;
}

void require_m(int m) {
  if (m < 1) throw std::invalid_argument("the number of factors m must be at least 1");
}

}  // namespace

std::string letter_name(Generator g) {
  return "a" + std::to_string(std::abs(g)) + (g < 0 ? "^-1" : "");
}

GroupWord GroupWord::generator(Generator g, int label) {
  if (g == 0) throw std::invalid_argument("GroupWord::generator: index must be nonzero");
  GroupWord w;
  w.components[label] = {g};
  return w;
}

GroupWord GroupWord::h(int power) {
  GroupWord w;
  w.h_exponent = power;
  return w;
}

std::string to_string(const GroupWord& w) {
  if (w.is_identity()) return "e";
  std::string out;
  for (const auto& [label, word] : w.components) {
    if (!out.empty()) out += " . ";
    out += "[" + std::to_string(label) + ": " + word_string(word) + "]";
  }
  if (w.h_exponent != 0) {
    if (!out.empty()) out += " . ";
    out += "h^" + std::to_string(w.h_exponent);
  }
  return out;
}

GroupWord multiply(const GroupWord& u, const GroupWord& v) {
  GroupWord out = u;
  for (const auto& [label, word] : v.components) {
    ReducedWord& target = out.components[label + u.h_exponent];
    for (Generator x : word) push_reduced(target, x);
    if (target.empty()) out.components.erase(label + u.h_exponent);
  }
  out.h_exponent += v.h_exponent;
  return out;
}

GroupWord invert(const GroupWord& u) {
  GroupWord out;
  out.h_exponent = -u.h_exponent;
  for (const auto& [label, word] : u.components) out.components[label - u.h_exponent] = inverse_word(word);
  return out;
}

GroupWord conjugate_by_h_power(const GroupWord& u, int k) {
  GroupWord out;
  out.h_exponent = u.h_exponent;
  for (const auto& [label, word] : u.components) out.components[label + k] = word;
  return out;
}

GroupWord commutator(const GroupWord& u, const GroupWord& v) {
  return multiply(multiply(multiply(u, v), invert(u)), invert(v));
}

namespace {

/// c_i = a_1 a_2 ... a_i at label 0.
GroupWord prefix_product(int i) {
  GroupWord c;
  for (int j = 1; j <= i; ++j) c = multiply(c, GroupWord::generator(j));
  return c;
}

}  // namespace

GroupWord build_f(int m) {
  require_m(m);
  return prefix_product(m);
}

GroupWord build_g(int m) {
  require_m(m);
  GroupWord g;
  for (int i = 1; i <= m; ++i) g = multiply(g, conjugate_by_h_power(invert(prefix_product(i)), i - m - 1));
  return g;
}

GroupWord build_b(int m) {
  require_m(m);
  GroupWord b;
  for (int i = 1; i <= m; ++i) b = multiply(b, GroupWord::generator(i, i - m - 1));
  return b;
}

std::vector<Atom> expand(const GroupWord& w) {
  std::vector<Atom> atoms;
  auto push_h = [&](int power) {
    for (int k = 0; k < std::abs(power); ++k) atoms.push_back({true, power > 0 ? 1 : -1});
  };
  for (const auto& [label, word] : w.components) {
    push_h(label);
    for (Generator x : word) atoms.push_back({false, x});
    push_h(-label);
  }
  push_h(w.h_exponent);
  return atoms;
}

GroupWord reduce(const std::vector<Atom>& atoms) {
  ProofTrace scratch;
  return reduce_traced(atoms, scratch);
}

std::string to_string(Rule r) {
  switch (r) {
    case Rule::ShiftH: return "shift-h";
    case Rule::Append: return "append";
    case Rule::Cancel: return "cancel";
  }
  return "?";
}

std::size_t ProofTrace::letters() const {
  return static_cast<std::size_t>(std::count_if(steps.begin(), steps.end(), [](const TraceStep& s) {
    return s.rule != Rule::ShiftH;
  }));
}

std::pair<int, int> ProofTrace::label_range() const {
  bool any = false;
  int lo = 0;
  int hi = 0;
  for (const TraceStep& s : steps) {
    if (s.rule == Rule::ShiftH) continue;
    lo = any ? std::min(lo, s.label) : s.label;
    hi = any ? std::max(hi, s.label) : s.label;
    any = true;
  }
  return {lo, hi};
}

GroupWord reduce_traced(const std::vector<Atom>& atoms, ProofTrace& trace) {
  GroupWord state;
  for (const Atom& a : atoms) {
    TraceStep step;
    step.h_before = state.h_exponent;
    if (a.is_h) {
      step.rule = Rule::ShiftH;
      state.h_exponent += a.value;
    } else {
      step.label = state.h_exponent;
      ReducedWord& comp = state.components[step.label];
      step.before = comp;
      step.rule = push_reduced(comp, a.value) ? Rule::Cancel : Rule::Append;
      step.after = comp;
      if (comp.empty()) state.components.erase(step.label);
    }
    step.h_after = state.h_exponent;
    trace.steps.push_back(std::move(step));
  }
  return state;
}

GroupWord replay(const ProofTrace& trace) {
  GroupWord state;
  std::size_t line = 0;
  auto bad = [&](const std::string& why) {
    throw std::logic_error("invalid trace step " + std::to_string(line) + ": " + why);
  };
  for (const TraceStep& s : trace.steps) {
    if (s.h_before != state.h_exponent) bad("h exponent does not chain");
    if (s.rule == Rule::ShiftH) {
      if (std::abs(s.h_after - s.h_before) != 1) bad("h shift must change the exponent by one");
      state.h_exponent = s.h_after;
    } else {
      if (s.h_after != s.h_before) bad("letter step changed the h exponent");
      if (s.label != state.h_exponent) bad("letter placed at a label other than the current h exponent");
      const auto it = state.components.find(s.label);
      const ReducedWord current = it == state.components.end() ? ReducedWord{} : it->second;
      if (current != s.before) bad("component does not match recorded 'before'");
      if (s.rule == Rule::Append) {
        if (s.after.size() != s.before.size() + 1 || !std::equal(s.before.begin(), s.before.end(), s.after.begin())) {
          bad("append must add exactly one letter");
        }
        if (!s.before.empty() && s.before.back() == -s.after.back()) bad("append left a reducible pair");
      } else {
        if (s.before.size() != s.after.size() + 1 || !std::equal(s.after.begin(), s.after.end(), s.before.begin())) {
          bad("cancel must remove exactly the last letter");
        }
      }
      if (s.after.empty()) state.components.erase(s.label);
      else state.components[s.label] = s.after;
    }
    ++line;
  }
  return state;
}

std::string serialize(const ProofTrace& trace) {
  std::ostringstream out;
  for (const TraceStep& s : trace.steps) {
    out << to_string(s.rule);
    if (s.rule == Rule::ShiftH) {
      out << ": h^" << s.h_before << " -> h^" << s.h_after << '\n';
    } else {
      out << " label=" << s.label << ": " << word_string(s.before) << " -> " << word_string(s.after) << '\n';
    }
  }
  return out.str();
}

IdentityResult verify_identity(int m) {
  require_m(m);
  const GroupWord g = build_g(m);
  const GroupWord b = build_b(m);
  IdentityResult result;
  result.expected = build_f(m);
  result.lhs = multiply(commutator(g, GroupWord::h()), b);

  // Independent route: reduce the fully expanded plain word letter by letter.
  std::vector<Atom> atoms = expand(g);
  atoms.push_back({true, 1});
  for (const Atom& a : expand(invert(g))) atoms.push_back(a);
  atoms.push_back({true, -1});
  for (const Atom& a : expand(b)) atoms.push_back(a);
  const GroupWord traced = reduce_traced(atoms, result.trace);

  result.holds = result.lhs == result.expected && traced == result.expected && replay(result.trace) == traced;
  return result;
}

bool verify_commutator_split(int m) {
  require_m(m);
  const GroupWord g = build_g(m);
  const GroupWord h = GroupWord::h();
  const GroupWord conj = multiply(multiply(g, h), invert(g));
  // The conjugate carries exactly one h, the second factor is h^-1.
  if (conj.h_exponent != 1) return false;
  std::vector<Atom> plain = expand(g);
  plain.push_back({true, 1});
  for (const Atom& a : expand(invert(g))) plain.push_back(a);
  plain.push_back({true, -1});
  return reduce(plain) == commutator(g, h) && multiply(conj, invert(h)) == commutator(g, h);
}

bool verify_commutator_split_with_wrong_sign(int m) {
  require_m(m);
  const GroupWord g = build_g(m);
  const GroupWord h = GroupWord::h();
  return multiply(multiply(multiply(g, h), invert(g)), h) == commutator(g, h);
}

std::string cancellation_summary(int m) {
  require_m(m);
  const GroupWord g = build_g(m);
  const GroupWord hg = conjugate_by_h_power(invert(g), 1);  // h g^-1 h^-1
  const GroupWord b = build_b(m);
  const GroupWord total = multiply(multiply(g, hg), b);
  std::set<int> labels;
  for (const GroupWord* w : {&g, &hg, &b}) {
    for (const auto& [label, word] : w->components) labels.insert(label);
  }
  auto part = [](const GroupWord& w, int label) {
    const auto it = w.components.find(label);
    return it == w.components.end() ? std::string("e") : "(" + word_string(it->second) + ")";
  };
  std::ostringstream out;
  for (int label : labels) {
    out << "label " << label << ": " << part(g, label) << " . " << part(hg, label) << " . " << part(b, label)
        << " = " << part(total, label) << '\n';
  }
  return out.str();
}

}  // namespace autonorm
