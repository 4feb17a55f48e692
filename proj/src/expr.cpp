#include "autonorm/expr.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <limits>
#include <optional>

namespace autonorm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

int node_arity(const std::vector<Node>& tape) {
  int arity = 0;
  for (const Node& n : tape) {
    if (n.op == Op::Variable) arity = std::max(arity, n.index + 1);
  }
  return arity;
}

void append_shifted(std::vector<Node>& out, std::span<const Node> src) {
  const auto offset = static_cast<std::int32_t>(out.size());
  for (Node n : src) {
    if (n.lhs >= 0) n.lhs += offset;
    if (n.rhs >= 0) n.rhs += offset;
    out.push_back(n);
  }
}

}  // namespace

Expr::Expr() : Expr(constant(0.0)) {}

Expr::Expr(std::shared_ptr<const std::vector<Node>> tape)
    : tape_(std::move(tape)), arity_(node_arity(*tape_)) {}

Expr Expr::constant(double c) {
  if (!std::isfinite(c)) throw std::invalid_argument("Expr::constant: value must be finite");
  Node n;
  n.op = Op::Constant;
  n.value = c;
  return Expr(std::make_shared<const std::vector<Node>>(1, n));
}

Expr Expr::variable(int k) {
  if (k < 0 || k >= kMaxPhaseDim) throw std::invalid_argument("Expr::variable: coordinate out of range");
  Node n;
  n.op = Op::Variable;
  n.index = k;
  return Expr(std::make_shared<const std::vector<Node>>(1, n));
}

Expr Expr::unary(Op op, const Expr& a, std::int32_t index) {
  auto tape = std::make_shared<std::vector<Node>>();
  tape->reserve(a.tape_->size() + 1);
  append_shifted(*tape, *a.tape_);
  Node n;
  n.op = op;
  n.lhs = static_cast<std::int32_t>(tape->size()) - 1;
  n.index = index;
  tape->push_back(n);
  return Expr(std::move(tape));
}

Expr Expr::binary(Op op, const Expr& a, const Expr& b) {
  auto tape = std::make_shared<std::vector<Node>>();
  tape->reserve(a.tape_->size() + b.tape_->size() + 1);
  append_shifted(*tape, *a.tape_);
  const auto lhs = static_cast<std::int32_t>(tape->size()) - 1;
  append_shifted(*tape, *b.tape_);
  Node n;
  n.op = op;
  n.lhs = lhs;
  n.rhs = static_cast<std::int32_t>(tape->size()) - 1;
  tape->push_back(n);
  return Expr(std::move(tape));
}

Expr Expr::subtree(std::int32_t index) const {
  // Children of a node occupy a contiguous block ending at the node itself.
  std::int32_t first = index;
  std::vector<std::int32_t> stack{index};
  while (!stack.empty()) {
    const Node& n = (*tape_)[stack.back()];
    stack.pop_back();
    for (std::int32_t c : {n.lhs, n.rhs}) {
      if (c >= 0) {
        first = std::min(first, c);
        stack.push_back(c);
      }
    }
  }
  std::vector<Node> out;
  out.reserve(index - first + 1);
  for (std::int32_t i = first; i <= index; ++i) {
    Node n = (*tape_)[i];
    if (n.lhs >= 0) n.lhs -= first;
    if (n.rhs >= 0) n.rhs -= first;
    out.push_back(n);
  }
  return Expr(std::make_shared<const std::vector<Node>>(std::move(out)));
}

Expr Expr::lhs() const {
  if (root().lhs < 0) throw std::logic_error("Expr::lhs: leaf node");
  return subtree(root().lhs);
}

Expr Expr::rhs() const {
  if (root().rhs < 0) throw std::logic_error("Expr::rhs: node has no right child");
  return subtree(root().rhs);
}

Expr operator+(const Expr& a, const Expr& b) { return Expr::binary(Op::Add, a, b); }
Expr operator-(const Expr& a, const Expr& b) { return Expr::binary(Op::Sub, a, b); }
Expr operator*(const Expr& a, const Expr& b) { return Expr::binary(Op::Mul, a, b); }

Expr operator/(const Expr& a, const Expr& b) {
  if (!(certified_range(b).lo > 0.0)) {
    throw std::domain_error("unguarded quotient: denominator has no certified positive lower bound");
  }
  return Expr::binary(Op::Div, a, b);
}

Expr operator-(const Expr& a) {
  if (a.is_constant()) return Expr::constant(-a.root().value);
  return Expr::unary(Op::Neg, a);
}

Expr pow(const Expr& base, int exponent) {
  if (exponent < 0) throw std::domain_error("pow: exponent must be a non-negative integer");
  return Expr::unary(Op::Pow, base, exponent);
}

Expr exp(const Expr& a) { return Expr::unary(Op::Exp, a); }
Expr bump(const Expr& a) { return Expr::unary(Op::Bump, a); }
Expr step(const Expr& a) { return Expr::unary(Op::Step, a); }

bool operator==(const Expr& a, const Expr& b) {
  const auto ta = a.tape();
  const auto tb = b.tape();
  if (ta.size() != tb.size()) return false;
  for (std::size_t i = 0; i < ta.size(); ++i) {
    const Node& x = ta[i];
    const Node& y = tb[i];
    if (x.op != y.op || x.lhs != y.lhs || x.rhs != y.rhs || x.index != y.index) return false;
    if (std::bit_cast<std::uint64_t>(x.value) != std::bit_cast<std::uint64_t>(y.value)) return false;
  }
  return true;
}

// --- interval enclosure -----------------------------------------------------

namespace {

Range mul_range(Range a, Range b) {
  const std::array<double, 4> p{a.lo * b.lo, a.lo * b.hi, a.hi * b.lo, a.hi * b.hi};
  if (std::any_of(p.begin(), p.end(), [](double v) { return std::isnan(v); })) return {-kInf, kInf};
  return {*std::min_element(p.begin(), p.end()), *std::max_element(p.begin(), p.end())};
}

Range pow_range(Range a, int k) {
  if (k == 0) return {1.0, 1.0};
  const double lo = std::pow(a.lo, k);
  const double hi = std::pow(a.hi, k);
  if (k % 2 == 1) return {lo, hi};
  if (a.lo >= 0.0) return {lo, hi};
  if (a.hi <= 0.0) return {hi, lo};
  return {0.0, std::max(lo, hi)};
}

}  // namespace

Range certified_range(const Expr& e) {
  const auto tape = e.tape();
  std::vector<Range> r(tape.size());
  for (std::size_t i = 0; i < tape.size(); ++i) {
    const Node& n = tape[i];
    switch (n.op) {
      case Op::Constant: r[i] = {n.value, n.value}; break;
      case Op::Variable: r[i] = {-kInf, kInf}; break;
      case Op::Add: r[i] = {r[n.lhs].lo + r[n.rhs].lo, r[n.lhs].hi + r[n.rhs].hi}; break;
      case Op::Sub: r[i] = {r[n.lhs].lo - r[n.rhs].hi, r[n.lhs].hi - r[n.rhs].lo}; break;
      case Op::Mul: r[i] = mul_range(r[n.lhs], r[n.rhs]); break;
      case Op::Div: r[i] = mul_range(r[n.lhs], {1.0 / r[n.rhs].hi, 1.0 / r[n.rhs].lo}); break;
      case Op::Pow: r[i] = pow_range(r[n.lhs], n.index); break;
      case Op::Neg: r[i] = {-r[n.lhs].hi, -r[n.lhs].lo}; break;
      case Op::Exp: r[i] = {std::exp(r[n.lhs].lo), std::exp(r[n.lhs].hi)}; break;
      case Op::Bump:
      case Op::Step: r[i] = {0.0, 1.0}; break;
    }
    if (std::isnan(r[i].lo) || std::isnan(r[i].hi)) r[i] = {-kInf, kInf};
  }
  return r.back();
}

Expr translate(const Expr& e, const PhasePoint& offset) {
  const auto tape = e.tape();
  std::vector<Expr> built;
  built.reserve(tape.size());
  for (const Node& n : tape) {
    switch (n.op) {
      case Op::Constant: built.push_back(Expr::constant(n.value)); break;
      case Op::Variable: {
        const double shift = n.index < offset.size() ? offset[n.index] : 0.0;
        if (shift == 0.0) built.push_back(Expr::variable(n.index));
        else if (shift < 0.0) built.push_back(Expr::variable(n.index) + (-shift));
        else built.push_back(Expr::variable(n.index) - shift);
        break;
      }
      case Op::Add: built.push_back(built[n.lhs] + built[n.rhs]); break;
      case Op::Sub: built.push_back(built[n.lhs] - built[n.rhs]); break;
      case Op::Mul: built.push_back(built[n.lhs] * built[n.rhs]); break;
      case Op::Div: built.push_back(built[n.lhs] / built[n.rhs]); break;
      case Op::Pow: built.push_back(pow(built[n.lhs], n.index)); break;
      case Op::Neg: built.push_back(-built[n.lhs]); break;
      case Op::Exp: built.push_back(exp(built[n.lhs])); break;
      case Op::Bump: built.push_back(bump(built[n.lhs])); break;
      case Op::Step: built.push_back(step(built[n.lhs])); break;
    }
  }
  return built.back();
}

// --- structural support -----------------------------------------------------

namespace {

/// slope * z[var] + offset; var < 0 means a constant.
struct Affine {
  int var = -1;
  double slope = 0.0;
  double offset = 0.0;
};

std::optional<Affine> combine(const std::optional<Affine>& a, const std::optional<Affine>& b,
                              double sign) {
  if (!a || !b) return std::nullopt;
  if (a->var >= 0 && b->var >= 0 && a->var != b->var) return std::nullopt;
  Affine out;
  out.var = a->var >= 0 ? a->var : b->var;
  out.slope = a->slope + sign * b->slope;
  out.offset = a->offset + sign * b->offset;
  return out;
}

std::optional<Affine> scale(const std::optional<Affine>& a, double s) {
  if (!a) return std::nullopt;
  return Affine{a->var, a->slope * s, a->offset * s};
}

}  // namespace

Box support_bound(const Expr& e, int dim) {
  if (e.arity() > dim) throw std::invalid_argument("support_bound: expression uses coordinates beyond dim");
  const auto tape = e.tape();
  std::vector<Box> box;
  std::vector<std::optional<Affine>> aff(tape.size());
  box.reserve(tape.size());
  for (std::size_t i = 0; i < tape.size(); ++i) {
    const Node& n = tape[i];
    switch (n.op) {
      case Op::Constant:
        aff[i] = Affine{-1, 0.0, n.value};
        box.push_back(n.value == 0.0 ? empty_box(dim) : full_box(dim));
        break;
      case Op::Variable:
        aff[i] = Affine{n.index, 1.0, 0.0};
        box.push_back(full_box(dim));
        break;
      case Op::Add:
      case Op::Sub:
        aff[i] = combine(aff[n.lhs], aff[n.rhs], n.op == Op::Add ? 1.0 : -1.0);
        box.push_back(box[n.lhs].merged(box[n.rhs]));
        break;
      case Op::Mul:
        if (aff[n.lhs] && aff[n.lhs]->var < 0) aff[i] = scale(aff[n.rhs], aff[n.lhs]->offset);
        else if (aff[n.rhs] && aff[n.rhs]->var < 0) aff[i] = scale(aff[n.lhs], aff[n.rhs]->offset);
        box.push_back(box[n.lhs].intersection(box[n.rhs]));
        break;
      case Op::Div:
        if (aff[n.rhs] && aff[n.rhs]->var < 0) aff[i] = scale(aff[n.lhs], 1.0 / aff[n.rhs]->offset);
        box.push_back(box[n.lhs]);
        break;
      case Op::Pow:
        box.push_back(n.index == 0 ? full_box(dim) : box[n.lhs]);
        break;
      case Op::Neg:
        aff[i] = scale(aff[n.lhs], -1.0);
        box.push_back(box[n.lhs]);
        break;
      case Op::Exp:
        box.push_back(full_box(dim));
        break;
      case Op::Bump:
      case Op::Step: {
        Box b = full_box(dim);
        const auto& a = aff[n.lhs];
        if (a && a->var < 0) {
          const double t = a->offset;
          const bool zero = n.op == Op::Bump ? std::abs(t) >= 1.0 : t <= 0.0;
          if (zero) b.setEmpty();
        } else if (a && a->slope != 0.0) {
          // bump: |s v + o| < 1; step: s v + o > 0.
          double lo = 0.0;
          double hi = 0.0;
          if (n.op == Op::Bump) {
            lo = (-1.0 - a->offset) / a->slope;
            hi = (1.0 - a->offset) / a->slope;
          } else if (a->slope > 0.0) {
            lo = -a->offset / a->slope;
            hi = kInf;
          } else {
            lo = -kInf;
            hi = -a->offset / a->slope;
          }
          if (lo > hi) std::swap(lo, hi);
          b.min()[a->var] = lo;
          b.max()[a->var] = hi;
        }
        box.push_back(b);
        break;
      }
    }
    if (box.back().isEmpty()) box.back().setEmpty();
  }
  return box.back();
}

// --- evaluation -------------------------------------------------------------

namespace detail {

double evaluate_tape(std::span<const Node> tape, const double* z) {
  thread_local std::vector<double> v;
  v.resize(tape.size());
  for (std::size_t i = 0; i < tape.size(); ++i) {
    const Node& n = tape[i];
    switch (n.op) {
      case Op::Constant: v[i] = n.value; break;
      case Op::Variable: v[i] = z[n.index]; break;
      case Op::Add: v[i] = v[n.lhs] + v[n.rhs]; break;
      case Op::Sub: v[i] = v[n.lhs] - v[n.rhs]; break;
      case Op::Mul: v[i] = v[n.lhs] * v[n.rhs]; break;
      case Op::Div: v[i] = v[n.lhs] / v[n.rhs]; break;
      case Op::Pow: {
        double acc = 1.0;
        for (int k = 0; k < n.index; ++k) acc *= v[n.lhs];
        v[i] = acc;
        break;
      }
      case Op::Neg: v[i] = -v[n.lhs]; break;
      case Op::Exp: v[i] = std::exp(v[n.lhs]); break;
      case Op::Bump: v[i] = smooth::bump(v[n.lhs]); break;
      case Op::Step: v[i] = smooth::step(v[n.lhs]); break;
    }
  }
  return v.back();
}

void gradient_tape(std::span<const Node> tape, const double* z, double* value, double* grad, int dim) {
  thread_local std::vector<double> v;
  thread_local std::vector<double> g;
  v.resize(tape.size());
  g.assign(tape.size() * dim, 0.0);
  for (std::size_t i = 0; i < tape.size(); ++i) {
    const Node& n = tape[i];
    double* gi = g.data() + i * dim;
    const double* ga = n.lhs >= 0 ? g.data() + n.lhs * dim : nullptr;
    const double* gb = n.rhs >= 0 ? g.data() + n.rhs * dim : nullptr;
    switch (n.op) {
      case Op::Constant:
        v[i] = n.value;
        break;
      case Op::Variable:
        v[i] = z[n.index];
        gi[n.index] = 1.0;
        break;
      case Op::Add:
        v[i] = v[n.lhs] + v[n.rhs];
        for (int k = 0; k < dim; ++k) gi[k] = ga[k] + gb[k];
        break;
      case Op::Sub:
        v[i] = v[n.lhs] - v[n.rhs];
        for (int k = 0; k < dim; ++k) gi[k] = ga[k] - gb[k];
        break;
      case Op::Mul: {
        const double a = v[n.lhs];
        const double b = v[n.rhs];
        v[i] = a * b;
        for (int k = 0; k < dim; ++k) gi[k] = ga[k] * b + a * gb[k];
        break;
      }
      case Op::Div: {
        const double a = v[n.lhs];
        const double b = v[n.rhs];
        v[i] = a / b;
        for (int k = 0; k < dim; ++k) gi[k] = (ga[k] * b - a * gb[k]) / (b * b);
        break;
      }
      case Op::Pow: {
        const double a = v[n.lhs];
        double lower = 1.0;  // a^(k-1)
        for (int k = 1; k < n.index; ++k) lower *= a;
        v[i] = n.index == 0 ? 1.0 : lower * a;
        const double d = n.index == 0 ? 0.0 : n.index * lower;
        for (int k = 0; k < dim; ++k) gi[k] = d * ga[k];
        break;
      }
      case Op::Neg:
        v[i] = -v[n.lhs];
        for (int k = 0; k < dim; ++k) gi[k] = -ga[k];
        break;
      case Op::Exp:
        v[i] = std::exp(v[n.lhs]);
        for (int k = 0; k < dim; ++k) gi[k] = v[i] * ga[k];
        break;
      case Op::Bump: {
        const double t = v[n.lhs];
        double d = 0.0;
        v[i] = smooth::bump_with_d1(t, d);
        for (int k = 0; k < dim; ++k) gi[k] = d * ga[k];
        break;
      }
      case Op::Step: {
        const double t = v[n.lhs];
        double d = 0.0;
        v[i] = smooth::step_with_d1(t, d);
        for (int k = 0; k < dim; ++k) gi[k] = d * ga[k];
        break;
      }
    }
  }
  *value = v.back();
  std::copy_n(g.data() + (tape.size() - 1) * dim, dim, grad);
}


void hessian_tape(std::span<const Node> tape, const double* z, double* grad, double* hess, int dim) {
  thread_local std::vector<double> v;
  thread_local std::vector<double> g;
  thread_local std::vector<double> h;
  const std::size_t d = static_cast<std::size_t>(dim);
  const std::size_t dd = d * d;
  v.resize(tape.size());
  g.assign(tape.size() * d, 0.0);
  h.assign(tape.size() * dd, 0.0);
  // Chain rule through a scalar function with derivatives f1, f2.
  const auto unary = [&](std::size_t i, std::size_t a, double f1, double f2) {
    const double* ga = g.data() + a * d;
    const double* ha = h.data() + a * dd;
    double* gi = g.data() + i * d;
    double* hi = h.data() + i * dd;
    for (std::size_t k = 0; k < d; ++k) gi[k] = f1 * ga[k];
    for (std::size_t k = 0; k < d; ++k)
      for (std::size_t l = 0; l < d; ++l) hi[k * d + l] = f1 * ha[k * d + l] + f2 * ga[k] * ga[l];
  };
  for (std::size_t i = 0; i < tape.size(); ++i) {
    const Node& n = tape[i];
    double* gi = g.data() + i * d;
    double* hi = h.data() + i * dd;
    const auto a = static_cast<std::size_t>(n.lhs);
    const auto b = static_cast<std::size_t>(n.rhs);
    switch (n.op) {
      case Op::Constant:
        v[i] = n.value;
        break;
      case Op::Variable:
        v[i] = z[n.index];
        gi[n.index] = 1.0;
        break;
      case Op::Add:
      case Op::Sub: {
        const double s = n.op == Op::Add ? 1.0 : -1.0;
        v[i] = v[a] + s * v[b];
        for (std::size_t k = 0; k < d; ++k) gi[k] = g[a * d + k] + s * g[b * d + k];
        for (std::size_t k = 0; k < dd; ++k) hi[k] = h[a * dd + k] + s * h[b * dd + k];
        break;
      }
      case Op::Mul: {
        const double va = v[a];
        const double vb = v[b];
        const double* ga = g.data() + a * d;
        const double* gb = g.data() + b * d;
        v[i] = va * vb;
        for (std::size_t k = 0; k < d; ++k) gi[k] = ga[k] * vb + va * gb[k];
        for (std::size_t k = 0; k < d; ++k)
          for (std::size_t l = 0; l < d; ++l)
            hi[k * d + l] = h[a * dd + k * d + l] * vb + va * h[b * dd + k * d + l] + ga[k] * gb[l] + gb[k] * ga[l];
        break;
      }
      case Op::Div: {
        const double c = v[a] / v[b];
        const double vb = v[b];
        const double* ga = g.data() + a * d;
        const double* gb = g.data() + b * d;
        v[i] = c;
        for (std::size_t k = 0; k < d; ++k) gi[k] = (ga[k] - c * gb[k]) / vb;
        for (std::size_t k = 0; k < d; ++k)
          for (std::size_t l = 0; l < d; ++l)
            hi[k * d + l] =
                (h[a * dd + k * d + l] - c * h[b * dd + k * d + l] - gb[k] * gi[l] - gi[k] * gb[l]) / vb;
        break;
      }
      case Op::Pow: {
        const int p = n.index;
        const double va = v[a];
        const auto ipow = [](double x, int e) {
          double r = 1.0;
          for (int k = 0; k < e; ++k) r *= x;
          return r;
        };
        v[i] = ipow(va, p);
        const double f1 = p >= 1 ? p * ipow(va, p - 1) : 0.0;
        const double f2 = p >= 2 ? p * (p - 1) * ipow(va, p - 2) : 0.0;
        unary(i, a, f1, f2);
        break;
      }
      case Op::Neg:
        v[i] = -v[a];
        unary(i, a, -1.0, 0.0);
        break;
      case Op::Exp:
        v[i] = std::exp(v[a]);
        unary(i, a, v[i], v[i]);
        break;
      case Op::Bump:
        v[i] = smooth::bump(v[a]);
        unary(i, a, smooth::bump_d1(v[a]), smooth::bump_d2(v[a]));
        break;
      case Op::Step:
        v[i] = smooth::step(v[a]);
        unary(i, a, smooth::step_d1(v[a]), smooth::step_d2(v[a]));
        break;
    }
  }
  std::copy_n(g.data() + (tape.size() - 1) * d, d, grad);
  std::copy_n(h.data() + (tape.size() - 1) * dd, dd, hess);
}

}  // namespace detail

// --- printer ----------------------------------------------------------------

namespace {

std::string format_number(double v) {
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), std::abs(v));
  std::string digits(buf.data(), end);
  return std::signbit(v) ? "(-" + digits + ")" : digits;
}

void print_node(std::span<const Node> tape, std::int32_t i, std::string& out) {
  const Node& n = tape[i];
  auto binary = [&](const char* op) {
    out += '(';
    print_node(tape, n.lhs, out);
    out += op;
    print_node(tape, n.rhs, out);
    out += ')';
  };
  auto call = [&](const char* name) {
    out += name;
    out += '(';
    print_node(tape, n.lhs, out);
    out += ')';
  };
  switch (n.op) {
    case Op::Constant: out += format_number(n.value); break;
    case Op::Variable: out += coordinate_name(n.index); break;
    case Op::Add: binary(" + "); break;
    case Op::Sub: binary(" - "); break;
    case Op::Mul: binary(" * "); break;
    case Op::Div: binary(" / "); break;
    case Op::Pow:
      out += '(';
      print_node(tape, n.lhs, out);
      out += ")^" + std::to_string(n.index);
      break;
    case Op::Neg:
      // Unary minus binds tighter than ^, so a negated power needs its own parentheses.
      if (tape[n.lhs].op == Op::Pow) {
        out += "(-(";
        print_node(tape, n.lhs, out);
        out += "))";
      } else {
        out += "(-";
        print_node(tape, n.lhs, out);
        out += ')';
      }
      break;
    case Op::Exp: call("exp"); break;
    case Op::Bump: call("bump"); break;
    case Op::Step: call("step"); break;
  }
}

}  // namespace

std::string print(const Expr& e) {
  std::string out;
  const auto tape = e.tape();
  print_node(tape, static_cast<std::int32_t>(tape.size()) - 1, out);
  return out;
}

// --- parser -----------------------------------------------------------------

ParseError::ParseError(const std::string& message, std::size_t position)
    : std::runtime_error(message + " at position " + std::to_string(position)), position_(position) {}

namespace {

bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; }

class Parser {
 public:
  Parser(std::string_view text, int n) : text_(text), n_(n) {}

  Expr parse_all() {
    Expr e = expr();
    skip_space();
    if (pos_ != text_.size()) fail("unexpected character '" + std::string(1, text_[pos_]) + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const { throw ParseError(what, pos_); }

  void skip_space() {
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t' || text_[pos_] == '\n' ||
                                   text_[pos_] == '\r')) {
      ++pos_;
    }
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  Expr expr() {
    Expr e = term();
    for (;;) {
      if (accept('+')) e = e + term();
      else if (accept('-')) e = e - term();
      else return e;
    }
  }

  Expr term() {
    Expr e = factor();
    for (;;) {
      if (accept('*')) {
        e = e * factor();
      } else if (accept('/')) {
        const std::size_t at = pos_;
        Expr d = factor();
        try {
          e = e / d;
        } catch (const std::domain_error& err) {
          throw ParseError(err.what(), at);
        }
      } else {
        return e;
      }
    }
  }

  Expr factor() {
    Expr b = base();
    if (accept('^')) {
      skip_space();
      const std::size_t start = pos_;
      while (pos_ < text_.size() && is_digit(text_[pos_])) ++pos_;
      if (start == pos_) fail("expected non-negative integer exponent");
      int k = 0;
      auto [ptr, ec] = std::from_chars(text_.data() + start, text_.data() + pos_, k);
      if (ec != std::errc{}) {
        pos_ = start;
        fail("exponent out of range");
      }
      b = pow(b, k);
    }
    return b;
  }

  Expr base() {
    skip_space();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    const char c = text_[pos_];
    if (c == '-') {
      ++pos_;
      return -base();
    }
    if (c == '(') {
      ++pos_;
      Expr e = expr();
      expect(')');
      return e;
    }
    if (is_digit(c) || c == '.') return number();
    if (is_alpha(c)) return identifier();
    fail("unexpected character '" + std::string(1, c) + "'");
  }

  Expr number() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && is_digit(text_[pos_])) ++pos_;
    if (pos_ < text_.size() && text_[pos_] == '.') {
      ++pos_;
      while (pos_ < text_.size() && is_digit(text_[pos_])) ++pos_;
    }
    if (pos_ - start == 1 && text_[start] == '.') {
      pos_ = start;
      fail("malformed number");
    }
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t p = pos_ + 1;
      if (p < text_.size() && (text_[p] == '+' || text_[p] == '-')) ++p;
      if (p >= text_.size() || !is_digit(text_[p])) {
        pos_ = p;
        fail("malformed exponent");
      }
      while (p < text_.size() && is_digit(text_[p])) ++p;
      pos_ = p;
    }
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(text_.data() + start, text_.data() + pos_, v);
    if (ec != std::errc{} || ptr != text_.data() + pos_ || !std::isfinite(v)) {
      pos_ = start;
      fail("malformed number");
    }
    return Expr::constant(v);
  }

  Expr identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && is_alpha(text_[pos_])) ++pos_;
    const std::string_view name = text_.substr(start, pos_ - start);
    if ((name == "x" || name == "y") && pos_ < text_.size() && is_digit(text_[pos_])) {
      const std::size_t digits = pos_;
      while (pos_ < text_.size() && is_digit(text_[pos_])) ++pos_;
      int i = 0;
      auto [ptr, ec] = std::from_chars(text_.data() + digits, text_.data() + pos_, i);
      if (ec != std::errc{} || i < 1 || i > n_) {
        throw ParseError("variable index out of range: " + std::string(text_.substr(start, pos_ - start)) +
                             " (n = " + std::to_string(n_) + ")",
                         start);
      }
      return name == "x" ? Expr::x(i) : Expr::y(i);
    }
    if (name == "exp" || name == "bump" || name == "step") {
      expect('(');
      Expr arg = expr();
      expect(')');
      if (name == "exp") return exp(arg);
      if (name == "bump") return bump(arg);
      return step(arg);
    }
    throw ParseError("unknown identifier '" + std::string(name) + "'", start);
  }

  std::string_view text_;
  int n_;
  std::size_t pos_ = 0;
};

}  // namespace

Expr parse(std::string_view text, int n) {
  if (n < 1 || n > kMaxHalfDim) throw std::invalid_argument("parse: half-dimension out of range");
  return Parser(text, n).parse_all();
}

}  // namespace autonorm
