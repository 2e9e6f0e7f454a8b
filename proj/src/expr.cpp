#include "starkit/expr.hpp"

#include <algorithm>
#include <limits>

namespace starkit {

const char* node_kind_name(NodeKind kind) {
  switch (kind) {
    case NodeKind::abs: return "abs";
    case NodeKind::min: return "min";
    case NodeKind::max: return "max";
    case NodeKind::gm: return "gm";
    case NodeKind::scale: return "scale";
  }
  return "?";
}

Expr Expr::abs(Coefficient a, Coefficient b) {
  if (a.is_zero() && b.is_zero()) throw ValidationError("abs(0,0) is not a linear form");
  Expr e;
  e.kind = NodeKind::abs;
  e.form = {a, b};
  return e;
}

namespace {
Expr combinator(NodeKind kind, std::vector<Expr> children) {
  if (children.empty())
    throw ArityError(std::string(node_kind_name(kind)) + " needs at least one argument");
  Expr e;
  e.kind = kind;
  e.children = std::move(children);
  return e;
}
}  // namespace

Expr Expr::min(std::vector<Expr> children) { return combinator(NodeKind::min, std::move(children)); }
Expr Expr::max(std::vector<Expr> children) { return combinator(NodeKind::max, std::move(children)); }
Expr Expr::gm(std::vector<Expr> children) { return combinator(NodeKind::gm, std::move(children)); }

Expr Expr::scale(Coefficient c, Expr child) {
  if (c.sign() <= 0) throw ValidationError("scale factor must be positive");
  Expr e;
  e.kind = NodeKind::scale;
  e.factor = c;
  e.children.push_back(std::move(child));
  return e;
}

std::size_t Expr::node_count() const {
  std::size_t n = 1;
  for (const auto& c : children) n += c.node_count();
  return n;
}

// ---------------------------------------------------------------------------

DistanceFunction::DistanceFunction(Expr expr) : expr_(std::move(expr)) {
  std::size_t depth = 0;
  auto emit = [&](auto&& self, const Expr& e) -> void {
    for (const auto& c : e.children) self(self, c);
    Op op{};
    op.kind = e.kind;
    op.arity = static_cast<std::uint32_t>(e.children.size());
    op.exact = exact_.size();
    switch (e.kind) {
      case NodeKind::abs:
        if (e.form.a.is_zero() && e.form.b.is_zero())
          throw ValidationError("abs(0,0) is not a linear form");
        op.a = e.form.a.value();
        op.b = e.form.b.value();
        op.al = e.form.a.value_ld();
        op.bl = e.form.b.value_ld();
        exact_.push_back(e.form.a);
        exact_.push_back(e.form.b);
        atoms_.push_back(e.form);
        rational_atoms_ = rational_atoms_ && e.form.rational();
        ++depth;
        break;
      case NodeKind::scale:
        if (e.children.size() != 1) throw ArityError("scale takes exactly one expression");
        if (e.factor.sign() <= 0) throw ValidationError("scale factor must be positive");
        op.c = e.factor.value();
        op.cl = e.factor.value_ld();
        exact_.push_back(e.factor);
        break;
      default:
        if (e.children.empty())
          throw ArityError(std::string(node_kind_name(e.kind)) + " needs at least one argument");
        depth -= e.children.size() - 1;
        break;
    }
    stack_depth_ = std::max(stack_depth_, depth);
    program_.push_back(op);
  };
  emit(emit, expr_);
}

double DistanceFunction::evaluate(double x1, double x2) const {
  constexpr std::size_t kInline = 64;
  if (stack_depth_ > kInline) {
    return run(x1, x2, [](const Op& op, int k) { return op.kind == NodeKind::scale ? op.c : (k ? op.b : op.a); });
  }
  std::array<double, kInline> stack;
  std::size_t top = 0;
  for (const Op& op : program_) {
    switch (op.kind) {
      case NodeKind::abs:
        stack[top++] = std::fabs(op.a * x1 + op.b * x2);
        break;
      case NodeKind::scale:
        stack[top - 1] *= op.c;
        break;
      case NodeKind::min: {
        double acc = stack[--top];
        for (std::uint32_t i = 1; i < op.arity; ++i) acc = std::min(acc, stack[--top]);
        stack[top++] = acc;
        break;
      }
      case NodeKind::max: {
        double acc = stack[--top];
        for (std::uint32_t i = 1; i < op.arity; ++i) acc = std::max(acc, stack[--top]);
        stack[top++] = acc;
        break;
      }
      case NodeKind::gm: {
        const std::size_t base = top - op.arity;
        double prod = 1.0;
        bool zero = false;
        for (std::size_t i = base; i < top; ++i) {
          zero = zero || stack[i] == 0.0;
          prod *= stack[i];
        }
        double out = 0.0;
        if (!zero) {
          if (prod > std::numeric_limits<double>::min() && prod < std::numeric_limits<double>::infinity()) {
            out = op.arity == 1 ? prod : (op.arity == 2 ? std::sqrt(prod) : std::pow(prod, 1.0 / op.arity));
          } else {
            double logsum = 0.0;
            for (std::size_t i = base; i < top; ++i) logsum += std::log(stack[i]);
            out = std::exp(logsum / op.arity);
          }
        }
        top = base;
        stack[top++] = out;
        break;
      }
    }
  }
  return stack[0];
}

long double DistanceFunction::evaluate_ld(long double x1, long double x2) const {
  return run(x1, x2, [](const Op& op, int k) { return op.kind == NodeKind::scale ? op.cl : (k ? op.bl : op.al); });
}

Interval DistanceFunction::bound(const Box& box) const {
  constexpr std::size_t kInline = 64;
  std::vector<Interval> heap;
  std::array<Interval, kInline> inline_stack;
  Interval* stack = inline_stack.data();
  if (stack_depth_ > kInline) {
    heap.resize(stack_depth_);
    stack = heap.data();
  }
  std::size_t top = 0;
  for (const Op& op : program_) {
    switch (op.kind) {
      case NodeKind::abs: {
        const double l1 = op.a * (op.a >= 0 ? box.x1.lo : box.x1.hi);
        const double h1 = op.a * (op.a >= 0 ? box.x1.hi : box.x1.lo);
        const double l2 = op.b * (op.b >= 0 ? box.x2.lo : box.x2.hi);
        const double h2 = op.b * (op.b >= 0 ? box.x2.hi : box.x2.lo);
        const double lo = l1 + l2;
        const double hi = h1 + h2;
        Interval v;
        if (lo <= 0.0 && hi >= 0.0) {
          v = {0.0, std::max(-lo, hi)};
        } else {
          v = {std::min(std::fabs(lo), std::fabs(hi)), std::max(std::fabs(lo), std::fabs(hi))};
        }
        stack[top++] = v;
        break;
      }
      case NodeKind::scale:
        stack[top - 1].lo *= op.c;
        stack[top - 1].hi *= op.c;
        break;
      case NodeKind::min:
      case NodeKind::max: {
        Interval acc = stack[--top];
        for (std::uint32_t i = 1; i < op.arity; ++i) {
          const Interval v = stack[--top];
          if (op.kind == NodeKind::min) {
            acc = {std::min(acc.lo, v.lo), std::min(acc.hi, v.hi)};
          } else {
            acc = {std::max(acc.lo, v.lo), std::max(acc.hi, v.hi)};
          }
        }
        stack[top++] = acc;
        break;
      }
      case NodeKind::gm: {
        const std::size_t base = top - op.arity;
        double loglo = 0.0;
        double loghi = 0.0;
        bool zero_lo = false;
        bool zero_hi = false;
        for (std::size_t i = base; i < top; ++i) {
          if (stack[i].lo <= 0.0) zero_lo = true; else loglo += std::log(stack[i].lo);
          if (stack[i].hi <= 0.0) zero_hi = true; else loghi += std::log(stack[i].hi);
        }
        top = base;
        stack[top++] = {zero_lo ? 0.0 : std::exp(loglo / op.arity), zero_hi ? 0.0 : std::exp(loghi / op.arity)};
        break;
      }
    }
  }
  Interval out = stack[0];
  out.lo = std::max(0.0, out.lo * (1.0 - 1e-12));
  out.hi = out.hi * (1.0 + 1e-12);
  return out;
}

namespace builtin {

Expr height() { return Expr::max({Expr::abs(1, 0), Expr::abs(0, 1)}); }

Expr multiplicative() { return Expr::gm({Expr::abs(1, 0), Expr::abs(0, 1)}); }

Expr union_jack() {
  const Coefficient h(Rational(1, 2), 2);
  return Expr::min({multiplicative(), Expr::gm({Expr::abs(h, h), Expr::abs(h, -h)})});
}

Expr irrational_cusp() { return Expr::gm({Expr::abs(-Coefficient::sqrt_of(2), 1), Expr::abs(1, 0)}); }

}  // namespace builtin

}  // namespace starkit
