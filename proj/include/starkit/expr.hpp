#pragma once
/**
 * @file expr.hpp
 * @brief Planar distance functions as an expression algebra.
 *
 * Atoms are absolute linear forms |a*x1 + b*x2| with exact coefficients.
 * They combine through Min, Max, GeoMean (exponent 1/k over k children) and
 * positive Scale. Every expression is continuous, non-negative and
 * homogeneous of degree one.
 *
 * A DistanceFunction owns the tree plus a flat postorder program used for
 * evaluation, so hot loops never touch the tree.
 */

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "starkit/coefficient.hpp"
#include "starkit/common.hpp"

namespace starkit {

enum class NodeKind { abs, min, max, gm, scale };

const char* node_kind_name(NodeKind kind);

/// (x1, x2) -> a*x1 + b*x2 with (a, b) != (0, 0).
struct LinearForm {
  Coefficient a;
  Coefficient b;

  bool operator==(const LinearForm&) const = default;
  /// True when both coefficients are exact rationals.
  bool rational() const { return a.is_rational() && b.is_rational(); }
};

struct Expr {
  NodeKind kind{NodeKind::abs};
  LinearForm form;               // abs only
  Coefficient factor{1};         // scale only
  std::vector<Expr> children;    // min / max / gm: >= 1, scale: exactly 1

  static Expr abs(Coefficient a, Coefficient b);
  static Expr min(std::vector<Expr> children);
  static Expr max(std::vector<Expr> children);
  static Expr gm(std::vector<Expr> children);
  static Expr scale(Coefficient c, Expr child);

  bool operator==(const Expr&) const = default;
  std::size_t node_count() const;
};

struct Interval {
  double lo{0.0};
  double hi{0.0};
};

/// Axis-aligned box [x1.lo, x1.hi] x [x2.lo, x2.hi].
struct Box {
  Interval x1;
  Interval x2;
};

class DistanceFunction {
 public:
  explicit DistanceFunction(Expr expr);

  const Expr& expr() const { return expr_; }

  double operator()(Vec2 x) const { return evaluate(x.x1, x.x2); }
  double evaluate(double x1, double x2) const;
  long double evaluate_ld(long double x1, long double x2) const;

  /// Evaluation in any real type T constructible from integers and closed
  /// under sqrt/exp/log/abs (used with boost::multiprecision floats).
  template <class T>
  T evaluate_as(const T& x1, const T& x2) const;

  /// Rigorous enclosure of F over a box (lower end rounded down slightly).
  Interval bound(const Box& box) const;

  /// Canonical DSL text.
  std::string to_string() const;

  /// True when every Abs atom has rational coefficients.
  bool rational_atoms() const { return rational_atoms_; }

  /// Abs atoms in program order (duplicates kept).
  const std::vector<LinearForm>& atoms() const { return atoms_; }

 private:
  struct Op {
    NodeKind kind;
    std::uint32_t arity;
    double a, b, c;
    long double al, bl, cl;
    std::size_t exact;  // index into exact_ (abs: 2 entries, scale: 1)
  };

  template <class T, class Coef>
  T run(const T& x1, const T& x2, Coef&& coef) const;

  Expr expr_;
  std::vector<Op> program_;
  std::vector<Coefficient> exact_;
  std::vector<LinearForm> atoms_;
  std::size_t stack_depth_{0};
  bool rational_atoms_{true};
};

// ---------------------------------------------------------------------------

template <class T, class Coef>
T DistanceFunction::run(const T& x1, const T& x2, Coef&& coef) const {
  using std::abs;
  using std::exp;
  using std::log;
  std::vector<T> stack;
  stack.reserve(stack_depth_);
  for (const Op& op : program_) {
    switch (op.kind) {
      case NodeKind::abs: {
        const T v = coef(op, 0) * x1 + coef(op, 1) * x2;
        stack.push_back(abs(v));
        break;
      }
      case NodeKind::scale:
        stack.back() = coef(op, 0) * stack.back();
        break;
      case NodeKind::min:
      case NodeKind::max: {
        T acc = stack.back();
        stack.pop_back();
        for (std::uint32_t i = 1; i < op.arity; ++i) {
          const T v = stack.back();
          stack.pop_back();
          if (op.kind == NodeKind::min ? v < acc : v > acc) acc = v;
        }
        stack.push_back(acc);
        break;
      }
      case NodeKind::gm: {
        bool zero = false;
        T logsum(0);
        for (std::uint32_t i = 0; i < op.arity; ++i) {
          const T v = stack.back();
          stack.pop_back();
          if (v == 0) zero = true;
          if (!zero) logsum += log(v);
        }
        stack.push_back(zero ? T(0) : T(exp(logsum / T(static_cast<int>(op.arity)))));
        break;
      }
    }
  }
  return stack.back();
}

template <class T>
T DistanceFunction::evaluate_as(const T& x1, const T& x2) const {
  using std::sqrt;
  auto to_t = [](const Coefficient& c) {
    T r = T(static_cast<long long>(c.rational().numerator())) /
          T(static_cast<long long>(c.rational().denominator()));
    if (c.radicand() != 1) r *= sqrt(T(static_cast<long long>(c.radicand())));
    return r;
  };
  return run(x1, x2, [&](const Op& op, int k) { return to_t(exact_[op.exact + k]); });
}

// Named functions used throughout the tests, acceptance suite and CLI.
namespace builtin {
Expr height();          // max(|x1|, |x2|)
Expr multiplicative();  // sqrt(|x1| |x2|)
Expr union_jack();      // min(sqrt|x1 x2|, sqrt(|x1+x2||x1-x2|/2))
Expr irrational_cusp(); // sqrt(|x2 - sqrt2 x1| |x1|)
}  // namespace builtin

}  // namespace starkit
