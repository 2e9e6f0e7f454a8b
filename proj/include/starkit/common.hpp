#pragma once
// Shared vocabulary types and the error hierarchy used across starkit.

#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <boost/rational.hpp>

namespace starkit {

using Rational = boost::rational<std::int64_t>;

/// Plane point / vector. Components must be finite.
struct Vec2 {
  double x1{0.0};
  double x2{0.0};

  constexpr Vec2() = default;
  constexpr Vec2(double a, double b) : x1(a), x2(b) {}

  constexpr Vec2 operator+(const Vec2& o) const { return {x1 + o.x1, x2 + o.x2}; }
  constexpr Vec2 operator-(const Vec2& o) const { return {x1 - o.x1, x2 - o.x2}; }
  constexpr Vec2 operator-() const { return {-x1, -x2}; }
  constexpr Vec2 operator*(double s) const { return {x1 * s, x2 * s}; }
  constexpr bool operator==(const Vec2&) const = default;

  double norm() const { return std::hypot(x1, x2); }
  double dot(const Vec2& o) const { return x1 * o.x1 + x2 * o.x2; }
  bool finite() const { return std::isfinite(x1) && std::isfinite(x2); }
};

inline constexpr Vec2 operator*(double s, const Vec2& v) { return v * s; }

/// Integer lattice point.
struct Lattice2 {
  std::int64_t p1{0};
  std::int64_t p2{0};
  constexpr bool operator==(const Lattice2&) const = default;
};

// ---------------------------------------------------------------------------
// Errors. Every error carries a stable machine-readable kind; the CLI maps
// `validation` errors to exit code 2 and `numeric` errors to exit code 3.

enum class ErrorCategory { validation, numeric };

class Error : public std::runtime_error {
 public:
  Error(std::string kind, ErrorCategory category, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)), category_(category) {}

  const std::string& kind() const noexcept { return kind_; }
  ErrorCategory category() const noexcept { return category_; }

 private:
  std::string kind_;
  ErrorCategory category_;
};

#define STARKIT_DEFINE_ERROR(Name, Category)                          \
  class Name : public Error {                                         \
   public:                                                            \
    explicit Name(const std::string& message)                         \
        : Error(#Name, ErrorCategory::Category, message) {}           \
  };

STARKIT_DEFINE_ERROR(ValidationError, validation)
STARKIT_DEFINE_ERROR(ArityError, validation)
STARKIT_DEFINE_ERROR(DegenerateExpr, validation)
STARKIT_DEFINE_ERROR(IrrationalSkeleton, validation)
STARKIT_DEFINE_ERROR(SkeletonMismatch, validation)
STARKIT_DEFINE_ERROR(DimensionMismatch, validation)
STARKIT_DEFINE_ERROR(NotSignificant, validation)
STARKIT_DEFINE_ERROR(FitFailure, numeric)
STARKIT_DEFINE_ERROR(NonConvergent, numeric)
STARKIT_DEFINE_ERROR(PrecisionExhausted, numeric)
STARKIT_DEFINE_ERROR(EmptySequence, numeric)
STARKIT_DEFINE_ERROR(NoSolutions, numeric)

#undef STARKIT_DEFINE_ERROR

/// Parse failure with 1-based line/column and the set of tokens that would
/// have been accepted at that position.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, int line, int column, std::vector<std::string> expected)
      : Error("ParseError", ErrorCategory::validation, format(message, line, column, expected)),
        line_(line),
        column_(column),
        expected_(std::move(expected)) {}

  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }
  const std::vector<std::string>& expected() const noexcept { return expected_; }

 private:
  static std::string format(const std::string& message, int line, int column,
                            const std::vector<std::string>& expected) {
    std::string out = std::to_string(line) + ":" + std::to_string(column) + ": " + message;
    if (!expected.empty()) {
      out += " (expected ";
      for (std::size_t i = 0; i < expected.size(); ++i) {
        if (i) out += ", ";
        out += expected[i];
      }
      out += ")";
    }
    return out;
  }

  int line_;
  int column_;
  std::vector<std::string> expected_;
};

inline std::int64_t lcm_skip_zero(std::int64_t acc, std::int64_t v) {
  if (v == 0) return acc;
  return std::lcm(acc, v < 0 ? -v : v);
}

}  // namespace starkit
