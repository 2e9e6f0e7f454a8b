#pragma once
// Exact real coefficients of the form  r * sqrt(k)  with r rational and k a
// squarefree positive integer. This is closed under multiplication, covers
// every constant the distance-function language accepts (p/q, decimals,
// sqrt2, sqrt3, invsqrt2 and their products) and lets slope rationality be
// decided exactly.

#include <cstdint>
#include <optional>
#include <string>

#include "starkit/common.hpp"

namespace starkit {

class Coefficient {
 public:
  Coefficient() = default;
  Coefficient(std::int64_t integer) : rational_(integer) {}  // NOLINT(google-explicit-constructor)
  Coefficient(Rational r) : rational_(r) {}                  // NOLINT(google-explicit-constructor)
  /// r * sqrt(radicand); the radicand is reduced to squarefree form.
  Coefficient(Rational r, std::int64_t radicand);

  static Coefficient sqrt_of(std::int64_t k) { return Coefficient(Rational(1), k); }

  const Rational& rational() const { return rational_; }
  std::int64_t radicand() const { return radicand_; }
  bool is_zero() const { return rational_.numerator() == 0; }
  bool is_rational() const { return radicand_ == 1 || is_zero(); }
  int sign() const { return rational_.numerator() > 0 ? 1 : (rational_.numerator() < 0 ? -1 : 0); }

  double value() const;
  long double value_ld() const;

  Coefficient operator*(const Coefficient& o) const;
  Coefficient operator-() const { return Coefficient(-rational_, radicand_); }
  bool operator==(const Coefficient& o) const {
    return rational_ == o.rational_ && (is_zero() || radicand_ == o.radicand_);
  }

  /// Exact quotient a/b when it is rational (same radicand or a == 0).
  static std::optional<Rational> rational_ratio(const Coefficient& a, const Coefficient& b);

  /// Canonical text form, re-parseable by the distance-function language:
  /// "3", "-1/2", "sqrt2", "-3/4*sqrt3", "sqrt2*sqrt3".
  std::string to_string() const;

 private:
  Rational rational_{0};
  std::int64_t radicand_{1};
};

/// Parses an exact decimal ("-0.125", "3", "2.5e-3") or "p/q" into a rational.
std::optional<Rational> parse_exact_rational(const std::string& text);

std::string rational_to_string(const Rational& r);

}  // namespace starkit
