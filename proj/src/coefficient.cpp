#include "starkit/coefficient.hpp"

#include <cctype>
#include <cmath>
#include <limits>

namespace starkit {
namespace {

// Splits k into (square part s, squarefree part f) with k = s^2 * f.
std::pair<std::int64_t, std::int64_t> split_square(std::int64_t k) {
  std::int64_t s = 1;
  std::int64_t f = 1;
  for (std::int64_t d = 2; d * d <= k; ++d) {
    while (k % (d * d) == 0) {
      k /= d * d;
      s *= d;
    }
    if (k % d == 0) {
      k /= d;
      f *= d;
    }
  }
  return {s, f * k};
}

std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
  std::int64_t out = 0;
  if (__builtin_mul_overflow(a, b, &out)) throw ValidationError("coefficient overflow");
  return out;
}

}  // namespace

Coefficient::Coefficient(Rational r, std::int64_t radicand) : rational_(r) {
  if (radicand <= 0) throw ValidationError("radicand must be positive");
  auto [s, f] = split_square(radicand);
  rational_ *= Rational(s);
  radicand_ = f;
}

double Coefficient::value() const { return static_cast<double>(value_ld()); }

long double Coefficient::value_ld() const {
  const long double r =
      static_cast<long double>(rational_.numerator()) / static_cast<long double>(rational_.denominator());
  return radicand_ == 1 ? r : r * std::sqrt(static_cast<long double>(radicand_));
}

Coefficient Coefficient::operator*(const Coefficient& o) const {
  if (is_zero() || o.is_zero()) return Coefficient();
  const std::int64_t g = std::gcd(radicand_, o.radicand_);
  Rational r = rational_ * o.rational_ * Rational(g);
  Coefficient out;
  out.rational_ = r;
  out.radicand_ = checked_mul(radicand_ / g, o.radicand_ / g);
  return out;
}

std::optional<Rational> Coefficient::rational_ratio(const Coefficient& a, const Coefficient& b) {
  if (b.is_zero()) return std::nullopt;
  if (a.is_zero()) return Rational(0);
  if (a.radicand_ != b.radicand_) return std::nullopt;
  return a.rational_ / b.rational_;
}

std::string rational_to_string(const Rational& r) {
  if (r.denominator() == 1) return std::to_string(r.numerator());
  return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

std::string Coefficient::to_string() const {
  if (is_zero()) return "0";
  if (radicand_ == 1) return rational_to_string(rational_);
  std::string root;
  std::int64_t k = radicand_;
  // Products of the named roots print as factors; anything else falls back
  // to an explicit "sqrt<k>" token.
  if (k % 2 == 0 && (k / 2 == 1 || k / 2 == 3)) {
    root = "sqrt2";
    k /= 2;
  }
  if (k == 3) {
    root = root.empty() ? "sqrt3" : root + "*sqrt3";
    k = 1;
  }
  if (k != 1) root = "sqrt" + std::to_string(radicand_);
  if (rational_ == Rational(1)) return root;
  if (rational_ == Rational(-1)) return "-" + root;
  return rational_to_string(rational_) + "*" + root;
}

std::optional<Rational> parse_exact_rational(const std::string& text) {
  if (text.empty()) return std::nullopt;
  const auto slash = text.find('/');
  try {
    if (slash != std::string::npos) {
      const std::string a = text.substr(0, slash);
      const std::string b = text.substr(slash + 1);
      auto is_int = [](const std::string& s) {
        std::size_t i = (!s.empty() && (s[0] == '-' || s[0] == '+')) ? 1 : 0;
        if (i >= s.size()) return false;
        for (; i < s.size(); ++i)
          if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
        return true;
      };
      if (!is_int(a) || !is_int(b)) return std::nullopt;
      const std::int64_t den = std::stoll(b);
      if (den == 0) return std::nullopt;
      return Rational(std::stoll(a), den);
    }
    // decimal with optional exponent
    std::size_t i = 0;
    bool negative = false;
    if (text[i] == '-' || text[i] == '+') negative = text[i++] == '-';
    std::int64_t mantissa = 0;
    int scale = 0;
    bool any_digit = false;
    bool seen_point = false;
    for (; i < text.size(); ++i) {
      const char c = text[i];
      if (std::isdigit(static_cast<unsigned char>(c))) {
        any_digit = true;
        if (__builtin_mul_overflow(mantissa, 10, &mantissa) ||
            __builtin_add_overflow(mantissa, c - '0', &mantissa))
          return std::nullopt;
        if (seen_point) --scale;
      } else if (c == '.' && !seen_point) {
        seen_point = true;
      } else {
        break;
      }
    }
    if (!any_digit) return std::nullopt;
    if (i < text.size()) {
      if (text[i] != 'e' && text[i] != 'E') return std::nullopt;
      const std::string exp_text = text.substr(i + 1);
      if (exp_text.empty()) return std::nullopt;
      std::size_t used = 0;
      const int e = std::stoi(exp_text, &used);
      if (used != exp_text.size()) return std::nullopt;
      scale += e;
    }
    if (scale < -18 || scale > 18) return std::nullopt;
    std::int64_t pow10 = 1;
    for (int k = 0; k < std::abs(scale); ++k) pow10 *= 10;
    Rational r = scale >= 0 ? Rational(mantissa) * Rational(pow10) : Rational(mantissa, pow10);
    return negative ? -r : r;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

}  // namespace starkit
