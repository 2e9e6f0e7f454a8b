#include <doctest.h>

#include <cmath>
#include <numbers>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "starkit/dsl.hpp"
#include "starkit/random.hpp"
#include "starkit/skeleton.hpp"

using namespace starkit;

namespace {

std::vector<DistanceFunction> registered() {
  return {DistanceFunction(builtin::height()), DistanceFunction(builtin::multiplicative()),
          DistanceFunction(builtin::union_jack()), DistanceFunction(builtin::irrational_cusp())};
}

// Random expression over a small coefficient pool, for parser round trips.
Expr random_expr(const CounterRng& rng, std::uint64_t& idx, int depth) {
  static const char* pool[] = {"1", "-1", "2", "1/3", "-5/7", "0.25", "sqrt2", "-sqrt3", "invsqrt2", "3/2*sqrt2", "0"};
  auto coef = [&]() { return parse_coefficient(pool[rng.bits(idx++) % 11]); };
  const auto pick = depth <= 0 ? 0 : rng.bits(idx++) % 5;
  if (pick == 0) {
    Coefficient a = coef();
    Coefficient b = coef();
    if (a.is_zero() && b.is_zero()) b = 1;
    return Expr::abs(a, b);
  }
  if (pick == 4) {
    Coefficient c = coef();
    if (c.sign() <= 0) c = Coefficient(Rational(3, 2));
    return Expr::scale(c, random_expr(rng, idx, depth - 1));
  }
  std::vector<Expr> kids;
  const int n = 1 + static_cast<int>(rng.bits(idx++) % 3);
  for (int i = 0; i < n; ++i) kids.push_back(random_expr(rng, idx, depth - 1));
  if (pick == 1) return Expr::min(std::move(kids));
  if (pick == 2) return Expr::max(std::move(kids));
  return Expr::gm(std::move(kids));
}

}  // namespace

TEST_CASE("coefficients are exact") {
  const Coefficient r2 = Coefficient::sqrt_of(2);
  CHECK(r2 * r2 == Coefficient(2));
  CHECK(Coefficient::sqrt_of(8) == Coefficient(Rational(2), 2));
  CHECK((r2 * Coefficient::sqrt_of(3)).radicand() == 6);
  CHECK(Coefficient::rational_ratio(r2, Coefficient(Rational(1, 2), 2)) == Rational(2));
  CHECK_FALSE(Coefficient::rational_ratio(r2, Coefficient(1)).has_value());
  CHECK(parse_exact_rational("-0.125") == Rational(-1, 8));
  CHECK(parse_exact_rational("2.5e-3") == Rational(1, 400));
  CHECK_FALSE(parse_exact_rational("99999999999999999999").has_value());
}

TEST_CASE("evaluate examples") {
  const DistanceFunction h(builtin::height());
  const DistanceFunction m(builtin::multiplicative());
  const DistanceFunction uj(builtin::union_jack());
  CHECK(h({0.3, -0.7}) == 0.7);
  CHECK(m({0.2, 0.3}) == doctest::Approx(std::sqrt(0.06)).epsilon(1e-15));
  CHECK(uj({1.0, 1.0}) == 0.0);
  // min{|xy|, |x^2-y^2|/2}^{1/2}
  for (auto [x, y] : {std::pair{0.3, 0.9}, {2.0, -0.5}, {-1.2, 0.1}}) {
    const double direct = std::sqrt(std::min(std::fabs(x * y), std::fabs(x * x - y * y) / 2));
    CHECK(uj({x, y}) == doctest::Approx(direct).epsilon(1e-14));
  }
}

TEST_CASE("parser") {
  CHECK(parse_distance_function("max(abs(1,0),abs(0,1))") == builtin::height());
  const Expr uj = parse_distance_function(
      "min(gm(abs(1,0),abs(0,1)),gm(abs(invsqrt2,invsqrt2),abs(invsqrt2,-invsqrt2)))");
  CHECK(uj == builtin::union_jack());
  CHECK(DistanceFunction(uj)({1, 1}) == 0.0);

  try {
    parse_distance_function("gm(abs(1,0)");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 1);
    CHECK(e.column() == 12);
    CHECK(std::string(e.what()).find("end of input") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_distance_function("min()"), ArityError);
  CHECK_THROWS_AS(parse_distance_function("abs(1,\n foo)"), ParseError);
  CHECK_THROWS_AS(parse_distance_function("scale(-1,abs(1,0))"), ParseError);
  CHECK_THROWS_AS(parse_distance_function("abs(1e40,0)"), ParseError);
  try {
    parse_distance_function("max(abs(1,0),\n  mix(abs(0,1)))");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
    CHECK(e.column() == 3);
    CHECK(e.expected().size() == 5);
  }
}

TEST_CASE("parser round trip on a generated corpus") {
  const CounterRng rng(2024);
  std::uint64_t idx = 0;
  for (int i = 0; i < 500; ++i) {
    const Expr e = random_expr(rng, idx, 3);
    const std::string text = print_expr(e);
    const Expr back = parse_distance_function(text);
    REQUIRE(back == e);
    CHECK(print_expr(back) == text);
    CHECK(parse_distance_json(expr_to_json(e)) == e);
  }
}

TEST_CASE("homogeneity and symmetry") {
  const CounterRng rng(11);
  for (const auto& f : registered()) {
    for (std::uint64_t i = 0; i < 10000; ++i) {
      const Vec2 x{rng.uniform(4 * i) * 4 - 2, rng.uniform(4 * i + 1) * 4 - 2};
      const double t = rng.uniform(4 * i + 2) * 100;
      const double lhs = f(x * t);
      const double rhs = t * f(x);
      REQUIRE(std::fabs(lhs - rhs) <= 1e-10 * (1 + rhs));
      REQUIRE(f(-x) == f(x));
    }
  }
}

TEST_CASE("interval bound encloses samples") {
  const CounterRng rng(5);
  for (const auto& f : registered()) {
    for (std::uint64_t i = 0; i < 2000; ++i) {
      const double cx = rng.uniform(3 * i) * 6 - 3;
      const double cy = rng.uniform(3 * i + 1) * 6 - 3;
      const double h = rng.uniform(3 * i + 2);
      const Interval b = f.bound({{cx - h, cx + h}, {cy - h, cy + h}});
      for (int k = 0; k < 9; ++k) {
        const double v = f({cx + h * (k % 3 - 1) * 0.999, cy + h * (k / 3 - 1) * 0.999});
        REQUIRE(v >= b.lo);
        REQUIRE(v <= b.hi);
      }
    }
  }
}

TEST_CASE("star body property along rays") {
  const CounterRng rng(3);
  for (const auto& f : registered()) {
    for (std::uint64_t i = 0; i < 1000; ++i) {
      const double th = rng.uniform(i) * 2 * std::numbers::pi;
      const Vec2 u{std::cos(th), std::sin(th)};
      bool left = false;
      for (int k = 0; k <= 400; ++k) {
        const bool in = f(u * (0.01 * k)) < 1.0;
        if (!in) left = true;
        REQUIRE_FALSE((left && in));
      }
    }
  }
}

TEST_CASE("skeleton examples") {
  CHECK(extract_skeleton(DistanceFunction(builtin::height())).bounded());

  const auto mult = extract_skeleton(DistanceFunction(builtin::multiplicative()));
  REQUIRE(mult.lines.size() == 4);
  int vertical = 0;
  for (const auto& h : mult.lines) {
    CHECK(h.slope.rational);
    vertical += h.slope.vertical();
    if (!h.slope.vertical()) CHECK((h.slope.s == 0 && h.slope.r == 1));
    CHECK(h.significant);
    CHECK(h.width_exponent == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(h.width_nonincreasing);
    CHECK(h.symmetry_ratio == doctest::Approx(1.0));
  }
  CHECK(vertical == 2);

  const auto cusp = extract_skeleton(DistanceFunction(builtin::irrational_cusp()));
  REQUIRE(cusp.lines.size() == 4);
  int irrational = 0;
  for (const auto& h : cusp.lines) {
    if (!h.slope.rational) {
      ++irrational;
      CHECK(h.slope.value == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
    } else {
      CHECK(h.slope.vertical());
    }
  }
  CHECK(irrational == 2);
  CHECK_THROWS_AS(fundamental_rectangle(cusp), IrrationalSkeleton);

  const auto uj = extract_skeleton(DistanceFunction(builtin::union_jack()));
  CHECK(uj.lines.size() == 8);
}

TEST_CASE("skeleton soundness and completeness against an angular scan") {
  const std::vector<Expr> exprs = {
      builtin::multiplicative(), builtin::union_jack(), builtin::irrational_cusp(),
      parse_distance_function("max(gm(abs(1,0),abs(1,-1)),gm(abs(1,-1),abs(2,3)))"),
      parse_distance_function("min(abs(2,-3),scale(2,gm(abs(1,1),abs(1,0),abs(0,1))))")};
  for (const auto& e : exprs) {
    const DistanceFunction f(e);
    const auto skel = extract_skeleton(f);
    for (const auto& h : skel.lines) {
      // the exact line, carried in 50 digits; double-rounded directions of
      // irrational lines sit ~1e-16 off it, which GeoMean lifts to ~1e-8
      using Big = boost::multiprecision::cpp_bin_float_50;
      auto coef = [](const Coefficient& c) {
        Big r = Big(static_cast<long long>(c.rational().numerator())) / c.rational().denominator();
        return c.radicand() == 1 ? r : Big(r * sqrt(Big(c.radicand())));
      };
      Big d1 = coef(h.normal.b);
      Big d2 = -coef(h.normal.a);
      const Big n = sqrt(d1 * d1 + d2 * d2);
      if (d1 * h.direction.x1 + d2 * h.direction.x2 < 0) {
        d1 = -d1;
        d2 = -d2;
      }
      REQUIRE(std::fabs(static_cast<double>(d1 / n) - h.direction.x1) < 1e-15);
      REQUIRE(std::fabs(static_cast<double>(d2 / n) - h.direction.x2) < 1e-15);
      for (int k = 1; k <= 100; ++k) {
        const double t = 0.37 * k;
        REQUIRE(static_cast<double>(f.evaluate_as<Big>(t * d1 / n, t * d2 / n)) <= 1e-10 * t);
        if (h.slope.rational) REQUIRE(f(h.direction * t) <= 1e-10 * t);
      }
    }
    // Every local zero of the unit-circle scan is near a reported direction.
    constexpr int kScan = 200000;
    for (int i = 0; i < kScan; ++i) {
      const double th = 2 * std::numbers::pi * i / kScan;
      const double v = f({std::cos(th), std::sin(th)});
      if (v > 1e-3) continue;
      bool near = false;
      for (const auto& h : skel.lines) {
        double d = std::fabs(std::atan2(h.direction.x2, h.direction.x1) - std::atan2(std::sin(th), std::cos(th)));
        d = std::min(d, 2 * std::numbers::pi - d);
        near = near || d < 2e-2;
      }
      REQUIRE(near);
    }
  }
  const auto inter = extract_skeleton(DistanceFunction(exprs[3]));
  REQUIRE(inter.lines.size() == 2);
  CHECK(inter.lines[0].slope.s == 1);
  CHECK(inter.lines[0].slope.r == 1);
}

TEST_CASE("significance") {
  const DistanceFunction cusp3(parse_distance_function("gm(abs(1,0),abs(1,0),abs(0,1))"));
  const auto skel = extract_skeleton(cusp3);
  REQUIRE(skel.lines.size() == 4);
  for (const auto& h : skel.lines) {
    if (h.slope.vertical()) {
      // width of |x1| < eps^{3/2} / sqrt(r)
      CHECK(h.width_exponent == doctest::Approx(0.5).epsilon(1e-3));
      CHECK(h.significant);
    } else {
      // width of |x2| < eps^3 / r^2
      CHECK(h.width_exponent == doctest::Approx(2.0).epsilon(1e-3));
      CHECK_FALSE(h.significant);
    }
  }
}

TEST_CASE("width profile") {
  const DistanceFunction m(builtin::multiplicative());
  const Widths w = width_profile(m, Vec2{1, 0}, 10.0, 0.1);
  CHECK(w.plus == doctest::Approx(0.001).epsilon(1e-12));
  CHECK(w.minus == doctest::Approx(0.001).epsilon(1e-12));
  CHECK(width_profile(m, Vec2{1, 0}, 10.0, 0.0).total() == 0.0);

  // union jack diagonal, against a fine scan along the normal
  const DistanceFunction uj(builtin::union_jack());
  const Vec2 u{std::numbers::sqrt2 / 2, std::numbers::sqrt2 / 2};
  const Widths d = width_profile(uj, u, std::numbers::sqrt2, 0.1);
  const Vec2 n{-u.x2, u.x1};
  const double step = 1e-6;
  double scan_plus = 0;
  while (uj(u * std::numbers::sqrt2 + n * (scan_plus + step)) < 0.1) scan_plus += step;
  double scan_minus = 0;
  while (uj(u * std::numbers::sqrt2 - n * (scan_minus + step)) < 0.1) scan_minus += step;
  CHECK(std::fabs(d.plus - scan_plus) <= 2 * step);
  CHECK(std::fabs(d.minus - scan_minus) <= 2 * step);
  CHECK(d.plus == doctest::Approx(d.minus).epsilon(1e-9));
}

TEST_CASE("fundamental rectangle") {
  const auto mult = extract_skeleton(DistanceFunction(builtin::multiplicative()));
  const auto r = fundamental_rectangle(mult);
  CHECK(r.s_hat == 1);
  CHECK(r.r_hat == 1);
  const auto slope23 = extract_skeleton(DistanceFunction(parse_distance_function("gm(abs(2,-3),abs(1,1))")));
  const auto r23 = fundamental_rectangle(slope23);
  // lines of slope 2/3 and -1/1
  CHECK(r23.s_hat == 2);
  CHECK(r23.r_hat == 3);
  SkeletonReport only23;
  for (const auto& h : slope23.lines)
    if (h.slope.s == 2) only23.lines.push_back(h);
  CHECK(fundamental_rectangle(only23).s_hat == 2);
  CHECK(fundamental_rectangle(only23).r_hat == 3);
  CHECK(fundamental_rectangle(SkeletonReport{}).s_hat == 1);
}
