#include <doctest.h>

#include <cmath>
#include <numeric>

#include "starkit/circle.hpp"
#include "starkit/dsl.hpp"

using namespace starkit;

namespace {

std::vector<long long> denominators(const ContinuedFraction& cf) {
  std::vector<long long> out;
  for (const auto& c : cf.convergents) out.push_back(c.q.convert_to<long long>());
  return out;
}

const HalfLine& irrational_line(const StarBody& body) {
  for (const auto& l : body.skeleton().lines)
    if (!l.slope.rational) return l;
  throw std::runtime_error("no irrational line");
}

}  // namespace

TEST_CASE("surd parsing") {
  const auto g = parse_surd("(1+sqrt5)/2");
  REQUIRE(g);
  CHECK(g->value() == doctest::Approx(1.6180339887498949));
  CHECK(parse_surd("golden")->value() == doctest::Approx(1.6180339887498949));
  CHECK(parse_surd("sqrt2")->value() == doctest::Approx(std::sqrt(2.0)));
  CHECK(parse_surd("-1+2*sqrt3")->value() == doctest::Approx(2 * std::sqrt(3.0) - 1));
  CHECK(parse_surd("sqrt2-1")->value() == doctest::Approx(std::sqrt(2.0) - 1));
  CHECK(parse_surd("-sqrt7")->value() == doctest::Approx(-std::sqrt(7.0)));
  CHECK_FALSE(parse_surd("0.5"));
  CHECK_FALSE(parse_surd("sqrt"));
  CHECK_FALSE(parse_surd("1+sqrt5)/2"));
  CHECK(parse_surd("(1+sqrt5)/2")->to_string() == "(1+sqrt5)/2");
}

TEST_CASE("continued fractions") {
  const auto s2 = continued_fraction(*parse_surd("sqrt2"), 6);
  CHECK(s2.quotients.front() == 1);
  for (std::size_t i = 1; i < s2.quotients.size(); ++i) CHECK(s2.quotients[i] == 2);
  CHECK(denominators(s2) == std::vector<long long>{1, 2, 5, 12, 29, 70});

  const auto phi = continued_fraction(*parse_surd("golden"), 10);
  for (const auto& a : phi.quotients) CHECK(a == 1);
  CHECK(denominators(phi) == std::vector<long long>{1, 1, 2, 3, 5, 8, 13, 21, 34, 55});

  const auto r = continued_fraction(Rational(3, 7), 10);
  CHECK(r.terminated);
  REQUIRE(r.quotients.size() == 3);
  CHECK(r.quotients[0] == 0);
  CHECK(r.quotients[1] == 2);
  CHECK(r.quotients[2] == 3);
  CHECK(r.convergents.back().p == 3);
  CHECK(r.convergents.back().q == 7);

  const auto neg = continued_fraction(Rational(-7, 3), 10);
  CHECK(neg.quotients.front() == -3);
  CHECK(neg.convergents.back().p == -7);

  // sqrt7 = [2; 1, 1, 1, 4, ...], and a rescaled surd needing normalisation
  const auto s7 = continued_fraction(QuadraticSurd{0, 1, 7, 1}, 9);
  const std::vector<int> want7{2, 1, 1, 1, 4, 1, 1, 1, 4};
  for (std::size_t i = 0; i < want7.size(); ++i) CHECK(s7.quotients[i] == want7[i]);
  const auto half = continued_fraction(QuadraticSurd{1, 1, 3, 3}, 8);
  const auto hf = continued_fraction(static_cast<long double>((1 + std::sqrt(3.0L)) / 3), 8);
  for (std::size_t i = 0; i < 8; ++i) CHECK(half.quotients[i] == hf.quotients[i]);
  const auto negs = continued_fraction(QuadraticSurd{1, -1, 2, 1}, 6);  // 1 - sqrt2 = [-1; 1, 1, 2, 2, 2]
  const std::vector<int> wantn{-1, 1, 1, 2, 2, 2};
  for (std::size_t i = 0; i < wantn.size(); ++i) CHECK(negs.quotients[i] == wantn[i]);

  // convergents are best approximations: |q alpha - p| strictly decreases
  const long double a = std::sqrt(2.0L);
  long double prev = 10;
  for (const auto& c : s2.convergents) {
    const long double e = std::fabs(c.q.convert_to<long double>() * a - c.p.convert_to<long double>());
    CHECK(e < prev);
    prev = e;
  }

  const auto fl = continued_fraction(std::sqrt(2.0L), 20);
  CHECK(fl.quotients.back() == 2);
  CHECK_THROWS_AS(continued_fraction(std::sqrt(2.0L), 200), PrecisionExhausted);
  CHECK_THROWS_AS(continued_fraction(Rational(1, 2), 0), ValidationError);
}

TEST_CASE("three distance partition") {
  const long double phi_inv = (std::sqrt(5.0L) - 1) / 2;
  const auto g = three_distance_partition(phi_inv, 0, 3);
  REQUIRE(g.points.size() == 3);
  CHECK(static_cast<double>(g.points[0]) == doctest::Approx(0.2360679775));
  CHECK(static_cast<double>(g.points[1]) == doctest::Approx(0.6180339887));
  CHECK(static_cast<double>(g.points[2]) == doctest::Approx(0.8541019662));
  CHECK(static_cast<double>(g.gaps[0]) == doctest::Approx(0.3819660113));
  CHECK(static_cast<double>(g.gaps[1]) == doctest::Approx(0.2360679775));
  CHECK(static_cast<double>(g.gaps[2]) == doctest::Approx(0.3819660113));
  CHECK(g.distinct.size() == 2);

  ThreeDistanceScan scan(std::sqrt(2.0L), 0.25L);
  for (std::int64_t n = 1; n <= 3000; ++n) {
    scan.advance();
    CHECK(scan.distinct_gaps() <= 3);
    CHECK(std::fabs(scan.gap_sum() - 1.0L) < 1e-12L);
    if (n % 500 == 0) {
      const auto full = three_distance_partition(std::sqrt(2.0L), 0.25L, n);
      CHECK(scan.max_gap() == full.max_gap());
      CHECK(scan.distinct_gaps() == full.distinct.size());
    }
  }
  CHECK_THROWS_AS(three_distance_partition(0.5L, 0, 0), ValidationError);
}

TEST_CASE("ubiquity sequence") {
  const long double inv = 1 / std::sqrt(2.0L);
  const auto seq = ubiquity_sequence(inv, 2000);
  REQUIRE(seq.size() > 20);
  for (std::size_t i = 1; i < seq.size(); ++i) CHECK(seq[i] > seq[i - 1]);
  for (std::int64_t n : seq) CHECK(ubiquity_covers(inv, n));
  // convergent denominators of sqrt2 are in the sequence
  for (std::int64_t q : {5, 12, 29, 70, 169, 408, 985})
    CHECK(std::find(seq.begin(), seq.end(), q) != seq.end());
  CHECK(ubiquity_sequence(0.5L, 1) == std::vector<std::int64_t>{1});

  std::vector<std::int64_t> all(300);
  std::iota(all.begin(), all.end(), 1);
  const auto batch = ubiquity_covers_all(inv, all);
  for (std::int64_t n : all) CHECK(batch[static_cast<std::size_t>(n - 1)] == ubiquity_covers(inv, n));
  const auto coarse = ubiquity_covers_all(0.37L, {1, 2, 3, 10, 50});
  for (std::size_t i = 0; i < coarse.size(); ++i)
    CHECK(coarse[i] == ubiquity_covers(0.37L, std::vector<std::int64_t>{1, 2, 3, 10, 50}[i]));
  CHECK_THROWS_AS(ubiquity_covers_all(inv, {5, 3}), ValidationError);

  const auto fib = ubiquity_sequence((std::sqrt(5.0L) - 1) / 2, 999);
  for (std::int64_t f : {3, 5, 8, 13, 21, 34, 55, 89, 144, 233, 377, 610, 987})
    CHECK(std::find(fib.begin(), fib.end(), f) != fib.end());
}

TEST_CASE("interval system on the cusp") {
  const StarBody cusp(builtin::irrational_cusp());
  const auto& line = irrational_line(cusp);
  const auto sys = interval_system(cusp, line, 0.2, 0.3, 2000);
  CHECK(std::fabs(static_cast<double>(sys.alpha)) == doctest::Approx(std::sqrt(2.0)));
  CHECK(sys.k <= 0.5);
  const long double cosec = std::sqrt(1 + 1 / (sys.alpha * sys.alpha));
  for (const auto& rec : sys.records) {
    const long double y = 0.3L + rec.n;
    CHECK(std::fabs(rec.r - y * cosec) < 1e-10L);
    CHECK(std::fabs(rec.r - std::hypot(y / sys.alpha, y)) < 1e-10L);
    CHECK(rec.sigma <= rec.left);
    CHECK(rec.sigma <= rec.right);
    const double ratio = rec.len_tilde() / rec.len_i();
    CHECK(ratio >= sys.k / 4);
    CHECK(ratio <= 1.0);
  }
  // widths of the cusp decay like 1/r
  const auto& a = sys.records[99];
  const auto& b = sys.records[1999];
  CHECK(a.w_plus * static_cast<double>(a.r) == doctest::Approx(b.w_plus * static_cast<double>(b.r)).epsilon(0.02));

  const auto cov = coverage_experiment(sys, {0, 10, 100, 1000, 2000}, 20000, 3);
  REQUIRE(cov.size() == 5);
  CHECK(cov[0].once == 0.0);
  for (std::size_t i = 1; i < cov.size(); ++i) {
    CHECK(cov[i].once >= cov[i - 1].once);
    CHECK(cov[i].at_least_k <= cov[i].once);
  }
  const auto sums = tilde_length_sums(sys, {10, 100, 1000});
  CHECK(sums[0] < sums[1]);
  CHECK(sums[1] < sums[2]);
  CHECK(sys.lambda(12) > 3.0 / 13);
  CHECK_THROWS_AS(sys.lambda(0), ValidationError);
  CHECK_THROWS_AS(coverage_experiment(sys, {2001}, 10, 1), ValidationError);
}

TEST_CASE("interval system symmetric body and rejections") {
  // the second form is constant along the normal of x2 = sqrt2 x1
  const StarBody sym(parse_distance_function("gm(abs(-sqrt2,1),abs(1,sqrt2))"));
  const auto& line = [&]() -> const HalfLine& {
    for (const auto& l : sym.skeleton().lines)
      if (std::fabs(l.slope.value - std::sqrt(2.0)) < 1e-9) return l;
    throw std::runtime_error("missing line");
  }();
  const auto sys = interval_system(sym, line, 0.1, 0.0, 500);
  for (const auto& rec : sys.records) CHECK(rec.w_plus / rec.w_minus == doctest::Approx(1.0).epsilon(1e-9));

  // shallow slope: axes are swapped so |alpha| > 1
  const StarBody shallow(parse_distance_function("gm(abs(1,-sqrt2),abs(0,1))"));
  const auto s2 = interval_system(shallow, irrational_line(shallow), 0.1, 0.0, 50);
  CHECK(s2.swapped);
  CHECK(std::fabs(static_cast<double>(s2.alpha)) > 1.0);

  const StarBody height(builtin::height());
  CHECK_THROWS_AS(interval_system(height, HalfLine{}, 0.1, 0.0, 10), ValidationError);
  const StarBody cusp(builtin::irrational_cusp());
  HalfLine fake = irrational_line(cusp);
  fake.significant = false;
  CHECK_THROWS_AS(interval_system(cusp, fake, 0.1, 0.0, 10), NotSignificant);
  CHECK_THROWS_AS(interval_system(cusp, irrational_line(cusp), 0.1, 1.0, 10), ValidationError);
}

TEST_CASE("swap axes") {
  const Expr e = parse_distance_function("max(abs(1,2),scale(2,abs(3,0)))");
  CHECK(print_expr(swap_axes(e)) == print_expr(parse_distance_function("max(abs(2,1),scale(2,abs(0,3)))")));
  CHECK(swap_axes(swap_axes(e)) == e);
}
