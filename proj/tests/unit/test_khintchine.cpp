#include <doctest.h>

#include <cmath>
#include <fstream>

#include "starkit/dsl.hpp"
#include "starkit/khintchine.hpp"

using namespace starkit;

TEST_CASE("psi families") {
  const auto p = parse_psi("pow:1.6");
  CHECK(p.kind() == PsiFamily::Kind::power);
  CHECK(p(1) == 1.0);
  CHECK(p(32) == doctest::Approx(std::pow(32.0, -1.6)));
  CHECK(p.q_psi_nonincreasing(1000));
  CHECK_FALSE(parse_psi("pow:0.5").q_psi_nonincreasing(10));
  CHECK(p.to_string() == "pow:1.6");

  const auto pl = parse_psi("powlog:1.5,1.2");
  CHECK(pl.first_q() == 2);
  CHECK(pl(3) == doctest::Approx(std::pow(3.0, -1.5) * std::pow(std::log(3.0), -1.2)));
  CHECK_THROWS_AS(pl(1), ValidationError);
  CHECK(pl.to_string() == "powlog:1.5,1.2");

  const std::string path = "psi_table_test.csv";
  {
    std::ofstream out(path);
    out << "q,psi\n1,0.5\n2,0.2\n3,0.1\n";
  }
  const auto t = parse_psi(path);
  CHECK(t.last_q() == 3);
  CHECK(t(2) == 0.2);
  CHECK_THROWS_AS(t(4), ValidationError);
  {
    std::ofstream out(path);
    out << "q,psi\n1,0.5\n3,0.1\n";
  }
  CHECK_THROWS_AS(parse_psi(path), ValidationError);
  std::remove(path.c_str());

  CHECK_THROWS_AS(parse_psi("pow:x"), ValidationError);
  CHECK_THROWS_AS(parse_psi("powlog:1.5"), ValidationError);
  CHECK_THROWS_AS(parse_psi("exp:1"), ValidationError);
  CHECK_THROWS_AS(PsiFamily::table({0.1, -1.0}), ValidationError);
}

TEST_CASE("analytic verdicts") {
  const StarBody height(builtin::height());
  const StarBody mult(builtin::multiplicative());
  const StarBody uj(builtin::union_jack());
  CHECK(analytic_verdict(height, PsiFamily::power(2.0)) == Verdict::convergent);
  CHECK(analytic_verdict(height, PsiFamily::power(1.6)) == Verdict::convergent);
  CHECK(analytic_verdict(height, PsiFamily::power(1.5)) == Verdict::divergent);
  CHECK(analytic_verdict(height, PsiFamily::power(1.4)) == Verdict::divergent);
  CHECK(analytic_verdict(height, PsiFamily::powerlog(1.5, 0.5)) == Verdict::divergent);
  CHECK(analytic_verdict(height, PsiFamily::powerlog(1.5, 0.51)) == Verdict::convergent);
  CHECK(analytic_verdict(mult, PsiFamily::powerlog(1.5, 1.2)) == Verdict::convergent);
  CHECK(analytic_verdict(mult, PsiFamily::powerlog(1.5, 0.8)) == Verdict::divergent);
  CHECK(analytic_verdict(mult, PsiFamily::powerlog(1.5, 1.0)) == Verdict::divergent);
  CHECK(analytic_verdict(mult, PsiFamily::power(1.5)) == Verdict::divergent);
  CHECK(analytic_verdict(mult, PsiFamily::power(0.9)) == Verdict::divergent);
  CHECK(analytic_verdict(mult, PsiFamily::power(1.6)) == Verdict::convergent);
  CHECK(analytic_verdict(uj, PsiFamily::power(2.0)) == Verdict::inconclusive);
  CHECK(analytic_verdict(height, PsiFamily::table({0.1})) == Verdict::inconclusive);
  const StarBody strip(parse_distance_function("abs(0,2)"));
  CHECK(density_growth(strip) == DensityGrowth::linear);
  CHECK(analytic_verdict(strip, PsiFamily::power(2.5)) == Verdict::convergent);
  CHECK(analytic_verdict(strip, PsiFamily::power(2.0)) == Verdict::divergent);
}

TEST_CASE("series partial sums") {
  const StarBody height(builtin::height());
  const auto s = series_partial_sums(height, PsiFamily::power(2.0), 1000);
  REQUIRE(s.size() == 1000);
  // 4 * sum_{k <= 1000} k^-2
  CHECK(s.back().sum == doctest::Approx(6.575738266726246).epsilon(1e-12));
  CHECK(s.back().sum < 4 * M_PI * M_PI / 6);
  for (std::size_t i = 1; i < s.size(); ++i) CHECK(s[i].sum >= s[i - 1].sum);
  // Cauchy: successive dyadic increments shrink geometrically
  double prev_gap = 1e300;
  for (std::int64_t q = 16; q <= 512; q *= 2) {
    const double gap = s[2 * q - 1].sum - s[q - 1].sum;
    CHECK(gap < 0.6 * prev_gap);
    prev_gap = gap;
  }

  const StarBody mult(builtin::multiplicative());
  const auto m = series_partial_sums(mult, PsiFamily::powerlog(1.5, 1.2), 2000);
  CHECK(m.front().q == 2);
  const double eps2 = 2 * std::pow(2.0, -1.5) * std::pow(std::log(2.0), -1.2);
  CHECK(m.front().sum == doctest::Approx(density(mult, eps2).value));
  CHECK_THROWS_AS(series_partial_sums(height, PsiFamily::table({0.5, 0.2}), 3), ValidationError);
}

TEST_CASE("tail measure against union bound and coupling") {
  const StarBody height(builtin::height());
  const ResonantSearch search(height);
  const auto psi = PsiFamily::power(1.6);
  const auto t = tail_measure(search, psi, 64, 20000, 7);
  CHECK(t.value <= tail_union_bound(height, psi, 64) + 3 * t.stderr_);
  const auto wider = tail_measure(search, PsiFamily::power(1.5), 64, 20000, 7);
  CHECK(t.value <= wider.value);
  CHECK(tail_measure(search, PsiFamily::power(0.0), 4, 500, 1).value == 1.0);
  CHECK_THROWS_AS(tail_measure(search, psi, 0, 10, 1), ValidationError);
  CHECK(tail_union_bound(height, psi, 256) == doctest::Approx(0.8577482937170569).epsilon(1e-12));
}

TEST_CASE("euler phi sums") {
  const auto phi = totients(30);
  CHECK(phi[1] == 1);
  CHECK(phi[12] == 4);
  CHECK(phi[29] == 28);
  CHECK(phi[30] == 8);

  const auto one = euler_phi_sum_exact([](std::int64_t) { return BigRational(1); }, 10);
  CHECK(one.lhs == BigRational(4199, 980));
  CHECK(one.rhs == BigRational(9));

  // the lhs keeps the q = 1 term
  const auto two = euler_phi_sum_exact([](std::int64_t q) { return BigRational(1, q); }, 2);
  CHECK(two.lhs == BigRational(9, 8));
  CHECK(two.ratio == BigRational(9, 4));

  const auto inv = euler_phi_sum_check([](std::int64_t q) { return 1.0 / static_cast<double>(q); }, 100000);
  CHECK(inv.lhs == doctest::Approx(5.6275922560419875).epsilon(1e-12));
  CHECK(inv.rhs == doctest::Approx(11.090146129863427).epsilon(1e-12));
  CHECK(inv.ratio >= 0.3);

  for (std::int64_t n : {1000, 10000, 100000, 1000000}) {
    const auto a = euler_phi_sum_check([](std::int64_t q) { return 1.0 / static_cast<double>(q); }, n);
    const auto b = euler_phi_sum_check(
        [](std::int64_t q) {
          const double l = std::log(static_cast<double>(q) + 1.0);
          return 1.0 / (static_cast<double>(q) * l * l);
        },
        n);
    CHECK(a.ratio > 0.3);
    CHECK(b.ratio > 0.3);
  }
  CHECK_THROWS_AS(euler_phi_sum_check([](std::int64_t q) { return static_cast<double>(q); }, 10), ValidationError);
  CHECK_THROWS_AS(euler_phi_sum_check([](std::int64_t) { return 1.0; }, 1), ValidationError);
}

TEST_CASE("best approximations") {
  const StarBody height(builtin::height());
  const ResonantSearch hs(height);
  const auto third = best_approximations(hs, {1.0 / 3, 2.0 / 3}, 3);
  CHECK(third.per_q[2].q == 3);
  CHECK(third.per_q[2].value < 1e-15);

  const Vec2 x{std::sqrt(2.0) - 1, std::sqrt(3.0) - 1};
  const auto b = best_approximations(hs, x, 100);
  for (const auto& h : b.per_q) CHECK(h.value == hs.exhaustive(x, h.q)->value);
  for (std::size_t i = 1; i < b.records.size(); ++i) {
    CHECK(b.records[i].value < b.records[i - 1].value);
    CHECK(b.records[i].q > b.records[i - 1].q);
  }

  const StarBody mult(builtin::multiplicative());
  const ResonantSearch ms(mult);
  const auto r = best_approximations(ms, {std::sqrt(2.0) - 1, std::sqrt(3.0) - 1}, 500);
  REQUIRE(r.records.size() > 3);
  for (std::size_t i = 1; i < r.records.size(); ++i) CHECK(r.records[i].value < r.records[i - 1].value);
}
