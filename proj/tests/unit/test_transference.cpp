#include <doctest.h>

#include <cmath>
#include <set>

#include "starkit/random.hpp"
#include "starkit/transference.hpp"

using namespace starkit;

namespace {

const RealVector kSqrt23{Coefficient::sqrt_of(2), Coefficient::sqrt_of(3)};

bool contains(const std::vector<std::vector<std::int64_t>>& v, std::vector<std::int64_t> q) {
  return std::find(v.begin(), v.end(), q) != v.end();
}

bool fibonacci(std::int64_t v) {
  std::int64_t a = 1, b = 1;
  while (b < v) {
    const std::int64_t c = a + b;
    a = b;
    b = c;
  }
  return b == v || v == 1;
}

}  // namespace

TEST_CASE("signed distance and F+") {
  CHECK(nearest_signed_distance(1.75) == -0.25);
  CHECK(nearest_signed_distance(0.5) == -0.5);
  CHECK(nearest_signed_distance(-0.5) == -0.5);
  CHECK(nearest_signed_distance(-0.2) == doctest::Approx(-0.2));
  CHECK(nearest_signed_distance(2.0) == 0.0);
  CHECK(f_plus({3, -5}) == doctest::Approx(std::sqrt(15.0)));
  CHECK(f_plus({0, 7}) == doctest::Approx(std::sqrt(7.0)));
  CHECK(f_plus({0, 0, 0}) == 1.0);
}

TEST_CASE("find_nu") {
  const auto nu = find_nu({0.2, 0.3}, 0.3);
  REQUIRE(nu);
  CHECK(nu->nu[0] == doctest::Approx(1.5));
  CHECK(nu->nu[1] == doctest::Approx(2.0 / 3));
  CHECK(nu->nu[1] * 0.3 == doctest::Approx(0.2));
  CHECK_FALSE(find_nu({0.5, 0.5}, 0.3));
  const auto z = find_nu({0.0, 0.9}, 0.01);
  REQUIRE(z);
  CHECK(z->product() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(z->nu[1] * 0.9 <= 0.01 * (1 + 1e-12));
  CHECK_THROWS_AS(find_nu({0.1}, 0.0), ValidationError);

  const CounterRng rng(3, 1);
  int some = 0, none = 0;
  for (std::uint64_t i = 0; i < 10000; ++i) {
    const std::size_t n = 2 + i % 3;
    std::vector<double> x(n);
    long double prod = 1;
    for (std::size_t j = 0; j < n; ++j) {
      x[j] = (rng.uniform(8 * i + j) - 0.5) * 4;
      prod *= std::fabs(x[j]);
    }
    const double lambda = 0.05 + rng.uniform(8 * i + 7);
    const double f = static_cast<double>(std::pow(prod, 1.0L / n));
    const auto r = find_nu(x, lambda);
    CHECK((f <= lambda) == r.has_value());
    if (r) {
      ++some;
      CHECK(std::fabs(r->product() - 1) < 1e-12);
      CHECK(r->h(x) <= lambda * (1 + 1e-10));
    } else {
      ++none;
    }
    // AM-GM direction: any nu with prod 1 and H_nu(x) <= lambda forces F(x) <= lambda
    NuVector v;
    long double lp = 0;
    for (std::size_t j = 0; j + 1 < n; ++j) {
      v.nu.push_back(0.2 + 3 * rng.uniform(8 * i + 4 + j));
      lp += std::log(static_cast<long double>(v.nu.back()));
    }
    v.nu.push_back(static_cast<double>(std::exp(-lp)));
    if (v.h(x) <= lambda) CHECK(f <= lambda * (1 + 1e-12));
  }
  CHECK(some > 1000);
  CHECK(none > 1000);
}

TEST_CASE("matrix encodings") {
  const std::vector<double> x{0.3, 0.7};
  const TransferParams p{0.2, 3.0};
  const NuVector nu{{2.0, 0.5}};
  const auto a = build_matrices(MatrixKind::A, x, p, nu);
  const auto s = build_matrices(MatrixKind::Astar, x, p, nu);
  CHECK(a.entries(0, 0) == doctest::Approx(0.3 / 0.2));
  CHECK(a.entries(1, 0) == doctest::Approx(0.7 / 0.2));
  CHECK(a.entries(2, 0) == doctest::Approx(1 / 0.2));
  CHECK(std::fabs(a.entries.determinant()) == doctest::Approx(1 / (0.2 * 9)));
  CHECK(std::fabs(s.entries.determinant()) == doctest::Approx(0.2 * 9));
  CHECK(phi_value(a, s, {1, 2, 3}, {4, 5, 6}) == doctest::Approx(29));
  CHECK(phi_expected(MatrixKind::A, {1, 2, 3}, {4, 5, 6}) == 29);

  const NuVector nup{{1.25, 0.8}};
  const auto ap = build_matrices(MatrixKind::AtildePrime, x, p, nup);
  const auto sp = build_matrices(MatrixKind::AtildeTildePrime, x, p, nup);
  CHECK(phi_value(ap, sp, {1, 2, 3}, {4, 5, 6}) == doctest::Approx(3 * 4 + 2 * 5 - 1 * 6));

  CHECK_THROWS_AS(build_matrices(MatrixKind::A, x, p, NuVector{{1.0}}), DimensionMismatch);
  CHECK_THROWS_AS(build_matrices(MatrixKind::AtildePrime, {0.1, 0.2, 0.3}, p, NuVector{{1, 1, 1}}),
                  DimensionMismatch);
  CHECK_THROWS_AS(build_matrices(MatrixKind::A, x, {0.0, 1.0}, nu), ValidationError);
}

TEST_CASE("pairing is integral") {
  const CounterRng rng(17, 2);
  for (std::uint64_t i = 0; i < 10000; ++i) {
    auto u = [&](int k) { return rng.uniform(32 * i + static_cast<std::uint64_t>(k)); };
    const std::size_t n = 2 + i % 2;
    std::vector<double> x(n);
    for (std::size_t j = 0; j < n; ++j) x[j] = (u(static_cast<int>(j)) - 0.5) * 6;
    const TransferParams p{0.01 + u(4), 0.5 + 10 * u(5)};
    NuVector nu;
    long double lp = 0;
    for (std::size_t j = 0; j + 1 < n; ++j) {
      nu.nu.push_back(0.1 + 5 * u(6 + static_cast<int>(j)));
      lp += std::log(static_cast<long double>(nu.nu.back()));
    }
    nu.nu.push_back(static_cast<double>(std::exp(-lp)));
    std::vector<std::int64_t> a(n + 1), b(n + 1);
    for (std::size_t j = 0; j <= n; ++j) {
      a[j] = static_cast<std::int64_t>(std::floor(u(10 + static_cast<int>(j)) * 41)) - 20;
      b[j] = static_cast<std::int64_t>(std::floor(u(20 + static_cast<int>(j)) * 41)) - 20;
    }
    const auto m = build_matrices(MatrixKind::A, x, p, nu);
    const auto ms = build_matrices(MatrixKind::Astar, x, p, nu);
    CHECK(std::fabs(phi_value(m, ms, a, b) - static_cast<double>(phi_expected(MatrixKind::A, a, b))) <= 1e-8);
    if (n == 2) {
      const auto mp = build_matrices(MatrixKind::AtildePrime, x, p, nu);
      const auto msp = build_matrices(MatrixKind::AtildeTildePrime, x, p, nu);
      CHECK(std::fabs(phi_value(mp, msp, a, b) - static_cast<double>(phi_expected(MatrixKind::AtildePrime, a, b))) <=
            1e-8);
    }
  }
}

TEST_CASE("encoding soundness") {
  const RealVector x{Coefficient::sqrt_of(2), Coefficient::sqrt_of(5)};
  const auto xd = to_doubles(x);
  const TransferParams p{0.05, 6.0};
  const auto sols = solve_system_i(x, p, 200);
  REQUIRE(!sols.empty());
  for (const auto& q : sols) {
    std::vector<double> m;
    for (auto v : q) m.push_back(static_cast<double>(std::max<std::int64_t>(1, std::llabs(v))));
    const auto nu = find_nu(m, p.mu * (1 + 1e-12));
    REQUIRE(nu);
    auto qt = q;
    qt.push_back(-static_cast<std::int64_t>(std::floor(q[0] * xd[0] + q[1] * xd[1] + 0.5)));
    CHECK(encoded_norm(build_matrices(MatrixKind::A, xd, p, *nu), qt) <= 1 + 1e-10);
  }
  // converse: |q~ A| <= 1 gives |<q.x>| <= lambda and (prod |q_i|)^(1/2) <= mu
  const CounterRng rng(5, 9);
  int hits = 0;
  for (std::uint64_t i = 0; i < 20000; ++i) {
    const std::vector<std::int64_t> q{static_cast<std::int64_t>(rng.uniform(3 * i) * 41) - 20,
                                      static_cast<std::int64_t>(rng.uniform(3 * i + 1) * 41) - 20};
    const double nu1 = 0.2 + 5 * rng.uniform(3 * i + 2);
    const auto a = build_matrices(MatrixKind::A, xd, p, NuVector{{nu1, 1 / nu1}});
    const auto k = static_cast<std::int64_t>(std::floor(q[0] * xd[0] + q[1] * xd[1] + 0.5));
    if (encoded_norm(a, {q[0], q[1], -k}) <= 1) {
      ++hits;
      CHECK(std::fabs(inner_distance(x, q)) <= p.lambda * (1 + 1e-10));
      CHECK(std::sqrt(std::fabs(static_cast<double>(q[0] * q[1]))) <= p.mu * (1 + 1e-10));
    }
  }
  CHECK(hits > 0);
}

TEST_CASE("system (i)") {
  const auto s = solve_system_i(kSqrt23, {0.45, 1.0}, 50);
  CHECK(contains(s, {1, 0}));
  for (const auto& q : s) CHECK(f_plus(q) <= 1.0);

  // lambda >= 1/2: every q with F+ <= mu qualifies
  const auto all = solve_system_i(kSqrt23, {0.5, 2.0}, 200);
  std::size_t brute = 0;
  for (std::int64_t a = -200; a <= 200; ++a)
    for (std::int64_t b = -200; b <= 200; ++b)
      if ((a != 0 || b != 0) && std::max<std::int64_t>(1, std::llabs(a)) * std::max<std::int64_t>(1, std::llabs(b)) <= 4)
        ++brute;
  CHECK(all.size() == brute);

  const RealVector rat{Coefficient(Rational(1, 3)), Coefficient(Rational(1, 2))};
  const auto exact = solve_system_i(rat, {0.0, 6.0}, 20);
  CHECK(contains(exact, {3, 0}));
  CHECK(contains(exact, {0, 2}));
  CHECK_FALSE(contains(exact, {1, 0}));
  CHECK(inner_distance(rat, {3, 0}) == 0.0L);
  CHECK(inner_distance(rat, {1, 1}) == doctest::Approx(-1.0 / 6));
  CHECK(inner_distance(rat, {0, 1}) == -0.5L);

  // ordering: F+ then lexicographic
  for (std::size_t i = 1; i < all.size(); ++i) {
    const double a = f_plus(all[i - 1]), b = f_plus(all[i]);
    CHECK(a <= b + 1e-12);
    if (std::fabs(a - b) < 1e-12) CHECK(all[i - 1] < all[i]);
  }
}

TEST_CASE("system (ii)") {
  const auto p = solve_system_ii(kSqrt23, {0.45, 1.0});
  REQUIRE(p);
  CHECK(p->p == 1);
  CHECK(p->gm == doctest::Approx(std::sqrt((std::sqrt(2.0) - 1) * (2 - std::sqrt(3.0)))));
  CHECK(p->p_bound == doctest::Approx(2 / std::sqrt(0.45)));

  const RealVector half{Coefficient(Rational(1, 2)), Coefficient(Rational(1, 2))};
  const auto h = solve_system_ii(half, {0.01, 1.0});
  REQUIRE(h);
  CHECK(h->p == 2);
  CHECK(h->gm == 0.0);
  CHECK_THROWS_AS(solve_system_ii(kSqrt23, {0.0, 1.0}), ValidationError);
}

TEST_CASE("box equivalence instances") {
  const auto r = verify_prop5(kSqrt23, {0.45, 1.0}, 200);
  CHECK(r.system_i_count > 0);
  REQUIRE(r.p_witness);
  CHECK(r.p_witness->p == 1);
  CHECK_FALSE(r.forward_counterexample);
  CHECK_FALSE(r.reverse_counterexample);

  const auto v = verify_prop5(kSqrt23, {1e-6, 1.0}, 200);
  CHECK(v.system_i_count == 0);
  CHECK(v.vacuous);
  CHECK_FALSE(v.forward_counterexample);

  // with the dual-determinant target n lambda^(1/n) the forward direction
  // holds on a random suite
  const CounterRng rng(12345, 5);
  int det_failures = 0, stated_forward = 0;
  for (std::uint64_t i = 0; i < 40; ++i) {
    const RealVector x{Coefficient(Rational(static_cast<std::int64_t>(rng.uniform(6 * i) * 1099511627776.0),
                                            1099511627776LL)),
                       Coefficient(Rational(static_cast<std::int64_t>(rng.uniform(6 * i + 1) * 1099511627776.0),
                                            1099511627776LL))};
    const double lam = std::exp(std::log(0.01) + rng.uniform(6 * i + 2) * std::log(50.0));
    const double mu = std::exp(rng.uniform(6 * i + 3) * std::log(20.0));
    const auto rep = verify_prop5(x, {lam, mu}, 200);
    if (rep.system_i_count > 0 && !rep.p_witness_det) ++det_failures;
    stated_forward += rep.forward_counterexample;
  }
  CHECK(det_failures == 0);
  CHECK(stated_forward >= 0);
}

TEST_CASE("multiplicative transference harness") {
  const auto r = verify_theorem_multitrans(kSqrt23, 0.25, 300);
  CHECK(r.witnesses.size() == 76);
  CHECK(r.with_p == 73);
  CHECK(r.with_eps_prime == 73);
  for (std::size_t i = 1; i < r.witnesses.size(); ++i) CHECK(r.witnesses[i - 1].mu <= r.witnesses[i].mu + 1e-12);
  for (const auto& w : r.witnesses) {
    CHECK(w.monotone);
    CHECK(w.encoded);
    CHECK(w.lhs <= std::pow(w.mu, -2 * 1.25) * (1 + 1e-12));
  }
  const auto small = verify_theorem_multitrans(kSqrt23, 0.25, 60);
  CHECK(small.distinct_p < r.distinct_p);
  const RealVector rat{Coefficient(Rational(1, 3)), Coefficient::sqrt_of(3)};
  CHECK_THROWS_AS(verify_theorem_multitrans(rat, 0.25, 100), ValidationError);
  CHECK_THROWS_AS(verify_theorem_multitrans(kSqrt23, 0.25, 0.5), ValidationError);
  CHECK_THROWS_AS(verify_theorem_multitrans(kSqrt23, 0.0, 10), ValidationError);
}

TEST_CASE("union jack harness") {
  CHECK(union_jack_value(0.3, 0.3) == 0.0);
  CHECK(union_jack_value(0.2, 0.0) == 0.0);
  CHECK(union_jack_value(0.4, 0.1) == doctest::Approx(std::sqrt(0.04)));
  const auto r = verify_theorem_unionjack(kSqrt23, 0.25, 300);
  std::set<std::string> branches;
  for (const auto& w : r.witnesses) {
    if (w.p) branches.insert(w.branch);
    CHECK(w.monotone);
    // q1 = q2: the rotated value is (sqrt2/2) * 2|q1| * max(0, 1)
    if (w.q[0] == w.q[1] && w.q[0] > 1) {
      CHECK(w.branch == "rotated");
      CHECK(w.mu * w.mu == doctest::Approx(std::sqrt(2.0) * static_cast<double>(w.q[0])));
    }
  }
  CHECK(branches.size() == 2);
  CHECK(r.with_p == r.witnesses.size());
}

TEST_CASE("height transference harness") {
  const auto r = verify_khintchine_transfer(kSqrt23, 0.3, 1000);
  REQUIRE(!r.witnesses.empty());
  CHECK(r.with_eps_prime > 0);

  // sqrt5 is approximated by Lucas / Fibonacci ratios
  const auto f = verify_khintchine_transfer({Coefficient::sqrt_of(5)}, 0.01, 1000);
  std::set<std::int64_t> qs;
  for (const auto& w : f.witnesses) {
    CHECK((fibonacci(w.q[0]) || fibonacci(2 * w.q[0])));
    qs.insert(w.q[0]);
  }
  for (std::int64_t fib : {1, 2, 3, 5, 8, 13, 21, 34, 55, 89, 144, 233, 377, 610, 987}) CHECK(qs.count(fib) == 1);
}
