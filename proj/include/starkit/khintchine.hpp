#pragma once
// Khintchine-type series sum_q D_F(q psi(q)), their convergence verdicts for
// parametric psi, dyadic tail-block measures of the limsup set, the
// Euler-phi weighted sum, and best approximations along q.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "starkit/measure.hpp"

namespace starkit {

class PsiFamily {
 public:
  enum class Kind { power, powerlog, table };

  /// q^-tau for q >= 1.
  static PsiFamily power(double tau);
  /// q^-tau (log q)^-sigma for q >= 2.
  static PsiFamily powerlog(double tau, double sigma);
  /// values[i] = psi(first + i).
  static PsiFamily table(std::vector<double> values, std::int64_t first = 1);

  Kind kind() const { return kind_; }
  double tau() const { return tau_; }
  double sigma() const { return sigma_; }

  std::int64_t first_q() const;
  /// Last q in the domain (INT64_MAX for the closed families).
  std::int64_t last_q() const;
  double operator()(std::int64_t q) const;

  /// q psi(q) non-increasing on [first_q, qmax].
  bool q_psi_nonincreasing(std::int64_t qmax) const;

  /// "pow:<tau>", "powlog:<tau>,<sigma>" or "table:<n>".
  std::string to_string() const;

 private:
  Kind kind_{Kind::power};
  double tau_{0.0};
  double sigma_{0.0};
  std::vector<double> values_;
  std::int64_t first_{1};
};

/// "pow:<tau>", "powlog:<tau>,<sigma>", or "table:<path>" / "<path>.csv"
/// holding "q,psi" rows with consecutive q.
PsiFamily parse_psi(const std::string& spec);

enum class Verdict { convergent, divergent, inconclusive };
const char* verdict_name(Verdict v);

/// Integral-test verdict for sum_q D_F(q psi(q)) when D_F has a known order
/// of growth and psi is a closed family; inconclusive otherwise.
Verdict analytic_verdict(const StarBody& body, const PsiFamily& psi);

struct PartialSum {
  std::int64_t q{0};
  double sum{0.0};
};

/// S(Q) = sum_{q = first..Q} D_F(q psi(q)) for every Q <= qmax.
std::vector<PartialSum> series_partial_sums(const StarBody& body, const PsiFamily& psi, std::int64_t qmax);

/// |union_{q in [N, 2N]} B_q(F, psi(q))| by Monte Carlo.
Estimate tail_measure(const ResonantSearch& search, const PsiFamily& psi, std::int64_t n, std::uint64_t samples,
                      std::uint64_t seed);

/// sum_{q in [N, 2N]} D_F(q psi(q)), the union bound for tail_measure.
double tail_union_bound(const StarBody& body, const PsiFamily& psi, std::int64_t n);

struct DichotomyReport {
  std::vector<PartialSum> partial_sums;
  Verdict verdict{Verdict::inconclusive};
  bool q_psi_nonincreasing{true};
  bool density_nonincreasing{true};
  std::vector<std::pair<std::int64_t, Estimate>> tails;
};

DichotomyReport dichotomy_report(const ResonantSearch& search, const PsiFamily& psi, std::int64_t qmax,
                                 const std::vector<std::int64_t>& blocks, std::uint64_t samples,
                                 std::uint64_t seed);

// ---------------------------------------------------------------------------
// Euler-phi weighted sums

/// phi(0..n) by a linear sieve (phi(0) = 0).
std::vector<std::int64_t> totients(std::int64_t n);

struct PhiSums {
  double lhs{0.0};    // sum_{q=1..N} (phi(q)/q)^2 omega(q)
  double rhs{0.0};    // sum_{q=2..N} omega(q)
  double ratio{0.0};
};

/// omega must be positive and non-increasing on [1, N].
PhiSums euler_phi_sum_check(const std::function<double(std::int64_t)>& omega, std::int64_t n);

using BigRational = boost::multiprecision::cpp_rational;

struct ExactPhiSums {
  BigRational lhs;
  BigRational rhs;
  BigRational ratio;
};

/// Same sums in exact rational arithmetic.
ExactPhiSums euler_phi_sum_exact(const std::function<BigRational(std::int64_t)>& omega, std::int64_t n);

// ---------------------------------------------------------------------------

struct BestApproximations {
  std::vector<ResonantHit> per_q;    // minimiser for q = 1..Qmax
  std::vector<ResonantHit> records;  // strict new minima of F(x - p/q)
};

BestApproximations best_approximations(const ResonantSearch& search, Vec2 x, std::int64_t qmax);

}  // namespace starkit
