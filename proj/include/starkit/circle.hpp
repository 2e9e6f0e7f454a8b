#pragma once
// Rotations of the circle: continued fractions, three-distance partitions,
// the ubiquity sequence N_r, and the interval system I_n / I~_n cut out on a
// horizontal line by an irrational skeleton line.

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "starkit/measure.hpp"

namespace starkit {

using BigInt = boost::multiprecision::cpp_int;

/// (a + b sqrt(d)) / c with d > 1 squarefree-or-not, c != 0.
struct QuadraticSurd {
  BigInt a{0};
  BigInt b{1};
  BigInt d{2};
  BigInt c{1};

  long double value() const;
  std::string to_string() const;
};

/// "sqrt2", "1+sqrt5", "(1+sqrt5)/2", "-1+2*sqrt3", "golden"; nullopt when
/// the text is not a surd.
std::optional<QuadraticSurd> parse_surd(const std::string& text);

struct Convergent {
  BigInt p;
  BigInt q;
};

struct ContinuedFraction {
  std::vector<BigInt> quotients;
  std::vector<Convergent> convergents;
  bool terminated{false};  // alpha was rational and the expansion ended
};

ContinuedFraction continued_fraction(const QuadraticSurd& alpha, int depth);
ContinuedFraction continued_fraction(const Rational& alpha, int depth);
/// Expansion of a floating value known to relative precision rel_error;
/// throws PrecisionExhausted once the quotients are no longer determined.
ContinuedFraction continued_fraction(long double alpha, int depth,
                                     long double rel_error = 0x1.0p-63L);

// ---------------------------------------------------------------------------

struct GapPartition {
  std::int64_t n{0};
  std::vector<long double> points;  // sorted, in [0, 1)
  std::vector<long double> gaps;    // circular: gaps[i] = points[i+1] - points[i]
  std::vector<long double> distinct;

  long double max_gap() const;
  long double gap_sum() const;
};

/// Points {x0 + n alpha_inv}, n = 1..N, and their circular gaps.
GapPartition three_distance_partition(long double alpha_inv, long double x0, std::int64_t n,
                                      long double tolerance = 1e-9L);

/// Incremental version: adds one point per step and keeps the gap multiset.
class ThreeDistanceScan {
 public:
  ThreeDistanceScan(long double alpha_inv, long double x0);

  void advance();
  std::int64_t n() const { return n_; }
  long double max_gap() const;
  long double gap_sum() const { return gap_sum_; }
  std::size_t distinct_gaps(long double tolerance = 1e-9L) const;

 private:
  long double alpha_inv_;
  long double x0_;
  std::int64_t n_{0};
  std::set<long double> points_;
  std::multiset<long double> gaps_;
  long double gap_sum_{0.0L};
  long double comp_{0.0L};
};

/// All N <= nmax with max gap <= 3/(N+1) (x0 = 0).
std::vector<std::int64_t> ubiquity_sequence(long double alpha_inv, std::int64_t nmax);

/// Checks that the balls of radius 3/(N+1) around the first N points cover
/// the circle.
bool ubiquity_covers(long double alpha_inv, std::int64_t n);

/// ubiquity_covers for every n in ns (ascending) in a single pass.
std::vector<bool> ubiquity_covers_all(long double alpha_inv, const std::vector<std::int64_t>& ns);

// ---------------------------------------------------------------------------

/// Swaps x1 and x2 in every atom.
Expr swap_axes(const Expr& e);

struct IntervalRecord {
  std::int64_t n{0};
  long double x{0};      // centre x_n in [0, 1)
  long double r{0};      // (y0 + n) cosec(theta)
  double w_plus{0};
  double w_minus{0};
  double left{0};        // I_n = (x - left, x + right)
  double right{0};
  double sigma{0};       // radius of I~_n

  double len_i() const { return std::min(1.0, left + right); }
  double len_tilde() const { return std::min(1.0, 2 * sigma); }
};

struct IntervalSystem {
  long double alpha{0};  // slope > 1 in absolute value, after any axis swap
  bool swapped{false};
  long double theta{0};
  long double y0{0};
  long double x0{0};
  double epsilon{0};
  double k{0.5};
  std::vector<IntervalRecord> records;  // n = 1..N

  /// 3/(N_r + 1) + max(w+, w-) at n = N_r.
  double lambda(std::int64_t n_r) const;
};

/// Builds I_n and I~_n for n = 1..nmax on H = {y = y0} from the significant
/// irrational skeleton line of F. K halves from 1/2 until I~_n is inside
/// I_n for every n.
IntervalSystem interval_system(const StarBody& body, const HalfLine& line, double epsilon, double y0,
                               std::int64_t nmax);

struct CoverageRow {
  std::int64_t n{0};
  double once{0};
  double at_least_k{0};
  double stderr_{0};
};

/// Fraction of sampled x in [0,1) lying in at least one / at least k of
/// I~_1..I~_N, for each stage N (stages must be <= records.size()).
std::vector<CoverageRow> coverage_experiment(const IntervalSystem& system, const std::vector<std::int64_t>& stages,
                                             std::uint64_t samples, std::uint64_t seed, int k = 3);

/// Running sums of |I~_n| at the requested N.
std::vector<double> tilde_length_sums(const IntervalSystem& system, const std::vector<std::int64_t>& stages);

}  // namespace starkit
