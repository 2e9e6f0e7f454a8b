#pragma once
/**
 * @file measure.hpp
 * @brief Density D_F(eps), resonant neighbourhoods B_q and overlap statistics.
 *
 * Conventions
 *   - Bounded bodies (empty skeleton): D_F(eps) = |{F < eps}| (plain area,
 *     may exceed 1).
 *   - Unbounded bodies: D_F(eps) is the area of the Z^2-periodised sublevel
 *     set inside the unit square; requires a rational skeleton.
 *   - B_q(F, eps) = union over p in Z^2 of {x in [0,1)^2 : F(x - p/q) < eps}.
 *     Restricted B*_q keeps only p with gcd(p1*r_hat, q) = gcd(p2*s_hat, q) = 1.
 *
 * Candidate search
 *   With y = q*x - round(q*x) in [-1/2, 1/2]^2, F(x - p/q) = F(y + o)/q
 *   where o = round(q*x) - p. An OffsetPattern is the finite list of o that
 *   can beat the trivial candidate o = 0: cells whose interval lower bound
 *   is below the cell's upper bound U, with cusp tails cut where the body
 *   width becomes non-increasing (beyond that, moving further out along a
 *   rational skeleton direction can only increase F).
 */

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "starkit/skeleton.hpp"

namespace starkit {

/// A distance function together with its skeleton data.
class StarBody {
 public:
  explicit StarBody(Expr expr, const SignificanceOptions& opts = {});
  explicit StarBody(DistanceFunction f, const SignificanceOptions& opts = {});

  const DistanceFunction& f() const { return f_; }
  const SkeletonReport& skeleton() const { return skeleton_; }
  bool bounded() const { return skeleton_.bounded(); }
  bool rational_skeleton() const { return skeleton_.all_rational(); }
  /// Throws IrrationalSkeleton when the skeleton has an irrational line.
  FundamentalRectangle rectangle() const;

 private:
  DistanceFunction f_;
  SkeletonReport skeleton_;
};

// ---------------------------------------------------------------------------
// Offset patterns

struct Offset {
  std::int64_t o1{0};
  std::int64_t o2{0};
  double lower{0.0};  // lower bound of F over the cell [o - 1/2, o + 1/2]^2
};

class OffsetPattern {
 public:
  /// tail_extension lengthens every rational cusp tail by that many
  /// primitive steps (restricted searches need a full period mod q).
  explicit OffsetPattern(const StarBody& body, std::int64_t tail_extension = 0);

  /// Offsets sorted by increasing lower bound.
  const std::vector<Offset>& offsets() const { return offsets_; }
  /// Upper bound of F over [-1/2, 1/2]^2.
  double cell_upper() const { return upper_; }
  /// Largest |o|_inf in the pattern.
  std::int64_t radius() const { return radius_; }
  /// True when irrational skeleton lines forced a radius cap.
  bool approximate() const { return approximate_; }
  /// Arc length beyond which sublevel widths (at eps = 1) stop increasing.
  double monotone_from() const { return monotone_from_; }

 private:
  std::vector<Offset> offsets_;
  double upper_{0.0};
  double monotone_from_{0.0};
  std::int64_t radius_{0};
  bool approximate_{false};
};

// ---------------------------------------------------------------------------
// Density

enum class DensityMethod { automatic, analytic, quadrature, montecarlo };

const char* density_method_name(DensityMethod m);
DensityMethod parse_density_method(const std::string& name);

struct DensityOptions {
  DensityMethod method{DensityMethod::automatic};
  std::uint64_t samples{100000};
  std::uint64_t seed{0};
  double tolerance{1e-6};
};

struct DensityResult {
  double epsilon{0.0};
  double value{0.0};
  double stderr_{0.0};
  DensityMethod method{DensityMethod::analytic};
  bool periodized{false};
};

DensityResult density(const StarBody& body, double epsilon, const DensityOptions& opts = {});

/// Closed forms for registered shapes (Max of Abs atoms; axis-aligned
/// two-factor GeoMean), or nullopt.
std::optional<double> analytic_density(const StarBody& body, double epsilon);

/// Small-epsilon order of D_F for the shapes with a closed form:
/// linear (2e/k), quadratic (bounded, c e^2) or quadratic_log (c e^2 log 1/e).
enum class DensityGrowth { linear, quadratic, quadratic_log, unknown };

DensityGrowth density_growth(const StarBody& body);

// ---------------------------------------------------------------------------
// Resonant neighbourhoods

struct ResonantSpec {
  std::int64_t q{1};
  double epsilon{0.0};
  bool restricted{false};
};

struct ResonantHit {
  Vec2 x;
  std::int64_t q{1};
  Lattice2 p;       // integer point achieving the value (not reduced mod q)
  double value{0};  // F(x - p/q)
};

/// F(x - p/q); the single definition both search paths evaluate.
double resonant_value(const DistanceFunction& f, Vec2 x, std::int64_t q, Lattice2 p);

bool admissible(Lattice2 p, std::int64_t q, const FundamentalRectangle& rect);

class ResonantSearch {
 public:
  explicit ResonantSearch(const StarBody& body);

  const StarBody& body() const { return body_; }
  const OffsetPattern& pattern() const { return pattern_; }

  /// Minimiser of F(x - p/q) over p (restricted to admissible p if asked).
  /// Returns nullopt only for a restricted search with no admissible p.
  std::optional<ResonantHit> minimum(Vec2 x, std::int64_t q, bool restricted = false) const;

  /// True when some admissible p has F(x - p/q) < eps.
  bool hit(Vec2 x, std::int64_t q, double eps, bool restricted = false) const;

  /// Reference search over residues p in [0, q)^2 and their wraps.
  std::optional<ResonantHit> exhaustive(Vec2 x, std::int64_t q, bool restricted = false) const;

 private:
  const OffsetPattern& restricted_pattern(std::int64_t q) const;

  StarBody body_;
  OffsetPattern pattern_;
  std::optional<FundamentalRectangle> rect_;
  mutable std::vector<std::pair<std::int64_t, std::shared_ptr<OffsetPattern>>> extended_;
  mutable std::mutex extended_mutex_;
};

/// Returns the minimiser if its value is below spec.epsilon.
std::optional<ResonantHit> resonant_membership(const ResonantSearch& search, Vec2 x, const ResonantSpec& spec);

struct Estimate {
  double value{0.0};
  double stderr_{0.0};
  std::uint64_t samples{0};
  std::uint64_t seed{0};
};

/// Binomial proportion hits/n with its standard error.
Estimate bernoulli_estimate(std::uint64_t hits, std::uint64_t n, std::uint64_t seed);

/// Uniform sample x_i in [0,1)^2 shared by every Monte Carlo routine below.
Vec2 sample_unit_square(std::uint64_t seed, std::uint64_t index);

Estimate resonant_measure(const ResonantSearch& search, const ResonantSpec& spec, std::uint64_t samples,
                          std::uint64_t seed);

Estimate overlap_estimate(const ResonantSearch& search, const ResonantSpec& a, const ResonantSpec& b,
                          std::uint64_t samples, std::uint64_t seed);

struct ProbeCell {
  double t1{0.0};
  double t2{0.0};
  double value{0.0};
  double stderr_{0.0};
};

/// f(t1, t2) = |{x in [-h,h]^2 : F1(x) < d1, F2(x + t1 v + t2 v_perp) < d2}|
/// by Monte Carlo with common random numbers across the grid.
std::vector<ProbeCell> overlap_monotonicity_probe(const StarBody& f1, const StarBody& f2, double delta1,
                                                  double delta2, const HalfLine& line,
                                                  const std::vector<std::pair<double, double>>& grid, double h,
                                                  std::uint64_t samples, std::uint64_t seed);

}  // namespace starkit
