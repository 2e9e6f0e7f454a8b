#pragma once
// Skeleton F^{-1}(0), width profiles of the sublevel sets around skeleton
// half-lines, significance fits and the fundamental rectangle.

#include <cstdint>
#include <vector>

#include "starkit/expr.hpp"

namespace starkit {

/// Slope s/r of the direction (r, s). Rational slopes are in lowest terms
/// with r > 0, except vertical lines which are (s, r) = (1, 0).
struct Slope {
  bool rational{true};
  std::int64_t s{0};
  std::int64_t r{1};
  double value{0.0};  // s/r, or the irrational real; +inf for vertical

  bool vertical() const { return rational && r == 0; }
};

struct HalfLine {
  Vec2 direction;      // unit vector
  Slope slope;
  LinearForm normal;   // the line is {normal.a*x1 + normal.b*x2 = 0}
  bool significant{false};
  double width_exponent{0.0};
  bool width_nonincreasing{false};
  double symmetry_ratio{1.0};  // w+/w- at the largest sampled r
};

struct SkeletonReport {
  std::vector<HalfLine> lines;

  bool bounded() const { return lines.empty(); }
  bool all_rational() const;
};

struct SignificanceOptions {
  double r_max{1e6};
  double epsilon{1.0};
  double tolerance{0.05};
  int samples{31};
};

struct Significance {
  bool significant{false};
  double width_exponent{0.0};
  bool width_nonincreasing{false};
  double symmetry_ratio{1.0};
};

struct Widths {
  double plus{0.0};
  double minus{0.0};
  double total() const { return plus + minus; }
};

/// Lines (through the origin) on which F vanishes, as normal forms.
std::vector<LinearForm> zero_lines(const Expr& e);

SkeletonReport extract_skeleton(const DistanceFunction& f, const SignificanceOptions& opts = {});

/// Perpendicular extents of {F < eps} above (+, along the left normal
/// (-u2, u1)) and below the half-line at arc distance r from the origin.
Widths width_profile(const DistanceFunction& f, Vec2 direction, double r, double eps);
inline Widths width_profile(const DistanceFunction& f, const HalfLine& line, double r, double eps) {
  return width_profile(f, line.direction, r, eps);
}

/// Extent of {t >= 0 : F(p + t*v) < eps} starting at t = 0 (0 if F(p) >= eps).
double sublevel_extent(const DistanceFunction& f, Vec2 p, Vec2 v, double eps);

Significance classify_significance(const DistanceFunction& f, const HalfLine& line,
                                   const SignificanceOptions& opts = {});

struct FundamentalRectangle {
  std::int64_t s_hat{1};
  std::int64_t r_hat{1};
};

FundamentalRectangle fundamental_rectangle(const SkeletonReport& skel);

}  // namespace starkit
