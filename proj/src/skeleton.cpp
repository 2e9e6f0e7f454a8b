#include "starkit/skeleton.hpp"

#include <algorithm>
#include <limits>
#include <numbers>

namespace starkit {
namespace {

bool same_line(const LinearForm& p, const LinearForm& q) { return p.a * q.b == q.a * p.b; }

void add_unique(std::vector<LinearForm>& out, const LinearForm& l) {
  for (const auto& e : out)
    if (same_line(e, l)) return;
  out.push_back(l);
}

Slope slope_of(const LinearForm& l) {
  Slope s;
  if (l.b.is_zero()) {
    s.rational = true;
    s.s = 1;
    s.r = 0;
    s.value = std::numeric_limits<double>::infinity();
    return s;
  }
  // direction (b, -a): slope = -a/b
  if (auto ratio = Coefficient::rational_ratio(-l.a, l.b)) {
    s.rational = true;
    s.s = ratio->numerator();
    s.r = ratio->denominator();
    s.value = static_cast<double>(s.s) / static_cast<double>(s.r);
  } else {
    s.rational = false;
    s.value = -(l.a.value_ld() / l.b.value_ld());
  }
  return s;
}

Vec2 unit_direction(const LinearForm& l, const Slope& s) {
  if (s.rational) {
    const double r = static_cast<double>(s.r);
    const double v = static_cast<double>(s.s);
    const double n = std::hypot(r, v);
    return {r / n, v / n};
  }
  const long double d1 = l.b.value_ld();
  const long double d2 = -l.a.value_ld();
  const long double n = std::hypot(d1, d2);
  const double sgn = d1 > 0 ? 1.0 : -1.0;
  return {static_cast<double>(sgn * d1 / n), static_cast<double>(sgn * d2 / n)};
}

double angle_of(Vec2 v) {
  double a = std::atan2(v.x2, v.x1);
  return a < 0 ? a + 2.0 * std::numbers::pi : a;
}

}  // namespace

bool SkeletonReport::all_rational() const {
  return std::all_of(lines.begin(), lines.end(), [](const HalfLine& h) { return h.slope.rational; });
}

std::vector<LinearForm> zero_lines(const Expr& e) {
  switch (e.kind) {
    case NodeKind::abs:
      return {e.form};
    case NodeKind::scale:
      return zero_lines(e.children.at(0));
    case NodeKind::min:
    case NodeKind::gm: {
      std::vector<LinearForm> out;
      for (const auto& c : e.children)
        for (const auto& l : zero_lines(c)) add_unique(out, l);
      return out;
    }
    case NodeKind::max: {
      std::vector<LinearForm> out = zero_lines(e.children.at(0));
      for (std::size_t i = 1; i < e.children.size(); ++i) {
        const auto other = zero_lines(e.children[i]);
        std::erase_if(out, [&](const LinearForm& l) {
          return std::none_of(other.begin(), other.end(), [&](const LinearForm& m) { return same_line(l, m); });
        });
      }
      return out;
    }
  }
  return {};
}

SkeletonReport extract_skeleton(const DistanceFunction& f, const SignificanceOptions& opts) {
  constexpr int kScan = 720;
  bool all_zero = true;
  for (int i = 0; i < kScan && all_zero; ++i) {
    const double t = (i + 0.5) * 2.0 * std::numbers::pi / kScan;
    all_zero = f.evaluate(std::cos(t), std::sin(t)) == 0.0;
  }
  if (all_zero) throw DegenerateExpr("F vanishes on every sampled direction");

  SkeletonReport report;
  for (const auto& l : zero_lines(f.expr())) {
    const Slope s = slope_of(l);
    const Vec2 u = unit_direction(l, s);
    for (const Vec2 d : {u, -u}) {
      HalfLine h;
      h.direction = d;
      h.slope = s;
      h.normal = l;
      const Significance sig = classify_significance(f, h, opts);
      h.significant = sig.significant;
      h.width_exponent = sig.width_exponent;
      h.width_nonincreasing = sig.width_nonincreasing;
      h.symmetry_ratio = sig.symmetry_ratio;
      report.lines.push_back(h);
    }
  }
  std::sort(report.lines.begin(), report.lines.end(),
            [](const HalfLine& a, const HalfLine& b) { return angle_of(a.direction) < angle_of(b.direction); });
  return report;
}

double sublevel_extent(const DistanceFunction& f, Vec2 p, Vec2 v, double eps) {
  constexpr double kCap = 1e12;
  if (!(eps > 0.0) || !(f(p) < eps)) return 0.0;
  auto inside = [&](double t) { return f(p + v * t) < eps; };
  double lo = 0.0;
  double hi = eps;
  // shrink until inside, then expand until outside
  int guard = 0;
  while (!inside(hi)) {
    hi *= 0.25;
    if (++guard > 600 || hi == 0.0) return 0.0;
  }
  lo = hi;
  while (inside(hi)) {
    lo = hi;
    hi *= 2.0;
    if (hi > kCap) return kCap;
  }
  for (int i = 0; i < 100 && hi - lo > 0.0; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (inside(mid) ? lo : hi) = mid;
  }
  return lo;
}

Widths width_profile(const DistanceFunction& f, Vec2 direction, double r, double eps) {
  const Vec2 p = direction * r;
  const Vec2 n{-direction.x2, direction.x1};
  return {sublevel_extent(f, p, n, eps), sublevel_extent(f, p, -n, eps)};
}

Significance classify_significance(const DistanceFunction& f, const HalfLine& line, const SignificanceOptions& opts) {
  if (!(opts.r_max > 1.0) || !(opts.epsilon > 0.0) || opts.samples < 4)
    throw ValidationError("significance fit needs r_max > 1, epsilon > 0 and at least 4 samples");
  const int m = opts.samples;
  const double log_max = std::log(opts.r_max);
  std::vector<double> lr(m), lw(m), w(m);
  Widths last;
  for (int i = 0; i < m; ++i) {
    lr[i] = log_max * i / (m - 1);
    const Widths ws = width_profile(f, line.direction, std::exp(lr[i]), opts.epsilon);
    w[i] = ws.total();
    if (i == m - 1) last = ws;
  }
  Significance out;
  out.width_nonincreasing = true;
  for (int i = 1; i < m; ++i)
    if (w[i] > w[i - 1] * (1.0 + 1e-9)) out.width_nonincreasing = false;

  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int k = 0;
  for (int i = m / 2; i < m; ++i) {
    if (!(w[i] > 0.0)) continue;
    const double y = std::log(w[i]);
    sx += lr[i];
    sy += y;
    sxx += lr[i] * lr[i];
    sxy += lr[i] * y;
    ++k;
  }
  if (k < 2) throw FitFailure("width profile vanishes over the fit range");
  const double slope = (k * sxy - sx * sy) / (k * sxx - sx * sx);
  out.width_exponent = -slope;
  out.significant = out.width_exponent <= 1.0 + opts.tolerance;
  out.symmetry_ratio = last.minus > 0.0 ? last.plus / last.minus : std::numeric_limits<double>::infinity();
  return out;
}

FundamentalRectangle fundamental_rectangle(const SkeletonReport& skel) {
  FundamentalRectangle out;
  for (const auto& h : skel.lines) {
    if (!h.slope.rational) throw IrrationalSkeleton("skeleton contains an irrational line");
    out.s_hat = lcm_skip_zero(out.s_hat, h.slope.s);
    out.r_hat = lcm_skip_zero(out.r_hat, h.slope.r);
  }
  return out;
}

}  // namespace starkit
