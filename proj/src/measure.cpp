#include "starkit/measure.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numbers>
#include <optional>
#include <unordered_set>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "starkit/random.hpp"

namespace starkit {

StarBody::StarBody(Expr expr, const SignificanceOptions& opts) : StarBody(DistanceFunction(std::move(expr)), opts) {}

StarBody::StarBody(DistanceFunction f, const SignificanceOptions& opts)
    : f_(std::move(f)), skeleton_(extract_skeleton(f_, opts)) {}

FundamentalRectangle StarBody::rectangle() const { return fundamental_rectangle(skeleton_); }

// ---------------------------------------------------------------------------
// Offset patterns

namespace {

Box cell_box(double c1, double c2) { return {{c1 - 0.5, c1 + 0.5}, {c2 - 0.5, c2 + 0.5}}; }

// Smallest sampled arc length (eps = 1) past which the width of every
// skeleton half-line is non-increasing.
double monotone_threshold(const StarBody& body) {
  constexpr int kSamples = 91;
  double threshold = 0.0;
  for (const auto& h : body.skeleton().lines) {
    std::vector<double> r(kSamples), w(kSamples);
    for (int i = 0; i < kSamples; ++i) {
      r[i] = std::pow(10.0, -3.0 + 9.0 * i / (kSamples - 1));
      w[i] = width_profile(body.f(), h, r[i], 1.0).total();
    }
    for (int i = 0; i + 1 < kSamples; ++i)
      if (w[i + 1] > w[i] * (1.0 + 1e-9)) threshold = std::max(threshold, r[i + 1]);
  }
  return threshold;
}

std::uint64_t pack(std::int64_t a, std::int64_t b) {
  return (static_cast<std::uint64_t>(a) << 32) ^ (static_cast<std::uint64_t>(b) & 0xffffffffULL);
}

}  // namespace

OffsetPattern::OffsetPattern(const StarBody& body, std::int64_t tail_extension) {
  const DistanceFunction& f = body.f();
  upper_ = f.bound(cell_box(0, 0)).hi;
  monotone_from_ = monotone_threshold(body);

  struct Tail {
    Vec2 u;
    double foot;
    bool rational;
  };
  std::vector<Tail> tails;
  for (const auto& h : body.skeleton().lines) {
    Tail t{h.direction, 0.0, h.slope.rational};
    if (h.slope.rational) {
      const double step = std::hypot(static_cast<double>(h.slope.r), static_cast<double>(h.slope.s));
      t.foot = 2.0 * upper_ * monotone_from_ + step * static_cast<double>(1 + tail_extension) + 1.0;
    } else {
      t.foot = 32.0;
    }
    tails.push_back(t);
  }

  // Offsets near a skeleton half-line and past its foot are dominated by the
  // offset one primitive step closer to the origin.
  auto cut = [&](std::int64_t o1, std::int64_t o2) {
    const Vec2 o{static_cast<double>(o1), static_cast<double>(o2)};
    const Tail* nearest = nullptr;
    double best = std::numeric_limits<double>::infinity();
    for (const auto& t : tails) {
      if (o.dot(t.u) <= 0.0) continue;
      const double perp = std::fabs(o.x1 * t.u.x2 - o.x2 * t.u.x1);
      if (perp < best) {
        best = perp;
        nearest = &t;
      }
    }
    if (!nearest || o.dot(nearest->u) <= nearest->foot) return false;
    if (!nearest->rational) approximate_ = true;
    return true;
  };

  constexpr std::size_t kMaxOffsets = 2000000;
  std::unordered_set<std::uint64_t> seen;
  std::deque<std::pair<std::int64_t, std::int64_t>> queue;
  queue.emplace_back(0, 0);
  seen.insert(pack(0, 0));
  while (!queue.empty()) {
    const auto [o1, o2] = queue.front();
    queue.pop_front();
    const double lower = f.bound(cell_box(static_cast<double>(o1), static_cast<double>(o2))).lo;
    const bool origin = o1 == 0 && o2 == 0;
    if (!origin && (lower >= upper_ || cut(o1, o2))) continue;
    offsets_.push_back({o1, o2, lower});
    radius_ = std::max({radius_, std::abs(o1), std::abs(o2)});
    if (offsets_.size() > kMaxOffsets) throw NonConvergent("candidate offset pattern does not close");
    for (std::int64_t d1 = -1; d1 <= 1; ++d1) {
      for (std::int64_t d2 = -1; d2 <= 1; ++d2) {
        if (seen.insert(pack(o1 + d1, o2 + d2)).second) queue.emplace_back(o1 + d1, o2 + d2);
      }
    }
  }
  std::stable_sort(offsets_.begin(), offsets_.end(), [](const Offset& a, const Offset& b) {
    if (a.lower != b.lower) return a.lower < b.lower;
    return std::tie(a.o1, a.o2) < std::tie(b.o1, b.o2);
  });
}

// ---------------------------------------------------------------------------
// Resonant search

double resonant_value(const DistanceFunction& f, Vec2 x, std::int64_t q, Lattice2 p) {
  const double qd = static_cast<double>(q);
  return f.evaluate(x.x1 - static_cast<double>(p.p1) / qd, x.x2 - static_cast<double>(p.p2) / qd);
}

bool admissible(Lattice2 p, std::int64_t q, const FundamentalRectangle& rect) {
  auto residue = [q](std::int64_t v, std::int64_t m) {
    // gcd(v*m, q) computed on residues to avoid overflow
    const std::int64_t a = ((v % q) + q) % q;
    return std::gcd(static_cast<std::int64_t>((static_cast<__int128>(a) * m) % q), q);
  };
  return residue(p.p1, rect.r_hat) == 1 && residue(p.p2, rect.s_hat) == 1;
}

ResonantSearch::ResonantSearch(const StarBody& body) : body_(body), pattern_(body_) {
  if (body_.rational_skeleton()) rect_ = body_.rectangle();
}

const OffsetPattern& ResonantSearch::restricted_pattern(std::int64_t q) const {
  std::lock_guard<std::mutex> lock(extended_mutex_);
  for (const auto& [k, p] : extended_)
    if (k == q) return *p;
  if (extended_.size() > 64) extended_.erase(extended_.begin());
  extended_.emplace_back(q, std::make_shared<OffsetPattern>(body_, q));
  return *extended_.back().second;
}

namespace {
void require_q(std::int64_t q) {
  if (q < 1) throw ValidationError("q must be a positive integer");
}
}  // namespace

std::optional<ResonantHit> ResonantSearch::minimum(Vec2 x, std::int64_t q, bool restricted) const {
  require_q(q);
  if (restricted && !rect_) throw IrrationalSkeleton("restricted neighbourhoods need a rational skeleton");
  const OffsetPattern& pat = restricted ? restricted_pattern(q) : pattern_;
  const double qd = static_cast<double>(q);
  const Lattice2 p0{std::llround(qd * x.x1), std::llround(qd * x.x2)};
  std::optional<ResonantHit> best;
  for (const Offset& o : pat.offsets()) {
    const Lattice2 p{p0.p1 - o.o1, p0.p2 - o.o2};
    if (restricted && !admissible(p, q, *rect_)) continue;
    const double v = resonant_value(body_.f(), x, q, p);
    if (!best || v < best->value) best = ResonantHit{x, q, p, v};
  }
  if (!restricted) return best;
  if (best && best->value * qd < pat.cell_upper() * (1.0 - 1e-9)) return best;
  return exhaustive(x, q, true);
}

bool ResonantSearch::hit(Vec2 x, std::int64_t q, double eps, bool restricted) const {
  require_q(q);
  if (!(eps > 0.0)) return false;
  if (restricted && !rect_) throw IrrationalSkeleton("restricted neighbourhoods need a rational skeleton");
  const OffsetPattern& pat = restricted ? restricted_pattern(q) : pattern_;
  const double qd = static_cast<double>(q);
  const double level = qd * eps;
  const Lattice2 p0{std::llround(qd * x.x1), std::llround(qd * x.x2)};
  for (const Offset& o : pat.offsets()) {
    if (o.lower > level * (1.0 + 1e-9)) break;
    const Lattice2 p{p0.p1 - o.o1, p0.p2 - o.o2};
    if (restricted && !admissible(p, q, *rect_)) continue;
    if (resonant_value(body_.f(), x, q, p) < eps) return true;
  }
  if (level <= pat.cell_upper() || !restricted) return false;
  const auto m = exhaustive(x, q, true);
  return m && m->value < eps;
}

std::optional<ResonantHit> ResonantSearch::exhaustive(Vec2 x, std::int64_t q, bool restricted) const {
  require_q(q);
  if (restricted && !rect_) throw IrrationalSkeleton("restricted neighbourhoods need a rational skeleton");
  const OffsetPattern& pat = restricted ? restricted_pattern(q) : pattern_;
  const std::int64_t wraps = (2 * pat.radius() + 2 + q - 1) / q + 1;
  const double qd = static_cast<double>(q);
  std::optional<ResonantHit> best;
  for (std::int64_t r1 = 0; r1 < q; ++r1) {
    for (std::int64_t r2 = 0; r2 < q; ++r2) {
      if (restricted && !admissible({r1, r2}, q, *rect_)) continue;
      const std::int64_t k1 = std::llround(x.x1 - static_cast<double>(r1) / qd);
      const std::int64_t k2 = std::llround(x.x2 - static_cast<double>(r2) / qd);
      for (std::int64_t w1 = -wraps; w1 <= wraps; ++w1) {
        for (std::int64_t w2 = -wraps; w2 <= wraps; ++w2) {
          const Lattice2 p{r1 + q * (k1 + w1), r2 + q * (k2 + w2)};
          const double v = resonant_value(body_.f(), x, q, p);
          if (!best || v < best->value) best = ResonantHit{x, q, p, v};
        }
      }
    }
  }
  return best;
}

std::optional<ResonantHit> resonant_membership(const ResonantSearch& search, Vec2 x, const ResonantSpec& spec) {
  if (!(spec.epsilon > 0.0)) throw ValidationError("epsilon must be positive");
  auto m = search.minimum(x, spec.q, spec.restricted);
  if (m && m->value < spec.epsilon) return m;
  return std::nullopt;
}

Estimate bernoulli_estimate(std::uint64_t hits, std::uint64_t n, std::uint64_t seed) {
  Estimate e;
  e.samples = n;
  e.seed = seed;
  if (n == 0) return e;
  e.value = static_cast<double>(hits) / static_cast<double>(n);
  e.stderr_ = std::sqrt(e.value * (1.0 - e.value) / static_cast<double>(n));
  return e;
}

Vec2 sample_unit_square(std::uint64_t seed, std::uint64_t index) {
  const CounterRng rng(seed, 0x5157);
  return {rng.uniform(2 * index), rng.uniform(2 * index + 1)};
}

namespace {


void check_spec(const ResonantSpec& s) {
  require_q(s.q);
  if (!(s.epsilon > 0.0) || !std::isfinite(s.epsilon)) throw ValidationError("epsilon must be positive and finite");
}

}  // namespace

Estimate resonant_measure(const ResonantSearch& search, const ResonantSpec& spec, std::uint64_t samples,
                          std::uint64_t seed) {
  check_spec(spec);
  const auto hits = parallel_count(samples, [&](std::size_t i) {
    return search.hit(sample_unit_square(seed, i), spec.q, spec.epsilon, spec.restricted);
  });
  return bernoulli_estimate(hits, samples, seed);
}

Estimate overlap_estimate(const ResonantSearch& search, const ResonantSpec& a, const ResonantSpec& b,
                          std::uint64_t samples, std::uint64_t seed) {
  check_spec(a);
  check_spec(b);
  const auto hits = parallel_count(samples, [&](std::size_t i) {
    const Vec2 x = sample_unit_square(seed, i);
    return search.hit(x, a.q, a.epsilon, a.restricted) && search.hit(x, b.q, b.epsilon, b.restricted);
  });
  return bernoulli_estimate(hits, samples, seed);
}

std::vector<ProbeCell> overlap_monotonicity_probe(const StarBody& f1, const StarBody& f2, double delta1,
                                                  double delta2, const HalfLine& line,
                                                  const std::vector<std::pair<double, double>>& grid, double h,
                                                  std::uint64_t samples, std::uint64_t seed) {
  auto single_line = [&](const StarBody& b) {
    for (const auto& l : b.skeleton().lines)
      if (!(l.normal.a * line.normal.b == line.normal.a * l.normal.b)) return false;
    return !b.skeleton().lines.empty();
  };
  if (!single_line(f1) || !single_line(f2))
    throw SkeletonMismatch("both bodies must have the given line as their whole skeleton");
  if (!(delta1 > 0.0) || !(delta2 > 0.0) || !(h > 0.0)) throw ValidationError("deltas and h must be positive");
  const Vec2 v = line.direction;
  const Vec2 vp{-v.x2, v.x1};
  const double area = 4.0 * h * h;
  std::vector<ProbeCell> out;
  for (const auto& [t1, t2] : grid) {
    const Vec2 shift = v * t1 + vp * t2;
    const auto hits = parallel_count(samples, [&](std::size_t i) {
      const Vec2 u = sample_unit_square(seed, i);
      const Vec2 x{(2.0 * u.x1 - 1.0) * h, (2.0 * u.x2 - 1.0) * h};
      return f1.f()(x) < delta1 && f2.f()(x + shift) < delta2;
    });
    const Estimate e = bernoulli_estimate(hits, samples, seed);
    out.push_back({t1, t2, area * e.value, area * e.stderr_});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Density

const char* density_method_name(DensityMethod m) {
  switch (m) {
    case DensityMethod::automatic: return "auto";
    case DensityMethod::analytic: return "analytic";
    case DensityMethod::quadrature: return "quadrature";
    case DensityMethod::montecarlo: return "montecarlo";
  }
  return "?";
}

DensityMethod parse_density_method(const std::string& name) {
  if (name == "auto") return DensityMethod::automatic;
  if (name == "analytic") return DensityMethod::analytic;
  if (name == "quadrature") return DensityMethod::quadrature;
  if (name == "montecarlo" || name == "mc") return DensityMethod::montecarlo;
  throw ValidationError("unknown density method '" + name + "' (expected auto, analytic, quadrature, montecarlo)");
}

namespace {

using Polygon = std::vector<std::array<long double, 2>>;

// Keeps the part of the polygon with a*x + b*y <= 1.
Polygon clip(const Polygon& poly, long double a, long double b) {
  Polygon out;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto& p = poly[i];
    const auto& q = poly[(i + 1) % n];
    const long double fp = a * p[0] + b * p[1] - 1;
    const long double fq = a * q[0] + b * q[1] - 1;
    if (fp <= 0) out.push_back(p);
    if ((fp < 0 && fq > 0) || (fp > 0 && fq < 0)) {
      const long double t = fp / (fp - fq);
      out.push_back({p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])});
    }
  }
  return out;
}

long double polygon_area(const Polygon& poly) {
  long double s = 0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const auto& p = poly[i];
    const auto& q = poly[(i + 1) % poly.size()];
    s += p[0] * q[1] - q[0] * p[1];
  }
  return std::fabs(s) / 2;
}

const Expr& strip_scale(const Expr& e, long double& factor) {
  const Expr* cur = &e;
  factor = 1;
  while (cur->kind == NodeKind::scale) {
    factor *= cur->factor.value_ld();
    cur = &cur->children.at(0);
  }
  return *cur;
}

double branch_eval(const Expr& e, double x1, double x2, std::vector<int>& sig) {
  switch (e.kind) {
    case NodeKind::abs: {
      const double v = e.form.a.value() * x1 + e.form.b.value() * x2;
      sig.push_back(v > 0.0 ? 1 : (v < 0.0 ? -1 : 0));
      return std::fabs(v);
    }
    case NodeKind::scale:
      return e.factor.value() * branch_eval(e.children.front(), x1, x2, sig);
    case NodeKind::gm: {
      double logsum = 0.0;
      bool zero = false;
      for (const Expr& c : e.children) {
        const double v = branch_eval(c, x1, x2, sig);
        if (v == 0.0) zero = true;
        if (!zero) logsum += std::log(v);
      }
      return zero ? 0.0 : std::exp(logsum / static_cast<double>(e.children.size()));
    }
    case NodeKind::min:
    case NodeKind::max: {
      double best = 0.0;
      int arg = -1;
      for (std::size_t i = 0; i < e.children.size(); ++i) {
        const double v = branch_eval(e.children[i], x1, x2, sig);
        if (arg < 0 || (e.kind == NodeKind::min ? v < best : v > best)) {
          best = v;
          arg = static_cast<int>(i);
        }
      }
      sig.push_back(arg);
      return best;
    }
  }
  return 0.0;
}

std::vector<int> branch_signature(const Expr& e, double t) {
  std::vector<int> sig;
  branch_eval(e, std::cos(t), std::sin(t), sig);
  return sig;
}

// Lines through the origin across which F changes branch (atom sign or
// min/max selection), as forms (a, b) vanishing on them. Between two
// consecutive lines F is a fixed composition of positive linear forms under
// gm/min/scale, hence concave along any segment inside the sector.
std::vector<std::array<double, 2>> kink_forms(const DistanceFunction& f) {
  std::vector<std::array<double, 2>> forms;
  for (const auto& l : f.atoms()) forms.push_back({l.a.value(), l.b.value()});
  constexpr int kScan = 4096;
  const double step = std::numbers::pi / kScan;
  auto prev = branch_signature(f.expr(), 0.0);
  for (int i = 1; i <= kScan; ++i) {
    const double t = step * i;
    auto cur = branch_signature(f.expr(), t);
    if (cur != prev) {
      double lo = t - step, hi = t;
      for (int it = 0; it < 64; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        (branch_signature(f.expr(), mid) == prev ? lo : hi) = mid;
      }
      const double c = 0.5 * (lo + hi);
      forms.push_back({-std::sin(c), std::cos(c)});
    }
    prev = std::move(cur);
  }
  return forms;
}

// Adaptive bisection on an absolute error budget proportional to width;
// boost's relative criterion stalls on panels where the integral is tiny.
template <class Fn>
double integrate_panel(Fn& fn, double a, double b, double tol_per_unit, unsigned depth, double& error) {
  double err = 0.0;
  const double v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(fn, a, b, 0, 0.0, &err);
  // the single-panel estimate comes back in units of the reference interval
  err *= 0.5 * (b - a);
  const double floor = 1e-12 * std::fabs(v);
  if (depth == 0 || b - a < 1e-13 || err <= std::max(tol_per_unit * (b - a), floor)) {
    error += err;
    return v;
  }
  const double m = 0.5 * (a + b);
  return integrate_panel(fn, a, m, tol_per_unit, depth - 1, error) +
         integrate_panel(fn, m, b, tol_per_unit, depth - 1, error);
}

template <class Fn>
double integrate_pieces(Fn&& fn, std::vector<double> cuts, double& error, double tol_per_unit = 1e-12,
                        unsigned depth = 24) {
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  double total = 0.0;
  error = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    if (cuts[i + 1] - cuts[i] <= 0.0) continue;
    total += integrate_panel(fn, cuts[i], cuts[i + 1], tol_per_unit, depth, error);
  }
  return total;
}

// |{F < 1}| by the polar formula (1/2) * integral of F(u(theta))^{-2}.
double bounded_unit_area(const DistanceFunction& f, double& error) {
  std::vector<double> cuts = {0.0, 2.0 * std::numbers::pi};
  for (const auto& [a, b] : kink_forms(f)) {
    // a cos t + b sin t = 0
    double t = std::atan2(-a, b);
    for (int k = 0; k < 3; ++k) {
      const double c = t + (k - 1) * std::numbers::pi;
      if (c > 0.0 && c < 2.0 * std::numbers::pi) cuts.push_back(c);
    }
  }
  auto integrand = [&](double t) {
    const double v = f.evaluate(std::cos(t), std::sin(t));
    return 0.5 / (v * v);
  };
  return integrate_pieces(integrand, cuts, error);
}

struct PeriodizedQuadrature {
  const DistanceFunction& f;
  const OffsetPattern& pattern;
  double eps;
  std::vector<std::array<double, 2>> forms;

  struct Piece {
    double lo, hi;
    std::int64_t lo_id, hi_id;
  };
  static constexpr std::int64_t kEdge = -1;

  // Length of {y2 in [-1/2, 1/2] : min_o F(y1 + o1, y2 + o2) < eps}. The
  // optional signature names the crossing behind every endpoint of the
  // union, so it only changes where the length can have a kink.
  double section(double y1, std::vector<std::int64_t>* sig = nullptr) const {
    std::vector<Piece> pieces;
    std::vector<std::pair<double, std::int64_t>> ts;
    std::int64_t offset_index = -1;
    for (const Offset& o : pattern.offsets()) {
      ++offset_index;
      if (o.lower >= eps) break;
      const double x1 = y1 + static_cast<double>(o.o1);
      const double c2 = static_cast<double>(o.o2);
      if (f.bound({{x1, x1}, {c2 - 0.5, c2 + 0.5}}).lo >= eps) continue;
      ts.clear();
      ts.emplace_back(c2 - 0.5, kEdge);
      ts.emplace_back(c2 + 0.5, kEdge);
      for (std::size_t k = 0; k < forms.size(); ++k) {
        const auto& [a, b] = forms[k];
        if (b == 0.0) continue;
        const double t = -a * x1 / b;
        if (t > c2 - 0.5 && t < c2 + 0.5) ts.emplace_back(t, static_cast<std::int64_t>(k));
      }
      std::sort(ts.begin(), ts.end());
      auto value = [&](double t) { return f.evaluate(x1, t); };
      auto crossing = [&](double in, double out) {
        for (int it = 0; it < 64; ++it) {
          const double mid = 0.5 * (in + out);
          if (mid == in || mid == out) break;
          (value(mid) < eps ? in : out) = mid;
        }
        return 0.5 * (in + out);
      };
      for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
        const double ta = ts[i].first, tb = ts[i + 1].first;
        if (!(tb > ta)) continue;
        const bool ina = value(ta) < eps;
        const bool inb = value(tb) < eps;
        const std::int64_t id = (offset_index * static_cast<std::int64_t>(forms.size() + 1) + ts[i].second + 1) * 2;
        if (ina && inb) {
          // concave on the gap: golden-section search for the maximum
          constexpr double g = 0.6180339887498949;
          double lo = ta, hi = tb;
          double m1 = hi - g * (hi - lo), m2 = lo + g * (hi - lo);
          double f1 = value(m1), f2 = value(m2);
          for (int it = 0; it < 80 && hi - lo > 1e-15 * (1.0 + std::fabs(hi)); ++it) {
            if (f1 >= eps || f2 >= eps) break;
            if (f1 < f2) {
              lo = m1;
              m1 = m2;
              f1 = f2;
              m2 = lo + g * (hi - lo);
              f2 = value(m2);
            } else {
              hi = m2;
              m2 = m1;
              f2 = f1;
              m1 = hi - g * (hi - lo);
              f1 = value(m1);
            }
          }
          const double tm = f1 >= eps ? m1 : (f2 >= eps ? m2 : -1.0);
          if (f1 < eps && f2 < eps) {
            pieces.push_back({ta - c2, tb - c2, kEdge, kEdge});
          } else {
            pieces.push_back({ta - c2, crossing(ta, tm) - c2, kEdge, id});
            pieces.push_back({crossing(tb, tm) - c2, tb - c2, id + 1, kEdge});
          }
        } else if (ina) {
          pieces.push_back({ta - c2, crossing(ta, tb) - c2, kEdge, id});
        } else if (inb) {
          pieces.push_back({crossing(tb, ta) - c2, tb - c2, id + 1, kEdge});
        }
      }
    }
    std::sort(pieces.begin(), pieces.end(), [](const Piece& a, const Piece& b) { return a.lo < b.lo; });
    double len = 0.0;
    std::optional<Piece> cur;
    auto close = [&]() {
      len += cur->hi - cur->lo;
      if (sig) {
        sig->push_back(cur->lo_id);
        sig->push_back(cur->hi_id);
      }
    };
    for (const Piece& p : pieces) {
      if (!cur || p.lo > cur->hi) {
        if (cur) close();
        cur = p;
      } else if (p.hi > cur->hi) {
        cur->hi = p.hi;
        cur->hi_id = p.hi_id;
      }
    }
    if (cur) close();
    return std::min(1.0, len);
  }
};

double periodized_quadrature(const StarBody& body, double eps, double& error) {
  const OffsetPattern pattern(body);
  error = 0.0;
  if (eps > pattern.cell_upper()) return 1.0;
  PeriodizedQuadrature pq{body.f(), pattern, eps, kink_forms(body.f())};
  auto signature = [&](double y1) {
    std::vector<std::int64_t> s;
    pq.section(y1, &s);
    return s;
  };
  std::vector<double> grid;
  constexpr int kGrid = 256;
  for (int i = 0; i <= kGrid; ++i) grid.push_back(-0.5 + static_cast<double>(i) / kGrid);
  for (double s = eps; s > 1e-14; s *= 0.25) {
    for (double c : {s, -s, 2 * s, -2 * s, s * s, -s * s})
      if (c > -0.5 && c < 0.5) grid.push_back(c);
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  std::vector<double> cuts = grid;
  auto prev = signature(grid.front());
  for (std::size_t i = 1; i < grid.size(); ++i) {
    auto cur = signature(grid[i]);
    if (cur != prev) {
      double lo = grid[i - 1], hi = grid[i];
      for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        (signature(mid) == prev ? lo : hi) = mid;
      }
      cuts.push_back(lo);
      cuts.push_back(hi);
    }
    prev = std::move(cur);
  }
  return integrate_pieces([&](double y1) { return pq.section(y1); }, cuts, error, 1e-10);
}

DensityResult montecarlo_density(const StarBody& body, double eps, const DensityOptions& opts) {
  DensityResult r;
  r.epsilon = eps;
  r.method = DensityMethod::montecarlo;
  r.periodized = !body.bounded();
  const std::uint64_t n = std::max<std::uint64_t>(opts.samples, 1);
  const std::uint64_t m = std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::sqrt(n / 4.0)));
  const std::uint64_t strata = m * m;

  std::function<bool(Vec2)> inside;
  double half = 0.5;
  std::optional<OffsetPattern> pattern;
  if (body.bounded()) {
    constexpr int kScan = 3600;
    double reach = 0.0;
    for (int i = 0; i < kScan; ++i) {
      const double t = 2.0 * std::numbers::pi * i / kScan;
      reach = std::max(reach, 1.0 / body.f().evaluate(std::cos(t), std::sin(t)));
    }
    half = 1.05 * reach * eps;
    inside = [&](Vec2 y) { return body.f()(y) < eps; };
  } else {
    pattern.emplace(body);
    inside = [&](Vec2 y) {
      for (const Offset& o : pattern->offsets()) {
        if (o.lower > eps * (1.0 + 1e-9)) break;
        if (body.f().evaluate(y.x1 + static_cast<double>(o.o1), y.x2 + static_cast<double>(o.o2)) < eps) return true;
      }
      return false;
    };
  }

  std::vector<std::uint64_t> hits(strata, 0), count(strata, 0);
  const CounterRng rng(opts.seed, 0xd3a5);
  parallel_blocks(strata, [&](std::size_t begin, std::size_t end) {
    for (std::size_t h = begin; h < end; ++h) {
      const double c1 = static_cast<double>(h % m);
      const double c2 = static_cast<double>(h / m);
      for (std::uint64_t i = h; i < n; i += strata) {
        const Vec2 u{(c1 + rng.uniform(2 * i)) / m, (c2 + rng.uniform(2 * i + 1)) / m};
        hits[h] += inside({(2.0 * u.x1 - 1.0) * half, (2.0 * u.x2 - 1.0) * half}) ? 1 : 0;
        ++count[h];
      }
    }
  });
  double mean = 0.0;
  double var = 0.0;
  const double w = 1.0 / static_cast<double>(strata);
  for (std::uint64_t h = 0; h < strata; ++h) {
    const double ph = static_cast<double>(hits[h]) / static_cast<double>(count[h]);
    mean += w * ph;
    if (count[h] > 1) var += w * w * ph * (1.0 - ph) / static_cast<double>(count[h] - 1);
  }
  const double area = 4.0 * half * half;
  r.value = area * mean;
  r.stderr_ = area * std::sqrt(var);
  return r;
}

}  // namespace

std::optional<double> analytic_density(const StarBody& body, double epsilon) {
  long double factor = 1;
  const Expr& e = strip_scale(body.f().expr(), factor);
  const long double eps = static_cast<long double>(epsilon) / factor;
  if (body.bounded() && e.kind == NodeKind::max &&
      std::all_of(e.children.begin(), e.children.end(), [](const Expr& c) { return c.kind == NodeKind::abs; })) {
    constexpr long double kBig = 1e9L;
    Polygon poly = {{-kBig, -kBig}, {kBig, -kBig}, {kBig, kBig}, {-kBig, kBig}};
    for (const auto& c : e.children) {
      const long double a = c.form.a.value_ld();
      const long double b = c.form.b.value_ld();
      poly = clip(clip(poly, a, b), -a, -b);
    }
    return static_cast<double>(polygon_area(poly) * eps * eps);
  }
  if (!body.bounded() && e.kind == NodeKind::gm && e.children.size() == 2 &&
      e.children[0].kind == NodeKind::abs && e.children[1].kind == NodeKind::abs) {
    const LinearForm& l0 = e.children[0].form;
    const LinearForm& l1 = e.children[1].form;
    long double k2 = -1;
    if (l0.b.is_zero() && l1.a.is_zero()) k2 = std::fabs(l0.a.value_ld() * l1.b.value_ld());
    if (l0.a.is_zero() && l1.b.is_zero()) k2 = std::fabs(l0.b.value_ld() * l1.a.value_ld());
    if (k2 > 0) {
      const long double c = eps * eps / k2;
      if (c >= 0.25L) return 1.0;
      return static_cast<double>(4 * (c + c * std::log(1 / (4 * c))));
    }
  }
  if (!body.bounded() && e.kind == NodeKind::abs && (e.form.a.is_zero() || e.form.b.is_zero())) {
    const long double k = std::fabs(e.form.a.is_zero() ? e.form.b.value_ld() : e.form.a.value_ld());
    return static_cast<double>(std::min<long double>(1, 2 * eps / k));
  }
  return std::nullopt;
}

DensityGrowth density_growth(const StarBody& body) {
  if (body.bounded()) return DensityGrowth::quadratic;
  long double factor = 1;
  const Expr& e = strip_scale(body.f().expr(), factor);
  auto axis = [](const Expr& c) { return c.kind == NodeKind::abs && (c.form.a.is_zero() || c.form.b.is_zero()); };
  if (axis(e)) return DensityGrowth::linear;
  if (e.kind == NodeKind::gm && e.children.size() == 2 && axis(e.children[0]) && axis(e.children[1]) &&
      e.children[0].form.a.is_zero() != e.children[1].form.a.is_zero())
    return DensityGrowth::quadratic_log;
  return DensityGrowth::unknown;
}

DensityResult density(const StarBody& body, double epsilon, const DensityOptions& opts) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw ValidationError("epsilon must be positive and finite");
  if (!body.bounded() && !body.rational_skeleton())
    throw IrrationalSkeleton("periodised density needs a rational skeleton");
  DensityResult r;
  r.epsilon = epsilon;
  r.periodized = !body.bounded();

  auto analytic = [&]() -> std::optional<DensityResult> {
    if (auto v = analytic_density(body, epsilon)) {
      r.value = *v;
      r.method = DensityMethod::analytic;
      return r;
    }
    return std::nullopt;
  };
  auto quadrature = [&]() {
    double error = 0.0;
    double value = 0.0;
    if (body.bounded()) {
      const double unit = bounded_unit_area(body.f(), error);
      value = unit * epsilon * epsilon;
      error *= epsilon * epsilon;
    } else {
      value = periodized_quadrature(body, epsilon, error);
    }
    if (!(error <= opts.tolerance) || !std::isfinite(value))
      throw NonConvergent("quadrature error estimate " + std::to_string(error) + " exceeds tolerance");
    r.value = value;
    r.stderr_ = 0.0;
    r.method = DensityMethod::quadrature;
    return r;
  };

  switch (opts.method) {
    case DensityMethod::analytic:
      if (auto a = analytic()) return *a;
      throw ValidationError("no closed form registered for " + body.f().to_string());
    case DensityMethod::quadrature:
      return quadrature();
    case DensityMethod::montecarlo:
      return montecarlo_density(body, epsilon, opts);
    case DensityMethod::automatic:
      break;
  }
  if (auto a = analytic()) return *a;
  try {
    return quadrature();
  } catch (const NonConvergent&) {
    return montecarlo_density(body, epsilon, opts);
  }
}

}  // namespace starkit
