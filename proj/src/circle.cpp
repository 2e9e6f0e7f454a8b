#include "starkit/circle.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>

#include <boost/multiprecision/cpp_int.hpp>

#include "starkit/random.hpp"

namespace starkit {

using boost::multiprecision::cpp_rational;

namespace {

BigInt floor_div(const BigInt& a, const BigInt& b) {
  BigInt q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

void push_quotient(ContinuedFraction& cf, const BigInt& a) {
  const std::size_t k = cf.quotients.size();
  cf.quotients.push_back(a);
  const BigInt p1 = k >= 1 ? cf.convergents[k - 1].p : BigInt(1);
  const BigInt q1 = k >= 1 ? cf.convergents[k - 1].q : BigInt(0);
  const BigInt p2 = k >= 2 ? cf.convergents[k - 2].p : (k == 1 ? BigInt(1) : BigInt(0));
  const BigInt q2 = k >= 2 ? cf.convergents[k - 2].q : (k == 1 ? BigInt(0) : BigInt(1));
  cf.convergents.push_back({a * p1 + p2, a * q1 + q2});
}

ContinuedFraction cf_big_rational(BigInt num, BigInt den, int depth) {
  if (den == 0) throw ValidationError("zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  ContinuedFraction cf;
  while (static_cast<int>(cf.quotients.size()) < depth) {
    const BigInt a = floor_div(num, den);
    push_quotient(cf, a);
    const BigInt rem = num - a * den;
    if (rem == 0) {
      cf.terminated = true;
      break;
    }
    num = den;
    den = rem;
  }
  return cf;
}

void check_depth(int depth) {
  if (depth < 1) throw ValidationError("depth must be >= 1");
}

cpp_rational exact_value(long double x) {
  int e = 0;
  const long double m = std::frexp(x, &e);
  // 64-bit mantissa scaled to an integer
  const long double scaled = std::ldexp(m, 64);
  const auto mant = static_cast<long long>(scaled / 2);  // keep the sign bit free
  cpp_rational r(BigInt(mant) * 2 + (std::fmod(scaled, 2.0L) != 0 ? (x < 0 ? -1 : 1) : 0));
  const int shift = e - 64;
  if (shift >= 0) {
    r *= cpp_rational(BigInt(1) << shift);
  } else {
    r /= cpp_rational(BigInt(1) << -shift);
  }
  return r;
}

BigInt floor_rat(const cpp_rational& r) { return floor_div(numerator(r), denominator(r)); }

}  // namespace

long double QuadraticSurd::value() const {
  return (a.convert_to<long double>() + b.convert_to<long double>() * std::sqrt(d.convert_to<long double>())) /
         c.convert_to<long double>();
}

std::string QuadraticSurd::to_string() const {
  std::string num;
  if (a != 0) num = a.str();
  if (b != 0) {
    std::string term = (b == 1 ? std::string() : (b == -1 ? std::string("-") : b.str() + "*")) + "sqrt" + d.str();
    if (!num.empty() && term[0] != '-') num += "+";
    num += term;
  }
  if (num.empty()) num = "0";
  if (c == 1) return num;
  return "(" + num + ")/" + c.str();
}

std::optional<QuadraticSurd> parse_surd(const std::string& raw) {
  std::string s;
  for (char ch : raw)
    if (!std::isspace(static_cast<unsigned char>(ch))) s += ch;
  if (s == "golden" || s == "phi") return QuadraticSurd{1, 1, 5, 2};
  if (s.find("sqrt") == std::string::npos) return std::nullopt;
  QuadraticSurd out;
  std::size_t i = 0;
  auto integer = [&](BigInt& v) {
    const std::size_t start = i;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
    if (i == start) return false;
    v = BigInt(s.substr(start, i - start));
    return true;
  };
  const bool paren = i < s.size() && s[i] == '(';
  if (paren) ++i;
  // [int (+|-)] [int *] sqrt int
  BigInt a = 0, b = 1;
  int sign_a = 1, sign_b = 1;
  if (i < s.size() && (s[i] == '-' || s[i] == '+')) {
    sign_a = s[i] == '-' ? -1 : 1;
    ++i;
  }
  const std::size_t mark = i;
  BigInt first;
  if (integer(first)) {
    if (i < s.size() && s[i] == '*') {
      ++i;
      b = first;
      sign_b = sign_a;
      sign_a = 1;
    } else if (i < s.size() && (s[i] == '+' || s[i] == '-')) {
      a = first;
      sign_b = s[i] == '-' ? -1 : 1;
      ++i;
      BigInt coef;
      if (integer(coef)) {
        if (i >= s.size() || s[i] != '*') return std::nullopt;
        ++i;
        b = coef;
      }
    } else {
      return std::nullopt;
    }
  } else {
    i = mark;
    sign_b = sign_a;
    sign_a = 1;
  }
  if (s.compare(i, 4, "sqrt") != 0) return std::nullopt;
  i += 4;
  BigInt d;
  if (!integer(d) || d < 2) return std::nullopt;
  // trailing "+int" / "-int" form such as sqrt2-1
  if (a == 0 && i < s.size() && (s[i] == '+' || s[i] == '-')) {
    const int sg = s[i] == '-' ? -1 : 1;
    ++i;
    if (!integer(a)) return std::nullopt;
    sign_a = sg;
  }
  BigInt c = 1;
  if (paren) {
    if (i >= s.size() || s[i] != ')') return std::nullopt;
    ++i;
  }
  if (i < s.size() && s[i] == '/') {
    ++i;
    if (!integer(c) || c == 0) return std::nullopt;
  }
  if (i != s.size()) return std::nullopt;
  out.a = a * sign_a;
  out.b = b * sign_b;
  out.d = d;
  out.c = c;
  return out;
}

ContinuedFraction continued_fraction(const QuadraticSurd& alpha, int depth) {
  check_depth(depth);
  if (alpha.c == 0) throw ValidationError("zero denominator");
  if (alpha.d < 0) throw ValidationError("negative radicand");
  BigInt P = alpha.a, Q = alpha.c, B = alpha.b;
  if (B < 0) {
    P = -P;
    Q = -Q;
    B = -B;
  }
  BigInt D = B * B * alpha.d;
  const BigInt root = boost::multiprecision::sqrt(D);
  if (root * root == D) return cf_big_rational(P + root, Q, depth);
  if ((D - P * P) % Q != 0) {
    const BigInt aq = Q < 0 ? BigInt(-Q) : Q;
    P *= aq;
    D *= Q * Q;
    Q *= aq;
  }
  const BigInt f = boost::multiprecision::sqrt(D);
  ContinuedFraction cf;
  while (static_cast<int>(cf.quotients.size()) < depth) {
    BigInt a;
    if (Q > 0) {
      a = floor_div(P + f, Q);
    } else {
      a = -(floor_div(P + f, -Q) + 1);
    }
    push_quotient(cf, a);
    P = a * Q - P;
    Q = (D - P * P) / Q;
  }
  return cf;
}

ContinuedFraction continued_fraction(const Rational& alpha, int depth) {
  check_depth(depth);
  return cf_big_rational(BigInt(alpha.numerator()), BigInt(alpha.denominator()), depth);
}

ContinuedFraction continued_fraction(long double alpha, int depth, long double rel_error) {
  check_depth(depth);
  if (!std::isfinite(alpha)) throw ValidationError("alpha must be finite");
  const cpp_rational x = exact_value(alpha);
  const cpp_rational delta = exact_value(std::fabs(alpha) * rel_error);
  cpp_rational lo = x - delta, hi = x + delta;
  ContinuedFraction cf;
  if (delta == 0) {
    return cf_big_rational(numerator(x), denominator(x), depth);
  }
  while (static_cast<int>(cf.quotients.size()) < depth) {
    const BigInt a = floor_rat(lo);
    if (floor_rat(hi) != a || cpp_rational(a) == lo)
      throw PrecisionExhausted("quotient " + std::to_string(cf.quotients.size()) +
                               " is not determined by the input precision");
    push_quotient(cf, a);
    const cpp_rational nlo = 1 / (hi - a);
    const cpp_rational nhi = 1 / (lo - a);
    lo = nlo;
    hi = nhi;
  }
  return cf;
}

// ---------------------------------------------------------------------------

namespace {

long double frac(long double v) { return v - std::floor(v); }

long double circular_gap(long double p, long double s) { return s > p ? s - p : s + 1.0L - p; }

std::vector<long double> merge_distinct(std::vector<long double> v, long double tol) {
  std::sort(v.begin(), v.end());
  std::vector<long double> out;
  for (long double g : v)
    if (out.empty() || g - out.back() > tol) out.push_back(g);
  return out;
}

}  // namespace

long double GapPartition::max_gap() const { return gaps.empty() ? 0.0L : *std::max_element(gaps.begin(), gaps.end()); }

long double GapPartition::gap_sum() const {
  long double s = 0.0L;
  for (long double g : gaps) s += g;
  return s;
}

GapPartition three_distance_partition(long double alpha_inv, long double x0, std::int64_t n, long double tolerance) {
  if (n < 1) throw ValidationError("N must be >= 1");
  GapPartition g;
  g.n = n;
  g.points.reserve(static_cast<std::size_t>(n));
  for (std::int64_t k = 1; k <= n; ++k) g.points.push_back(frac(x0 + static_cast<long double>(k) * alpha_inv));
  std::sort(g.points.begin(), g.points.end());
  for (std::size_t i = 0; i < g.points.size(); ++i)
    g.gaps.push_back(circular_gap(g.points[i], g.points[(i + 1) % g.points.size()]));
  if (g.points.size() == 1) g.gaps[0] = 1.0L;
  g.distinct = merge_distinct(g.gaps, tolerance);
  return g;
}

ThreeDistanceScan::ThreeDistanceScan(long double alpha_inv, long double x0) : alpha_inv_(alpha_inv), x0_(x0) {}

void ThreeDistanceScan::advance() {
  ++n_;
  const long double x = frac(x0_ + static_cast<long double>(n_) * alpha_inv_);
  auto add = [&](long double v) {
    const long double y = v - comp_;
    const long double t = gap_sum_ + y;
    comp_ = (t - gap_sum_) - y;
    gap_sum_ = t;
  };
  if (points_.empty()) {
    points_.insert(x);
    gaps_.insert(1.0L);
    add(1.0L);
    return;
  }
  auto next = points_.lower_bound(x);
  const long double s = next == points_.end() ? *points_.begin() : *next;
  const long double p = next == points_.begin() ? *points_.rbegin() : *std::prev(next);
  const long double old = points_.size() == 1 ? 1.0L : circular_gap(p, s);
  gaps_.erase(gaps_.find(old));
  points_.insert(x);
  const long double g1 = circular_gap(p, x);
  const long double g2 = circular_gap(x, s);
  gaps_.insert(g1);
  gaps_.insert(g2);
  add(g1);
  add(g2);
  add(-old);
}

long double ThreeDistanceScan::max_gap() const { return gaps_.empty() ? 0.0L : *gaps_.rbegin(); }

std::size_t ThreeDistanceScan::distinct_gaps(long double tolerance) const {
  std::size_t count = 0;
  for (auto it = gaps_.begin(); it != gaps_.end(); it = gaps_.upper_bound(*it + tolerance)) ++count;
  return count;
}

std::vector<std::int64_t> ubiquity_sequence(long double alpha_inv, std::int64_t nmax) {
  if (nmax < 1) throw ValidationError("Nmax must be >= 1");
  ThreeDistanceScan scan(alpha_inv, 0.0L);
  std::vector<std::int64_t> out;
  for (std::int64_t n = 1; n <= nmax; ++n) {
    scan.advance();
    if (scan.max_gap() <= 3.0L / static_cast<long double>(n + 1)) out.push_back(n);
  }
  if (out.empty()) throw EmptySequence("no N <= " + std::to_string(nmax) + " with max gap <= 3/(N+1)");
  return out;
}

bool ubiquity_covers(long double alpha_inv, std::int64_t n) {
  const auto part = three_distance_partition(alpha_inv, 0.0L, n);
  const long double rho = 3.0L / static_cast<long double>(n + 1);
  if (2 * rho > 1) return true;
  // open balls (z - rho, z + rho): consecutive centres must be < 2 rho apart
  for (std::size_t i = 0; i < part.points.size(); ++i) {
    const long double a = part.points[i];
    const long double b = part.points[(i + 1) % part.points.size()];
    const long double end_a = a + rho;
    const long double start_b = (b > a ? b : b + 1.0L) - rho;
    if (!(start_b < end_a)) return false;
  }
  return true;
}

std::vector<bool> ubiquity_covers_all(long double alpha_inv, const std::vector<std::int64_t>& ns) {
  if (!std::is_sorted(ns.begin(), ns.end())) throw ValidationError("N values must be ascending");
  if (!ns.empty() && ns.front() < 1) throw ValidationError("N must be >= 1");
  std::vector<bool> out;
  out.reserve(ns.size());
  std::set<long double> points;
  std::multiset<long double> gaps;
  std::size_t next = 0;
  for (std::int64_t n = 1; next < ns.size(); ++n) {
    const long double x = frac(static_cast<long double>(n) * alpha_inv);
    if (points.empty()) {
      gaps.insert(1.0L);
    } else {
      auto it = points.lower_bound(x);
      const long double s = it == points.end() ? *points.begin() : *it;
      const long double p = it == points.begin() ? *points.rbegin() : *std::prev(it);
      gaps.erase(gaps.find(points.size() == 1 ? 1.0L : circular_gap(p, s)));
      gaps.insert(circular_gap(p, x));
      gaps.insert(circular_gap(x, s));
    }
    points.insert(x);
    for (; next < ns.size() && ns[next] == n; ++next) {
      const long double rho = 3.0L / static_cast<long double>(n + 1);
      out.push_back(2 * rho > 1 || *gaps.rbegin() < 2 * rho);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

Expr swap_axes(const Expr& e) {
  Expr out = e;
  if (e.kind == NodeKind::abs) {
    out.form = {e.form.b, e.form.a};
    return out;
  }
  for (auto& c : out.children) c = swap_axes(c);
  return out;
}

namespace {

struct LdVec {
  long double x1, x2;
};

// sublevel_extent in long double, for base points far out on the line.
double extent_ld(const DistanceFunction& f, LdVec p, LdVec v, double eps) {
  auto inside = [&](long double t) { return f.evaluate_ld(p.x1 + v.x1 * t, p.x2 + v.x2 * t) < eps; };
  if (!inside(0.0L)) return 0.0;
  long double hi = eps;
  int guard = 0;
  while (!inside(hi)) {
    hi *= 0.25L;
    if (++guard > 600 || hi == 0.0L) return 0.0;
  }
  long double lo = hi;
  while (inside(hi)) {
    lo = hi;
    hi *= 2.0L;
    if (hi > 1e12L) return 1e12;
  }
  for (int i = 0; i < 200 && hi - lo > 1e-13L * hi; ++i) {
    const long double mid = 0.5L * (lo + hi);
    (inside(mid) ? lo : hi) = mid;
  }
  return static_cast<double>(lo);
}

}  // namespace

double IntervalSystem::lambda(std::int64_t n_r) const {
  if (n_r < 1 || n_r > static_cast<std::int64_t>(records.size())) throw ValidationError("N_r outside the system");
  const auto& rec = records[static_cast<std::size_t>(n_r - 1)];
  return 3.0 / static_cast<double>(n_r + 1) + std::max(rec.w_plus, rec.w_minus);
}

IntervalSystem interval_system(const StarBody& body, const HalfLine& line, double epsilon, double y0,
                               std::int64_t nmax) {
  if (!(epsilon > 0.0)) throw ValidationError("epsilon must be positive");
  if (!(y0 >= 0.0 && y0 < 1.0)) throw ValidationError("y0 must lie in [0, 1)");
  if (nmax < 1) throw ValidationError("Nmax must be >= 1");
  if (line.slope.rational) throw ValidationError("the interval system needs an irrational line");
  if (!line.significant) throw NotSignificant("line " + line.normal.a.to_string() + "*x1+" +
                                              line.normal.b.to_string() + "*x2=0 is not significant");
  IntervalSystem sys;
  sys.epsilon = epsilon;
  sys.y0 = y0;
  long double alpha = -line.normal.a.value_ld() / line.normal.b.value_ld();
  Expr expr = body.f().expr();
  if (std::fabs(alpha) < 1.0L) {
    alpha = 1.0L / alpha;
    expr = swap_axes(expr);
    sys.swapped = true;
  }
  const DistanceFunction f(expr);
  sys.alpha = alpha;
  const long double inv = 1.0L / alpha;
  const long double cosec = std::sqrt(1.0L + inv * inv);
  const LdVec u{inv / cosec, 1.0L / cosec};
  const LdVec normal{-u.x2, u.x1};
  sys.theta = std::atan2(1.0L, inv);
  sys.x0 = frac(static_cast<long double>(y0) * inv);

  sys.records.resize(static_cast<std::size_t>(nmax));
  parallel_blocks(static_cast<std::size_t>(nmax), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      IntervalRecord& rec = sys.records[i];
      rec.n = static_cast<std::int64_t>(i) + 1;
      const long double y = static_cast<long double>(y0) + static_cast<long double>(rec.n);
      const LdVec p{y * inv, y};
      rec.r = y * cosec;
      rec.x = frac(p.x1);
      rec.w_plus = extent_ld(f, p, normal, epsilon);
      rec.w_minus = extent_ld(f, p, {-normal.x1, -normal.x2}, epsilon);
      rec.right = extent_ld(f, p, {1.0L, 0.0L}, epsilon);
      rec.left = extent_ld(f, p, {-1.0L, 0.0L}, epsilon);
    }
  });

  double k = 0.5;
  for (const auto& rec : sys.records) {
    const double w = std::min(rec.w_plus, rec.w_minus);
    const double room = std::min(rec.left, rec.right);
    if (!(w > 0.0) || !(room > 0.0)) throw NotSignificant("empty neighbourhood at n = " + std::to_string(rec.n));
    while (k * w > room) {
      k *= 0.5;
      if (k < 0x1.0p-40) throw NonConvergent("no K keeps I~_n inside I_n");
    }
  }
  sys.k = k;
  for (auto& rec : sys.records) rec.sigma = k * std::min(rec.w_plus, rec.w_minus);
  return sys;
}

std::vector<CoverageRow> coverage_experiment(const IntervalSystem& system, const std::vector<std::int64_t>& stages,
                                             std::uint64_t samples, std::uint64_t seed, int k) {
  if (k < 1) throw ValidationError("k must be >= 1");
  if (samples == 0) throw ValidationError("samples must be positive");
  std::vector<std::int64_t> sorted = stages;
  std::sort(sorted.begin(), sorted.end());
  for (std::int64_t s : sorted)
    if (s < 0 || s > static_cast<std::int64_t>(system.records.size()))
      throw ValidationError("stage " + std::to_string(s) + " outside the interval system");

  const CounterRng rng(seed, 0xC0FE);
  std::vector<double> xs(samples);
  for (std::uint64_t i = 0; i < samples; ++i) xs[i] = rng.uniform(i);
  std::sort(xs.begin(), xs.end());
  std::vector<std::uint32_t> count(samples, 0);
  std::uint64_t once = 0, many = 0;
  auto bump = [&](std::size_t i) {
    const std::uint32_t c = ++count[i];
    if (c == 1) ++once;
    if (c == static_cast<std::uint32_t>(k)) ++many;
  };
  auto mark = [&](double lo, double hi) {  // open (lo, hi) inside [0, 1)
    for (auto it = std::upper_bound(xs.begin(), xs.end(), lo); it != xs.end() && *it < hi; ++it)
      bump(static_cast<std::size_t>(it - xs.begin()));
  };

  std::vector<CoverageRow> out;
  std::size_t next = 0;
  const double n = static_cast<double>(samples);
  auto emit = [&](std::int64_t stage) {
    CoverageRow row;
    row.n = stage;
    row.once = static_cast<double>(once) / n;
    row.at_least_k = static_cast<double>(many) / n;
    row.stderr_ = std::sqrt(row.once * (1 - row.once) / n);
    out.push_back(row);
  };
  while (next < sorted.size() && sorted[next] == 0) emit(sorted[next++]);
  for (std::size_t i = 0; i < system.records.size() && next < sorted.size(); ++i) {
    const auto& rec = system.records[i];
    if (rec.sigma >= 0.5) {
      for (std::size_t j = 0; j < samples; ++j) bump(j);
    } else {
      const double c = static_cast<double>(rec.x);
      const double lo = c - rec.sigma, hi = c + rec.sigma;
      if (lo < 0.0) {
        mark(lo + 1.0, 1.0);
        mark(-1.0, hi);
      } else if (hi > 1.0) {
        mark(lo, 1.0);
        mark(-1.0, hi - 1.0);
      } else {
        mark(lo, hi);
      }
    }
    while (next < sorted.size() && sorted[next] == rec.n) emit(sorted[next++]);
  }
  return out;
}

std::vector<double> tilde_length_sums(const IntervalSystem& system, const std::vector<std::int64_t>& stages) {
  std::vector<double> out;
  for (std::int64_t s : stages) {
    if (s < 0 || s > static_cast<std::int64_t>(system.records.size()))
      throw ValidationError("stage outside the interval system");
    long double sum = 0.0L;
    for (std::int64_t i = 0; i < s; ++i) sum += system.records[static_cast<std::size_t>(i)].len_tilde();
    out.push_back(static_cast<double>(sum));
  }
  return out;
}

}  // namespace starkit
