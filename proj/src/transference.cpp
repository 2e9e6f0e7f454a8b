#include "starkit/transference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <tuple>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_int.hpp>

#include "starkit/random.hpp"

namespace starkit {

namespace mp = boost::multiprecision;
using HP = mp::cpp_bin_float_50;
using BigQ = mp::cpp_rational;
using IVec = std::vector<std::int64_t>;

double nearest_signed_distance(double x) { return x - std::floor(x + 0.5); }
long double nearest_signed_distance(long double x) { return x - std::floor(x + 0.5L); }

double f_plus(const IVec& q) {
  if (q.empty()) return 1.0;
  long double log_sum = 0.0L;
  for (std::int64_t v : q) log_sum += std::log(std::max<long double>(1.0L, std::fabs(static_cast<long double>(v))));
  return static_cast<double>(std::exp(log_sum / static_cast<long double>(q.size())));
}

double NuVector::product() const {
  long double p = 1.0L;
  for (double v : nu) p *= v;
  return static_cast<double>(p);
}

double NuVector::h(const std::vector<double>& x) const {
  if (x.size() != nu.size()) throw DimensionMismatch("nu and x differ in length");
  double m = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) m = std::max(m, nu[i] * std::fabs(x[i]));
  return m;
}

std::optional<NuVector> find_nu(const std::vector<double>& x, double lambda) {
  if (!(lambda > 0.0)) throw ValidationError("lambda must be positive");
  if (x.empty()) throw DimensionMismatch("x must be non-empty");
  const std::size_t n = x.size();
  std::size_t zeros = 0;
  long double log_prod = 0.0L;
  for (double v : x) {
    if (v == 0.0) {
      ++zeros;
    } else {
      log_prod += std::log(std::fabs(static_cast<long double>(v)));
    }
  }
  if (zeros == 0 && log_prod / static_cast<long double>(n) > std::log(static_cast<long double>(lambda))) return std::nullopt;
  NuVector out;
  out.nu.assign(n, 1.0);
  long double log_nu = 0.0L;
  const std::size_t closing = zeros == 0 ? n - 1 : n;  // proof formula leaves the last index free
  for (std::size_t i = 0; i < closing; ++i) {
    if (x[i] == 0.0) continue;
    out.nu[i] = lambda / std::fabs(x[i]);
    log_nu += std::log(static_cast<long double>(out.nu[i]));
  }
  if (zeros == 0) {
    out.nu[n - 1] = static_cast<double>(std::exp(-log_nu));
  } else {
    const double shared = static_cast<double>(std::exp(-log_nu / static_cast<long double>(zeros)));
    for (std::size_t i = 0; i < n; ++i)
      if (x[i] == 0.0) out.nu[i] = shared;
  }
  return out;
}

const char* matrix_kind_name(MatrixKind k) {
  switch (k) {
    case MatrixKind::A: return "A";
    case MatrixKind::Astar: return "Astar";
    case MatrixKind::Atilde: return "Atilde";
    case MatrixKind::AtildePrime: return "AtildePrime";
    case MatrixKind::AtildeTilde: return "AtildeTilde";
    case MatrixKind::AtildeTildePrime: return "AtildeTildePrime";
  }
  return "?";
}

MatrixEncoding build_matrices(MatrixKind kind, const std::vector<double>& x, const TransferParams& params,
                              const NuVector& nu) {
  if (!(params.lambda > 0.0) || !(params.mu > 0.0)) throw ValidationError("lambda and mu must be positive");
  const std::size_t n = x.size();
  if (n == 0) throw DimensionMismatch("x must be non-empty");
  if (nu.nu.size() != n) throw DimensionMismatch("nu has " + std::to_string(nu.nu.size()) + " entries, x has " +
                                                 std::to_string(n));
  const bool planar = kind != MatrixKind::A && kind != MatrixKind::Astar;
  if (planar && n != 2) throw DimensionMismatch("union-jack matrices need n = 2");
  const double lam = params.lambda, mu = params.mu;
  const double s = std::sqrt(2.0) / 2;
  MatrixEncoding m{kind, Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n + 1), static_cast<Eigen::Index>(n + 1))};
  auto& e = m.entries;
  switch (kind) {
    case MatrixKind::A:
    case MatrixKind::Atilde:
      for (std::size_t i = 0; i < n; ++i) {
        e(i, 0) = x[i] / lam;
        e(i, i + 1) = nu.nu[i] / mu;
      }
      e(n, 0) = 1 / lam;
      break;
    case MatrixKind::Astar:
    case MatrixKind::AtildeTilde:
      e(0, 0) = lam;
      for (std::size_t i = 0; i < n; ++i) {
        e(0, i + 1) = -mu * x[i] / nu.nu[i];
        e(i + 1, i + 1) = mu / nu.nu[i];
      }
      break;
    case MatrixKind::AtildePrime:
      e(0, 0) = x[0] / lam;
      e(0, 1) = s * nu.nu[0] / mu;
      e(0, 2) = -s * nu.nu[1] / mu;
      e(1, 0) = -x[1] / lam;
      e(1, 1) = s * nu.nu[0] / mu;
      e(1, 2) = s * nu.nu[1] / mu;
      e(2, 0) = 1 / lam;
      break;
    case MatrixKind::AtildeTildePrime:
      e(0, 0) = lam;
      e(0, 1) = -s * mu * (x[0] - x[1]) / nu.nu[0];
      e(0, 2) = s * mu * (x[0] + x[1]) / nu.nu[1];
      e(1, 1) = s * mu / nu.nu[0];
      e(1, 2) = s * mu / nu.nu[1];
      e(2, 1) = -s * mu / nu.nu[0];
      e(2, 2) = s * mu / nu.nu[1];
      break;
  }
  return m;
}

namespace {

Eigen::RowVectorXd as_row(const IVec& v, Eigen::Index size) {
  if (static_cast<Eigen::Index>(v.size()) != size) throw DimensionMismatch("integer vector has the wrong length");
  Eigen::RowVectorXd r(size);
  for (Eigen::Index i = 0; i < size; ++i) r(i) = static_cast<double>(v[static_cast<std::size_t>(i)]);
  return r;
}

}  // namespace

double phi_value(const MatrixEncoding& m, const MatrixEncoding& mstar, const IVec& a, const IVec& b) {
  const auto size = m.entries.rows();
  if (mstar.entries.rows() != size) throw DimensionMismatch("matrix sizes differ");
  return (as_row(a, size) * m.entries).dot(as_row(b, size) * mstar.entries);
}

std::int64_t phi_expected(MatrixKind kind, const IVec& a, const IVec& b) {
  if (a.size() != b.size() || a.size() < 2) throw DimensionMismatch("a and b must have equal length >= 2");
  if (kind == MatrixKind::AtildePrime || kind == MatrixKind::AtildeTildePrime) {
    if (a.size() != 3) throw DimensionMismatch("union-jack pairing needs length 3");
    return a[2] * b[0] + a[1] * b[1] - a[0] * b[2];
  }
  const std::size_t n = a.size() - 1;
  std::int64_t s = a[n] * b[0];
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i + 1];
  return s;
}

double encoded_norm(const MatrixEncoding& m, const IVec& q_tilde) {
  return (as_row(q_tilde, m.entries.rows()) * m.entries).cwiseAbs().maxCoeff();
}

// ---------------------------------------------------------------------------

std::vector<double> to_doubles(const RealVector& x) {
  std::vector<double> out;
  for (const auto& c : x) out.push_back(c.value());
  return out;
}

bool all_irrational(const RealVector& x) {
  return std::all_of(x.begin(), x.end(), [](const Coefficient& c) { return !c.is_rational(); });
}

namespace {

constexpr long double kRefine = 1e-12L;

BigQ to_bigq(const Rational& r) { return BigQ(mp::cpp_int(r.numerator()), mp::cpp_int(r.denominator())); }

// <sum_i q_i x_i> in 50 digits; exact when every x_i is rational.
HP hp_distance(const RealVector& x, const IVec& q) {
  std::map<std::int64_t, BigQ> parts;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (q[i] == 0 || x[i].is_zero()) continue;
    parts[x[i].radicand()] += to_bigq(x[i].rational()) * q[i];
  }
  if (parts.empty()) return HP(0);
  if (parts.size() == 1 && parts.begin()->first == 1) {
    const BigQ r = parts.begin()->second;
    const BigQ shifted = r + BigQ(1, 2);
    mp::cpp_int k = mp::numerator(shifted) / mp::denominator(shifted);
    if (mp::numerator(shifted) < 0 && k * mp::denominator(shifted) != mp::numerator(shifted)) --k;
    return HP(r - BigQ(k));
  }
  HP v = 0;
  for (const auto& [k, r] : parts) v += HP(r) * (k == 1 ? HP(1) : mp::sqrt(HP(k)));
  return v - mp::floor(v + HP(0.5));
}

long double fast_dot(const std::vector<long double>& xs, const IVec& q) {
  long double v = 0.0L;
  for (std::size_t i = 0; i < xs.size(); ++i) v += static_cast<long double>(q[i]) * xs[i];
  return v;
}

std::vector<long double> to_ld(const RealVector& x) {
  std::vector<long double> out;
  for (const auto& c : x) out.push_back(c.value_ld());
  return out;
}

// |<q.x>| with refinement near `threshold`, near 0 and near 1/2.
long double abs_distance(const RealVector& x, const std::vector<long double>& xs, const IVec& q,
                         long double threshold) {
  const long double d = std::fabs(nearest_signed_distance(fast_dot(xs, q)));
  if (std::fabs(d - threshold) <= kRefine || d <= kRefine || d >= 0.5L - kRefine)
    return static_cast<long double>(mp::abs(hp_distance(x, q)));
  return d;
}


bool canonical_sign(const IVec& q) {
  for (std::int64_t v : q)
    if (v != 0) return v > 0;
  return false;
}

std::int64_t product_budget(double mu, std::size_t n) {
  const long double m = std::pow(static_cast<long double>(mu), static_cast<long double>(n));
  if (m > 9e18L) throw ValidationError("mu^n too large to enumerate");
  return static_cast<std::int64_t>(std::floor(m * (1 + 1e-12L)));
}

struct Candidate {
  IVec q;
  long double key;  // ordering key (F+ product, union-jack G, sup norm)
  long double lhs;
};

bool candidate_less(const Candidate& a, const Candidate& b) {
  if (a.key != b.key) return a.key < b.key;
  return a.q < b.q;
}

// All q != 0 with |q_i| <= qbound and prod max(|q_i|,1) <= budget passing `keep`,
// sorted by (product, q). Parallel over the first coordinate.
template <class Keep>
std::vector<Candidate> enumerate_products(std::size_t n, std::int64_t qbound, std::int64_t budget, Keep&& keep) {
  std::vector<Candidate> out;
  if (budget < 1 || qbound < 0) return out;
  const std::int64_t first = std::min(qbound, budget);
  const auto width = static_cast<std::size_t>(2 * first + 1);
  std::vector<std::vector<Candidate>> buckets(width);
  parallel_blocks(width, [&](std::size_t begin, std::size_t end) {
    IVec q(n, 0);
    for (std::size_t b = begin; b < end; ++b) {
      q[0] = static_cast<std::int64_t>(b) - first;
      const std::int64_t rest = budget / std::max<std::int64_t>(1, std::llabs(q[0]));
      auto recurse = [&](auto&& self, std::size_t i, std::int64_t left, std::int64_t prod) -> void {
        if (i == n) {
          if (std::any_of(q.begin(), q.end(), [](std::int64_t v) { return v != 0; })) {
            long double lhs = 0;
            if (keep(q, prod, lhs)) buckets[b].push_back({q, static_cast<long double>(prod), lhs});
          }
          return;
        }
        const std::int64_t lim = std::min(qbound, left);
        for (std::int64_t v = -lim; v <= lim; ++v) {
          q[i] = v;
          const std::int64_t m = std::max<std::int64_t>(1, std::llabs(v));
          self(self, i + 1, left / m, prod * m);
        }
        q[i] = 0;
      };
      recurse(recurse, 1, rest, std::max<std::int64_t>(1, std::llabs(q[0])));
    }
  });
  for (auto& b : buckets)
    for (auto& c : b) out.push_back(std::move(c));
  std::sort(out.begin(), out.end(), candidate_less);
  return out;
}

}  // namespace

long double inner_distance(const RealVector& x, const IVec& q) {
  if (q.size() != x.size()) throw DimensionMismatch("q and x differ in length");
  const auto xs = to_ld(x);
  const long double d = nearest_signed_distance(fast_dot(xs, q));
  if (std::fabs(d) <= kRefine || std::fabs(d) >= 0.5L - kRefine)
    return static_cast<long double>(hp_distance(x, q));
  return d;
}

long double scaled_distance(const Coefficient& xi, std::int64_t p) { return inner_distance({xi}, {p}); }

std::vector<IVec> solve_system_i(const RealVector& x, const TransferParams& params, std::int64_t qbound) {
  if (x.empty()) throw DimensionMismatch("x must be non-empty");
  if (params.lambda < 0.0 || !(params.mu > 0.0)) throw ValidationError("need lambda >= 0 and mu > 0");
  if (qbound < 1) throw ValidationError("Qbound must be >= 1");
  const auto xs = to_ld(x);
  const long double lam = params.lambda;
  const auto found = enumerate_products(x.size(), qbound, product_budget(params.mu, x.size()),
                                        [&](const IVec& q, std::int64_t, long double& lhs) {
                                          lhs = abs_distance(x, xs, q, lam);
                                          return lhs <= lam;
                                        });
  std::vector<IVec> out;
  for (const auto& c : found) out.push_back(c.q);
  return out;
}

namespace {

// (prod |<p x_i>|)^(1/n), refined near `target`.
long double gm_at(const RealVector& x, const std::vector<long double>& xs, std::int64_t p, long double target) {
  const std::size_t n = x.size();
  long double prod = 1.0L;
  for (std::size_t i = 0; i < n; ++i) prod *= std::fabs(nearest_signed_distance(static_cast<long double>(p) * xs[i]));
  long double gm = std::pow(prod, 1.0L / static_cast<long double>(n));
  if (std::fabs(gm - target) <= kRefine * std::max(1.0L, target) || prod <= kRefine) {
    HP hp = 1;
    for (std::size_t i = 0; i < n; ++i) hp *= mp::abs(hp_distance({x[i]}, {p}));
    gm = static_cast<long double>(mp::pow(hp, HP(1) / static_cast<int>(n)));
  }
  return gm;
}

std::optional<SystemIISolution> search_p(const RealVector& x, const std::vector<long double>& xs,
                                         const TransferParams& params, long double target) {
  const auto n = static_cast<long double>(x.size());
  const long double bound = n * params.mu * std::pow(static_cast<long double>(params.lambda), (1 - n) / n);
  if (bound > 1e9L) throw ValidationError("p range n mu lambda^((1-n)/n) = " + std::to_string(static_cast<double>(bound)) +
                                          " is too large to enumerate");
  const auto pmax = static_cast<std::int64_t>(std::floor(bound * (1 + 1e-12L)));
  const long double det_bound = n * params.mu * std::pow(static_cast<long double>(params.lambda), 1 / n);
  for (std::int64_t p = 1; p <= pmax; ++p) {
    const long double gm = gm_at(x, xs, p, target);
    if (gm <= target) {
      // <-p x_i> = -<p x_i> away from half-integers, so p > 0 suffices
      return SystemIISolution{p, static_cast<double>(gm), static_cast<double>(bound),
                              static_cast<long double>(p) <= det_bound * (1 + 1e-12L)};
    }
  }
  return std::nullopt;
}

}  // namespace

std::optional<SystemIISolution> solve_system_ii(const RealVector& x, const TransferParams& params,
                                                std::optional<double> gm_target) {
  if (x.empty()) throw DimensionMismatch("x must be non-empty");
  if (!(params.lambda > 0.0) || !(params.mu > 0.0)) throw ValidationError("lambda and mu must be positive");
  const long double target =
      gm_target ? static_cast<long double>(*gm_target) : static_cast<long double>(x.size()) * params.lambda;
  return search_p(x, to_ld(x), params, target);
}

Prop5Report verify_prop5(const RealVector& x, const TransferParams& params, std::int64_t qbound) {
  Prop5Report r;
  r.params = params;
  const auto sols = solve_system_i(x, params, qbound);
  r.system_i_count = sols.size();
  if (!sols.empty()) r.q_witness = sols.front();
  r.p_witness = solve_system_ii(x, params);
  const double n = static_cast<double>(x.size());
  r.p_witness_det = solve_system_ii(x, params, n * std::pow(params.lambda, 1 / n));
  r.forward_counterexample = !sols.empty() && !r.p_witness;
  r.reverse_counterexample = sols.empty() && r.p_witness.has_value();
  r.vacuous = sols.empty() && !r.p_witness;
  return r;
}

// ---------------------------------------------------------------------------

std::vector<double> epsilon_prime_grid(double epsilon) {
  std::vector<double> g;
  for (int k = 1; k <= 20; ++k) g.push_back(std::ldexp(epsilon, -k));
  return g;
}

double union_jack_value(double a, double b) {
  return std::sqrt(std::min(std::fabs(a * b), std::fabs(a * a - b * b) / 2));
}

namespace {

// Largest grid eps' with value <= |p|^(-(1+eps')/n); also whether the
// admissible set is downward closed.
std::pair<double, bool> admissible(double value, std::int64_t p, double n, double epsilon) {
  const auto grid = epsilon_prime_grid(epsilon);  // decreasing
  double best = 0.0;
  bool seen_fail_after_pass = false, passed = false;
  for (double e : grid) {
    const double rhs = std::pow(static_cast<double>(std::llabs(p)), -(1 + e) / n);
    const bool ok = value <= rhs;
    if (ok && !passed) {
      best = e;
      passed = true;
    } else if (!ok && passed) {
      seen_fail_after_pass = true;
    }
  }
  return {best, !seen_fail_after_pass};
}

void summarise(TransferReport& r) {
  std::set<std::int64_t> ps;
  r.settled_from = r.witnesses.size();
  for (std::size_t i = r.witnesses.size(); i-- > 0;) {
    const auto& w = r.witnesses[i];
    if (!(w.p && w.eps_prime > 0.0)) break;
    r.settled_from = i;
  }
  for (const auto& w : r.witnesses) {
    if (w.p) {
      ++r.with_p;
      ps.insert(*w.p);
    }
    if (w.eps_prime > 0.0) ++r.with_eps_prime;
  }
  r.distinct_p = ps.size();
}

void check_inputs(const RealVector& x, double epsilon, double bound) {
  if (x.empty()) throw DimensionMismatch("x must be non-empty");
  if (!all_irrational(x)) throw ValidationError("every coordinate of x must be irrational");
  if (!(epsilon > 0.0)) throw ValidationError("epsilon must be positive");
  if (!(bound >= 1.0)) throw ValidationError("bound must be >= 1");
}

std::int64_t nearest_integer(const std::vector<long double>& xs, const IVec& q) {
  return static_cast<std::int64_t>(std::floor(fast_dot(xs, q) + 0.5L));
}

}  // namespace

TransferReport verify_theorem_multitrans(const RealVector& x, double epsilon, double bound) {
  check_inputs(x, epsilon, bound);
  const std::size_t n = x.size();
  const auto xs = to_ld(x);
  const auto budget = product_budget(bound, n);
  const auto qbound = budget;
  const auto found = enumerate_products(n, qbound, budget, [&](const IVec& q, std::int64_t prod, long double& lhs) {
    if (!canonical_sign(q)) return false;
    const long double rhs = std::pow(static_cast<long double>(prod), -1 - static_cast<long double>(epsilon));
    lhs = abs_distance(x, xs, q, rhs);
    return lhs <= rhs;
  });
  if (found.empty()) throw NoSolutions("no q with F+(q) <= " + std::to_string(bound) + "; raise the bound");

  TransferReport r;
  r.kind = "mult";
  r.x = to_doubles(x);
  r.epsilon = epsilon;
  r.bound = bound;
  const double dn = static_cast<double>(n);
  for (const auto& c : found) {
    TransferWitness w;
    w.q = c.q;
    w.mu = static_cast<double>(std::pow(c.key, 1.0L / static_cast<long double>(n)));
    w.lambda = std::pow(w.mu, -1 - epsilon);
    w.lhs = static_cast<double>(c.lhs);
    std::vector<double> m;
    for (std::int64_t v : c.q) m.push_back(static_cast<double>(std::max<std::int64_t>(1, std::llabs(v))));
    if (const auto nu = find_nu(m, w.mu * (1 + 1e-12))) {
      const TransferParams tp{w.lambda, w.mu};
      IVec qt = c.q;
      qt.push_back(-nearest_integer(xs, c.q));
      w.encoded = encoded_norm(build_matrices(MatrixKind::A, r.x, tp, *nu), qt) <= 1 + 1e-10;
    }
    const auto p = solve_system_ii(x, {w.lambda, w.mu});
    if (p) {
      w.p = p->p;
      w.p_value = p->gm;
      std::tie(w.eps_prime, w.monotone) = admissible(p->gm, p->p, dn, epsilon);
    }
    r.witnesses.push_back(std::move(w));
  }
  summarise(r);
  return r;
}

TransferReport verify_theorem_unionjack(const RealVector& xy, double epsilon, double bound) {
  check_inputs(xy, epsilon, bound);
  if (xy.size() != 2) throw DimensionMismatch("the union-jack harness is planar");
  const auto xs = to_ld(xy);
  const long double s = std::sqrt(2.0L) / 2;
  const long double b2 = static_cast<long double>(bound) * bound;
  if (b2 > 4e9L) throw ValidationError("bound too large to enumerate");
  const auto axis_budget = static_cast<std::int64_t>(std::floor(b2 * (1 + 1e-12L)));
  const auto rot_budget = static_cast<std::int64_t>(std::floor(b2 / s * (1 + 1e-12L)));

  auto g_of = [&](const IVec& q) {
    auto m = [](std::int64_t v) { return static_cast<long double>(std::max<std::int64_t>(1, std::llabs(v))); };
    const long double axis = m(q[0]) * m(q[1]);
    const long double rot = s * m(q[0] + q[1]) * m(q[0] - q[1]);
    return std::pair{std::min(axis, rot), axis <= rot};
  };
  auto keep = [&](const IVec& q, long double& lhs, long double& g) {
    if (!canonical_sign(q)) return false;
    g = g_of(q).first;
    if (g > b2 * (1 + 1e-12L)) return false;
    const long double rhs = std::pow(g, -1 - static_cast<long double>(epsilon));
    lhs = abs_distance(xy, xs, q, rhs);
    return lhs <= rhs;
  };
  std::vector<Candidate> found;
  // axis branch: prod max(|q_i|,1) <= B^2
  for (auto& c : enumerate_products(2, axis_budget, axis_budget, [&](const IVec& q, std::int64_t, long double& lhs) {
         long double g = 0;
         return keep(q, lhs, g);
       })) {
    c.key = g_of(c.q).first;
    found.push_back(std::move(c));
  }
  // rotated branch: (u, v) = (q1 + q2, q1 - q2) with equal parity
  for (auto& c : enumerate_products(2, rot_budget, rot_budget, [&](const IVec& uv, std::int64_t, long double& lhs) {
         if ((uv[0] - uv[1]) % 2 != 0) return false;
         long double g = 0;
         return keep({(uv[0] + uv[1]) / 2, (uv[0] - uv[1]) / 2}, lhs, g);
       })) {
    IVec q{(c.q[0] + c.q[1]) / 2, (c.q[0] - c.q[1]) / 2};
    found.push_back({q, g_of(q).first, c.lhs});
  }
  std::sort(found.begin(), found.end(), candidate_less);
  found.erase(std::unique(found.begin(), found.end(), [](const Candidate& a, const Candidate& b) { return a.q == b.q; }),
              found.end());
  if (found.empty()) throw NoSolutions("no union-jack solutions below the bound; raise it");

  TransferReport r;
  r.kind = "unionjack";
  r.x = to_doubles(xy);
  r.epsilon = epsilon;
  r.bound = bound;
  for (const auto& c : found) {
    TransferWitness w;
    w.q = c.q;
    w.mu = static_cast<double>(std::sqrt(c.key));
    w.lambda = std::pow(w.mu, -1 - epsilon);
    w.lhs = static_cast<double>(c.lhs);
    w.branch = g_of(c.q).second ? "axis" : "rotated";
    const TransferParams tp{w.lambda, w.mu};
    const std::int64_t k = nearest_integer(xs, c.q);
    auto m = [](std::int64_t v) { return static_cast<double>(std::max<std::int64_t>(1, std::llabs(v))); };
    double best = std::numeric_limits<double>::infinity();
    if (const auto nu = find_nu({m(c.q[0]), m(c.q[1])}, w.mu * (1 + 1e-12)))
      best = std::min(best, encoded_norm(build_matrices(MatrixKind::Atilde, r.x, tp, *nu), {c.q[0], c.q[1], -k}));
    const double sd = std::sqrt(2.0) / 2;
    if (const auto nu = find_nu({sd * m(c.q[0] - c.q[1]), sd * m(c.q[0] + c.q[1])}, w.mu * (1 + 1e-12)))
      best = std::min(best,
                      encoded_norm(build_matrices(MatrixKind::AtildePrime, r.x, tp, *nu), {c.q[0], -c.q[1], -k}));
    w.encoded = best <= 1 + 1e-10;

    // system (ii): F'(<p x>, <p y>) <= 2 lambda, |p| <= 2 mu lambda^(-1/2)
    const long double pbound = 2.0L * w.mu / std::sqrt(static_cast<long double>(w.lambda));
    if (pbound > 1e9L) throw ValidationError("p range too large to enumerate");
    const auto pmax = static_cast<std::int64_t>(std::floor(pbound * (1 + 1e-12L)));
    for (std::int64_t p = 1; p <= pmax; ++p) {
      const double a = static_cast<double>(nearest_signed_distance(static_cast<long double>(p) * xs[0]));
      const double b = static_cast<double>(nearest_signed_distance(static_cast<long double>(p) * xs[1]));
      const double v = union_jack_value(a, b);
      if (v <= 2 * w.lambda) {
        w.p = p;
        w.p_value = v;
        std::tie(w.eps_prime, w.monotone) = admissible(v, p, 2.0, epsilon);
        break;
      }
    }
    r.witnesses.push_back(std::move(w));
  }
  summarise(r);
  return r;
}

TransferReport verify_khintchine_transfer(const RealVector& x, double epsilon, double bound) {
  check_inputs(x, epsilon, bound);
  const std::size_t n = x.size();
  const auto xs = to_ld(x);
  const auto qb = static_cast<std::int64_t>(std::floor(bound));
  const long double dn = static_cast<long double>(n);
  if (std::pow(2.0L * qb + 1, dn) > 2e9L) throw ValidationError("box too large to enumerate");
  // the box [-qb, qb]^n is the product budget qb^n restricted to |q_i| <= qb
  std::vector<Candidate> found;
  {
    const std::int64_t box_budget = static_cast<std::int64_t>(std::pow(static_cast<long double>(qb), dn));
    for (auto& c : enumerate_products(n, qb, box_budget, [&](const IVec& q, std::int64_t, long double& lhs) {
           if (!canonical_sign(q)) return false;
           std::int64_t h = 0;
           for (std::int64_t v : q) h = std::max<std::int64_t>(h, std::llabs(v));
           const long double rhs = std::pow(static_cast<long double>(h), -dn - static_cast<long double>(epsilon));
           lhs = abs_distance(x, xs, q, rhs);
           return lhs <= rhs;
         })) {
      std::int64_t h = 0;
      for (std::int64_t v : c.q) h = std::max<std::int64_t>(h, std::llabs(v));
      c.key = static_cast<long double>(h);
      found.push_back(std::move(c));
    }
  }
  std::sort(found.begin(), found.end(), candidate_less);
  if (found.empty()) throw NoSolutions("no q with |q| <= " + std::to_string(qb) + "; raise the bound");

  TransferReport r;
  r.kind = "height";
  r.x = to_doubles(x);
  r.epsilon = epsilon;
  r.bound = bound;
  for (const auto& c : found) {
    TransferWitness w;
    w.q = c.q;
    w.mu = static_cast<double>(c.key);
    w.lambda = std::pow(w.mu, -static_cast<double>(n) - epsilon);
    w.lhs = static_cast<double>(c.lhs);
    // dual box: |p| <= n mu lambda^((1-n)/n), ||p x|| <= n lambda^(1/n)
    const long double pbound = dn * w.mu * std::pow(static_cast<long double>(w.lambda), (1 - dn) / dn);
    const long double target = dn * std::pow(static_cast<long double>(w.lambda), 1 / dn);
    if (pbound > 1e9L) throw ValidationError("p range too large to enumerate");
    const auto pmax = static_cast<std::int64_t>(std::floor(pbound * (1 + 1e-12L)));
    for (std::int64_t p = 1; p <= pmax; ++p) {
      long double sup = 0;
      for (std::size_t i = 0; i < n; ++i)
        sup = std::max(sup, std::fabs(nearest_signed_distance(static_cast<long double>(p) * xs[i])));
      if (sup <= target) {
        w.p = p;
        w.p_value = static_cast<double>(sup);
        std::tie(w.eps_prime, w.monotone) = admissible(w.p_value, p, static_cast<double>(n), epsilon);
        break;
      }
    }
    w.encoded = true;
    r.witnesses.push_back(std::move(w));
  }
  summarise(r);
  return r;
}

}  // namespace starkit
