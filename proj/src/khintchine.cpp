#include "starkit/khintchine.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "starkit/random.hpp"

namespace starkit {

PsiFamily PsiFamily::power(double tau) {
  if (!std::isfinite(tau)) throw ValidationError("tau must be finite");
  PsiFamily p;
  p.kind_ = Kind::power;
  p.tau_ = tau;
  return p;
}

PsiFamily PsiFamily::powerlog(double tau, double sigma) {
  if (!std::isfinite(tau) || !std::isfinite(sigma)) throw ValidationError("tau and sigma must be finite");
  PsiFamily p;
  p.kind_ = Kind::powerlog;
  p.tau_ = tau;
  p.sigma_ = sigma;
  p.first_ = 2;
  return p;
}

PsiFamily PsiFamily::table(std::vector<double> values, std::int64_t first) {
  if (values.empty()) throw ValidationError("psi table is empty");
  if (first < 1) throw ValidationError("psi table must start at q >= 1");
  for (double v : values)
    if (!(v > 0.0) || !std::isfinite(v)) throw ValidationError("psi values must be positive and finite");
  PsiFamily p;
  p.kind_ = Kind::table;
  p.values_ = std::move(values);
  p.first_ = first;
  return p;
}

std::int64_t PsiFamily::first_q() const { return first_; }

std::int64_t PsiFamily::last_q() const {
  if (kind_ == Kind::table) return first_ + static_cast<std::int64_t>(values_.size()) - 1;
  return std::numeric_limits<std::int64_t>::max();
}

double PsiFamily::operator()(std::int64_t q) const {
  if (q < first_q() || q > last_q()) throw ValidationError("q = " + std::to_string(q) + " outside the psi domain");
  const double dq = static_cast<double>(q);
  switch (kind_) {
    case Kind::power:
      return std::pow(dq, -tau_);
    case Kind::powerlog:
      return std::pow(dq, -tau_) * std::pow(std::log(dq), -sigma_);
    case Kind::table:
      return values_[static_cast<std::size_t>(q - first_)];
  }
  return 0.0;
}

bool PsiFamily::q_psi_nonincreasing(std::int64_t qmax) const {
  qmax = std::min(qmax, last_q());
  double prev = std::numeric_limits<double>::infinity();
  for (std::int64_t q = first_q(); q <= qmax; ++q) {
    const double v = static_cast<double>(q) * (*this)(q);
    if (v > prev * (1 + 1e-12)) return false;
    prev = v;
  }
  return true;
}

namespace {

std::string shortest(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

double parse_real(const std::string& s, const std::string& what) {
  double v = 0.0;
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) throw ValidationError("bad " + what + ": '" + s + "'");
  return v;
}

PsiFamily load_psi_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open psi table " + path);
  std::string line;
  std::vector<double> values;
  std::int64_t first = 0;
  std::int64_t expect = 0;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw ValidationError(path + ":" + std::to_string(lineno) + ": expected q,psi");
    const std::string qs = line.substr(0, comma);
    if (lineno == 1 && qs == "q") continue;
    std::int64_t q = 0;
    auto [ptr, ec] = std::from_chars(qs.data(), qs.data() + qs.size(), q);
    if (ec != std::errc() || ptr != qs.data() + qs.size())
      throw ValidationError(path + ":" + std::to_string(lineno) + ": bad q");
    if (values.empty()) {
      first = q;
    } else if (q != expect) {
      throw ValidationError(path + ":" + std::to_string(lineno) + ": q values must be consecutive");
    }
    expect = q + 1;
    values.push_back(parse_real(line.substr(comma + 1), "psi value"));
  }
  return PsiFamily::table(std::move(values), first);
}

}  // namespace

std::string PsiFamily::to_string() const {
  switch (kind_) {
    case Kind::power:
      return "pow:" + shortest(tau_);
    case Kind::powerlog:
      return "powlog:" + shortest(tau_) + "," + shortest(sigma_);
    case Kind::table:
      return "table:" + std::to_string(values_.size());
  }
  return {};
}

PsiFamily parse_psi(const std::string& spec) {
  if (spec.rfind("pow:", 0) == 0) return PsiFamily::power(parse_real(spec.substr(4), "tau"));
  if (spec.rfind("powlog:", 0) == 0) {
    const std::string rest = spec.substr(7);
    const auto comma = rest.find(',');
    if (comma == std::string::npos) throw ValidationError("powlog needs <tau>,<sigma>");
    return PsiFamily::powerlog(parse_real(rest.substr(0, comma), "tau"), parse_real(rest.substr(comma + 1), "sigma"));
  }
  if (spec.rfind("table:", 0) == 0) return load_psi_table(spec.substr(6));
  if (spec.size() > 4 && spec.compare(spec.size() - 4, 4, ".csv") == 0) return load_psi_table(spec);
  throw ValidationError("unknown psi spec '" + spec + "' (use pow:<tau>, powlog:<tau>,<sigma> or table:<csv>)");
}

const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::convergent:
      return "convergent";
    case Verdict::divergent:
      return "divergent";
    case Verdict::inconclusive:
      return "inconclusive";
  }
  return "?";
}

Verdict analytic_verdict(const StarBody& body, const PsiFamily& psi) {
  if (psi.kind() == PsiFamily::Kind::table) return Verdict::inconclusive;
  const double tau = psi.tau();
  const double sigma = psi.kind() == PsiFamily::Kind::powerlog ? psi.sigma() : 0.0;
  // terms ~ q^-a (log q)^-b
  double a = 0.0, b = 0.0;
  switch (density_growth(body)) {
    case DensityGrowth::linear:
      a = tau - 1;
      b = sigma;
      break;
    case DensityGrowth::quadratic:
      a = 2 * tau - 2;
      b = 2 * sigma;
      break;
    case DensityGrowth::quadratic_log:
      // e^2 log(1/e) with e = q^(1-tau) (log q)^-sigma; for tau <= 1 the
      // terms do not tend to zero
      if (tau <= 1) return Verdict::divergent;
      a = 2 * tau - 2;
      b = 2 * sigma - 1;
      break;
    case DensityGrowth::unknown:
      return Verdict::inconclusive;
  }
  if (a > 1 || (a == 1 && b > 1)) return Verdict::convergent;
  return Verdict::divergent;
}

namespace {

// D_F(q psi(q)) for consecutive q; bounded bodies reuse D_F(1) by scaling.
class TermSource {
 public:
  TermSource(const StarBody& body, const PsiFamily& psi) : body_(body), psi_(psi) {
    if (body.bounded()) unit_ = density(body, 1.0).value;
  }

  double operator()(std::int64_t q) const {
    const double eps = static_cast<double>(q) * psi_(q);
    if (unit_) return *unit_ * eps * eps;
    return density(body_, eps).value;
  }

 private:
  const StarBody& body_;
  const PsiFamily& psi_;
  std::optional<double> unit_;
};

}  // namespace

std::vector<PartialSum> series_partial_sums(const StarBody& body, const PsiFamily& psi, std::int64_t qmax) {
  if (qmax < psi.first_q()) throw ValidationError("Qmax below the first q of the psi domain");
  if (qmax > psi.last_q()) throw ValidationError("Qmax beyond the psi table");
  const TermSource term(body, psi);
  std::vector<PartialSum> out;
  out.reserve(static_cast<std::size_t>(qmax - psi.first_q() + 1));
  long double sum = 0.0L;
  for (std::int64_t q = psi.first_q(); q <= qmax; ++q) {
    sum += term(q);
    out.push_back({q, static_cast<double>(sum)});
  }
  return out;
}

Estimate tail_measure(const ResonantSearch& search, const PsiFamily& psi, std::int64_t n, std::uint64_t samples,
                      std::uint64_t seed) {
  if (n < 1) throw ValidationError("N must be >= 1");
  const std::int64_t lo = std::max(n, psi.first_q());
  const std::int64_t hi = 2 * n;
  if (hi > psi.last_q()) throw ValidationError("dyadic block exceeds the psi table");
  std::vector<double> eps;
  for (std::int64_t q = lo; q <= hi; ++q) eps.push_back(psi(q));
  const auto hits = parallel_count(samples, [&](std::size_t i) {
    const Vec2 x = sample_unit_square(seed, i);
    for (std::int64_t q = lo; q <= hi; ++q)
      if (search.hit(x, q, eps[static_cast<std::size_t>(q - lo)])) return true;
    return false;
  });
  return bernoulli_estimate(hits, samples, seed);
}

double tail_union_bound(const StarBody& body, const PsiFamily& psi, std::int64_t n) {
  const TermSource term(body, psi);
  long double sum = 0.0L;
  for (std::int64_t q = std::max(n, psi.first_q()); q <= 2 * n; ++q) sum += term(q);
  return static_cast<double>(sum);
}

DichotomyReport dichotomy_report(const ResonantSearch& search, const PsiFamily& psi, std::int64_t qmax,
                                 const std::vector<std::int64_t>& blocks, std::uint64_t samples,
                                 std::uint64_t seed) {
  DichotomyReport r;
  r.partial_sums = series_partial_sums(search.body(), psi, qmax);
  r.verdict = analytic_verdict(search.body(), psi);
  r.q_psi_nonincreasing = psi.q_psi_nonincreasing(qmax);
  double prev = std::numeric_limits<double>::infinity();
  double sum_prev = 0.0;
  for (const auto& [q, s] : r.partial_sums) {
    const double term = s - sum_prev;
    sum_prev = s;
    if (term > prev * (1 + 1e-9) + 1e-15) r.density_nonincreasing = false;
    prev = term;
  }
  for (std::int64_t n : blocks) r.tails.emplace_back(n, tail_measure(search, psi, n, samples, seed));
  return r;
}

std::vector<std::int64_t> totients(std::int64_t n) {
  if (n < 0) throw ValidationError("N must be non-negative");
  std::vector<std::int64_t> phi(static_cast<std::size_t>(n) + 1);
  std::vector<std::int64_t> primes;
  if (n >= 1) phi[1] = 1;
  for (std::int64_t i = 2; i <= n; ++i) {
    if (phi[i] == 0) {
      phi[i] = i - 1;
      primes.push_back(i);
    }
    for (std::int64_t p : primes) {
      if (p * i > n) break;
      if (i % p == 0) {
        phi[p * i] = phi[i] * p;
        break;
      }
      phi[p * i] = phi[i] * (p - 1);
    }
  }
  return phi;
}

PhiSums euler_phi_sum_check(const std::function<double(std::int64_t)>& omega, std::int64_t n) {
  if (n < 2) throw ValidationError("N must be >= 2");
  const auto phi = totients(n);
  long double lhs = 0.0L, rhs = 0.0L;
  double prev = std::numeric_limits<double>::infinity();
  for (std::int64_t q = 1; q <= n; ++q) {
    const double w = omega(q);
    if (!(w > 0.0) || !std::isfinite(w)) throw ValidationError("omega must be positive at q = " + std::to_string(q));
    if (w > prev) throw ValidationError("omega must be non-increasing (fails at q = " + std::to_string(q) + ")");
    prev = w;
    const long double r = static_cast<long double>(phi[q]) / static_cast<long double>(q);
    lhs += r * r * w;
    if (q >= 2) rhs += w;
  }
  return {static_cast<double>(lhs), static_cast<double>(rhs), static_cast<double>(lhs / rhs)};
}

ExactPhiSums euler_phi_sum_exact(const std::function<BigRational(std::int64_t)>& omega, std::int64_t n) {
  if (n < 2) throw ValidationError("N must be >= 2");
  const auto phi = totients(n);
  ExactPhiSums out;
  BigRational prev;
  for (std::int64_t q = 1; q <= n; ++q) {
    const BigRational w = omega(q);
    if (w <= 0) throw ValidationError("omega must be positive at q = " + std::to_string(q));
    if (q > 1 && w > prev) throw ValidationError("omega must be non-increasing (fails at q = " + std::to_string(q) + ")");
    prev = w;
    const BigRational r(phi[q], q);
    out.lhs += r * r * w;
    if (q >= 2) out.rhs += w;
  }
  out.ratio = out.lhs / out.rhs;
  return out;
}

BestApproximations best_approximations(const ResonantSearch& search, Vec2 x, std::int64_t qmax) {
  if (qmax < 1) throw ValidationError("Qmax must be >= 1");
  BestApproximations out;
  out.per_q.resize(static_cast<std::size_t>(qmax));
  parallel_blocks(static_cast<std::size_t>(qmax), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) out.per_q[i] = *search.minimum(x, static_cast<std::int64_t>(i) + 1);
  });
  double best = std::numeric_limits<double>::infinity();
  for (const auto& h : out.per_q) {
    if (h.value < best) {
      best = h.value;
      out.records.push_back(h);
    }
  }
  return out;
}

}  // namespace starkit
