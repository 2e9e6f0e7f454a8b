// starkit command-line front end.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>

#include "output.hpp"
#include "starkit/circle.hpp"
#include "starkit/dsl.hpp"
#include "starkit/khintchine.hpp"
#include "starkit/random.hpp"
#include "starkit/transference.hpp"

using json = nlohmann::ordered_json;
using namespace starkit;
using cli::num;

namespace {

struct Output {
  std::string dir;
  std::string format;

  void emit(const std::string& name, const std::string& ext, const std::string& text) const {
    if (dir.empty()) {
      std::cout << text;
      return;
    }
    cli::write_atomic((std::filesystem::path(dir) / (name + "." + ext)).string(), text);
  }
  void emit_json(const std::string& name, const json& j) const { emit(name, "json", j.dump(2) + "\n"); }
};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep))
    if (!item.empty()) out.push_back(item);
  return out;
}

template <class T>
std::vector<T> parse_list(const std::string& text, const char* what) {
  std::vector<T> out;
  for (const auto& item : split(text, ',')) {
    try {
      std::size_t used = 0;
      if constexpr (std::is_same_v<T, double>) {
        out.push_back(std::stod(item, &used));
      } else {
        out.push_back(static_cast<T>(std::stoll(item, &used)));
      }
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::logic_error&) {
      throw ValidationError(std::string("bad ") + what + " value '" + item + "'");
    }
  }
  if (out.empty()) throw ValidationError(std::string("empty ") + what + " list");
  return out;
}

RealVector parse_point(const std::string& text) {
  RealVector x;
  for (const auto& item : split(text, ',')) x.push_back(parse_coefficient(item));
  if (x.empty()) throw ValidationError("empty --x");
  return x;
}

struct Alpha {
  long double value{0};
  std::string text;
  std::optional<QuadraticSurd> surd;
};

Alpha parse_alpha(const std::string& text) {
  Alpha a;
  a.text = text;
  if (auto s = parse_surd(text)) {
    a.surd = s;
    a.value = s->value();
  } else if (auto r = parse_exact_rational(text)) {
    a.value = static_cast<long double>(r->numerator()) / static_cast<long double>(r->denominator());
  } else {
    throw ValidationError("cannot read alpha '" + text + "'");
  }
  if (!(a.value != 0)) throw ValidationError("alpha must be non-zero");
  return a;
}

json cf_json(const ContinuedFraction& cf) {
  json q = json::array(), conv = json::array();
  for (const auto& a : cf.quotients) q.push_back(a.str());
  for (const auto& c : cf.convergents) conv.push_back({c.p.str(), c.q.str()});
  return {{"quotients", q}, {"convergents", conv}, {"terminated", cf.terminated}};
}

json witness_json(const TransferWitness& w) {
  json j;
  j["q"] = w.q;
  j["mu"] = w.mu;
  j["lambda"] = w.lambda;
  j["lhs"] = w.lhs;
  if (!w.branch.empty()) j["branch"] = w.branch;
  j["p"] = w.p ? json(*w.p) : json(nullptr);
  j["p_value"] = w.p_value;
  j["eps_prime"] = w.eps_prime;
  j["encoded"] = w.encoded;
  return j;
}

json report_json(const TransferReport& r) {
  json j;
  j["kind"] = r.kind;
  j["x"] = r.x;
  j["epsilon"] = r.epsilon;
  j["bound"] = r.bound;
  j["totals"] = {{"witnesses", r.witnesses.size()},
                 {"with_p", r.with_p},
                 {"with_eps_prime", r.with_eps_prime},
                 {"distinct_p", r.distinct_p},
                 {"settled_from", r.settled_from}};
  json ws = json::array();
  for (const auto& w : r.witnesses) ws.push_back(witness_json(w));
  j["witnesses"] = ws;
  return j;
}

std::string report_csv(const TransferReport& r) {
  std::string s = "j,q,branch,mu,lambda,lhs,p,p_value,eps_prime,encoded\n";
  for (std::size_t i = 0; i < r.witnesses.size(); ++i) {
    const auto& w = r.witnesses[i];
    std::string q;
    for (std::size_t k = 0; k < w.q.size(); ++k) q += (k ? " " : "") + std::to_string(w.q[k]);
    s += std::to_string(i) + "," + q + "," + w.branch + "," + num(w.mu) + "," + num(w.lambda) + "," + num(w.lhs) +
         "," + (w.p ? std::to_string(*w.p) : "") + "," + num(w.p_value) + "," + num(w.eps_prime) + "," +
         (w.encoded ? "1" : "0") + "\n";
  }
  return s;
}

void require_format(const std::string& format, std::initializer_list<const char*> allowed) {
  for (const char* a : allowed)
    if (format == a) return;
  std::string list;
  for (const char* a : allowed) list += std::string(list.empty() ? "" : ", ") + a;
  throw ValidationError("--format " + format + " not available here (use " + list + ")");
}

json error_record(const std::string& kind, const std::string& category, const std::string& message) {
  return {{"error", kind}, {"category", category}, {"message", message}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"starkit: Diophantine approximation experiments for planar star bodies"};
  app.require_subcommand(1);
  app.fallthrough();
  Output out;
  app.add_option("--out", out.dir, "Directory for artifacts (stdout when omitted)");
  app.add_option("--format", out.format, "csv | json | svg")->check(CLI::IsMember({"csv", "json", "svg"}));

  std::string f_source = "height";
  std::string psi_text, x_text, alpha_text, eps_list, n_list, method = "auto", omega = "inv";
  double eps = 0.1, y0 = 0.0, bound = 300, lambda = 0.45, mu = 1.0, x0 = 0.0;
  std::int64_t q = 0, qmax = 100, nmax = 1000, qbound = 200, n_single = 1000, depth = 20, random_cases = 0;
  std::uint64_t samples = 100000;
  std::optional<std::uint64_t> seed;
  int k = 3, precision = 64;
  bool exact = false, restricted = false;
  std::string x_point;

  auto add_f = [&](CLI::App* s) { s->add_option("--f", f_source, "Distance function: builtin, file or inline DSL/JSON"); };
  auto add_seed = [&](CLI::App* s, bool required) {
    auto* o = s->add_option("--seed", seed, "Random seed");
    if (required) o->required();
  };

  auto* skel = app.add_subcommand("skeleton", "Skeleton lines, significance and fundamental rectangle");
  add_f(skel);

  auto* dens = app.add_subcommand("density", "D_F(eps) = |{x in [0,1)^2 : F(x - p) < eps}|");
  add_f(dens);
  dens->add_option("--eps", eps_list, "epsilon, or a comma list")->required();
  dens->add_option("--method", method, "auto | analytic | quadrature | montecarlo");
  dens->add_option("--samples", samples, "Monte Carlo samples");
  add_seed(dens, false);

  auto* series = app.add_subcommand("series", "Partial sums of sum_q D_F(q psi(q)) and the verdict");
  add_f(series);
  series->add_option("--psi", psi_text, "pow:<tau> | powlog:<tau>,<sigma> | <file>.csv")->required();
  series->add_option("--Qmax", qmax, "Largest q")->required();
  series->add_option("--N", n_list, "Tail blocks to estimate (comma list)");
  series->add_option("--samples", samples, "Samples per tail block");
  add_seed(series, false);

  auto* tail = app.add_subcommand("tail", "Measure of the union of B_q over q in [N, 2N]");
  add_f(tail);
  tail->add_option("--psi", psi_text, "psi family")->required();
  tail->add_option("--N", n_list, "Block start N, or a comma list")->required();
  tail->add_option("--samples", samples, "Monte Carlo samples");
  add_seed(tail, true);

  auto* search = app.add_subcommand("search", "Best resonant approximations F(x - p/q) for q <= Qmax");
  add_f(search);
  search->add_option("--x", x_point, "Point x1,x2")->required();
  search->add_option("--Qmax", qmax, "Largest q");
  search->add_option("--q", q, "Single q (with --eps: membership)");
  search->add_option("--eps", eps, "Membership threshold");
  search->add_flag("--restricted", restricted, "Only admissible p");

  auto* three = app.add_subcommand("threedist", "Gaps of {x0 + n / alpha}, n = 1..N, and the CF of alpha");
  three->add_option("--alpha", alpha_text, "Surd (sqrt2, (1+sqrt5)/2, golden) or decimal")->required();
  three->add_option("--N", n_single, "Number of points")->required();
  three->add_option("--x0", x0, "Offset");
  three->add_option("--depth", depth, "Continued-fraction depth");
  three->add_option("--precision", precision, "Bits of precision for decimal alpha (<= 64)");

  auto* ubi = app.add_subcommand("ubiquity", "N with max gap <= 3/(N+1) and the covering check");
  ubi->add_option("--alpha", alpha_text, "Surd or decimal")->required();
  ubi->add_option("--N", nmax, "Largest N")->required();

  auto* cov = app.add_subcommand("coverage", "Interval system I_n, I~_n along an irrational line and coverage");
  add_f(cov);
  cov->add_option("--eps", eps, "epsilon")->required();
  cov->add_option("--y0", y0, "Height of the horizontal line in [0,1)");
  cov->add_option("--N", n_list, "Stages (comma list); the largest is Nmax")->required();
  cov->add_option("--samples", samples, "Sampled points on the line");
  cov->add_option("--k", k, "Multiplicity for the at-least-k fraction");
  add_seed(cov, true);
  std::int64_t dump_intervals = 0;
  cov->add_option("--intervals", dump_intervals, "Also write the first n interval records");

  auto* transfer = app.add_subcommand("transfer", "Transference harnesses");
  transfer->require_subcommand(1);
  std::string transfer_kind;
  for (const char* kind : {"mult", "unionjack", "height"}) {
    auto* t = transfer->add_subcommand(kind, std::string(kind) + " transference pipeline");
    t->add_option("--x", x_text, "Coordinates, e.g. sqrt2,sqrt3")->required();
    t->add_option("--eps", eps, "epsilon")->required();
    t->add_option("--bound", bound, "Bound on F+(q) (height: |q|)");
    add_seed(t, false);
    t->callback([&, kind] { transfer_kind = kind; });
  }

  auto* prop5 = app.add_subcommand("prop5", "Solve both systems of the box equivalence");
  prop5->add_option("--x", x_text, "Coordinates");
  prop5->add_option("--lambda", lambda, "lambda");
  prop5->add_option("--mu", mu, "mu");
  prop5->add_option("--Qbound", qbound, "Box for system (i)");
  prop5->add_option("--random", random_cases, "Run a randomized suite of this size instead");
  add_seed(prop5, false);

  auto* phil = app.add_subcommand("philemma", "sum (phi(q)/q)^2 omega(q) against sum omega(q)");
  phil->add_option("--omega", omega, "inv | invlog2 | one")->check(CLI::IsMember({"inv", "invlog2", "one"}));
  phil->add_option("--N", n_single, "N")->required();
  phil->add_flag("--exact", exact, "Exact rational sums (small N)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << error_record("UsageError", "validation", e.what()).dump() << "\n";
    return 2;
  }

  try {
    if (*skel) {
      const StarBody body(load_distance_function(f_source));
      const auto& sk = body.skeleton();
      json lines = json::array();
      for (const auto& l : sk.lines) {
        json j;
        j["normal"] = {l.normal.a.to_string(), l.normal.b.to_string()};
        j["direction"] = {l.direction.x1, l.direction.x2};
        j["rational"] = l.slope.rational;
        if (l.slope.rational) j["slope"] = {l.slope.s, l.slope.r};
        j["significant"] = l.significant;
        j["width_exponent"] = l.width_exponent;
        j["width_nonincreasing"] = l.width_nonincreasing;
        j["symmetry_ratio"] = l.symmetry_ratio;
        lines.push_back(j);
      }
      json r{{"f", body.f().to_string()}, {"bounded", sk.bounded()}, {"lines", lines}};
      if (body.rational_skeleton()) {
        const auto rect = body.rectangle();
        r["rectangle"] = {rect.s_hat, rect.r_hat};
      }
      require_format(out.format.empty() ? "json" : out.format, {"json"});
      out.emit_json("skeleton", r);
    } else if (*dens) {
      const StarBody body(load_distance_function(f_source));
      DensityOptions opts;
      opts.method = method == "auto" ? DensityMethod::automatic : parse_density_method(method);
      opts.samples = samples;
      opts.seed = seed.value_or(0);
      if (opts.method == DensityMethod::montecarlo && !seed)
        throw ValidationError("--seed is required for Monte Carlo density");
      std::string csv = "epsilon,value,stderr,method\n";
      json rows = json::array();
      std::vector<double> xs, ys;
      for (double e : parse_list<double>(eps_list, "--eps")) {
        const auto r = density(body, e, opts);
        if (r.method == DensityMethod::montecarlo && !seed)
          throw ValidationError("density fell back to Monte Carlo; pass --seed");
        csv += num(r.epsilon) + "," + num(r.value) + "," + num(r.stderr_) + "," + density_method_name(r.method) + "\n";
        rows.push_back({{"epsilon", r.epsilon},
                        {"value", r.value},
                        {"stderr", r.stderr_},
                        {"method", density_method_name(r.method)}});
        xs.push_back(r.epsilon);
        ys.push_back(r.value);
      }
      if (out.format == "json") {
        out.emit_json("density", {{"f", body.f().to_string()}, {"rows", rows}});
      } else if (out.format == "svg") {
        out.emit("density", "svg", cli::svg_plot({{"D_F", xs, ys}}, {"density", "epsilon", "D_F(epsilon)"}));
      } else {
        out.emit("density", "csv", csv);
      }
    } else if (*series) {
      const StarBody body(load_distance_function(f_source));
      const auto psi = parse_psi(psi_text);
      std::vector<std::int64_t> blocks;
      if (!n_list.empty()) {
        if (!seed) throw ValidationError("--seed is required when tail blocks are requested");
        blocks = parse_list<std::int64_t>(n_list, "--N");
      }
      const ResonantSearch rs(body);
      const auto rep = dichotomy_report(rs, psi, qmax, blocks, samples, seed.value_or(0));
      if (out.format == "json") {
        json sums = json::array(), tails = json::array();
        for (const auto& s : rep.partial_sums) sums.push_back({{"Q", s.q}, {"partial_sum", s.sum}});
        for (const auto& [n, e] : rep.tails)
          tails.push_back({{"N", n}, {"tail_measure", e.value}, {"stderr", e.stderr_}, {"samples", e.samples},
                           {"seed", e.seed}});
        out.emit_json("series", {{"f", body.f().to_string()},
                                 {"psi", psi.to_string()},
                                 {"verdict", verdict_name(rep.verdict)},
                                 {"q_psi_nonincreasing", rep.q_psi_nonincreasing},
                                 {"density_nonincreasing", rep.density_nonincreasing},
                                 {"partial_sums", sums},
                                 {"tails", tails}});
      } else if (out.format == "svg") {
        cli::Series s{"S(Q)", {}, {}};
        for (const auto& p : rep.partial_sums) {
          s.x.push_back(static_cast<double>(p.q));
          s.y.push_back(p.sum);
        }
        out.emit("series", "svg",
                 cli::svg_plot({s}, {"partial sums, " + psi.to_string() + " (" + verdict_name(rep.verdict) + ")", "Q",
                                     "S(Q)", true, false}));
      } else {
        std::string csv = "Q,partial_sum\n";
        for (const auto& s : rep.partial_sums) csv += std::to_string(s.q) + "," + num(s.sum) + "\n";
        out.emit("series", "csv", csv);
      }
    } else if (*tail) {
      const StarBody body(load_distance_function(f_source));
      const auto psi = parse_psi(psi_text);
      const ResonantSearch rs(body);
      const auto ns = parse_list<std::int64_t>(n_list, "--N");
      std::string csv = "N,tail_measure,stderr,samples,seed\n";
      json blocks = json::array();
      for (std::int64_t n : ns) {
        const auto e = tail_measure(rs, psi, n, samples, *seed);
        csv += std::to_string(n) + "," + num(e.value) + "," + num(e.stderr_) + "," + std::to_string(e.samples) + "," +
               std::to_string(e.seed) + "\n";
        json b{{"N", n}, {"value", e.value}, {"stderr", e.stderr_}, {"samples", e.samples}, {"seed", e.seed}};
        if (psi.kind() != PsiFamily::Kind::table) b["union_bound"] = tail_union_bound(body, psi, n);
        blocks.push_back(b);
      }
      if (out.format == "csv") {
        out.emit("tail", "csv", csv);
      } else {
        require_format(out.format.empty() ? "json" : out.format, {"json", "csv"});
        json r{{"f", body.f().to_string()}, {"psi", psi.to_string()}};
        if (blocks.size() == 1) {
          for (auto it = blocks[0].begin(); it != blocks[0].end(); ++it) r[it.key()] = it.value();
        } else {
          r["blocks"] = blocks;
        }
        out.emit_json("tail", r);
      }
    } else if (*search) {
      const StarBody body(load_distance_function(f_source));
      const auto xs = parse_list<double>(x_point, "--x");
      if (xs.size() != 2) throw DimensionMismatch("--x needs two coordinates");
      const ResonantSearch rs(body);
      const Vec2 x{xs[0], xs[1]};
      auto hit_json = [](const ResonantHit& h) {
        return json{{"q", h.q}, {"p", {h.p.p1, h.p.p2}}, {"value", h.value}};
      };
      if (q > 0) {
        const auto h = rs.minimum(x, q, restricted);
        json r{{"x", xs}, {"q", q}, {"restricted", restricted}};
        r["minimum"] = h ? hit_json(*h) : json(nullptr);
        r["hit"] = h && h->value < eps;
        r["eps"] = eps;
        out.emit_json("search", r);
      } else {
        const auto b = best_approximations(rs, x, qmax);
        if (out.format == "json") {
          json per = json::array(), rec = json::array();
          for (const auto& h : b.per_q) per.push_back(hit_json(h));
          for (const auto& h : b.records) rec.push_back(hit_json(h));
          out.emit_json("search", {{"x", xs}, {"Qmax", qmax}, {"per_q", per}, {"records", rec}});
        } else {
          std::string csv = "q,p1,p2,value,record\n";
          std::size_t next = 0;
          for (const auto& h : b.per_q) {
            const bool is_record = next < b.records.size() && b.records[next].q == h.q;
            if (is_record) ++next;
            csv += std::to_string(h.q) + "," + std::to_string(h.p.p1) + "," + std::to_string(h.p.p2) + "," +
                   num(h.value) + "," + (is_record ? "1" : "0") + "\n";
          }
          out.emit("search", "csv", csv);
        }
      }
    } else if (*three) {
      const auto a = parse_alpha(alpha_text);
      if (precision < 8 || precision > 64) throw ValidationError("--precision must be in [8, 64] bits");
      const long double inv = 1.0L / a.value;
      const auto part = three_distance_partition(inv, x0, n_single);
      json cf;
      try {
        cf = a.surd ? cf_json(continued_fraction(*a.surd, static_cast<int>(depth)))
                    : cf_json(continued_fraction(a.value, static_cast<int>(depth), std::ldexp(1.0L, -precision + 1)));
      } catch (const PrecisionExhausted& e) {
        cf = {{"error", "PrecisionExhausted"}, {"message", e.what()}};
      }
      if (out.format == "csv") {
        std::string csv = "i,point,gap\n";
        for (std::size_t i = 0; i < part.points.size(); ++i)
          csv += std::to_string(i) + "," + num(static_cast<double>(part.points[i])) + "," +
                 num(static_cast<double>(part.gaps[i])) + "\n";
        out.emit("threedist", "csv", csv);
      } else if (out.format == "svg") {
        cli::Series s{"gaps", {}, {}};
        for (std::size_t i = 0; i < part.points.size(); ++i) {
          s.x.push_back(static_cast<double>(part.points[i]));
          s.y.push_back(static_cast<double>(part.gaps[i]));
        }
        out.emit("threedist", "svg", cli::svg_plot({s}, {"gap after each point", "point", "gap", false, true}));
      } else {
        json d = json::array();
        for (long double g : part.distinct) d.push_back(static_cast<double>(g));
        out.emit_json("threedist", {{"alpha", a.text},
                                    {"alpha_value", static_cast<double>(a.value)},
                                    {"alpha_inv", static_cast<double>(inv)},
                                    {"N", n_single},
                                    {"x0", x0},
                                    {"distinct_gaps", d},
                                    {"max_gap", static_cast<double>(part.max_gap())},
                                    {"gap_sum", static_cast<double>(part.gap_sum())},
                                    {"continued_fraction", cf}});
      }
    } else if (*ubi) {
      const auto a = parse_alpha(alpha_text);
      const long double inv = 1.0L / a.value;
      const auto seq = ubiquity_sequence(inv, nmax);
      std::string csv = "r,N_r,lambda,covers\n";
      json rows = json::array();
      const auto covers = ubiquity_covers_all(inv, seq);
      for (std::size_t r = 0; r < seq.size(); ++r) {
        const bool ok = covers[r];
        const double lam = 3.0 / static_cast<double>(seq[r] + 1);
        csv += std::to_string(r + 1) + "," + std::to_string(seq[r]) + "," + num(lam) + "," + (ok ? "1" : "0") + "\n";
        rows.push_back({{"r", r + 1}, {"N_r", seq[r]}, {"lambda", lam}, {"covers", ok}});
      }
      if (out.format == "json") {
        out.emit_json("ubiquity", {{"alpha", a.text}, {"Nmax", nmax}, {"sequence", rows}});
      } else {
        out.emit("ubiquity", "csv", csv);
      }
    } else if (*cov) {
      const StarBody body(load_distance_function(f_source));
      const HalfLine* line = nullptr;
      for (const auto& l : body.skeleton().lines)
        if (!l.slope.rational) {
          line = &l;
          break;
        }
      if (!line) throw ValidationError("the skeleton has no irrational line");
      auto stages = parse_list<std::int64_t>(n_list, "--N");
      const std::int64_t top = *std::max_element(stages.begin(), stages.end());
      if (top < 1) throw ValidationError("largest stage must be >= 1");
      const auto sys = interval_system(body, *line, eps, y0, top);
      const auto rows = coverage_experiment(sys, stages, samples, *seed, k);
      const auto sums = tilde_length_sums(sys, stages);
      if (out.format == "json") {
        json rs = json::array();
        for (std::size_t i = 0; i < rows.size(); ++i)
          rs.push_back({{"N", rows[i].n},
                        {"fraction_hit_once", rows[i].once},
                        {"fraction_hit_k", rows[i].at_least_k},
                        {"stderr", rows[i].stderr_},
                        {"sum_len_Itilde", sums[i]}});
        out.emit_json("coverage", {{"f", body.f().to_string()},
                                   {"alpha", static_cast<double>(sys.alpha)},
                                   {"swapped", sys.swapped},
                                   {"K", sys.k},
                                   {"epsilon", eps},
                                   {"y0", y0},
                                   {"k", k},
                                   {"samples", samples},
                                   {"seed", *seed},
                                   {"stages", rs}});
      } else if (out.format == "svg") {
        cli::Series once{"hit once", {}, {}}, many{"hit >= " + std::to_string(k), {}, {}};
        for (const auto& r : rows) {
          if (r.n < 1) continue;
          once.x.push_back(static_cast<double>(r.n));
          once.y.push_back(r.once);
          many.x.push_back(static_cast<double>(r.n));
          many.y.push_back(r.at_least_k);
        }
        out.emit("coverage", "svg", cli::svg_plot({once, many}, {"coverage of the line", "N", "fraction", true, false}));
      } else {
        std::string csv = "N,fraction_hit_once,fraction_hit_k,stderr\n";
        for (const auto& r : rows)
          csv += std::to_string(r.n) + "," + num(r.once) + "," + num(r.at_least_k) + "," + num(r.stderr_) + "\n";
        out.emit("coverage", "csv", csv);
      }
      if (dump_intervals > 0) {
        std::string csv = "n,x_n,r_n,sigma_n,len_In,len_Itilde_n\n";
        const auto m = std::min<std::size_t>(static_cast<std::size_t>(dump_intervals), sys.records.size());
        for (std::size_t i = 0; i < m; ++i) {
          const auto& rec = sys.records[i];
          csv += std::to_string(rec.n) + "," + num(static_cast<double>(rec.x)) + "," +
                 num(static_cast<double>(rec.r)) + "," + num(rec.sigma) + "," + num(rec.len_i()) + "," +
                 num(rec.len_tilde()) + "\n";
        }
        out.emit("intervals", "csv", csv);
      }
    } else if (*transfer) {
      const auto x = parse_point(x_text);
      TransferReport r;
      if (transfer_kind == "mult") {
        r = verify_theorem_multitrans(x, eps, bound);
      } else if (transfer_kind == "unionjack") {
        r = verify_theorem_unionjack(x, eps, bound);
      } else {
        r = verify_khintchine_transfer(x, eps, bound);
      }
      if (out.format == "csv") {
        out.emit("transfer_" + transfer_kind, "csv", report_csv(r));
      } else {
        auto j = report_json(r);
        if (seed) j["seed"] = *seed;
        out.emit_json("transfer_" + transfer_kind, j);
      }
    } else if (*prop5) {
      auto rep_json = [](const RealVector& x, const Prop5Report& r) {
        json j;
        j["x"] = to_doubles(x);
        j["lambda"] = r.params.lambda;
        j["mu"] = r.params.mu;
        j["system_i_count"] = r.system_i_count;
        j["q_witness"] = r.q_witness ? json(*r.q_witness) : json(nullptr);
        auto pj = [](const std::optional<SystemIISolution>& s) {
          if (!s) return json(nullptr);
          return json{{"p", s->p}, {"gm", s->gm}, {"p_bound", s->p_bound}, {"within_det_bound", s->within_det_bound}};
        };
        j["p_witness"] = pj(r.p_witness);
        j["p_witness_det"] = pj(r.p_witness_det);
        j["forward_counterexample"] = r.forward_counterexample;
        j["reverse_counterexample"] = r.reverse_counterexample;
        j["vacuous"] = r.vacuous;
        return j;
      };
      if (random_cases > 0) {
        if (!seed) throw ValidationError("--seed is required with --random");
        const CounterRng rng(*seed, 5);
        json cases = json::array();
        int fwd = 0, rev = 0, vac = 0, det_fail = 0;
        for (std::uint64_t i = 0; i < static_cast<std::uint64_t>(random_cases); ++i) {
          const std::int64_t den = std::int64_t{1} << 40;
          const RealVector x{
              Coefficient(Rational(static_cast<std::int64_t>(rng.uniform(6 * i) * static_cast<double>(den)), den)),
              Coefficient(Rational(static_cast<std::int64_t>(rng.uniform(6 * i + 1) * static_cast<double>(den)), den))};
          const double lam = std::exp(std::log(0.01) + rng.uniform(6 * i + 2) * std::log(50.0));
          const double m = std::exp(rng.uniform(6 * i + 3) * std::log(20.0));
          const auto r = verify_prop5(x, {lam, m}, qbound);
          fwd += r.forward_counterexample;
          rev += r.reverse_counterexample;
          vac += r.vacuous;
          det_fail += r.system_i_count > 0 && !r.p_witness_det;
          cases.push_back(rep_json(x, r));
        }
        out.emit_json("prop5", {{"cases", random_cases},
                                {"seed", *seed},
                                {"Qbound", qbound},
                                {"forward_counterexamples", fwd},
                                {"reverse_counterexamples", rev},
                                {"vacuous", vac},
                                {"det_target_forward_failures", det_fail},
                                {"reports", cases}});
      } else {
        if (x_text.empty()) throw ValidationError("--x is required unless --random is given");
        const auto x = parse_point(x_text);
        out.emit_json("prop5", rep_json(x, verify_prop5(x, {lambda, mu}, qbound)));
      }
    } else if (*phil) {
      json r{{"omega", omega}, {"N", n_single}};
      if (exact) {
        std::function<BigRational(std::int64_t)> w;
        if (omega == "inv") w = [](std::int64_t q) { return BigRational(1, q); };
        else if (omega == "one") w = [](std::int64_t) { return BigRational(1); };
        else throw ValidationError("--exact supports omega inv and one");
        const auto s = euler_phi_sum_exact(w, n_single);
        r["lhs"] = s.lhs.str();
        r["rhs"] = s.rhs.str();
        r["ratio"] = s.ratio.str();
        r["ratio_value"] = s.ratio.convert_to<double>();
      } else {
        std::function<double(std::int64_t)> w;
        if (omega == "inv") {
          w = [](std::int64_t q) { return 1.0 / static_cast<double>(q); };
        } else if (omega == "one") {
          w = [](std::int64_t) { return 1.0; };
        } else {
          w = [](std::int64_t q) {
            const double l = std::log(static_cast<double>(q) + 1.0);
            return 1.0 / (static_cast<double>(q) * l * l);
          };
        }
        const auto s = euler_phi_sum_check(w, n_single);
        r["lhs"] = s.lhs;
        r["rhs"] = s.rhs;
        r["ratio"] = s.ratio;
      }
      out.emit_json("philemma", r);
    }
  } catch (const Error& e) {
    const bool numeric = e.category() == ErrorCategory::numeric;
    std::cerr << error_record(e.kind(), numeric ? "numeric" : "validation", e.what()).dump() << "\n";
    return numeric ? 3 : 2;
  } catch (const std::exception& e) {
    std::cerr << error_record("InternalError", "internal", e.what()).dump() << "\n";
    return 1;
  }
  return 0;
}
