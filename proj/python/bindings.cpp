#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>

#include "starkit/circle.hpp"
#include "starkit/dsl.hpp"
#include "starkit/khintchine.hpp"
#include "starkit/transference.hpp"

namespace py = pybind11;
using namespace starkit;

namespace {

struct Body {
  std::shared_ptr<StarBody> body;
  std::shared_ptr<ResonantSearch> search_;

  explicit Body(const std::string& source)
      : body(std::make_shared<StarBody>(load_distance_function(source))) {}

  const ResonantSearch& search() {
    if (!search_) search_ = std::make_shared<ResonantSearch>(*body);
    return *search_;
  }
};

py::dict estimate_dict(const Estimate& e) {
  py::dict d;
  d["value"] = e.value;
  d["stderr"] = e.stderr_;
  d["samples"] = e.samples;
  d["seed"] = e.seed;
  return d;
}

py::int_ big(const BigInt& v) { return py::module_::import("builtins").attr("int")(v.str()); }

py::dict cf_dict(const ContinuedFraction& cf) {
  py::list q, c;
  for (const auto& a : cf.quotients) q.append(big(a));
  for (const auto& k : cf.convergents) c.append(py::make_tuple(big(k.p), big(k.q)));
  py::dict d;
  d["quotients"] = q;
  d["convergents"] = c;
  d["terminated"] = cf.terminated;
  return d;
}

RealVector real_vector(const std::vector<std::string>& items) {
  RealVector x;
  for (const auto& s : items) x.push_back(parse_coefficient(s));
  return x;
}

py::dict report_dict(const TransferReport& r) {
  py::list ws;
  for (const auto& w : r.witnesses) {
    py::dict d;
    d["q"] = w.q;
    d["mu"] = w.mu;
    d["lambda"] = w.lambda;
    d["lhs"] = w.lhs;
    d["p"] = w.p ? py::object(py::int_(*w.p)) : py::object(py::none());
    d["p_value"] = w.p_value;
    d["eps_prime"] = w.eps_prime;
    d["encoded"] = w.encoded;
    d["branch"] = w.branch;
    ws.append(d);
  }
  py::dict d;
  d["kind"] = r.kind;
  d["x"] = r.x;
  d["epsilon"] = r.epsilon;
  d["bound"] = r.bound;
  d["with_p"] = r.with_p;
  d["with_eps_prime"] = r.with_eps_prime;
  d["distinct_p"] = r.distinct_p;
  d["settled_from"] = r.settled_from;
  d["witnesses"] = ws;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Diophantine approximation on planar star bodies";

  static py::exception<Error> base(m, "StarkitError");
  static py::exception<Error> validation(m, "ValidationError", base.ptr());
  static py::exception<Error> numeric(m, "NumericError", base.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      auto& type = e.category() == ErrorCategory::numeric ? numeric : validation;
      py::object exc = py::reinterpret_borrow<py::object>(type.ptr())(py::str(e.what()));
      exc.attr("kind") = e.kind();
      PyErr_SetObject(type.ptr(), exc.ptr());
    }
  });

  py::class_<Body>(m, "StarBody")
      .def(py::init<const std::string&>(), py::arg("source"))
      .def_property_readonly("expression", [](const Body& b) { return b.body->f().to_string(); })
      .def_property_readonly("bounded", [](const Body& b) { return b.body->bounded(); })
      .def_property_readonly("rational_skeleton", [](const Body& b) { return b.body->rational_skeleton(); })
      .def("__call__", [](const Body& b, double x1, double x2) { return b.body->f().evaluate(x1, x2); })
      .def("rectangle",
           [](const Body& b) {
             const auto r = b.body->rectangle();
             return py::make_tuple(r.s_hat, r.r_hat);
           })
      .def("skeleton",
           [](const Body& b) {
             py::list out;
             for (const auto& l : b.body->skeleton().lines) {
               py::dict d;
               d["normal"] = py::make_tuple(l.normal.a.to_string(), l.normal.b.to_string());
               d["direction"] = py::make_tuple(l.direction.x1, l.direction.x2);
               d["rational"] = l.slope.rational;
               d["significant"] = l.significant;
               d["width_exponent"] = l.width_exponent;
               out.append(d);
             }
             return out;
           })
      .def(
          "density",
          [](const Body& b, double eps, const std::string& method, std::uint64_t samples, std::uint64_t seed) {
            DensityOptions o;
            o.method = method == "auto" ? DensityMethod::automatic : parse_density_method(method);
            o.samples = samples;
            o.seed = seed;
            const auto r = density(*b.body, eps, o);
            py::dict d;
            d["epsilon"] = r.epsilon;
            d["value"] = r.value;
            d["stderr"] = r.stderr_;
            d["method"] = density_method_name(r.method);
            return d;
          },
          py::arg("eps"), py::arg("method") = "auto", py::arg("samples") = 100000, py::arg("seed") = 0)
      .def(
          "best_approximations",
          [](Body& b, double x1, double x2, std::int64_t qmax) {
            const auto r = best_approximations(b.search(), {x1, x2}, qmax);
            py::list out;
            for (const auto& h : r.per_q) out.append(py::make_tuple(h.q, h.p.p1, h.p.p2, h.value));
            return out;
          },
          py::arg("x1"), py::arg("x2"), py::arg("qmax"));

  py::class_<PsiFamily>(m, "Psi")
      .def(py::init([](const std::string& s) { return parse_psi(s); }), py::arg("spec"))
      .def("__call__", &PsiFamily::operator())
      .def("__str__", &PsiFamily::to_string);

  m.def(
      "series_partial_sums",
      [](const Body& b, const PsiFamily& psi, std::int64_t qmax) {
        std::vector<std::pair<std::int64_t, double>> out;
        for (const auto& s : series_partial_sums(*b.body, psi, qmax)) out.emplace_back(s.q, s.sum);
        return out;
      },
      py::arg("body"), py::arg("psi"), py::arg("qmax"));
  m.def(
      "analytic_verdict", [](const Body& b, const PsiFamily& psi) { return verdict_name(analytic_verdict(*b.body, psi)); },
      py::arg("body"), py::arg("psi"));
  m.def(
      "tail_measure",
      [](Body& b, const PsiFamily& psi, std::int64_t n, std::uint64_t samples, std::uint64_t seed) {
        auto d = estimate_dict(tail_measure(b.search(), psi, n, samples, seed));
        d["union_bound"] = tail_union_bound(*b.body, psi, n);
        return d;
      },
      py::arg("body"), py::arg("psi"), py::arg("n"), py::arg("samples"), py::arg("seed"));
  m.def(
      "euler_phi_sum",
      [](const std::function<double(std::int64_t)>& omega, std::int64_t n) {
        const auto s = euler_phi_sum_check(omega, n);
        return py::make_tuple(s.lhs, s.rhs, s.ratio);
      },
      py::arg("omega"), py::arg("n"));

  m.def(
      "continued_fraction",
      [](const py::object& alpha, int depth) {
        if (py::isinstance<py::str>(alpha)) {
          const auto text = alpha.cast<std::string>();
          if (auto s = parse_surd(text)) return cf_dict(continued_fraction(*s, depth));
          if (auto r = parse_exact_rational(text)) return cf_dict(continued_fraction(*r, depth));
          throw ValidationError("cannot read alpha '" + text + "'");
        }
        return cf_dict(continued_fraction(static_cast<long double>(alpha.cast<double>()), depth, 0x1.0p-52L));
      },
      py::arg("alpha"), py::arg("depth"));
  m.def(
      "three_distance",
      [](double alpha_inv, double x0, std::int64_t n) {
        const auto g = three_distance_partition(alpha_inv, x0, n);
        py::dict d;
        d["points"] = std::vector<double>(g.points.begin(), g.points.end());
        d["gaps"] = std::vector<double>(g.gaps.begin(), g.gaps.end());
        d["distinct"] = std::vector<double>(g.distinct.begin(), g.distinct.end());
        return d;
      },
      py::arg("alpha_inv"), py::arg("x0"), py::arg("n"));
  m.def(
      "ubiquity_sequence", [](double alpha_inv, std::int64_t nmax) { return ubiquity_sequence(alpha_inv, nmax); },
      py::arg("alpha_inv"), py::arg("nmax"));

  m.def(
      "transfer",
      [](const std::string& kind, const std::vector<std::string>& x, double eps, double bound) {
        const auto v = real_vector(x);
        if (kind == "mult") return report_dict(verify_theorem_multitrans(v, eps, bound));
        if (kind == "unionjack") return report_dict(verify_theorem_unionjack(v, eps, bound));
        if (kind == "height") return report_dict(verify_khintchine_transfer(v, eps, bound));
        throw ValidationError("unknown transfer kind '" + kind + "'");
      },
      py::arg("kind"), py::arg("x"), py::arg("eps"), py::arg("bound"));
  m.def(
      "prop5",
      [](const std::vector<std::string>& x, double lambda, double mu, std::int64_t qbound) {
        const auto r = verify_prop5(real_vector(x), {lambda, mu}, qbound);
        py::dict d;
        d["system_i_count"] = r.system_i_count;
        d["q_witness"] = r.q_witness;
        d["p_witness"] = r.p_witness ? py::object(py::int_(r.p_witness->p)) : py::object(py::none());
        d["forward_counterexample"] = r.forward_counterexample;
        d["reverse_counterexample"] = r.reverse_counterexample;
        d["vacuous"] = r.vacuous;
        return d;
      },
      py::arg("x"), py::arg("lam"), py::arg("mu"), py::arg("qbound"));
}
