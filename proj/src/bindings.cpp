#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "kpert/analysis.hpp"
#include "kpert/kernels.hpp"
#include "kpert/series.hpp"
#include "kpert/weyl.hpp"

namespace py = pybind11;
using namespace kpert;

namespace {

State to_state(const py::object& o) {
  if (py::isinstance<py::float_>(o) || py::isinstance<py::int_>(o))
    return State{o.cast<double>(), 0.0};
  auto seq = o.cast<std::vector<double>>();
  if (seq.empty() || seq.size() > 2) throw py::value_error("state must be x or (x, y)");
  return State{seq[0], seq.size() == 2 ? seq[1] : 0.0};
}

std::vector<State> to_states(const py::iterable& it) {
  std::vector<State> out;
  for (auto o : it) out.push_back(to_state(py::reinterpret_borrow<py::object>(o)));
  return out;
}

}  // namespace

PYBIND11_MODULE(_kpert, m) {
  m.doc() = "perturbation series of forward space-time kernels";

  py::register_exception<PreconditionError>(m, "PreconditionError");
  py::register_exception<NumericError>(m, "NumericError");
  py::register_exception<CertificateError>(m, "CertificateError");

  py::class_<KernelDensity>(m, "KernelDensity")
      .def("__call__",
           [](const KernelDensity& k, double s, const py::object& x, double t,
              const py::object& y) { return k(s, to_state(x), t, to_state(y)); })
      .def_property_readonly("gamma", &KernelDensity::gamma)
      .def_property_readonly("label", &KernelDensity::label)
      .def_property_readonly("claims_chapman_kolmogorov",
                             &KernelDensity::claims_chapman_kolmogorov);

  py::class_<Potential>(m, "Potential")
      .def("__call__",
           [](const Potential& q, double u, const py::object& z) { return q(u, to_state(z)); })
      .def_property_readonly("label", &Potential::label);

  m.def("beta_kernel", &make_beta_kernel, py::arg("beta"));
  m.def("gauss_kernel", &make_gauss_kernel, py::arg("d") = 1);
  m.def("cauchy_kernel", &make_cauchy_kernel);
  m.def("tabulated_kernel", &make_tabulated_kernel, py::arg("csv_path"), py::arg("gamma") = 0.0);
  m.def("power_potential", &make_power_potential, py::arg("beta"), py::arg("eps"));
  m.def("constant_potential", &make_constant_potential, py::arg("c"));

  py::class_<StateSpace>(m, "StateSpace")
      .def_static("single_point", &StateSpace::single_point)
      .def_static("interval", &StateSpace::interval, py::arg("lo"), py::arg("hi"),
                  py::arg("mesh") = 201)
      .def_static("real_line", &StateSpace::real_line, py::arg("radius"), py::arg("mesh") = 201)
      .def_static("plane", &StateSpace::plane, py::arg("radius"), py::arg("mesh") = 41);

  py::class_<QuadratureScheme>(m, "QuadratureScheme")
      .def(py::init<>())
      .def_property(
          "time_nodes", [](const QuadratureScheme& s) { return s.time.nodes; },
          [](QuadratureScheme& s, int n) { s.time.nodes = n; })
      .def_property(
          "space_mesh", [](const QuadratureScheme& s) { return s.space.mesh; },
          [](QuadratureScheme& s, int n) { s.space.mesh = n; })
      .def_readwrite("rel_tol", &QuadratureScheme::rel_tol);

  py::class_<RecursionPlan>(m, "RecursionPlan")
      .def(py::init<>())
      .def_readwrite("max_order", &RecursionPlan::max_order)
      .def_readwrite("level_mesh", &RecursionPlan::level_mesh)
      .def_readwrite("level_grading", &RecursionPlan::level_grading)
      .def_readwrite("threads", &RecursionPlan::threads);

  py::class_<SpaceTimeGrid>(m, "SpaceTimeGrid")
      .def(py::init([](const StateSpace& space, std::vector<double> times, py::iterable states) {
             SpaceTimeGrid g;
             g.space = space;
             g.times = std::move(times);
             g.states = to_states(states);
             g.validate();
             return g;
           }),
           py::arg("space"), py::arg("times"), py::arg("states"))
      .def_readonly("times", &SpaceTimeGrid::times);

  py::class_<TermValue>(m, "TermValue")
      .def_readonly("value", &TermValue::value)
      .def_readonly("error", &TermValue::error)
      .def("__repr__", [](const TermValue& t) {
        return "TermValue(value=" + std::to_string(t.value) +
               ", error=" + std::to_string(t.error) + ")";
      });

  py::class_<SeriesRow>(m, "SeriesRow")
      .def_readonly("s", &SeriesRow::s)
      .def_readonly("t", &SeriesRow::t)
      .def_property_readonly("x", [](const SeriesRow& r) { return py::make_tuple(r.x.x, r.x.y); })
      .def_property_readonly("y", [](const SeriesRow& r) { return py::make_tuple(r.y.x, r.y.y); })
      .def_readonly("terms", &SeriesRow::terms)
      .def_readonly("sum", &SeriesRow::sum)
      .def_readonly("divergence_flag", &SeriesRow::divergence_flag);

  py::class_<SeriesTable>(m, "SeriesTable")
      .def_readonly("order", &SeriesTable::order)
      .def_readonly("rows", &SeriesTable::rows);

  py::class_<SeriesEngine>(m, "SeriesEngine")
      .def(py::init<KernelDensity, Potential, StateSpace, QuadratureScheme, RecursionPlan>(),
           py::arg("kernel"), py::arg("potential"), py::arg("space"),
           py::arg("scheme") = QuadratureScheme{}, py::arg("plan") = RecursionPlan{})
      .def(
          "eval_kn",
          [](const SeriesEngine& e, int n, double s, const py::object& x, double t,
             const py::object& y) { return e.eval_kn(n, s, to_state(x), t, to_state(y)); },
          py::arg("n"), py::arg("s"), py::arg("x"), py::arg("t"), py::arg("y"))
      .def("eval_series", &SeriesEngine::eval_series, py::arg("grid"), py::arg("order"))
      .def("splitting_check", &SeriesEngine::splitting_check, py::arg("n"), py::arg("m"),
           py::arg("grid"));

  m.def("beta_kernel_closed_form", &beta_kernel_closed_form, py::arg("beta"), py::arg("q0"),
        py::arg("n"), py::arg("s"), py::arg("t"));
  m.def("beta_kernel_series_closed_form", &beta_kernel_series_closed_form, py::arg("beta"),
        py::arg("q0"), py::arg("s"), py::arg("t"));

  py::class_<ControlPair>(m, "ControlPair")
      .def(py::init([](double eta, double c, double theta) {
             ControlPair ctl;
             ctl.eta = eta;
             ctl.c = c;
             ctl.theta = theta;
             ctl.kind = theta == 1.0 ? ControlPair::Kind::Linear : ControlPair::Kind::Power;
             return ctl;
           }),
           py::arg("eta") = 0.0, py::arg("c") = 0.0, py::arg("theta") = 1.0)
      .def_readwrite("eta", &ControlPair::eta)
      .def_readwrite("c", &ControlPair::c)
      .def_readwrite("theta", &ControlPair::theta)
      .def("Q", &ControlPair::Q, py::arg("s"), py::arg("t"));

  py::class_<Certificate>(m, "Certificate")
      .def_readonly("control", &Certificate::control)
      .def_readonly("slack", &Certificate::slack)
      .def_readonly("valid", &Certificate::valid)
      .def_readonly("envelope_at_horizon", &Certificate::envelope_at_horizon);

  m.def("check_condition", &check_condition, py::arg("engine"), py::arg("control"),
        py::arg("grid"), py::arg("tolerance") = 1e-9);
  m.def("fit_affine_control", &fit_affine_control, py::arg("engine"), py::arg("grid"),
        py::arg("eta_candidates") = std::vector<double>{0.0, 0.05, 0.1, 0.25, 0.5});
  m.def("envelope", &envelope, py::arg("eta"), py::arg("q_value"));

  py::class_<ChainReport>(m, "ChainReport")
      .def_readonly("worst_violation", &ChainReport::worst_violation)
      .def_property_readonly("violation_count",
                             [](const ChainReport& r) { return r.violations.size(); });
  m.def("verify_term_chain", &verify_term_chain, py::arg("table"), py::arg("control"));

  py::class_<EnvelopeReport>(m, "EnvelopeReport")
      .def_readonly("worst_ratio", &EnvelopeReport::worst_ratio)
      .def_readonly("tail_bound", &EnvelopeReport::tail_bound)
      .def_readonly("violations", &EnvelopeReport::violations);
  m.def("verify_envelope", &verify_envelope, py::arg("table"), py::arg("control"));

  py::class_<ThreePResult>(m, "ThreePResult")
      .def_readonly("sup", &ThreePResult::sup)
      .def_readonly("s", &ThreePResult::s)
      .def_readonly("u", &ThreePResult::u)
      .def_readonly("t", &ThreePResult::t);
  m.def("three_p_constant", &three_p_constant, py::arg("kernel"), py::arg("grid"),
        py::arg("max_refinements") = 3);

  py::enum_<KatoMode>(m, "KatoMode")
      .value("relative", KatoMode::Relative)
      .value("plain", KatoMode::Plain);
  m.def("kato_scan", &kato_scan, py::arg("engine"), py::arg("h_values"), py::arg("grid"),
        py::arg("mode"));

  py::class_<TestFunction>(m, "TestFunction")
      .def("__call__", [](const TestFunction& f, double u) { return f.phi(u); })
      .def_readonly("a", &TestFunction::a)
      .def_readonly("b", &TestFunction::b)
      .def_readonly("phi_sup", &TestFunction::phi_sup);
  m.def("bump", &make_bump, py::arg("a"), py::arg("b"));

  m.def(
      "weyl_derivative",
      [](const TestFunction& phi, double beta, double s) {
        return weyl_derivative(phi, beta, s, TimeRule{});
      },
      py::arg("phi"), py::arg("beta"), py::arg("s"));
  m.def(
      "left_inverse_residual",
      [](const TestFunction& phi, double beta, const std::vector<double>& s_grid,
         const QuadratureScheme& scheme) {
        return left_inverse_residual(phi, beta, s_grid, scheme);
      },
      py::arg("phi"), py::arg("beta"), py::arg("s_grid"),
      py::arg("scheme") = QuadratureScheme{});

  py::class_<PerturbedInverseReport>(m, "PerturbedInverseReport")
      .def_readonly("residual", &PerturbedInverseReport::residual)
      .def_readonly("truncation_tail", &PerturbedInverseReport::truncation_tail)
      .def_readonly("worst_envelope_ratio", &PerturbedInverseReport::worst_envelope_ratio);
  m.def(
      "perturbed_inverse_residual",
      [](const TestFunction& phi, double beta, const Potential& q, const Certificate& cert,
         int N, const std::vector<double>& s_grid, const QuadratureScheme& scheme) {
        return perturbed_inverse_residual(phi, beta, q, cert, N, s_grid, scheme);
      },
      py::arg("phi"), py::arg("beta"), py::arg("q"), py::arg("certificate"), py::arg("n"),
      py::arg("s_grid"), py::arg("scheme") = QuadratureScheme{});

  m.def(
      "ck_residual",
      [](const KernelDensity& k, const SpaceTimeGrid& grid, const QuadratureScheme& scheme) {
        return ck_residual(k, grid, scheme);
      },
      py::arg("kernel"), py::arg("grid"), py::arg("scheme") = QuadratureScheme{});
}
