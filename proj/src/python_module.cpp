#include <sstream>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "modev/cli.hpp"
#include "modev/dynamics.hpp"
#include "modev/errors.hpp"
#include "modev/harness.hpp"
#include "modev/importance.hpp"
#include "modev/kernel.hpp"
#include "modev/model_io.hpp"
#include "modev/ratefn.hpp"
#include "modev/simulate.hpp"
#include "modev/spectral.hpp"

namespace py = pybind11;
using namespace modev;

namespace {

py::object to_py(const nlohmann::json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

nlohmann::json validation_json(const ValidationReport& r) {
  nlohmann::json clauses = nlohmann::json::array();
  for (const auto& c : r.clauses) {
    clauses.push_back({{"name", c.name}, {"measured", c.measured}, {"bound", std::isfinite(c.bound) ? nlohmann::json(c.bound) : nlohmann::json(nullptr)},
                       {"pass", c.pass}, {"detail", c.detail}});
  }
  return {{"pass", r.pass}, {"partial", r.partial}, {"probe_count", r.probe_count},
          {"probe_radius", r.probe_radius}, {"clauses", clauses}};
}

ModelSpec model_with_gamma(const std::string& model, std::optional<double> gamma) {
  ModelSpec spec = load_model(model);
  if (gamma) spec = make_model(spec.id, spec.x0, spec.drift, spec.kernel, *gamma, spec.bounds);
  return spec;
}

}  // namespace

PYBIND11_MODULE(_modev, m) {
  m.doc() = "Moderate-deviation rate functions and importance sampling";

  auto base = py::register_exception<Error>(m, "Error");
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<DomainError>(m, "DomainError", base.ptr());
  py::register_exception<ArgumentError>(m, "ArgumentError", base.ptr());
  py::register_exception<NumericalError>(m, "NumericalError", base.ptr());

  py::class_<ModelSpec>(m, "Model")
      .def_readonly("id", &ModelSpec::id)
      .def_readonly("dim", &ModelSpec::dim)
      .def_readonly("gamma", &ModelSpec::gamma)
      .def_property_readonly("x0", [](const ModelSpec& s) { return Vec(s.x0); })
      .def("a", &ModelSpec::a, py::arg("n"))
      .def("drift", [](const ModelSpec& s, const Vec& x) { return s.drift->value(x); })
      .def("jacobian", [](const ModelSpec& s, const Vec& x) { return s.drift->jacobian(x); })
      .def("log_mgf", [](const ModelSpec& s, const Vec& x, const Vec& a) { return log_mgf(*s.kernel, x, a); })
      .def("tilt_mean", [](const ModelSpec& s, const Vec& x, const Vec& a) { return tilt_mean(*s.kernel, x, a); })
      .def("covariance", [](const ModelSpec& s, const Vec& x) { return covariance(*s.kernel, x); })
      .def("legendre", [](const ModelSpec& s, const Vec& x, const Vec& b) { return legendre(*s.kernel, x, b); })
      .def("__repr__", [](const ModelSpec& s) { return "<Model " + s.id + " d=" + std::to_string(s.dim) + ">"; });

  m.def("load_model", &model_with_gamma, py::arg("model"), py::arg("gamma") = py::none(),
        "Catalog id or path to a model JSON file.");
  m.def("catalog_model_ids", &catalog_model_ids);
  m.def("model_from_json", [](const std::string& text) { return model_from_json(nlohmann::json::parse(text)); });

  m.def("validate_model", [](const ModelSpec& s, int probes, std::uint64_t seed) {
    return to_py(validation_json(validate_model(s, probes, seed)));
  }, py::arg("model"), py::arg("probes") = 64, py::arg("seed") = kDefaultSeed);

  m.def("psd_sqrt", [](const Mat& a) { return spectral::psd_sqrt(a); });
  m.def("pinv_quad_form", [](const Mat& a, const Vec& b) { return spectral::pinv_quad_form(a, b); });
  m.def("truncated_inv_sqrt", [](const Mat& a, double k) { return spectral::truncated_inv_sqrt(a, k); });

  m.def("noiseless_path", [](const ModelSpec& s, int n) { return noiseless_path(s, n).nodes(); });
  m.def("lln_limit", [](const ModelSpec& s, int m_) { return lln_limit(s, m_).nodes(); });
  m.def("transition_matrix", [](const ModelSpec& s, double from, double to, int m_) {
    return transition_matrix(s, lln_limit(s, m_), from, to);
  }, py::arg("model"), py::arg("s"), py::arg("t"), py::arg("m") = kDefaultRateGrid);

  m.def("gramian", [](const ModelSpec& s, int m_) { return controllability_gramian(s, m_); },
        py::arg("model"), py::arg("m") = kDefaultRateGrid);
  m.def("terminal_rate", [](const ModelSpec& s, const Vec& y, int m_) { return to_py(terminal_rate(s, y, m_).to_json()); },
        py::arg("model"), py::arg("y"), py::arg("m") = kDefaultRateGrid);
  m.def("halfspace_rate", [](const ModelSpec& s, const Vec& v, double c, int m_) {
    return to_py(halfspace_rate(s, v, c, m_).to_json());
  }, py::arg("model"), py::arg("v"), py::arg("c"), py::arg("m") = kDefaultRateGrid);
  m.def("laplace_value", [](const ModelSpec& s, const std::string& functional, int m_) {
    return to_py(laplace_value(s, *parse_functional(functional, s.dim), m_).to_json());
  }, py::arg("model"), py::arg("functional"), py::arg("m") = kDefaultRateGrid);

  m.def("simulate_y", [](const ModelSpec& s, int n, std::int64_t reps, std::uint64_t seed) {
    std::vector<Mat> out;
    for (const auto& p : simulate_y(s, n, reps, seed)) out.push_back(p.nodes());
    return out;
  }, py::arg("model"), py::arg("n"), py::arg("replications"), py::arg("seed") = kDefaultSeed);

  m.def("estimate", [](const ModelSpec& s, const std::string& event, int n, std::int64_t reps,
                       std::optional<double> k, std::uint64_t seed, int threads) {
    const Event ev = parse_event(event, s.dim);
    auto rate = event_rate(linearize(s, kDefaultRateGrid), ev);
    if (!rate.control) throw NumericalError("event has infinite rate; no control to tilt with");
    RunOptions opt;
    opt.threads = threads;
    const double kk = k.value_or(default_truncation(*rate.control));
    return to_py(is_probability(s, ev, *rate.control, kk, n, reps, seed, opt).to_json());
  }, py::arg("model"), py::arg("event"), py::arg("n"), py::arg("replications") = 10000,
     py::arg("K") = py::none(), py::arg("seed") = kDefaultSeed, py::arg("threads") = 1);

  m.def("run_ladder", [](const ModelSpec& s, const std::string& event, const std::vector<int>& n_list,
                         std::int64_t reps, std::uint64_t seed, int threads, bool timing) {
    LadderOptions opt;
    opt.replications = reps;
    opt.seed = seed;
    opt.threads = threads;
    opt.record_timing = timing;
    return to_py(report_to_json(run_ladder(s, LadderTarget::probability(parse_event(event, s.dim)), n_list, opt)));
  }, py::arg("model"), py::arg("event"), py::arg("n_list"), py::arg("replications") = 10000,
     py::arg("seed") = kDefaultSeed, py::arg("threads") = 1, py::arg("timing") = false);

  m.def("run_cli", [](const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return py::make_tuple(code, out.str(), err.str());
  }, py::arg("args"), "Runs the command line front end; returns (exit_code, stdout, stderr).");
}
