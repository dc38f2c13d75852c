#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "critgrowth/commands.hpp"
#include "critgrowth/config.hpp"
#include "critgrowth/criterion.hpp"
#include "critgrowth/errors.hpp"
#include "critgrowth/spectral.hpp"

namespace py = pybind11;
using namespace critgrowth;
using nlohmann::json;

namespace {

py::dict perron_dict(const PerronData& pd) {
  py::dict d;
  d["rho"] = pd.rho;
  d["u"] = pd.u;
  d["v"] = pd.v;
  d["residual"] = pd.residual;
  d["iterations"] = pd.iterations;
  return d;
}

// Reports cross the boundary as JSON text; the Python side decodes them.
std::string run_json(const std::string& command, const std::string& config_json) {
  const auto cfg = config_from_json(json::parse(config_json));
  return dump_report(run_command(command, cfg).report);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Growth criterion for critical Markov chains with vanishing perturbation";

  static py::exception<Error> base(m, "CritgrowthError", PyExc_RuntimeError);
  static py::exception<ConfigError> config(m, "ConfigError", base.ptr());
  static py::exception<ComputationError> computation(m, "ComputationError", base.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ConfigError& e) {
      py::set_error(config, e.what());
    } catch (const ComputationError& e) {
      py::set_error(computation, e.what());
    } catch (const Error& e) {
      py::set_error(base, e.what());
    } catch (const json::exception& e) {
      py::set_error(config, e.what());
    }
  });

  m.def(
      "perron",
      [](const std::vector<std::vector<double>>& rows, double tol, int max_iter) {
        return perron_dict(perron(NonNegMatrix(rows), PerronOptions{tol, max_iter}));
      },
      py::arg("matrix"), py::arg("tol") = 1e-12, py::arg("max_iter") = 100000);
  m.def("is_primitive",
        [](const std::vector<std::vector<double>>& rows) { return is_primitive(NonNegMatrix(rows)); },
        py::arg("matrix"));
  m.def(
      "contraction_factor",
      [](const std::vector<std::vector<double>>& rows) {
        const NonNegMatrix mat(rows);
        return contraction_factor(mat, perron(mat));
      },
      py::arg("matrix"));
  m.def("cell_division_threshold", &cell_division_threshold, py::arg("p"), py::arg("p_prime"),
        py::arg("b1"), py::arg("b2"));
  m.def("classify_growth",
        [](double c1, double unc_c1, double d1, double unc_d1, bool non_stabilizing) {
          return to_string(classify_growth({c1, unc_c1}, {d1, unc_d1}, non_stabilizing));
        },
        py::arg("c1"), py::arg("c1_uncertainty"), py::arg("d1"), py::arg("d1_uncertainty"),
        py::arg("non_stabilizing") = false);
  m.def("run_json", &run_json, py::arg("command"), py::arg("config_json"),
        py::call_guard<py::gil_scoped_release>());
  m.def(
      "load_config_json",
      [](const std::string& path) { return to_json(parse_config(path)).dump(); }, py::arg("path"));
}
