#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "parisi/commands.hpp"
#include "parisi/control.hpp"
#include "parisi/functional.hpp"
#include "parisi/optimizer.hpp"
#include "parisi/oracle.hpp"
#include "parisi/pde.hpp"

namespace py = pybind11;
using namespace parisi;

namespace {

py::object to_python(const nlohmann::json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

}  // namespace

PYBIND11_MODULE(parisi, mod) {
  mod.doc() = "Zero-temperature Parisi formula for mixed p-spin ground state energies";

  py::class_<MixingFunction>(mod, "MixingFunction")
      .def(py::init([](const std::vector<std::pair<int, double>>& coeffs, double h) {
             std::vector<Term> terms;
             for (const auto& [p, c] : coeffs) terms.push_back({p, c});
             return MixingFunction(terms, h);
           }),
           py::arg("coeffs"), py::arg("h") = 0.0)
      .def_static("sk", &MixingFunction::sk, py::arg("h") = 0.0)
      .def("xi", &MixingFunction::xi)
      .def("xi_prime", &MixingFunction::xi_prime)
      .def("xi_second", &MixingFunction::xi_second)
      .def_property_readonly("h", &MixingFunction::h)
      .def_property_readonly("coeffs", [](const MixingFunction& m) {
        std::vector<std::pair<int, double>> out;
        for (const auto& t : m.coeffs()) out.emplace_back(t.p, t.c);
        return out;
      });

  py::class_<StepOrderParam>(mod, "StepOrderParam")
      .def(py::init<std::vector<std::pair<double, double>>>(), py::arg("pieces"))
      .def_static("constant", &StepOrderParam::constant)
      .def("__call__", &StepOrderParam::operator())
      .def_property_readonly("breaks", &StepOrderParam::breaks)
      .def_property_readonly("values", &StepOrderParam::values)
      .def("to_pairs", &StepOrderParam::to_pairs)
      .def("__eq__", [](const StepOrderParam& a, const StepOrderParam& b) { return a == b; })
      .def("__repr__", [](const StepOrderParam& g) { return "StepOrderParam(" + to_json(g).dump() + ")"; });

  py::class_<DiscreteCDF>(mod, "DiscreteCDF")
      .def(py::init<std::vector<std::pair<double, double>>>(), py::arg("atoms"))
      .def_static("dirac", &DiscreteCDF::dirac)
      .def("__call__", &DiscreteCDF::operator())
      .def_property_readonly("atoms", &DiscreteCDF::atoms);

  py::class_<SpaceGrid>(mod, "SpaceGrid")
      .def_static("defaults", &SpaceGrid::defaults, py::arg("model"), py::arg("n_x") = 2049)
      .def_readwrite("x_max", &SpaceGrid::x_max)
      .def_readwrite("n_x", &SpaceGrid::n_x)
      .def_readwrite("quad_nodes", &SpaceGrid::quad_nodes)
      .def_readwrite("extension_margin", &SpaceGrid::extension_margin)
      .def("refined", &SpaceGrid::refined)
      .def("node", &SpaceGrid::node);

  py::class_<FunctionalValue>(mod, "FunctionalValue")
      .def_readonly("value", &FunctionalValue::value)
      .def_readonly("pde_value", &FunctionalValue::pde_value)
      .def_readonly("correction", &FunctionalValue::correction)
      .def_readonly("entropy", &FunctionalValue::entropy);

  mod.def("l1_distance", &l1_distance);
  mod.def("embed_finite_beta", &embed_finite_beta);
  mod.def("minimizer_envelope", &minimizer_envelope);

  mod.def("parisi_zero_t", &parisi_zero_t, py::arg("model"), py::arg("gamma"), py::arg("grid"));
  mod.def("parisi_finite_beta", &parisi_finite_beta, py::arg("model"), py::arg("alpha"), py::arg("beta"),
          py::arg("grid"));
  mod.def(
      "psi_profile",
      [](const MixingFunction& m, const StepOrderParam& gamma, const SpaceGrid& g) {
        const auto sol = solve_zero_t(m, gamma, g);
        const auto& l = sol.layers().front();
        std::vector<double> x(g.n_x);
        for (int i = 0; i < g.n_x; ++i) x[i] = g.node(i);
        return py::make_tuple(x, l.value, l.deriv);
      },
      py::arg("model"), py::arg("gamma"), py::arg("grid"), "Psi(0, x) and its x-derivative on the grid nodes");

  mod.def(
      "gse_estimate",
      [](const MixingFunction& m, int k_max, int restarts, std::uint64_t seed, int search_n_x) {
        OptimizerConfig cfg;
        cfg.restarts = restarts;
        cfg.seed = seed;
        if (search_n_x > 0) cfg.search_grid = SpaceGrid::defaults(m, search_n_x);
        return to_python(to_json(gse_estimate(m, k_max, cfg, SpaceGrid::defaults(m))));
      },
      py::arg("model"), py::arg("k_max") = 3, py::arg("restarts") = 4, py::arg("seed") = 1,
      py::arg("search_n_x") = 513);

  mod.def(
      "verify_variational",
      [](const MixingFunction& m, const StepOrderParam& gamma, double s, double x, int paths, int steps,
         std::uint64_t seed) {
        McParams mc;
        mc.n_paths = paths;
        mc.n_steps = steps;
        mc.seed = seed;
        return to_python(to_json(verify_variational(m, gamma, Boundary::kAbs, 0.0, SpaceGrid::defaults(m), s, x, mc)));
      },
      py::arg("model"), py::arg("gamma"), py::arg("s"), py::arg("x"), py::arg("paths") = 100000,
      py::arg("steps") = 512, py::arg("seed") = 1);

  mod.def(
      "ground_state",
      [](const MixingFunction& m, int n, std::uint64_t seed) {
        const auto gs = ground_state_exhaustive(sample_disorder(m, n, seed));
        return py::make_tuple(gs.energy_per_spin, std::vector<int>(gs.sigma.begin(), gs.sigma.end()));
      },
      py::arg("model"), py::arg("n"), py::arg("seed"), "(L_N, argmax) for one disorder sample");
  mod.def(
      "free_energy",
      [](const MixingFunction& m, int n, std::uint64_t seed, double beta) {
        const auto r = free_energy_exhaustive(sample_disorder(m, n, seed), beta);
        return py::make_tuple(r.ground.energy_per_spin, r.free_energy);
      },
      py::arg("model"), py::arg("n"), py::arg("seed"), py::arg("beta"), "(L_N, F_N(beta)) for one disorder sample");
  mod.def(
      "run_oracle",
      [](const MixingFunction& m, int n, int samples, std::uint64_t seed, std::optional<double> beta) {
        return to_python(to_json(run_oracle(m, n, samples, seed, beta)));
      },
      py::arg("model"), py::arg("n"), py::arg("samples"), py::arg("seed") = 1, py::arg("beta") = py::none());
  mod.def(
      "extrapolate_gse",
      [](const std::vector<int>& ns, const std::vector<double>& means, const std::vector<double>& errs, double omega) {
        return to_python(to_json(extrapolate_gse(ns, means, errs, omega)));
      },
      py::arg("ns"), py::arg("means"), py::arg("std_errors"), py::arg("omega") = 2.0 / 3.0);
  mod.def(
      "covariance_check",
      [](const MixingFunction& m, int n, int samples, std::uint64_t seed) {
        return to_python(to_json(covariance_check(m, n, samples, seed)));
      },
      py::arg("model"), py::arg("n"), py::arg("samples"), py::arg("seed") = 1);

  mod.def(
      "run_command",
      [](const std::string& name, const std::string& config_json, const std::string& out_dir) {
        RunConfig cfg = parse_config(config_json, "config");
        cfg.out_dir = out_dir;
        return to_python(run_command(name, cfg));
      },
      py::arg("name"), py::arg("config_json"), py::arg("out_dir"),
      "Run a CLI subcommand on a JSON config string; returns the summary record");

  py::register_exception<ConfigError>(mod, "ConfigError", PyExc_ValueError);
  py::register_exception<GridTooSmall>(mod, "GridTooSmall", PyExc_RuntimeError);
}
