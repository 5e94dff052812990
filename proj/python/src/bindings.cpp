#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "tmq/config.hpp"
#include "tmq/errors.hpp"
#include "tmq/run.hpp"

namespace py = pybind11;
using namespace tmq;

namespace {

py::dict gate_result(const GateSolveResult& r) {
  py::dict d;
  d["parameter"] = to_string(r.parameter);
  d["value"] = r.value;
  d["theta0"] = r.theta0;
  d["angle_error"] = r.deviation;
  d["bracket"] = r.bracket;
  d["iterations"] = r.iterations;
  d["relative_phase"] = r.relative_phase;
  d["method"] = r.method == SolveMethod::closed_form ? "closed_form" : "iterative";
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Temporal-mode frequency-conversion maps, Schmidt decomposition and gate design";
  m.attr("__version__") = TMQ_VERSION;

  // Translators are tried newest first, so the base class goes first.
  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<DomainError>(m, "DomainError", base.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());

  py::class_<BandGrid>(m, "BandGrid")
      .def(py::init([](double lo, double hi, int points) { return BandGrid{lo, hi, points}; }),
           py::arg("omega_min"), py::arg("omega_max"), py::arg("points"))
      .def_readonly("omega_min", &BandGrid::omega_min)
      .def_readonly("omega_max", &BandGrid::omega_max)
      .def_readonly("points", &BandGrid::points)
      .def_property_readonly("spacing", &BandGrid::spacing)
      .def("samples", &BandGrid::samples);

  py::class_<FrequencyGrid>(m, "FrequencyGrid")
      .def(py::init([](BandGrid b3, BandGrid b4) { return FrequencyGrid{b3, b4}; }), py::arg("band3"),
           py::arg("band4"))
      .def_readonly("band3", &FrequencyGrid::band3)
      .def_readonly("band4", &FrequencyGrid::band4);

  py::class_<ConversionSetup>(m, "Setup")
      .def_readonly("grid", &ConversionSetup::grid)
      .def_property(
          "length", [](const ConversionSetup& s) { return s.waveguide.length; },
          [](ConversionSetup& s, double v) { s.waveguide.length = v; })
      .def_property(
          "pump1_power", [](const ConversionSetup& s) { return s.pumps.pump1.power; },
          [](ConversionSetup& s, double v) { s.pumps.pump1.power = v; })
      .def_property(
          "pump2_power", [](const ConversionSetup& s) { return s.pumps.pump2.power; },
          [](ConversionSetup& s, double v) { s.pumps.pump2.power = v; })
      .def_property(
          "relative_phase", [](const ConversionSetup& s) { return s.pumps.relative_phase; },
          [](ConversionSetup& s, double v) { s.pumps.relative_phase = v; })
      .def_property_readonly("coupling", [](const ConversionSetup& s) {
        return coupling_strength(s.pumps, s.waveguide, s.constants);
      });

  m.def(
      "load_setup",
      [](const std::filesystem::path& path, const std::vector<std::string>& overrides) {
        return make_setup(parse_config(path, overrides).config);
      },
      py::arg("path"), py::arg("overrides") = std::vector<std::string>{},
      "Physical setup described by a config file.");

  py::class_<FcmKernel>(m, "Kernel")
      .def_readonly("grid", &FcmKernel::grid)
      .def_readonly("values", &FcmKernel::values)
      .def_readonly("xi_bar", &FcmKernel::xi_bar)
      .def_readonly("norm_const", &FcmKernel::norm_const)
      .def("weighted_norm_squared", &FcmKernel::weighted_norm_squared);

  m.def("build_kernel", &build_kernel, py::arg("setup"), py::arg("threads") = 1);
  m.def("make_kernel", &make_kernel, py::arg("grid"), py::arg("values"), py::arg("xi_bar") = cplx{1.0, 0.0});

  py::class_<SchmidtDecomposition>(m, "Decomposition")
      .def_readonly("grid", &SchmidtDecomposition::grid)
      .def_readonly("kappa", &SchmidtDecomposition::kappa)
      .def_readonly("modes3", &SchmidtDecomposition::modes3)
      .def_readonly("modes4", &SchmidtDecomposition::modes4)
      .def_readonly("dropped_mass", &SchmidtDecomposition::dropped_mass)
      .def_property_readonly("rank", &SchmidtDecomposition::rank)
      .def_property_readonly("schmidt_number", [](const SchmidtDecomposition& d) { return schmidt_number(d); })
      .def("reconstruct", [](const SchmidtDecomposition& d) { return reconstruct(d); });

  m.def("decompose", &decompose, py::arg("kernel"), py::arg("threshold") = kDefaultSchmidtThreshold);

  py::class_<RotationAngles>(m, "RotationAngles")
      .def_readonly("magnitude", &RotationAngles::magnitude)
      .def_readonly("phase", &RotationAngles::phase);

  m.def(
      "rotation_angles",
      [](const SchmidtDecomposition& d, const FcmKernel& k) { return rotation_angles(d, k); },
      py::arg("decomposition"), py::arg("kernel"));

  m.def(
      "evolve",
      [](const SchmidtDecomposition& d, const RotationAngles& a, const Eigen::VectorXcd& amp3,
         const Eigen::VectorXcd& amp4) {
        TmState s{d.grid, amp3, amp4};
        if (amp3.size() != d.grid.band3.points || amp4.size() != d.grid.band4.points)
          throw DomainError("evolve: amplitude length does not match the grid");
        const auto out = evolve(s, d, a);
        return std::make_pair(out.amp3, out.amp4);
      },
      py::arg("decomposition"), py::arg("angles"), py::arg("amp3"), py::arg("amp4"),
      "Pairwise beam-splitter map; returns (amp3, amp4).");

  py::class_<GateContext>(m, "GateContext")
      .def_static("build", &GateContext::build, py::arg("setup"),
                  py::arg("threshold") = kDefaultSchmidtThreshold, py::arg("threads") = 1)
      .def_readonly("setup", &GateContext::setup)
      .def_property_readonly("kernel", [](const GateContext& c) { return c.analysis->kernel; })
      .def_property_readonly("decomposition", [](const GateContext& c) { return c.analysis->modes; })
      .def("angles", &GateContext::angles)
      .def("with_setup", &GateContext::with_setup)
      .def_property_readonly("theta0", [](const GateContext& c) { return c.angles().magnitude[0]; });

  m.def("theta0_of_power", &theta0_of_power, py::arg("p1"), py::arg("context"));

  m.def(
      "solve_gate",
      [](const GateContext& ctx, const std::string& kind, int n, const std::string& free_parameter,
         std::pair<double, double> bracket, double tol, const std::string& method) {
        const auto r = solve_gate({parse_gate_kind(kind), n}, parse_free_parameter(free_parameter), bracket, tol,
                                  ctx, method == "iterative" ? SolveMethod::iterative : SolveMethod::closed_form);
        return gate_result(r);
      },
      py::arg("context"), py::arg("kind") = "X", py::arg("n") = 0, py::arg("free_parameter") = "P1",
      py::arg("bracket"), py::arg("tol") = 1e-10, py::arg("method") = "closed_form");

  m.def(
      "preparation_fidelity",
      [](const GateContext& ctx, double sigma, std::optional<double> centre) {
        InputPolicy p;
        p.centre = centre;
        return preparation_fidelity(ctx.analysis->modes, ctx.angles(), p, sigma);
      },
      py::arg("context"), py::arg("sigma"), py::arg("centre") = py::none());

  m.def(
      "optimize_bandwidth",
      [](const GateContext& ctx, std::optional<std::pair<double, double>> bracket, double rel_tol) {
        auto search = default_bandwidth_search(ctx.setup.pumps);
        if (bracket) std::tie(search.lo, search.hi) = *bracket;
        search.rel_tol = rel_tol;
        const auto o = optimize_bandwidth(ctx.analysis->modes, ctx.angles(), {}, search);
        py::dict d;
        d["sigma"] = o.sigma;
        d["fidelity"] = o.fidelity;
        d["centre"] = o.centre;
        d["iterations"] = o.iterations;
        d["hit_bound"] = o.hit_bound;
        d["lo_effective"] = o.lo_effective;
        return d;
      },
      py::arg("context"), py::arg("bracket") = py::none(), py::arg("rel_tol") = 1e-3);

  m.def(
      "run",
      [](const std::filesystem::path& path, const std::vector<std::string>& overrides) {
        RunReport r;
        {
          py::gil_scoped_release release;
          r = run(parse_config(path, overrides));
        }
        py::dict d;
        d["exit_code"] = r.exit_code;
        d["error"] = r.error;
        d["output_dir"] = r.output_dir;
        d["artifacts"] = r.artifacts;
        d["wall_seconds"] = r.wall_seconds;
        return d;
      },
      py::arg("path"), py::arg("overrides") = std::vector<std::string>{},
      "Runs a config file (same as the command-line tool) and returns the report.");
}
