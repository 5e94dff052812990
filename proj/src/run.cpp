#include "tmq/run.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <memory>
#include <sstream>

#include "json.hpp"

#include "tmq/errors.hpp"
#include "tmq/io.hpp"

namespace tmq {

using ojson = nlohmann::ordered_json;

namespace {

ojson band_json(const BandGrid& g) {
  return {{"omega_min", g.omega_min}, {"omega_max", g.omega_max}, {"points", g.points},
          {"spacing", g.spacing()}};
}

ojson complex_json(cplx z) { return ojson::array({z.real(), z.imag()}); }

std::string error_type(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return "ConfigError";
  if (dynamic_cast<const DomainError*>(&e)) return "DomainError";
  if (dynamic_cast<const DegenerateKernelError*>(&e)) return "DegenerateKernelError";
  if (dynamic_cast<const ResolutionError*>(&e)) return "ResolutionError";
  if (dynamic_cast<const BracketError*>(&e)) return "BracketError";
  if (dynamic_cast<const ConvergenceError*>(&e)) return "ConvergenceError";
  if (dynamic_cast<const Error*>(&e)) return "Error";
  return "std::exception";
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Band-3 rows then band-4 rows: band, omega, re, im.
std::string state_csv(const TmState& s) {
  std::string out = csv_row({"band", "omega", "re", "im"});
  for (int i = 0; i < s.amp3.size(); ++i)
    out += csv_row({"3", format_double(s.grid.band3.at(i)), format_double(s.amp3[i].real()),
                    format_double(s.amp3[i].imag())});
  for (int i = 0; i < s.amp4.size(); ++i)
    out += csv_row({"4", format_double(s.grid.band4.at(i)), format_double(s.amp4[i].real()),
                    format_double(s.amp4[i].imag())});
  return out;
}

std::string modes_csv(const BandGrid& g, const Eigen::MatrixXcd& modes, int count) {
  std::vector<std::string> head{"omega"};
  for (int j = 0; j < count; ++j) {
    head.push_back("re_" + std::to_string(j));
    head.push_back("im_" + std::to_string(j));
  }
  std::string out = csv_row(head);
  for (int i = 0; i < g.points; ++i) {
    std::vector<std::string> row{format_double(g.at(i))};
    for (int j = 0; j < count; ++j) {
      row.push_back(format_double(modes(i, j).real()));
      row.push_back(format_double(modes(i, j).imag()));
    }
    out += csv_row(row);
  }
  return out;
}

class TaskRunner {
 public:
  TaskRunner(const RunConfig& cfg, OutputDir& out, ojson& diag)
      : cfg_(cfg), out_(out), diag_(diag), setup_(make_setup(cfg)) {
    diag_["setup"] = {{"signal_centre3", setup_.grid.band3.centre()},
                      {"signal_centre4", setup_.grid.band4.centre()},
                      {"band3", band_json(setup_.grid.band3)},
                      {"band4", band_json(setup_.grid.band4)}};
    ojson windows;
    for (Band b : kAllBands) {
      const auto& w = setup_.waveguide.dispersion.window(b);
      windows[std::string(band_name(b))] = ojson::array({w.lo, w.hi});
    }
    diag_["setup"]["windows"] = windows;
  }

  void run() {
    switch (cfg_.task) {
      case Task::kernel: return kernel();
      case Task::decompose: return decompose_task();
      case Task::prepare: return prepare();
      case Task::gate_solve: return gate_solve();
      case Task::sweep: return sweep();
    }
  }

 private:
  const RunConfig& cfg_;
  OutputDir& out_;
  ojson& diag_;
  ConversionSetup setup_;

  GateContext context() const { return GateContext::build(setup_, cfg_.threshold, cfg_.threads); }

  void kernel() {
    const auto k = build_kernel(setup_, cfg_.threads);
    const auto rows = k.values.rows(), cols = k.values.cols();
    ojson meta;
    meta["format"] = "complex128 little-endian, row-major, rows = band-3 samples, columns = band-4 samples";
    meta["rows"] = rows;
    meta["cols"] = cols;
    meta["band3"] = band_json(k.grid.band3);
    meta["band4"] = band_json(k.grid.band4);
    meta["xi_bar"] = complex_json(k.xi_bar);
    meta["norm_const"] = k.norm_const;
    meta["weighted_norm_squared"] = k.weighted_norm_squared();
    if (cfg_.exports.kernel_dump) {
      std::vector<double> buf;
      buf.reserve(static_cast<std::size_t>(2 * rows * cols));
      for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) {
          buf.push_back(k.values(i, j).real());
          buf.push_back(k.values(i, j).imag());
        }
      out_.write_binary("kernel.bin", buf.data(), buf.size() * sizeof(double));
      meta["data"] = "kernel.bin";
    }
    out_.write_text("kernel.json", meta.dump(2) + "\n");
    diag_["weighted_norm_squared"] = k.weighted_norm_squared();
  }

  void decompose_task() {
    const auto ctx = context();
    const auto& dec = ctx.analysis->modes;
    const auto angles = ctx.angles();
    std::string kappa = csv_row({"index", "kappa", "theta"});
    for (int j = 0; j < dec.rank(); ++j)
      kappa += csv_row({std::to_string(j), format_double(dec.kappa[j]), format_double(angles.magnitude[j])});
    out_.write_text("kappa.csv", kappa);
    const int count = std::min(cfg_.exports.mode_count, dec.rank());
    out_.write_text("modes3.csv", modes_csv(dec.grid.band3, dec.modes3, count));
    out_.write_text("modes4.csv", modes_csv(dec.grid.band4, dec.modes4, count));

    ojson s;
    s["rank"] = dec.rank();
    s["kappa_sum"] = dec.kappa.sum();
    s["dropped_mass"] = dec.dropped_mass;
    s["schmidt_number"] = schmidt_number(dec);
    s["theta0"] = angles.magnitude[0];
    s["phase"] = angles.phase;
    s["xi_bar"] = complex_json(ctx.analysis->kernel.xi_bar);
    s["norm_const"] = ctx.analysis->kernel.norm_const;
    s["fundamental_centroid"] = fundamental_centroid(dec);
    out_.write_text("decompose.json", s.dump(2) + "\n");
    diag_["decomposition"] = s;
  }

  void prepare() {
    const auto ctx = context();
    const auto& dec = ctx.analysis->modes;
    const auto angles = ctx.angles();
    const auto& policy = cfg_.input.policy;
    ojson r;
    double sigma = 0.0;
    if (policy.sigma) {
      sigma = *policy.sigma;
      r["optimised"] = false;
    } else {
      const auto search = cfg_.input.search.value_or(default_bandwidth_search(setup_.pumps));
      const auto opt = optimize_bandwidth(dec, angles, policy, search);
      sigma = opt.sigma;
      r["optimised"] = true;
      r["optimizer"] = {{"lo", search.lo},
                        {"hi", search.hi},
                        {"lo_effective", opt.lo_effective},
                        {"rel_tol", search.rel_tol},
                        {"iterations", opt.iterations},
                        {"hit_bound", opt.hit_bound}};
    }
    const double centre = input_centre(dec, policy);
    const auto in = gaussian_input(dec.grid, policy.band, centre, sigma);
    const auto outcome = evolve(in, dec, angles);
    const Qubit logical = policy.band == Band::signal3 ? Qubit{1.0, 0.0} : Qubit{0.0, 1.0};
    const Qubit ideal = ideal_qubit_output(logical, angles.magnitude[0], angles.phase);
    const double f = preparation_fidelity(dec, angles, policy, sigma);
    out_.write_text("state_in.csv", state_csv(in));
    out_.write_text("state_out.csv", state_csv(outcome));

    r["band"] = std::string(band_name(policy.band));
    r["sigma"] = sigma;
    r["centre"] = centre;
    r["fidelity"] = f;
    r["theta0"] = angles.magnitude[0];
    r["phase"] = angles.phase;
    r["ideal"] = {{"x", complex_json(ideal.x)}, {"y", complex_json(ideal.y)}};
    r["output_norm_squared"] = outcome.norm_squared();
    out_.write_text("prepare.json", r.dump(2) + "\n");
    diag_["prepare"] = r;
  }

  void gate_solve() {
    const auto ctx = context();
    const auto& g = cfg_.gate;
    std::pair<double, double> bracket;
    if (g.bracket) {
      bracket = *g.bracket;
    } else {
      // Theta_0 ~ sqrt(P): twice the square-root-law estimate contains the root.
      const double ref = g.free_parameter == FreeParameter::P1 ? setup_.pumps.pump1.power
                                                               : setup_.pumps.pump2.power;
      if (!(ref > 0.0))
        throw ConfigError("gate.bracket: \"auto\" needs a positive configured pump power");
      const double theta = theta0_of_parameter(g.free_parameter, ref, ctx);
      if (!(theta > 0.0)) throw DegenerateKernelError("gate-solve: Theta_0 vanishes at the configured power");
      const double ratio = g.target.target_angle() / theta;
      bracket = {0.0, 2.0 * ref * ratio * ratio};
    }
    const auto r = solve_gate(g.target, g.free_parameter, bracket, g.tol, ctx, g.method, g.max_iterations);
    const auto realised = ctx.with_setup(r.solved);
    const auto& dec = realised.analysis->modes;
    const auto angles = realised.angles();

    ojson rep;
    rep["gate"] = to_string(g.target.kind);
    rep["n"] = g.target.n;
    rep["target_angle"] = g.target.target_angle();
    rep["free_parameter"] = to_string(r.parameter);
    rep["value"] = r.value;
    rep["unit"] = r.parameter == FreeParameter::L ? "m" : "W";
    rep["theta0"] = r.theta0;
    rep["angle_error"] = r.deviation;
    rep["bracket"] = ojson::array({r.bracket.first, r.bracket.second});
    rep["method"] = r.method == SolveMethod::closed_form ? "closed_form" : "iterative";
    rep["iterations"] = r.iterations;
    rep["relative_phase"] = r.relative_phase;
    rep["solved_pumps"] = {{"pump1_power", r.solved.pumps.pump1.power},
                           {"pump2_power", r.solved.pumps.pump2.power},
                           {"relative_phase", r.solved.pumps.relative_phase}};
    rep["solved_length"] = r.solved.waveguide.length;
    const double h = 1.0 / std::sqrt(2.0);
    const std::pair<const char*, Qubit> probes[] = {
        {"0", {1.0, 0.0}}, {"1", {0.0, 1.0}}, {"+", {h, h}}, {"+i", {h, cplx(0.0, h)}}};
    double worst = 0.0;
    ojson devs;
    for (const auto& [name, q] : probes) {
      const auto d = gate_deviation(embed_fundamental(dec, q), g.target, dec, angles);
      devs[name] = {{"deviation", d.deviation}, {"global_phase", d.global_phase}};
      worst = std::max(worst, d.deviation);
    }
    rep["deviations"] = devs;
    rep["max_deviation"] = worst;
    out_.write_text("gate_report.json", rep.dump(2) + "\n");
    diag_["gate"] = rep;
  }

  void sweep() {
    const auto plan = make_sweep_plan(cfg_, setup_);
    const auto records = run_sweep(plan, cfg_.threads);
    const auto cols = observable_columns(plan);
    std::vector<std::string> head{to_string(plan.swept)};
    head.insert(head.end(), cols.begin(), cols.end());
    head.push_back("status");
    std::string csv = csv_row(head);
    ojson points = ojson::array();
    int failed = 0;
    for (const auto& rec : records) {
      std::vector<std::string> row{format_double(rec.value)};
      for (const auto& c : cols) {
        const double* v = rec.find(c);
        row.push_back(v ? format_double(*v) : "nan");
      }
      const std::string status = !rec.error.empty() ? "error" : rec.failures.empty() ? "ok" : "partial";
      if (status != "ok") ++failed;
      row.push_back(status);
      csv += csv_row(row);

      ojson p;
      p["value"] = rec.value;
      p["status"] = status;
      p["grid3"] = rec.diagnostics.grid3;
      p["grid4"] = rec.diagnostics.grid4;
      p["rank"] = rec.diagnostics.rank;
      p["kappa_retained"] = rec.diagnostics.kappa_retained;
      p["optimizer_iterations"] = rec.diagnostics.optimizer_iterations;
      p["bound_hit"] = rec.diagnostics.bound_hit;
      if (!rec.error.empty()) p["error"] = rec.error;
      for (const auto& [col, msg] : rec.failures) p["failures"][col] = msg;
      points.push_back(p);
    }
    out_.write_text("sweep.csv", csv);
    diag_["sweep"] = {{"parameter", to_string(plan.swept)},
                      {"points", records.size()},
                      {"failed_points", failed},
                      {"records", points}};
    if (plan.optimize)
      diag_["sweep"]["bandwidth_search"] = {{"lo", plan.optimize->lo}, {"hi", plan.optimize->hi},
                                            {"rel_tol", plan.optimize->rel_tol}};
  }
};

}  // namespace

SweepPlan make_sweep_plan(const RunConfig& config, const ConversionSetup& setup) {
  if (!config.sweep) throw ConfigError("sweep: section missing");
  const auto& s = *config.sweep;
  SweepPlan plan;
  plan.swept = s.parameter;
  plan.fixed = setup;
  plan.threshold = config.threshold;
  plan.input = config.input.policy;
  plan.gate = config.gate.target;
  plan.outputs = s.observables;
  plan.kappa_count = s.kappa_count;
  if (s.optimize_sigma_in)
    plan.optimize = config.input.search.value_or(default_bandwidth_search(setup.pumps));
  if (s.theta0_range) {
    const bool p1 = s.parameter == SweptParameter::P1;
    const double ref = p1 ? setup.pumps.pump1.power : setup.pumps.pump2.power;
    if (!(ref > 0.0)) throw ConfigError("sweep.theta0_range: needs a positive configured pump power");
    const auto ctx = GateContext::build(setup, config.threshold, config.threads);
    const double theta_ref = ctx.angles().magnitude[0];
    if (!(theta_ref > 0.0)) throw DegenerateKernelError("sweep.theta0_range: Theta_0 vanishes at the configured power");
    const auto& r = *s.theta0_range;
    for (int i = 0; i < r.count; ++i) {
      const double theta = r.count == 1 ? r.start : r.start + (r.stop - r.start) * i / (r.count - 1);
      const double ratio = theta / theta_ref;
      plan.values.push_back(ref * ratio * ratio);
    }
  } else {
    plan.values = s.values;
  }
  return plan;
}

RunReport run(const LoadedConfig& loaded) {
  const auto t0 = std::chrono::steady_clock::now();
  const RunConfig& cfg = loaded.config;
  RunReport report;
  report.output_dir = cfg.output;

  ojson manifest;
  manifest["tool"] = "tmq";
  manifest["version"] = TMQ_VERSION;
  manifest["task"] = to_string(cfg.task);
  manifest["started_utc"] = utc_now();
  manifest["threads"] = cfg.threads;
  manifest["config"] = ojson::parse(serialize_config(cfg));
  manifest["applied_defaults"] = loaded.applied_defaults;
  manifest["overrides"] = loaded.overrides;

  std::unique_ptr<OutputDir> out;
  try {
    out = std::make_unique<OutputDir>(cfg.output);
  } catch (const std::exception& e) {
    report.exit_code = 1;
    report.error = e.what();
    return report;
  }
  report.output_dir = out->root();

  ojson diag = ojson::object();
  ojson errors = ojson::array();
  try {
    TaskRunner(cfg, *out, diag).run();
  } catch (const std::exception& e) {
    report.exit_code = dynamic_cast<const ConfigError*>(&e) ? 2 : 1;
    report.error = e.what();
    ojson err{{"type", error_type(e)}, {"message", e.what()}};
    if (const auto* c = dynamic_cast<const ConvergenceError*>(&e)) {
      err["best_iterate"] = c->best_iterate;
      err["iterations"] = c->iterations;
    }
    errors.push_back(err);
  }

  report.artifacts = out->written();
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  manifest["status"] = report.exit_code == 0 ? "ok" : "error";
  manifest["exit_code"] = report.exit_code;
  manifest["wall_time_s"] = report.wall_seconds;
  manifest["diagnostics"] = diag;
  manifest["artifacts"] = report.artifacts;
  manifest["errors"] = errors;
  try {
    out->write_text("manifest.json", manifest.dump(2) + "\n");
    report.artifacts.push_back("manifest.json");
  } catch (const std::exception& e) {
    if (report.exit_code == 0) report.exit_code = 1;
    if (report.error.empty()) report.error = e.what();
  }
  return report;
}

}  // namespace tmq
