#include "tmq/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "tmq/errors.hpp"
#include "tmq/quantity.hpp"

namespace tmq {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

std::string to_string(Task t) {
  switch (t) {
    case Task::kernel: return "kernel";
    case Task::decompose: return "decompose";
    case Task::prepare: return "prepare";
    case Task::gate_solve: return "gate-solve";
    case Task::sweep: return "sweep";
  }
  return "?";
}

Task parse_task(const std::string& text) {
  for (auto t : {Task::kernel, Task::decompose, Task::prepare, Task::gate_solve, Task::sweep})
    if (to_string(t) == text) return t;
  throw ConfigError("unknown task '" + text + "' (expected kernel, decompose, prepare, gate-solve or sweep)");
}

namespace {

constexpr std::array<Band, 4> kBands = {Band::pump1, Band::pump2, Band::signal3, Band::signal4};

std::string placement_name(SignalPlacement p) {
  switch (p) {
    case SignalPlacement::nondegenerate: return "nondegenerate";
    case SignalPlacement::degenerate: return "degenerate";
    case SignalPlacement::explicit_centres: return "explicit";
  }
  return "?";
}

Dimension beta_dimension(int order) { return Dimension{{-1, order, 0, 0, 0}}; }

Dimension swept_dimension(SweptParameter p) {
  switch (p) {
    case SweptParameter::L: return dims::length;
    case SweptParameter::sigma_in: return dims::angular_frequency;
    case SweptParameter::P1:
    case SweptParameter::P2: return dims::power;
  }
  return dims::none;
}

Dimension free_parameter_dimension(FreeParameter p) {
  return p == FreeParameter::L ? dims::length : dims::power;
}

struct ParseState {
  std::filesystem::path base_dir;
  std::vector<std::string> defaults;
  std::vector<std::string> missing;
};

// One JSON object. Every key read is marked; finish() rejects the rest.
class Section {
 public:
  Section(const json& j, std::string path, ParseState& st) : j_(j), path_(std::move(path)), st_(st) {
    if (!j_.is_object()) throw ConfigError(label() + ": expected an object");
  }

  std::string key_path(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  const json* get(const std::string& key) {
    seen_.insert(key);
    const auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  // Missing sections read as empty objects so their defaults are recorded.
  Section child(const std::string& key) {
    static const json empty = json::object();
    const json* v = get(key);
    return Section(v ? *v : empty, key_path(key), st_);
  }

  std::optional<double> quantity(const std::string& key, const Dimension& dim) {
    const json* v = get(key);
    if (!v) return std::nullopt;
    return to_si(*v, key_path(key), dim);
  }

  double required_quantity(const std::string& key, const Dimension& dim) {
    const auto q = quantity(key, dim);
    if (!q) st_.missing.push_back(key_path(key) + " [" + unit_symbol(dim) + "]");
    return q.value_or(0.0);
  }

  double quantity_or(const std::string& key, const Dimension& dim, double fallback) {
    const auto q = quantity(key, dim);
    if (!q) st_.defaults.push_back(key_path(key));
    return q.value_or(fallback);
  }

  double number_or(const std::string& key, double fallback) {
    const json* v = get(key);
    if (!v) {
      st_.defaults.push_back(key_path(key));
      return fallback;
    }
    if (!v->is_number())
      throw ConfigError(key_path(key) + ": expected a plain number" +
                        (v->is_string() ? " (this field has no unit)" : ""));
    return v->get<double>();
  }

  int integer_or(const std::string& key, int fallback) {
    const json* v = get(key);
    if (!v) {
      st_.defaults.push_back(key_path(key));
      return fallback;
    }
    if (!v->is_number_integer()) throw ConfigError(key_path(key) + ": expected an integer");
    return v->get<int>();
  }

  bool flag_or(const std::string& key, bool fallback) {
    const json* v = get(key);
    if (!v) {
      st_.defaults.push_back(key_path(key));
      return fallback;
    }
    if (!v->is_boolean()) throw ConfigError(key_path(key) + ": expected true or false");
    return v->get<bool>();
  }

  std::optional<std::string> text(const std::string& key) {
    const json* v = get(key);
    if (!v) return std::nullopt;
    if (!v->is_string()) throw ConfigError(key_path(key) + ": expected a string");
    return v->get<std::string>();
  }

  std::string text_or(const std::string& key, const std::string& fallback) {
    auto t = text(key);
    if (!t) st_.defaults.push_back(key_path(key));
    return t.value_or(fallback);
  }

  std::string required_text(const std::string& key) {
    auto t = text(key);
    if (!t) st_.missing.push_back(key_path(key));
    return t.value_or("");
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key()))
        throw ConfigError("unknown key '" + key_path(it.key()) + "'");
  }

  double to_si(const json& v, const std::string& where, const Dimension& dim) const {
    if (v.is_number())
      throw ConfigError(where + ": a unit is required (expected " + unit_symbol(dim) + ")");
    if (!v.is_string())
      throw ConfigError(where + ": expected a quantity string such as \"1 " + unit_symbol(dim) + "\"");
    const std::string s = v.get<std::string>();
    Quantity q;
    try {
      q = parse_quantity(s);
    } catch (const ConfigError& e) {
      throw ConfigError(where + ": " + e.what() + " (expected " + unit_symbol(dim) + ")");
    }
    if (!(q.dim == dim))
      throw ConfigError(where + ": expected unit " + unit_symbol(dim) + ", got \"" + s + "\"");
    return q.value;
  }

  ParseState& state() { return st_; }
  const std::string& path() const { return path_; }

 private:
  std::string label() const { return path_.empty() ? "config" : path_; }

  const json& j_;
  std::string path_;
  ParseState& st_;
  std::set<std::string> seen_;
};

// Angular frequency from rad/s, Hz (2 pi f) or a vacuum wavelength (2 pi c / lambda).
double to_omega(const json& v, const std::string& where) {
  if (v.is_number())
    throw ConfigError(where + ": a unit is required (expected rad/s, Hz or a wavelength in m)");
  if (!v.is_string()) throw ConfigError(where + ": expected a quantity string");
  const std::string s = v.get<std::string>();
  Quantity q;
  try {
    q = parse_quantity(s);
  } catch (const ConfigError& e) {
    throw ConfigError(where + ": " + e.what());
  }
  if (q.dim == dims::angular_frequency) return q.value;
  if (q.dim == dims::frequency) return 2.0 * kPi * q.value;
  if (q.dim == dims::length) {
    if (!(q.value > 0.0)) throw ConfigError(where + ": wavelength must be > 0");
    return 2.0 * kPi * PhysicalConstants{}.c / q.value;
  }
  throw ConfigError(where + ": expected unit rad/s, Hz or m (wavelength), got \"" + s + "\"");
}

double required_omega(Section& sec, const std::string& key) {
  const json* v = sec.get(key);
  if (!v) {
    sec.state().missing.push_back(sec.key_path(key) + " [rad/s or wavelength]");
    return 0.0;
  }
  return to_omega(*v, sec.key_path(key));
}

Pump read_pump(Section sec) {
  Pump p;
  p.omega0 = required_omega(sec, "center");
  p.sigma = sec.required_quantity("bandwidth", dims::angular_frequency);
  p.power = sec.required_quantity("power", dims::power);
  p.rep_rate = sec.required_quantity("rep_rate", dims::frequency);
  sec.finish();
  return p;
}

Window read_window(const json& v, const std::string& where, const Section& sec) {
  if (!v.is_array() || v.size() != 2) throw ConfigError(where + ": expected [lo, hi]");
  return {sec.to_si(v[0], where + "[0]", dims::angular_frequency),
          sec.to_si(v[1], where + "[1]", dims::angular_frequency)};
}

DispersionConfig read_dispersion(Section sec) {
  DispersionConfig d;
  const std::string kind = sec.text_or("kind", "sellmeier");
  if (kind == "sellmeier") {
    d.kind = DispersionKind::sellmeier_effective;
  } else if (kind == "polynomial") {
    d.kind = DispersionKind::polynomial_expansion;
  } else {
    throw ConfigError(sec.key_path("kind") + ": expected \"sellmeier\" or \"polynomial\", got \"" +
                      kind + "\"");
  }
  d.file = sec.text_or("file", d.file);
  if (d.file.rfind("builtin:", 0) != 0) {
    std::filesystem::path p(d.file);
    if (p.is_relative()) p = sec.state().base_dir / p;
    d.file = p.lexically_normal().string();
  }
  if (d.kind == DispersionKind::polynomial_expansion) {
    Section ex = sec.child("expansions");
    for (Band b : kBands) {
      const std::string name(band_name(b));
      const json* v = ex.get(name);
      if (!v) {
        sec.state().missing.push_back(ex.key_path(name));
        continue;
      }
      Section band(*v, ex.key_path(name), sec.state());
      auto& t = d.expansions[band_index(b)];
      t.omega_ref = band.quantity_or("omega_ref", dims::angular_frequency, 0.0);
      const json* beta = band.get("beta");
      if (!beta || !beta->is_array() || beta->empty())
        throw ConfigError(band.key_path("beta") + ": expected a nonempty list of quantities (1/m, s/m, s^2/m, ...)");
      for (std::size_t m = 0; m < beta->size(); ++m)
        t.beta.push_back(band.to_si((*beta)[m], band.key_path("beta") + "[" + std::to_string(m) + "]",
                                    beta_dimension(static_cast<int>(m))));
      band.finish();
    }
    ex.finish();
  } else if (sec.has("expansions")) {
    throw ConfigError(sec.key_path("expansions") + ": only valid with kind \"polynomial\"");
  }
  if (const json* w = sec.get("windows")) {
    Section ws(*w, sec.key_path("windows"), sec.state());
    std::array<Window, 4> windows{};
    for (Band b : kBands) {
      const std::string name(band_name(b));
      const json* v = ws.get(name);
      if (!v) throw ConfigError(ws.key_path(name) + ": missing (windows must list all four bands)");
      windows[band_index(b)] = read_window(*v, ws.key_path(name), ws);
    }
    ws.finish();
    d.windows = windows;
  } else {
    sec.state().defaults.push_back(sec.key_path("windows"));
  }
  d.window_sigmas = sec.number_or("window_sigmas", d.window_sigmas);
  sec.finish();
  return d;
}

BandGrid read_band(Section sec) {
  BandGrid g;
  g.omega_min = sec.required_quantity("min", dims::angular_frequency);
  g.omega_max = sec.required_quantity("max", dims::angular_frequency);
  const json* n = sec.get("points");
  if (!n) {
    sec.state().missing.push_back(sec.key_path("points"));
  } else {
    if (!n->is_number_integer()) throw ConfigError(sec.key_path("points") + ": expected an integer");
    g.points = n->get<int>();
  }
  sec.finish();
  return g;
}

std::vector<double> expand_range(Section sec, const Dimension& dim) {
  const double start = sec.required_quantity("start", dim);
  const double stop = sec.required_quantity("stop", dim);
  const json* c = sec.get("count");
  if (!c || !c->is_number_integer() || c->get<int>() < 1)
    throw ConfigError(sec.key_path("count") + ": expected an integer >= 1");
  const int count = c->get<int>();
  const std::string spacing = sec.text_or("spacing", "linear");
  sec.finish();
  if (count == 1) return {start};
  std::vector<double> v(count);
  if (spacing == "linear") {
    for (int i = 0; i < count; ++i) v[i] = start + (stop - start) * i / (count - 1);
  } else if (spacing == "log") {
    if (!(start > 0.0 && stop > 0.0)) throw ConfigError(sec.key_path("spacing") + ": log spacing needs positive ends");
    for (int i = 0; i < count; ++i) v[i] = start * std::pow(stop / start, double(i) / (count - 1));
  } else {
    throw ConfigError(sec.key_path("spacing") + ": expected \"linear\" or \"log\"");
  }
  v.front() = start;
  v.back() = stop;
  return v;
}

SweepConfig read_sweep(Section sec) {
  SweepConfig s;
  const auto param = sec.required_text("parameter");
  if (param.empty()) return s;
  s.parameter = parse_swept_parameter(param);
  const Dimension dim = swept_dimension(s.parameter);
  int sources = 0;
  if (const json* v = sec.get("values")) {
    ++sources;
    if (!v->is_array()) throw ConfigError(sec.key_path("values") + ": expected a list of quantities");
    for (std::size_t i = 0; i < v->size(); ++i)
      s.values.push_back(sec.to_si((*v)[i], sec.key_path("values") + "[" + std::to_string(i) + "]", dim));
  }
  if (const json* r = sec.get("range")) {
    ++sources;
    s.values = expand_range(Section(*r, sec.key_path("range"), sec.state()), dim);
  }
  if (const json* t = sec.get("theta0_range")) {
    ++sources;
    if (s.parameter != SweptParameter::P1 && s.parameter != SweptParameter::P2)
      throw ConfigError(sec.key_path("theta0_range") + ": only valid for P1 or P2 sweeps");
    Section ts(*t, sec.key_path("theta0_range"), sec.state());
    Theta0Range tr;
    tr.start = ts.required_quantity("start", dims::angle);
    tr.stop = ts.required_quantity("stop", dims::angle);
    const json* c = ts.get("count");
    if (!c || !c->is_number_integer() || c->get<int>() < 1)
      throw ConfigError(ts.key_path("count") + ": expected an integer >= 1");
    tr.count = c->get<int>();
    ts.finish();
    s.theta0_range = tr;
  }
  if (sources != 1)
    throw ConfigError(sec.path() + ": give exactly one of values, range or theta0_range");
  s.optimize_sigma_in = sec.flag_or("optimize_sigma_in", false);
  if (const json* o = sec.get("observables")) {
    if (!o->is_array() || o->empty()) throw ConfigError(sec.key_path("observables") + ": expected a nonempty list");
    for (const auto& name : *o) {
      if (!name.is_string()) throw ConfigError(sec.key_path("observables") + ": expected strings");
      s.observables.push_back(parse_observable(name.get<std::string>()));
    }
  } else {
    sec.state().defaults.push_back(sec.key_path("observables"));
    s.observables = {Observable::fidelity, Observable::kappa, Observable::theta0};
    if (s.optimize_sigma_in) s.observables.push_back(Observable::optimal_sigma_in);
  }
  s.kappa_count = sec.integer_or("kappa_count", s.kappa_count);
  sec.finish();
  return s;
}

void check(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

void validate(const RunConfig& c) {
  check(c.length > 0.0, "waveguide.length: must be > 0 m");
  check(c.gamma > 0.0, "waveguide.gamma: must be > 0 1/(W m)");
  for (auto [p, name] : {std::pair{&c.pumps.pump1, "pumps.pump1"}, {&c.pumps.pump2, "pumps.pump2"}}) {
    check(p->omega0 > 0.0, std::string(name) + ".center: must be > 0");
    check(p->sigma > 0.0, std::string(name) + ".bandwidth: must be > 0 rad/s");
    check(p->power >= 0.0, std::string(name) + ".power: must be >= 0 W");
    check(p->rep_rate > 0.0, std::string(name) + ".rep_rate: must be > 0 Hz");
  }
  check(std::isfinite(c.pumps.relative_phase), "pumps.relative_phase: must be finite");
  check(c.dispersion.window_sigmas > 0.0, "waveguide.dispersion.window_sigmas: must be > 0");
  if (c.signals.placement == SignalPlacement::explicit_centres)
    check(c.signals.centre3 > 0.0 && c.signals.centre4 > 0.0, "signals: centres must be > 0");
  if (c.grid.bands) {
    for (auto [b, name] : {std::pair{&c.grid.bands->band3, "grid.bands.band3"}, {&c.grid.bands->band4, "grid.bands.band4"}}) {
      check(b->points >= 2, std::string(name) + ".points: must be >= 2");
      check(b->omega_min > 0.0 && b->omega_max > b->omega_min,
            std::string(name) + ": needs 0 < min < max");
    }
  }
  check(c.grid.points >= 2, "grid.points: must be >= 2");
  check(c.grid.span_factor > 0.0, "grid.span_factor: must be > 0");
  check(c.quadrature.nodes >= 3, "quadrature.nodes: must be >= 3");
  check(c.quadrature.half_width_sigmas > 0.0, "quadrature.half_width_sigmas: must be > 0");
  check(c.threshold >= 0.0 && c.threshold < 1.0, "schmidt.threshold: must lie in [0, 1)");
  if (c.input.policy.sigma) check(*c.input.policy.sigma > 0.0, "input.sigma: must be > 0 rad/s");
  if (c.input.search) {
    check(c.input.search->lo > 0.0 && c.input.search->hi > c.input.search->lo,
          "input.search: needs 0 < lo < hi");
    check(c.input.search->rel_tol > 0.0, "input.search.rel_tol: must be > 0");
  }
  check(c.input.policy.band == Band::signal3 || c.input.policy.band == Band::signal4,
        "input.band: must be signal3 or signal4");
  check(c.gate.target.n >= 0, "gate.n: must be >= 0");
  check(c.gate.tol > 0.0, "gate.tol: must be > 0 rad");
  check(c.gate.max_iterations >= 1, "gate.max_iterations: must be >= 1");
  if (c.gate.bracket)
    check(c.gate.bracket->first >= 0.0 && c.gate.bracket->second > c.gate.bracket->first,
          "gate.bracket: needs 0 <= lo < hi");
  if (c.gate.free_parameter == FreeParameter::L)
    check(c.gate.bracket.has_value(), "gate.bracket: required when free_parameter is L");
  if (c.task == Task::sweep) check(c.sweep.has_value(), "sweep: section required for the sweep task");
  if (c.sweep) {
    check(c.sweep->kappa_count >= 1, "sweep.kappa_count: must be >= 1");
    if (c.sweep->theta0_range)
      check(c.sweep->theta0_range->start >= 0.0, "sweep.theta0_range.start: must be >= 0 rad");
  }
  check(c.exports.mode_count >= 1, "export.mode_count: must be >= 1");
  check(c.threads >= 1, "threads: must be >= 1");
}

RunConfig read_config(const json& root, ParseState& st) {
  RunConfig c;
  Section top(root, "", st);
  const std::string task = top.required_text("task");
  if (!task.empty()) c.task = parse_task(task);
  {
    std::filesystem::path out(top.text_or("output", c.output));
    if (out.is_relative()) out = st.base_dir / out;
    c.output = out.lexically_normal().string();
  }
  c.threads = top.integer_or("threads", c.threads);

  {
    Section wg = top.child("waveguide");
    c.length = wg.required_quantity("length", dims::length);
    c.gamma = wg.quantity_or("gamma", dims::nonlinearity, c.gamma);
    c.geometry = wg.text_or("geometry", "");
    c.dispersion = read_dispersion(wg.child("dispersion"));
    wg.finish();
  }
  {
    Section pumps = top.child("pumps");
    c.pumps.pump1 = read_pump(pumps.child("pump1"));
    c.pumps.pump2 = read_pump(pumps.child("pump2"));
    c.pumps.relative_phase = pumps.quantity_or("relative_phase", dims::angle, 0.0);
    pumps.finish();
  }
  {
    Section sig = top.child("signals");
    const std::string placement = sig.text_or("placement", "nondegenerate");
    if (placement == "nondegenerate") {
      c.signals.placement = SignalPlacement::nondegenerate;
    } else if (placement == "degenerate") {
      c.signals.placement = SignalPlacement::degenerate;
    } else if (placement == "explicit") {
      c.signals.placement = SignalPlacement::explicit_centres;
      c.signals.centre3 = required_omega(sig, "center3");
      c.signals.centre4 = required_omega(sig, "center4");
    } else {
      throw ConfigError(sig.key_path("placement") +
                        ": expected \"nondegenerate\", \"degenerate\" or \"explicit\"");
    }
    sig.finish();
  }
  {
    Section pm = top.child("phase_mismatch");
    const std::string conv = pm.text_or("convention", "standard");
    if (conv == "standard") {
      c.mismatch.convention = MismatchConvention::standard;
    } else if (conv == "negated") {
      c.mismatch.convention = MismatchConvention::negated;
    } else {
      throw ConfigError(pm.key_path("convention") + ": expected \"standard\" or \"negated\"");
    }
    pm.finish();
  }
  {
    Section grid = top.child("grid");
    c.grid.points = grid.integer_or("points", c.grid.points);
    c.grid.span_factor = grid.number_or("span_factor", c.grid.span_factor);
    if (const json* b = grid.get("bands")) {
      Section bands(*b, grid.key_path("bands"), st);
      c.grid.bands = FrequencyGrid{read_band(bands.child("band3")), read_band(bands.child("band4"))};
      bands.finish();
    }
    grid.finish();
  }
  {
    Section q = top.child("quadrature");
    c.quadrature.nodes = q.integer_or("nodes", c.quadrature.nodes);
    c.quadrature.half_width_sigmas = q.number_or("half_width_sigmas", c.quadrature.half_width_sigmas);
    q.finish();
  }
  {
    Section s = top.child("schmidt");
    c.threshold = s.number_or("threshold", c.threshold);
    s.finish();
  }
  {
    Section in = top.child("input");
    const std::string band = in.text_or("band", "signal3");
    if (band == "signal3") {
      c.input.policy.band = Band::signal3;
    } else if (band == "signal4") {
      c.input.policy.band = Band::signal4;
    } else {
      throw ConfigError(in.key_path("band") + ": expected \"signal3\" or \"signal4\"");
    }
    c.input.policy.sigma = in.quantity("sigma", dims::angular_frequency);
    if (const json* centre = in.get("center"); centre && !(centre->is_string() && *centre == "centroid")) {
      c.input.policy.centre = to_omega(*centre, in.key_path("center"));
    } else if (!centre) {
      st.defaults.push_back(in.key_path("center"));
    }
    if (const json* s = in.get("search")) {
      Section ss(*s, in.key_path("search"), st);
      BandwidthSearch b;
      b.lo = ss.required_quantity("lo", dims::angular_frequency);
      b.hi = ss.required_quantity("hi", dims::angular_frequency);
      b.rel_tol = ss.number_or("rel_tol", b.rel_tol);
      ss.finish();
      c.input.search = b;
    } else {
      st.defaults.push_back(in.key_path("search"));
    }
    in.finish();
  }
  {
    Section g = top.child("gate");
    c.gate.target.kind = parse_gate_kind(g.text_or("kind", "X"));
    c.gate.target.n = g.integer_or("n", 0);
    c.gate.free_parameter = parse_free_parameter(g.text_or("free_parameter", "P1"));
    if (const json* b = g.get("bracket"); b && !(b->is_string() && *b == "auto")) {
      if (!b->is_array() || b->size() != 2) throw ConfigError(g.key_path("bracket") + ": expected [lo, hi] or \"auto\"");
      const Dimension d = free_parameter_dimension(c.gate.free_parameter);
      c.gate.bracket = std::pair{g.to_si((*b)[0], g.key_path("bracket") + "[0]", d),
                                 g.to_si((*b)[1], g.key_path("bracket") + "[1]", d)};
    } else if (!b) {
      st.defaults.push_back(g.key_path("bracket"));
    }
    c.gate.tol = g.quantity_or("tol", dims::angle, c.gate.tol);
    const std::string method = g.text_or("method", "closed_form");
    if (method == "closed_form") {
      c.gate.method = SolveMethod::closed_form;
    } else if (method == "iterative") {
      c.gate.method = SolveMethod::iterative;
    } else {
      throw ConfigError(g.key_path("method") + ": expected \"closed_form\" or \"iterative\"");
    }
    c.gate.max_iterations = g.integer_or("max_iterations", c.gate.max_iterations);
    g.finish();
  }
  if (const json* s = top.get("sweep")) c.sweep = read_sweep(Section(*s, "sweep", st));
  {
    Section e = top.child("export");
    c.exports.mode_count = e.integer_or("mode_count", c.exports.mode_count);
    c.exports.kernel_dump = e.flag_or("kernel_dump", c.exports.kernel_dump);
    e.finish();
  }
  top.finish();
  return c;
}

json parse_override_value(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error&) {
    return text;
  }
}

void apply_override(json& root, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigError("--set \"" + assignment + "\": expected key=value");
  const std::string key = assignment.substr(0, eq);
  json* node = &root;
  std::size_t start = 0;
  for (;;) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw ConfigError("--set \"" + assignment + "\": empty key segment");
    if (node->is_array()) {
      std::size_t idx = 0;
      try {
        idx = std::stoul(part);
      } catch (const std::exception&) {
        throw ConfigError("--set \"" + assignment + "\": '" + part + "' is not a list index");
      }
      if (idx >= node->size()) throw ConfigError("--set \"" + assignment + "\": index out of range");
      node = &(*node)[idx];
    } else {
      if (node->is_null()) *node = json::object();
      if (!node->is_object())
        throw ConfigError("--set \"" + assignment + "\": '" + part + "' is below a non-object value");
      node = &(*node)[part];
    }
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  *node = parse_override_value(assignment.substr(eq + 1));
}

std::string si(double v, const Dimension& d) { return format_quantity(v, d); }

ojson window_json(const Window& w) {
  return ojson::array({si(w.lo, dims::angular_frequency), si(w.hi, dims::angular_frequency)});
}

ojson pump_json(const Pump& p) {
  ojson j;
  j["center"] = si(p.omega0, dims::angular_frequency);
  j["bandwidth"] = si(p.sigma, dims::angular_frequency);
  j["power"] = si(p.power, dims::power);
  j["rep_rate"] = si(p.rep_rate, dims::frequency);
  return j;
}

ojson band_json(const BandGrid& g) {
  ojson j;
  j["min"] = si(g.omega_min, dims::angular_frequency);
  j["max"] = si(g.omega_max, dims::angular_frequency);
  j["points"] = g.points;
  return j;
}

}  // namespace

LoadedConfig parse_config_text(const std::string& text, const std::filesystem::path& base_dir,
                               const std::vector<std::string>& overrides) {
  json root;
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) {
    root = json::object();
  } else {
    try {
      root = json::parse(text, nullptr, true, true);
    } catch (const json::parse_error& e) {
      throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
  }
  if (!root.is_object()) throw ConfigError("config: top level must be a JSON object");
  for (const auto& o : overrides) apply_override(root, o);

  ParseState st;
  st.base_dir = base_dir;
  LoadedConfig out;
  out.config = read_config(root, st);
  if (!st.missing.empty()) {
    std::string msg = "missing required fields:";
    for (const auto& m : st.missing) msg += "\n  " + m;
    throw ConfigError(msg);
  }
  validate(out.config);
  out.applied_defaults = std::move(st.defaults);
  out.overrides = overrides;
  return out;
}

LoadedConfig parse_config(const std::filesystem::path& path,
                          const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  const auto base = std::filesystem::absolute(path).parent_path();
  return parse_config_text(buf.str(), base, overrides);
}

std::string serialize_config(const RunConfig& c) {
  ojson j;
  j["task"] = to_string(c.task);
  j["output"] = c.output;
  j["threads"] = c.threads;

  ojson disp;
  disp["kind"] = c.dispersion.kind == DispersionKind::sellmeier_effective ? "sellmeier" : "polynomial";
  disp["file"] = c.dispersion.file;
  if (c.dispersion.kind == DispersionKind::polynomial_expansion) {
    ojson ex;
    for (Band b : kBands) {
      const auto& t = c.dispersion.expansions[band_index(b)];
      ojson e;
      e["omega_ref"] = si(t.omega_ref, dims::angular_frequency);
      e["beta"] = ojson::array();
      for (std::size_t m = 0; m < t.beta.size(); ++m)
        e["beta"].push_back(si(t.beta[m], beta_dimension(static_cast<int>(m))));
      ex[std::string(band_name(b))] = e;
    }
    disp["expansions"] = ex;
  }
  if (c.dispersion.windows) {
    ojson ws;
    for (Band b : kBands) ws[std::string(band_name(b))] = window_json((*c.dispersion.windows)[band_index(b)]);
    disp["windows"] = ws;
  }
  disp["window_sigmas"] = c.dispersion.window_sigmas;

  ojson& wg = j["waveguide"];
  wg["length"] = si(c.length, dims::length);
  wg["gamma"] = si(c.gamma, dims::nonlinearity);
  wg["geometry"] = c.geometry;
  wg["dispersion"] = disp;

  ojson& pumps = j["pumps"];
  pumps["pump1"] = pump_json(c.pumps.pump1);
  pumps["pump2"] = pump_json(c.pumps.pump2);
  pumps["relative_phase"] = si(c.pumps.relative_phase, dims::angle);

  ojson& sig = j["signals"];
  sig["placement"] = placement_name(c.signals.placement);
  if (c.signals.placement == SignalPlacement::explicit_centres) {
    sig["center3"] = si(c.signals.centre3, dims::angular_frequency);
    sig["center4"] = si(c.signals.centre4, dims::angular_frequency);
  }

  j["phase_mismatch"]["convention"] =
      c.mismatch.convention == MismatchConvention::standard ? "standard" : "negated";

  ojson& grid = j["grid"];
  grid["points"] = c.grid.points;
  grid["span_factor"] = c.grid.span_factor;
  if (c.grid.bands) {
    grid["bands"]["band3"] = band_json(c.grid.bands->band3);
    grid["bands"]["band4"] = band_json(c.grid.bands->band4);
  }

  j["quadrature"]["nodes"] = c.quadrature.nodes;
  j["quadrature"]["half_width_sigmas"] = c.quadrature.half_width_sigmas;
  j["schmidt"]["threshold"] = c.threshold;

  ojson& in = j["input"];
  in["band"] = std::string(band_name(c.input.policy.band));
  if (c.input.policy.sigma) in["sigma"] = si(*c.input.policy.sigma, dims::angular_frequency);
  in["center"] = c.input.policy.centre ? ojson(si(*c.input.policy.centre, dims::angular_frequency))
                                       : ojson("centroid");
  if (c.input.search) {
    in["search"]["lo"] = si(c.input.search->lo, dims::angular_frequency);
    in["search"]["hi"] = si(c.input.search->hi, dims::angular_frequency);
    in["search"]["rel_tol"] = c.input.search->rel_tol;
  }

  ojson& g = j["gate"];
  g["kind"] = to_string(c.gate.target.kind);
  g["n"] = c.gate.target.n;
  g["free_parameter"] = to_string(c.gate.free_parameter);
  if (c.gate.bracket) {
    const Dimension d = free_parameter_dimension(c.gate.free_parameter);
    g["bracket"] = ojson::array({si(c.gate.bracket->first, d), si(c.gate.bracket->second, d)});
  } else {
    g["bracket"] = "auto";
  }
  g["tol"] = si(c.gate.tol, dims::angle);
  g["method"] = c.gate.method == SolveMethod::closed_form ? "closed_form" : "iterative";
  g["max_iterations"] = c.gate.max_iterations;

  if (c.sweep) {
    ojson& s = j["sweep"];
    s["parameter"] = to_string(c.sweep->parameter);
    if (c.sweep->theta0_range) {
      s["theta0_range"]["start"] = si(c.sweep->theta0_range->start, dims::angle);
      s["theta0_range"]["stop"] = si(c.sweep->theta0_range->stop, dims::angle);
      s["theta0_range"]["count"] = c.sweep->theta0_range->count;
    } else {
      s["values"] = ojson::array();
      for (double v : c.sweep->values) s["values"].push_back(si(v, swept_dimension(c.sweep->parameter)));
    }
    s["optimize_sigma_in"] = c.sweep->optimize_sigma_in;
    s["observables"] = ojson::array();
    for (auto o : c.sweep->observables) s["observables"].push_back(to_string(o));
    s["kappa_count"] = c.sweep->kappa_count;
  }

  j["export"]["mode_count"] = c.exports.mode_count;
  j["export"]["kernel_dump"] = c.exports.kernel_dump;
  return j.dump(2) + "\n";
}

ConversionSetup make_setup(const RunConfig& c) {
  ConversionSetup s;
  s.pumps = c.pumps;
  s.mismatch = c.mismatch;
  s.quadrature = c.quadrature;
  s.waveguide.length = c.length;
  s.waveguide.gamma = c.gamma;
  s.waveguide.geometry_label = c.geometry;

  const auto& d = c.dispersion;
  SellmeierData data;
  if (d.kind == DispersionKind::sellmeier_effective) {
    data = d.file.rfind("builtin:", 0) == 0 ? builtin_sellmeier(d.file.substr(8)) : load_sellmeier(d.file);
  }
  auto model_with = [&](const std::array<Window, 4>& w) {
    return d.kind == DispersionKind::sellmeier_effective
               ? DispersionModel::sellmeier(data, w, d.file)
               : DispersionModel::polynomial(d.expansions, w, "polynomial");
  };

  double c3 = c.signals.centre3, c4 = c.signals.centre4;
  if (c.signals.placement != SignalPlacement::explicit_centres) {
    std::array<Window, 4> search{};
    if (d.windows) {
      search = *d.windows;
    } else if (d.kind == DispersionKind::sellmeier_effective) {
      const double light = s.constants.c;
      const Window wide{2.0 * kPi * light / (data.lambda_max_um * 1e-6),
                        2.0 * kPi * light / (data.lambda_min_um * 1e-6)};
      search = {wide, wide, wide, wide};
    } else {
      throw ConfigError(
          "signals: phase-matched placement with a polynomial model needs waveguide.dispersion.windows");
    }
    const bool want_degenerate = c.signals.placement == SignalPlacement::degenerate;
    bool found = false;
    for (const auto& r : phase_matched_centres(model_with(search), c.mismatch, c.pumps)) {
      if (r.degenerate == want_degenerate) {
        c3 = r.omega3;
        c4 = r.omega4;
        found = true;
        break;
      }
    }
    if (!found && want_degenerate) {
      // Energy conservation alone places the degenerate pair on the pumps.
      c3 = c.pumps.pump2.omega0;
      c4 = c.pumps.pump1.omega0;
      found = true;
    }
    if (!found)
      throw DomainError("signals: no " + placement_name(c.signals.placement) +
                        " phase-matched centres inside the dispersion windows");
  }

  const auto windows = d.windows ? *d.windows : default_windows(c.pumps, c3, c4, d.window_sigmas);
  s.waveguide.dispersion = model_with(windows);
  s.grid = c.grid.bands ? *c.grid.bands
                        : grid_auto(c.pumps, s.waveguide, c3, c4, c.grid.span_factor, c.grid.points);
  return s;
}

}  // namespace tmq
