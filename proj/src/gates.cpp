#include "tmq/gates.hpp"

#include <algorithm>
#include <cmath>

#include "tmq/errors.hpp"
#include "tmq/numerics.hpp"

namespace tmq {

namespace {

constexpr cplx kI{0.0, 1.0};

RotationAngles with_phase(const RotationAngles& a, double phase) {
  RotationAngles out = a;
  out.phase = phase;
  for (std::size_t j = 0; j < out.theta.size(); ++j)
    out.theta[j] = std::polar(static_cast<double>(a.magnitude[static_cast<Eigen::Index>(j)]), phase);
  return out;
}

double& parameter_ref(ConversionSetup& s, FreeParameter p) {
  switch (p) {
    case FreeParameter::P1: return s.pumps.pump1.power;
    case FreeParameter::P2: return s.pumps.pump2.power;
    case FreeParameter::L: return s.waveguide.length;
  }
  throw DomainError("unknown free parameter");
}

}  // namespace

Analysis analyze(const ConversionSetup& setup, double threshold, int threads) {
  FcmKernel kernel = build_kernel(setup, threads);
  SchmidtDecomposition modes = decompose(kernel, threshold);
  return {std::move(kernel), std::move(modes)};
}

GateContext GateContext::build(ConversionSetup setup, double threshold, int threads) {
  GateContext ctx;
  ctx.analysis = std::make_shared<const Analysis>(analyze(setup, threshold, threads));
  ctx.setup = std::move(setup);
  ctx.threshold = threshold;
  ctx.threads = threads;
  return ctx;
}

GateContext GateContext::with_setup(ConversionSetup other) const {
  if (analysis && same_map(setup, other)) {
    GateContext ctx = *this;
    ctx.setup = std::move(other);
    return ctx;
  }
  return build(std::move(other), threshold, threads);
}

RotationAngles GateContext::angles() const {
  const cplx xi = coupling_strength(setup.pumps, setup.waveguide, setup.constants);
  return rotation_angles(analysis->modes, xi, analysis->kernel.norm_const, setup.constants);
}

double GateTarget::target_angle() const {
  if (n < 0) throw DomainError("gate target: n must be non-negative");
  return (2 * n + 1) * kPi / 2.0;
}

double GateTarget::required_phase() const { return kind == GateKind::Y ? kPi / 2.0 : 0.0; }

std::string to_string(GateKind kind) {
  switch (kind) {
    case GateKind::X: return "X";
    case GateKind::Y: return "Y";
    case GateKind::ZComposed: return "Z";
  }
  return "?";
}

GateKind parse_gate_kind(const std::string& text) {
  if (text == "X") return GateKind::X;
  if (text == "Y") return GateKind::Y;
  if (text == "Z" || text == "Z-composed") return GateKind::ZComposed;
  throw ConfigError("unknown gate kind '" + text + "' (expected X, Y or Z)");
}

std::string to_string(FreeParameter p) {
  switch (p) {
    case FreeParameter::P1: return "P1";
    case FreeParameter::P2: return "P2";
    case FreeParameter::L: return "L";
  }
  return "?";
}

FreeParameter parse_free_parameter(const std::string& text) {
  if (text == "P1") return FreeParameter::P1;
  if (text == "P2") return FreeParameter::P2;
  if (text == "L") return FreeParameter::L;
  throw ConfigError("unknown free parameter '" + text + "' (expected P1, P2 or L)");
}

double theta0_of_power(double p1, const GateContext& ctx) {
  if (!(p1 >= 0.0)) throw DomainError("theta0_of_power: power must be >= 0");
  return theta0_of_parameter(FreeParameter::P1, p1, ctx);
}

double theta0_of_parameter(FreeParameter p, double value, const GateContext& ctx) {
  ConversionSetup s = ctx.setup;
  parameter_ref(s, p) = value;
  if (p == FreeParameter::L) return ctx.with_setup(std::move(s)).angles().magnitude[0];
  const cplx xi = coupling_strength(s.pumps, s.waveguide, s.constants);
  const auto& a = *ctx.analysis;
  return rotation_angles(a.modes, xi, a.kernel.norm_const, s.constants).magnitude[0];
}

GateSolveResult solve_gate(const GateTarget& target, FreeParameter free_parameter,
                           std::pair<double, double> bracket, double tol, const GateContext& ctx,
                           SolveMethod method, int max_iterations) {
  if (!(tol > 0.0)) throw DomainError("solve_gate: tolerance must be > 0");
  auto [lo, hi] = bracket;
  if (!(lo >= 0.0 && hi > lo)) throw DomainError("solve_gate: bracket must satisfy 0 <= lo < hi");
  if (free_parameter == FreeParameter::L && !(lo > 0.0))
    throw DomainError("solve_gate: length bracket must be positive");
  const double goal = target.target_angle();
  auto f = [&](double v) { return theta0_of_parameter(free_parameter, v, ctx) - goal; };

  const double flo = f(lo), fhi = f(hi);
  if ((flo > 0.0) == (fhi > 0.0) && flo != 0.0 && fhi != 0.0)
    throw BracketError("solve_gate: Theta_0 does not cross " + std::to_string(goal) +
                       " rad on [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");

  GateSolveResult r;
  r.parameter = free_parameter;
  r.bracket = bracket;
  r.relative_phase = target.required_phase();

  if (method == SolveMethod::closed_form && free_parameter != FreeParameter::L) {
    // Theta_0 grows as sqrt(P): P* = P_ref (goal / Theta_0(P_ref))^2.
    ConversionSetup probe = ctx.setup;
    double ref = parameter_ref(probe, free_parameter);
    if (!(ref > 0.0)) ref = hi;
    const double theta_ref = theta0_of_parameter(free_parameter, ref, ctx);
    if (!(theta_ref > 0.0)) throw DegenerateKernelError("solve_gate: Theta_0 vanishes at reference");
    const double ratio = goal / theta_ref;
    r.value = ref * ratio * ratio;
    r.iterations = 1;
    r.method = SolveMethod::closed_form;
  } else {
    const auto root = find_root(f, lo, hi, flo, fhi, 0.0, tol, max_iterations);
    if (!root.converged)
      throw ConvergenceError("solve_gate: no convergence within " +
                                 std::to_string(max_iterations) + " iterations",
                             root.x, root.iterations);
    r.value = root.x;
    r.iterations = root.iterations;
    r.method = SolveMethod::iterative;
  }

  r.theta0 = theta0_of_parameter(free_parameter, r.value, ctx);
  r.deviation = std::abs(r.theta0 - goal);
  if (r.deviation > tol)
    throw ConvergenceError("solve_gate: solution misses the target by " +
                               std::to_string(r.deviation) + " rad",
                           r.value, r.iterations);
  r.solved = ctx.setup;
  parameter_ref(r.solved, free_parameter) = r.value;
  r.solved.pumps.relative_phase = r.relative_phase;
  return r;
}

Qubit pauli(GateKind kind, const Qubit& q) {
  switch (kind) {
    case GateKind::X: return {q.y, q.x};
    case GateKind::Y: return {-kI * q.y, kI * q.x};
    case GateKind::ZComposed: return {q.x, -q.y};
  }
  return q;
}

GateDeviation gate_deviation(const TmState& input, const GateTarget& target,
                             const SchmidtDecomposition& dec, const RotationAngles& angles) {
  const auto in = project(input, dec);
  const Qubit q_in{in.lambda3[0], in.lambda4[0]};
  if (!(q_in.norm_squared() > 1e-14))
    throw DomainError("gate_deviation: input has no weight on the fundamental pair");

  TmState out = target.kind == GateKind::ZComposed
                    ? evolve(evolve(input, dec, with_phase(angles, 0.0)), dec,
                             with_phase(angles, kPi / 2.0))
                    : evolve(input, dec, angles);
  const auto c = project(out, dec);
  const Qubit q_out{c.lambda3[0], c.lambda4[0]};
  const Qubit ideal = pauli(target.kind, q_in);
  const cplx overlap = std::conj(ideal.x) * q_out.x + std::conj(ideal.y) * q_out.y;
  const double denom = ideal.norm_squared() * q_out.norm_squared();
  return {std::max(0.0, 1.0 - std::norm(overlap) / denom), std::arg(overlap)};
}

GateDeviation gate_deviation(const TmState& input, const GateTarget& target,
                             const GateContext& ctx, const GateSolveResult& solved) {
  const GateContext realised = ctx.with_setup(solved.solved);
  return gate_deviation(input, target, realised.analysis->modes, realised.angles());
}

}  // namespace tmq
