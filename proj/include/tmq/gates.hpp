#pragma once

#include <memory>
#include <string>
#include <utility>

#include "tmq/tmstate.hpp"

namespace tmq {

// Kernel plus its decomposition for one ConversionSetup.
struct Analysis {
  FcmKernel kernel;
  SchmidtDecomposition modes;
};

Analysis analyze(const ConversionSetup& setup, double threshold = kDefaultSchmidtThreshold,
                 int threads = 1);

// Read-only context shared by the gate operations. The decomposition depends
// on pump envelopes and the waveguide, not on pump powers or phase, so power
// changes only rescale xi_bar.
struct GateContext {
  ConversionSetup setup;
  double threshold = kDefaultSchmidtThreshold;
  int threads = 1;
  std::shared_ptr<const Analysis> analysis;

  static GateContext build(ConversionSetup setup, double threshold = kDefaultSchmidtThreshold,
                           int threads = 1);
  // Context for a different setup, reusing the decomposition when only pump
  // powers or the relative phase differ.
  GateContext with_setup(ConversionSetup other) const;
  RotationAngles angles() const;
};

enum class GateKind { X, Y, ZComposed };

struct GateTarget {
  GateKind kind = GateKind::X;
  int n = 0;

  double target_angle() const;    // (2n+1) pi/2
  double required_phase() const;  // 0 for X, pi/2 for Y (first pass of Z is X)
};

std::string to_string(GateKind kind);
GateKind parse_gate_kind(const std::string& text);

enum class FreeParameter { P1, P2, L };

std::string to_string(FreeParameter p);
FreeParameter parse_free_parameter(const std::string& text);

enum class SolveMethod { closed_form, iterative };

struct GateSolveResult {
  FreeParameter parameter = FreeParameter::P1;
  double value = 0.0;
  double theta0 = 0.0;
  double deviation = 0.0;  // |theta0 - target|
  std::pair<double, double> bracket{0.0, 0.0};
  int iterations = 0;
  double relative_phase = 0.0;
  SolveMethod method = SolveMethod::closed_form;
  ConversionSetup solved;  // setup with the solved parameter and phase applied
};

// Theta_0 with pump-1 power replaced by p1; kernel and kappa are reused.
double theta0_of_power(double p1, const GateContext& ctx);

// Theta_0 of an arbitrary setup (rebuilds the kernel when the free parameter
// changes the map, i.e. for L).
double theta0_of_parameter(FreeParameter p, double value, const GateContext& ctx);

GateSolveResult solve_gate(const GateTarget& target, FreeParameter free_parameter,
                           std::pair<double, double> bracket, double tol, const GateContext& ctx,
                           SolveMethod method = SolveMethod::closed_form,
                           int max_iterations = 200);

struct GateDeviation {
  double deviation = 0.0;     // 1 - |<ideal|real>|^2 on the fundamental pair
  double global_phase = 0.0;  // arg <ideal|real>
};

// Evolves `input` with the given angles (two passes, phases 0 then pi/2, for
// Z) and compares the fundamental-pair amplitudes with the exact Pauli action
// up to global phase. Throws DomainError if the input has no weight on the
// fundamental pair.
GateDeviation gate_deviation(const TmState& input, const GateTarget& target,
                             const SchmidtDecomposition& dec, const RotationAngles& angles);

// Same, through the configuration produced by solve_gate.
GateDeviation gate_deviation(const TmState& input, const GateTarget& target,
                             const GateContext& ctx, const GateSolveResult& solved);

// The ideal Pauli action on the fundamental pair (X, Y or Z).
Qubit pauli(GateKind kind, const Qubit& q);

}  // namespace tmq
