#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tmq/gates.hpp"

namespace tmq {

// How the Gaussian probe photon is placed. Without an explicit centre it sits
// on the amplitude-weighted centroid of the fundamental mode of its band.
struct InputPolicy {
  Band band = Band::signal3;
  std::optional<double> centre;  // rad/s
  std::optional<double> sigma;   // rad/s, used when not optimised or swept

  bool operator==(const InputPolicy&) const = default;
};

struct BandwidthSearch {
  double lo = 0.0;  // rad/s
  double hi = 0.0;
  double rel_tol = 1e-3;

  bool operator==(const BandwidthSearch&) const = default;
};

// Default bracket [sigma1/30, 30 sigma1].
BandwidthSearch default_bandwidth_search(const PumpPair& pumps);

struct BandwidthOptimum {
  double sigma = 0.0;
  double fidelity = 0.0;
  double centre = 0.0;
  int iterations = 0;
  bool hit_bound = false;     // optimum on an end of the (effective) bracket
  double lo_effective = 0.0;  // lower end after the grid-resolution clamp
};

// Smallest sigma_in that gaussian_input accepts on this band grid.
double min_resolvable_sigma(const BandGrid& grid);

double input_centre(const SchmidtDecomposition& dec, const InputPolicy& policy);

// Preparation fidelity of a Gaussian photon of width sigma: the photon is
// evolved through the map and compared with the ideal fundamental-pair qubit
// obtained from |0> (band 3) or |1> (band 4).
double preparation_fidelity(const SchmidtDecomposition& dec, const RotationAngles& angles,
                            const InputPolicy& policy, double sigma);

// Golden-section search on log(sigma) maximising preparation_fidelity.
BandwidthOptimum optimize_bandwidth(const SchmidtDecomposition& dec, const RotationAngles& angles,
                                    const InputPolicy& policy, const BandwidthSearch& search);

// Builds the map for the context's setup with length L, then optimises.
BandwidthOptimum optimize_bandwidth(const GateContext& ctx, double length,
                                    const BandwidthSearch& search, const InputPolicy& policy = {});

enum class SweptParameter { L, sigma_in, P1, P2 };
enum class Observable { fidelity, kappa, theta0, deviation, optimal_sigma_in, schmidt_number };

std::string to_string(SweptParameter p);
SweptParameter parse_swept_parameter(const std::string& text);
std::string to_string(Observable o);
Observable parse_observable(const std::string& text);

struct SweepPlan {
  SweptParameter swept = SweptParameter::L;
  std::vector<double> values;                // SI units
  std::optional<BandwidthSearch> optimize;   // inner sigma_in optimisation
  ConversionSetup fixed;
  double threshold = kDefaultSchmidtThreshold;
  InputPolicy input;
  GateTarget gate;
  std::vector<Observable> outputs;
  int kappa_count = 4;

  void validate() const;
};

struct SweepDiagnostics {
  int grid3 = 0;
  int grid4 = 0;
  int rank = 0;
  double kappa_retained = 0.0;
  int optimizer_iterations = 0;
  bool bound_hit = false;
};

struct SweepRecord {
  double value = 0.0;
  std::vector<std::pair<std::string, double>> observables;  // in column order
  std::vector<std::pair<std::string, std::string>> failures;
  SweepDiagnostics diagnostics;
  std::string error;  // point-level failure; empty on success

  const double* find(const std::string& column) const;
};

// Column names after the swept value, in output order.
std::vector<std::string> observable_columns(const SweepPlan& plan);

// Evaluates every point (up to `threads` at a time). Maps are cached so
// points that only change pump power share one decomposition. Records come
// back in plan order and do not depend on the thread count.
std::vector<SweepRecord> run_sweep(const SweepPlan& plan, int threads = 1);

}  // namespace tmq
