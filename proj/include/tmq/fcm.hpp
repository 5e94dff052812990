#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tmq/constants.hpp"
#include "tmq/dispersion.hpp"

namespace tmq {

using cplx = std::complex<double>;

struct Pump {
  double omega0 = 0.0;    // rad/s
  double sigma = 0.0;     // rad/s
  double power = 0.0;     // W, average
  double rep_rate = 0.0;  // Hz
  bool operator==(const Pump&) const = default;
};

struct PumpPair {
  Pump pump1;
  Pump pump2;
  double relative_phase = 0.0;  // rad

  void validate() const;
  bool operator==(const PumpPair&) const = default;
};

// Gaussian amplitude envelope exp(-(omega - omega0)^2 / sigma^2); 1 at the centre.
inline double spectral_envelope(const Pump& p, double omega) {
  const double x = (omega - p.omega0) / p.sigma;
  return std::exp(-x * x);
}

struct WaveguideSpec {
  double length = 0.0;  // m
  double gamma = 1.0;   // 1/(W m)
  DispersionModel dispersion;
  std::string geometry_label;

  void validate() const;
  bool operator==(const WaveguideSpec&) const = default;
};

// Uniform cell-centred sampling of [omega_min, omega_max]: sample i sits at
// omega_min + (i + 1/2) * spacing with midpoint weight `spacing`.
struct BandGrid {
  double omega_min = 0.0;
  double omega_max = 0.0;
  int points = 0;

  double spacing() const { return (omega_max - omega_min) / points; }
  double at(int i) const { return omega_min + (i + 0.5) * spacing(); }
  double centre() const { return 0.5 * (omega_min + omega_max); }
  Eigen::VectorXd samples() const;
  Eigen::VectorXd weights() const;
  void validate(std::string_view name) const;
  bool operator==(const BandGrid&) const = default;
};

struct FrequencyGrid {
  BandGrid band3;
  BandGrid band4;

  const BandGrid& band(Band b) const;
  void validate() const;
  bool operator==(const FrequencyGrid&) const = default;
};

// Trapezoid over omega2 in pump2.omega0 +- half_width_sigmas * pump2.sigma.
struct QuadratureSpec {
  int nodes = 1025;
  double half_width_sigmas = 6.0;
  bool operator==(const QuadratureSpec&) const = default;
};

// Everything needed to build a frequency-conversion map.
struct ConversionSetup {
  PumpPair pumps;
  WaveguideSpec waveguide;
  FrequencyGrid grid;
  QuadratureSpec quadrature;
  PhaseMismatchSpec mismatch;
  PhysicalConstants constants;
  bool operator==(const ConversionSetup&) const = default;
};

// True when two setups produce the same normalised map (they may differ in
// pump powers, repetition rates, gamma or relative phase).
bool same_map(const ConversionSetup& a, const ConversionSetup& b);

struct FcmKernel {
  FrequencyGrid grid;
  Eigen::MatrixXcd values;  // rows: band-3 samples, cols: band-4 samples
  cplx xi_bar{0.0, 0.0};    // J s scaled coupling
  double norm_const = 0.0;  // weighted L2 norm before normalisation

  // sum_{m,n} |G|^2 w_m w_n
  double weighted_norm_squared() const;
};

// Literal closed form for the aggregated coupling. Refractive indices are
// taken at the pump centres.
cplx coupling_strength(const PumpPair& pumps, const WaveguideSpec& wg,
                       const PhysicalConstants& constants = {});

// Discretised map G(omega3, omega4), normalised to unit weighted L2 norm.
// Rows are computed independently (threads > 1 splits them) and the norm is
// reduced in fixed order, so the result does not depend on `threads`.
FcmKernel build_kernel(const ConversionSetup& setup, int threads = 1);

// Wraps arbitrary samples as a normalised kernel (constructed test kernels,
// imported maps). Throws DegenerateKernelError for an all-zero matrix.
FcmKernel make_kernel(const FrequencyGrid& grid, Eigen::MatrixXcd values, cplx xi_bar);

// Grid centred on the signal centres with half-width span_factor*(sigma1+sigma2).
FrequencyGrid grid_auto(const PumpPair& pumps, const WaveguideSpec& wg, double centre3,
                        double centre4, double span_factor, int points);

// Default validity windows: +-sigmas*sigma_i around each pump, and
// +-sigmas*(sigma1+sigma2) around each signal centre.
std::array<Window, 4> default_windows(const PumpPair& pumps, double centre3, double centre4,
                                      double sigmas = 10.0);

struct SignalCentres {
  double omega3 = 0.0;
  double omega4 = 0.0;
  bool degenerate = false;  // signals sit on the pump centres
};

// Signal centre pairs with zero mismatch at the pump centres, searched over
// the band-3/4 windows of `model`. Sorted by omega4.
std::vector<SignalCentres> phase_matched_centres(const DispersionModel& model,
                                                 const PhaseMismatchSpec& spec,
                                                 const PumpPair& pumps);

// sin(x)/x with the x -> 0 limit taken by series.
double sinc(double x);

}  // namespace tmq
