#pragma once

#include <random>

#include <Eigen/Dense>

#include "tmq/errors.hpp"
#include "tmq/sweep.hpp"

namespace tmq::testing {

inline constexpr double kLight = 299792458.0;

inline double omega_of_um(double um) { return 2.0 * kPi * kLight / (um * 1e-6); }

// Reference pump parameters.
inline PumpPair reference_pumps() {
  PumpPair p;
  p.pump1 = {omega_of_um(1.55), 0.3e12, 50e-6, 10e6};
  p.pump2 = {omega_of_um(0.77), 10e12, 100e-6, 10e6};
  return p;
}

inline SignalCentres reference_signal_centres(const PumpPair& pumps) {
  const auto data = builtin_sellmeier("si3n4-bulk");
  const Window wide{omega_of_um(data.lambda_max_um), omega_of_um(data.lambda_min_um)};
  const auto model = DispersionModel::sellmeier(data, {wide, wide, wide, wide});
  for (const auto& c : phase_matched_centres(model, {}, pumps))
    if (!c.degenerate) return c;
  throw Error("no non-degenerate phase-matched centres");
}

// Bulk Si3N4 waveguide of length L with the reference pumps, auto grid.
inline ConversionSetup reference_setup(double length, int points = 512, int nodes = 1025) {
  ConversionSetup s;
  s.pumps = reference_pumps();
  const auto c = reference_signal_centres(s.pumps);
  s.waveguide.length = length;
  s.waveguide.gamma = 1.0;
  s.waveguide.dispersion = DispersionModel::sellmeier(builtin_sellmeier("si3n4-bulk"),
                                                      default_windows(s.pumps, c.omega3, c.omega4));
  s.grid = grid_auto(s.pumps, s.waveguide, c.omega3, c.omega4, 4.0, points);
  s.quadrature.nodes = nodes;
  return s;
}

// k = omega / c in every band.
inline DispersionModel vacuum_model(Window all) {
  TaylorExpansion line{0.0, {0.0, 1.0 / kLight}};
  return DispersionModel::polynomial({line, line, line, line}, {all, all, all, all}, "vacuum");
}

inline FrequencyGrid toy_grid(int n3, int n4, double centre3 = 2.0e15, double centre4 = 1.0e15,
                              double half_width = 5.0e12) {
  return {{centre3 - half_width, centre3 + half_width, n3},
          {centre4 - half_width, centre4 + half_width, n4}};
}

// First `count` Hermite-Gauss functions on the band, orthonormalised under
// the grid quadrature. Column 0 is a Gaussian of amplitude width `width`.
inline Eigen::MatrixXcd hermite_gauss(const BandGrid& g, int count, double centre, double width) {
  Eigen::MatrixXd raw(g.points, count);
  for (int i = 0; i < g.points; ++i) {
    const double x = (g.at(i) - centre) / width;
    double h0 = 1.0, h1 = 2.0 * x;
    for (int k = 0; k < count; ++k) {
      double hk = k == 0 ? h0 : h1;
      if (k >= 2) {
        const double h2 = 2.0 * x * h1 - 2.0 * (k - 1) * h0;
        h0 = h1;
        h1 = h2;
        hk = h2;
      }
      raw(i, k) = hk * std::exp(-x * x);
    }
  }
  const double sw = std::sqrt(g.spacing());
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(raw * sw);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(g.points, count);
  for (int k = 0; k < count; ++k)
    if (q.col(k).dot(raw.col(k)) < 0.0) q.col(k) *= -1.0;
  return (q / sw).cast<cplx>();
}

// sum_j sqrt(kappa_j) f_j(w3) conj(g_j(w4)) with Hermite-Gauss modes.
inline FcmKernel pair_kernel(const FrequencyGrid& grid, const std::vector<double>& kappa,
                             double scale = 1.0, cplx xi = {1.0, 0.0}) {
  const int r = static_cast<int>(kappa.size());
  const auto f = hermite_gauss(grid.band3, r, grid.band3.centre(),
                               0.2 * (grid.band3.omega_max - grid.band3.omega_min));
  const auto g = hermite_gauss(grid.band4, r, grid.band4.centre(),
                               0.2 * (grid.band4.omega_max - grid.band4.omega_min));
  Eigen::MatrixXcd v = Eigen::MatrixXcd::Zero(grid.band3.points, grid.band4.points);
  for (int j = 0; j < r; ++j) v += std::sqrt(kappa[j]) * f.col(j) * g.col(j).adjoint();
  return make_kernel(grid, scale * v, xi);
}

// Smooth random kernel of the given rank with a dominant fundamental pair.
inline FcmKernel random_smooth_kernel(const FrequencyGrid& grid, int rank, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const int basis = rank + 2;
  const double w3 = (grid.band3.omega_max - grid.band3.omega_min) * (0.12 + 0.05 * (u(rng) + 1.0));
  const double w4 = (grid.band4.omega_max - grid.band4.omega_min) * (0.12 + 0.05 * (u(rng) + 1.0));
  const auto f = hermite_gauss(grid.band3, basis, grid.band3.centre() + 0.05 * w3 * u(rng), w3);
  const auto g = hermite_gauss(grid.band4, basis, grid.band4.centre() + 0.05 * w4 * u(rng), w4);
  Eigen::MatrixXcd v = Eigen::MatrixXcd::Zero(grid.band3.points, grid.band4.points);
  for (int j = 0; j < rank; ++j) {
    Eigen::VectorXcd a = Eigen::VectorXcd::Zero(basis), b = Eigen::VectorXcd::Zero(basis);
    for (int k = 0; k < basis; ++k) {
      const double damp = k == j ? 1.0 : 0.2;
      a[k] = damp * cplx(u(rng), u(rng));
      b[k] = damp * cplx(u(rng), u(rng));
    }
    v += std::pow(0.5, j) * (f * a) * (g * b).adjoint();
  }
  return make_kernel(grid, v, {u(rng), u(rng)});
}

inline TmState random_state(const FrequencyGrid& grid, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  TmState s = TmState::zero(grid);
  for (int i = 0; i < s.amp3.size(); ++i) s.amp3[i] = {n(rng), n(rng)};
  for (int i = 0; i < s.amp4.size(); ++i) s.amp4[i] = {n(rng), n(rng)};
  s *= 1.0 / std::sqrt(s.norm_squared());
  return s;
}

// Angles with prescribed magnitudes and a common phase.
inline RotationAngles make_angles(const std::vector<double>& magnitude, double phase) {
  RotationAngles a;
  a.magnitude = Eigen::Map<const Eigen::VectorXd>(magnitude.data(), magnitude.size());
  a.phase = phase;
  for (double m : magnitude) a.theta.push_back(std::polar(m, phase));
  return a;
}

}  // namespace tmq::testing
