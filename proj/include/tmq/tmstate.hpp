#pragma once

#include <Eigen/Dense>

#include "tmq/schmidt.hpp"

namespace tmq {

// Single photon shared between the two signal bands. Band 3 carries the
// logical |0>, band 4 the logical |1>.
struct TmState {
  FrequencyGrid grid;
  Eigen::VectorXcd amp3;
  Eigen::VectorXcd amp4;

  static TmState zero(const FrequencyGrid& grid);
  double norm_squared() const;
  TmState& operator+=(const TmState& other);
  TmState& operator*=(cplx s);
};

TmState operator+(TmState a, const TmState& b);
TmState operator*(cplx s, TmState a);

// <a|b> under the grid quadrature, summed over both bands.
cplx inner(const TmState& a, const TmState& b);

// Normalised Gaussian amplitude (2/(pi s^2))^(1/4) exp(-(w - w0)^2 / s^2).
double gaussian_amplitude(double omega, double omega0, double sigma);

// Gaussian photon in one signal band, renormalised on the grid; the other
// band is empty. Throws ResolutionError if fewer than 8 samples fall within
// +-2 sigma.
TmState gaussian_input(const FrequencyGrid& grid, Band band, double omega0, double sigma_in);

struct ModeCoefficients {
  Eigen::VectorXcd lambda3;
  Eigen::VectorXcd lambda4;
  double residual3 = 0.0;  // norm^2 outside the retained modes
  double residual4 = 0.0;
};

ModeCoefficients project(const TmState& state, const SchmidtDecomposition& dec);

// Pairwise beam-splitter map in the Schmidt basis:
//   l3' = cos T l3 - i e^{-i phi} sin T l4
//   l4' = -i e^{i phi} sin T l3 + cos T l4
// Components outside the retained modes pass through unchanged.
TmState evolve(const TmState& state, const SchmidtDecomposition& dec,
               const RotationAngles& angles);

// Amplitudes on the fundamental pair: x on phi_0 (band 3), y on psi_0 (band 4).
struct Qubit {
  cplx x{1.0, 0.0};
  cplx y{0.0, 0.0};
  double norm_squared() const { return std::norm(x) + std::norm(y); }
};

// The 2x2 beam-splitter rotation on a normalised qubit.
Qubit ideal_qubit_output(const Qubit& in, double theta0, double phase);

// x phi_0 + y psi_0 on the grid.
TmState embed_fundamental(const SchmidtDecomposition& dec, const Qubit& q);

// |<real|ideal>|^2 with the ideal state embedded on the fundamental pair.
double fidelity(const TmState& real_out, const SchmidtDecomposition& dec, const Qubit& ideal);

// Amplitude-weighted centroid of |phi_0| over the band-3 grid.
double fundamental_centroid(const SchmidtDecomposition& dec);

}  // namespace tmq
