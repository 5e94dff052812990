#pragma once

#include <vector>

#include <Eigen/Dense>

#include "tmq/fcm.hpp"

namespace tmq {

// G(w3, w4) = sum_j sqrt(kappa_j) phi_j(w3) conj(psi_j(w4)). Columns of
// modes3/modes4 are orthonormal under the grid quadrature.
struct SchmidtDecomposition {
  FrequencyGrid grid;
  Eigen::VectorXd kappa;     // descending
  Eigen::MatrixXcd modes3;   // band-3 grid x rank
  Eigen::MatrixXcd modes4;   // band-4 grid x rank
  double dropped_mass = 0.0; // sum of truncated kappa

  int rank() const { return static_cast<int>(kappa.size()); }
};

inline constexpr double kDefaultSchmidtThreshold = 1e-12;

// Quadrature-weighted SVD of the kernel. Pairs with kappa_j < threshold are
// dropped. Throws DegenerateKernelError when nothing survives.
SchmidtDecomposition decompose(const FcmKernel& kernel,
                               double threshold = kDefaultSchmidtThreshold);

// sum_j sqrt(kappa_j) phi_j psi_j^dagger on the grid.
Eigen::MatrixXcd reconstruct(const SchmidtDecomposition& dec);

// K = (sum kappa)^2 / sum kappa^2.
double schmidt_number(const SchmidtDecomposition& dec);

// Rotates each pair so the largest-magnitude sample of phi_j is real and
// positive (psi_j takes the same phase, leaving G unchanged). Idempotent.
void apply_phase_convention(SchmidtDecomposition& dec);

// sqrt(sum |A - B|^2 w_m w_n)
double weighted_frobenius_distance(const FrequencyGrid& grid, const Eigen::MatrixXcd& a,
                                   const Eigen::MatrixXcd& b);

// theta_j = 2 pi xi_bar sqrt(kappa_j) / (N hbar); magnitude and common phase.
struct RotationAngles {
  std::vector<cplx> theta;
  Eigen::VectorXd magnitude;
  double phase = 0.0;
};

RotationAngles rotation_angles(const SchmidtDecomposition& dec, const FcmKernel& kernel,
                               const PhysicalConstants& constants = {});

// Same, for an arbitrary coupling with the kernel's kappa and N held fixed.
RotationAngles rotation_angles(const SchmidtDecomposition& dec, cplx xi_bar, double norm_const,
                               const PhysicalConstants& constants = {});

}  // namespace tmq
