#include "tmq/schmidt.hpp"

#include <algorithm>
#include <numeric>

#include "tmq/errors.hpp"

namespace tmq {

namespace {

// Relative width of a kappa tie and of the argmax tolerance in the phase
// convention.
constexpr double kTieTolerance = 1e-12;

// Reorders pairs inside groups of (numerically) equal kappa by descending
// overlap with a Gaussian at the band-3 centre; stable otherwise.
// Pairs with equal kappa are only defined up to a joint unitary rotation of
// the group. Each group is rotated so its first mode carries the whole
// overlap with a Gaussian at the band-3 centre; the rest are orthogonal to it.
void break_ties(SchmidtDecomposition& dec) {
  const int r = dec.rank();
  if (r < 2) return;
  const BandGrid& b3 = dec.grid.band3;
  const double width = (b3.omega_max - b3.omega_min) / 8.0;
  Eigen::VectorXcd probe(b3.points);
  for (int i = 0; i < b3.points; ++i) {
    const double x = (b3.at(i) - b3.centre()) / width;
    probe[i] = std::exp(-x * x) * b3.spacing();
  }

  int start = 0;
  while (start < r) {
    int end = start + 1;
    while (end < r && dec.kappa[start] - dec.kappa[end] <= kTieTolerance * dec.kappa[0]) ++end;
    const int g = end - start;
    if (g > 1) {
      const Eigen::VectorXcd c = dec.modes3.middleCols(start, g).adjoint() * probe;
      if (c.norm() > 0.0) {
        Eigen::HouseholderQR<Eigen::MatrixXcd> qr(c);
        Eigen::MatrixXcd rot = qr.householderQ();
        rot.col(0) = c / c.norm();
        // Columns 1.. of the Householder Q already span the complement of c.
        dec.modes3.middleCols(start, g) = dec.modes3.middleCols(start, g) * rot;
        dec.modes4.middleCols(start, g) = dec.modes4.middleCols(start, g) * rot;
        const double mean = dec.kappa.segment(start, g).mean();
        dec.kappa.segment(start, g).setConstant(mean);
      }
    }
    start = end;
  }
}

}  // namespace

void apply_phase_convention(SchmidtDecomposition& dec) {
  for (int j = 0; j < dec.rank(); ++j) {
    auto col = dec.modes3.col(j);
    const double peak = col.cwiseAbs().maxCoeff();
    Eigen::Index at = 0;
    while (std::abs(col[at]) < peak * (1.0 - kTieTolerance)) ++at;
    const double arg = std::arg(col[at]);
    if (arg == 0.0) continue;
    const cplx rot = std::polar(1.0, -arg);
    col *= rot;
    dec.modes4.col(j) *= rot;
    col[at] = cplx(std::abs(col[at]), 0.0);
  }
}

SchmidtDecomposition decompose(const FcmKernel& kernel, double threshold) {
  if (!(threshold >= 0.0 && threshold < 1.0))
    throw DomainError("decompose: threshold must lie in [0, 1)");
  const auto& grid = kernel.grid;
  const double sw3 = std::sqrt(grid.band3.spacing());
  const double sw4 = std::sqrt(grid.band4.spacing());

  const Eigen::MatrixXcd scaled = kernel.values * (sw3 * sw4);
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(scaled, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& s = svd.singularValues();

  int keep = 0;
  double dropped = 0.0;
  for (Eigen::Index j = 0; j < s.size(); ++j) {
    const double kappa = s[j] * s[j];
    if (kappa > threshold || threshold == 0.0)
      ++keep;
    else
      dropped += kappa;
  }
  if (keep == 0 || !(s[0] > 0.0))
    throw DegenerateKernelError("decompose: kernel is numerically rank zero");

  SchmidtDecomposition dec;
  dec.grid = grid;
  dec.kappa = s.head(keep).array().square();
  dec.modes3 = svd.matrixU().leftCols(keep) / sw3;
  dec.modes4 = svd.matrixV().leftCols(keep) / sw4;
  dec.dropped_mass = dropped;
  break_ties(dec);
  apply_phase_convention(dec);
  return dec;
}

Eigen::MatrixXcd reconstruct(const SchmidtDecomposition& dec) {
  return dec.modes3 * dec.kappa.array().sqrt().matrix().asDiagonal() * dec.modes4.adjoint();
}

double schmidt_number(const SchmidtDecomposition& dec) {
  const double sum = dec.kappa.sum();
  return sum * sum / dec.kappa.squaredNorm();
}

double weighted_frobenius_distance(const FrequencyGrid& grid, const Eigen::MatrixXcd& a,
                                   const Eigen::MatrixXcd& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw DomainError("weighted_frobenius_distance: shape mismatch");
  return (a - b).norm() * std::sqrt(grid.band3.spacing() * grid.band4.spacing());
}

RotationAngles rotation_angles(const SchmidtDecomposition& dec, cplx xi_bar, double norm_const,
                               const PhysicalConstants& constants) {
  RotationAngles a;
  const int r = dec.rank();
  a.theta.resize(r);
  a.magnitude.resize(r);
  const double scale = 2.0 * kPi / (norm_const * constants.hbar);
  const double mag = std::abs(xi_bar);
  for (int j = 0; j < r; ++j) {
    const double root = std::sqrt(dec.kappa[j]);
    a.theta[j] = xi_bar * (scale * root);
    a.magnitude[j] = mag * scale * root;
  }
  a.phase = std::arg(xi_bar);
  return a;
}

RotationAngles rotation_angles(const SchmidtDecomposition& dec, const FcmKernel& kernel,
                               const PhysicalConstants& constants) {
  return rotation_angles(dec, kernel.xi_bar, kernel.norm_const, constants);
}

}  // namespace tmq
