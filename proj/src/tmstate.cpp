#include "tmq/tmstate.hpp"

#include <algorithm>

#include "tmq/errors.hpp"

namespace tmq {

namespace {

constexpr cplx kI{0.0, 1.0};

void check_grid(const FrequencyGrid& a, const FrequencyGrid& b, const char* where) {
  if (!(a == b)) throw DomainError(std::string(where) + ": state and modes live on different grids");
}

}  // namespace

TmState TmState::zero(const FrequencyGrid& grid) {
  return {grid, Eigen::VectorXcd::Zero(grid.band3.points), Eigen::VectorXcd::Zero(grid.band4.points)};
}

double TmState::norm_squared() const {
  return amp3.squaredNorm() * grid.band3.spacing() + amp4.squaredNorm() * grid.band4.spacing();
}

TmState& TmState::operator+=(const TmState& other) {
  check_grid(grid, other.grid, "TmState::operator+=");
  amp3 += other.amp3;
  amp4 += other.amp4;
  return *this;
}

TmState& TmState::operator*=(cplx s) {
  amp3 *= s;
  amp4 *= s;
  return *this;
}

TmState operator+(TmState a, const TmState& b) { return a += b; }
TmState operator*(cplx s, TmState a) { return a *= s; }

cplx inner(const TmState& a, const TmState& b) {
  check_grid(a.grid, b.grid, "inner");
  return a.amp3.dot(b.amp3) * a.grid.band3.spacing() + a.amp4.dot(b.amp4) * a.grid.band4.spacing();
}

double gaussian_amplitude(double omega, double omega0, double sigma) {
  const double x = (omega - omega0) / sigma;
  return std::pow(2.0 / (kPi * sigma * sigma), 0.25) * std::exp(-x * x);
}

TmState gaussian_input(const FrequencyGrid& grid, Band band, double omega0, double sigma_in) {
  const BandGrid& bg = grid.band(band);
  if (!(sigma_in > 0.0)) throw DomainError("gaussian_input: sigma_in must be > 0");
  if (omega0 < bg.omega_min || omega0 > bg.omega_max)
    throw DomainError("gaussian_input: centre outside the band window");
  int inside = 0;
  for (int i = 0; i < bg.points; ++i)
    if (std::abs(bg.at(i) - omega0) <= 2.0 * sigma_in) ++inside;
  if (inside < 8)
    throw ResolutionError("gaussian_input: only " + std::to_string(inside) +
                          " grid points within +-2 sigma_in; refine the grid or widen sigma_in");

  TmState s = TmState::zero(grid);
  Eigen::VectorXcd& amp = band == Band::signal3 ? s.amp3 : s.amp4;
  for (int i = 0; i < bg.points; ++i) amp[i] = gaussian_amplitude(bg.at(i), omega0, sigma_in);
  amp /= std::sqrt(amp.squaredNorm() * bg.spacing());
  return s;
}

ModeCoefficients project(const TmState& state, const SchmidtDecomposition& dec) {
  check_grid(state.grid, dec.grid, "project");
  const double w3 = dec.grid.band3.spacing();
  const double w4 = dec.grid.band4.spacing();
  ModeCoefficients c;
  c.lambda3 = dec.modes3.adjoint() * state.amp3 * w3;
  c.lambda4 = dec.modes4.adjoint() * state.amp4 * w4;
  c.residual3 = (state.amp3 - dec.modes3 * c.lambda3).squaredNorm() * w3;
  c.residual4 = (state.amp4 - dec.modes4 * c.lambda4).squaredNorm() * w4;
  return c;
}

TmState evolve(const TmState& state, const SchmidtDecomposition& dec,
               const RotationAngles& angles) {
  if (static_cast<int>(angles.magnitude.size()) != dec.rank())
    throw DomainError("evolve: rotation angles do not match the decomposition rank");
  const ModeCoefficients c = project(state, dec);
  const cplx up = -kI * std::polar(1.0, -angles.phase);   // band 4 -> band 3
  const cplx down = -kI * std::polar(1.0, angles.phase);  // band 3 -> band 4

  // Only the change is re-synthesised so identity rotations are exact.
  Eigen::VectorXcd d3(dec.rank()), d4(dec.rank());
  for (int j = 0; j < dec.rank(); ++j) {
    const double cs = std::cos(angles.magnitude[j]);
    const double sn = std::sin(angles.magnitude[j]);
    const cplx l3 = c.lambda3[j], l4 = c.lambda4[j];
    d3[j] = (cs * l3 + up * sn * l4) - l3;
    d4[j] = (down * sn * l3 + cs * l4) - l4;
  }
  TmState out = state;
  out.amp3 += dec.modes3 * d3;
  out.amp4 += dec.modes4 * d4;
  return out;
}

Qubit ideal_qubit_output(const Qubit& in, double theta0, double phase) {
  if (std::abs(in.norm_squared() - 1.0) > 1e-8)
    throw DomainError("ideal_qubit_output: input qubit is not normalised");
  const double cs = std::cos(theta0), sn = std::sin(theta0);
  return {cs * in.x - kI * std::polar(1.0, -phase) * sn * in.y,
          -kI * std::polar(1.0, phase) * sn * in.x + cs * in.y};
}

TmState embed_fundamental(const SchmidtDecomposition& dec, const Qubit& q) {
  TmState s = TmState::zero(dec.grid);
  s.amp3 = q.x * dec.modes3.col(0);
  s.amp4 = q.y * dec.modes4.col(0);
  return s;
}

double fidelity(const TmState& real_out, const SchmidtDecomposition& dec, const Qubit& ideal) {
  const double f = std::norm(inner(real_out, embed_fundamental(dec, ideal)));
  return std::clamp(f, 0.0, 1.0);
}

double fundamental_centroid(const SchmidtDecomposition& dec) {
  const auto& b3 = dec.grid.band3;
  const Eigen::VectorXd mag = dec.modes3.col(0).cwiseAbs();
  return mag.dot(b3.samples()) / mag.sum();
}

}  // namespace tmq
