#include <gtest/gtest.h>

#include <unsupported/Eigen/MatrixFunctions>

#include "../common/fixtures.hpp"
#include "tmq/errors.hpp"

using namespace tmq;
using namespace tmq::testing;

namespace {

constexpr cplx kI{0.0, 1.0};

// Dense exp(-i H) on the weighted grid vector (sqrt(w3) a3, sqrt(w4) a4) with
// H = sum_j conj(theta_j)|phi_j><psi_j| + theta_j |psi_j><phi_j|.
TmState oracle_evolve(const TmState& in, const SchmidtDecomposition& dec, const RotationAngles& a) {
  const int n3 = dec.grid.band3.points, n4 = dec.grid.band4.points;
  const double s3 = std::sqrt(dec.grid.band3.spacing()), s4 = std::sqrt(dec.grid.band4.spacing());
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(n3 + n4, n3 + n4);
  for (int j = 0; j < dec.rank(); ++j) {
    const Eigen::VectorXcd u = dec.modes3.col(j) * s3;
    const Eigen::VectorXcd v = dec.modes4.col(j) * s4;
    h.block(0, n3, n3, n4) += std::conj(a.theta[j]) * u * v.adjoint();
    h.block(n3, 0, n4, n3) += a.theta[j] * v * u.adjoint();
  }
  const Eigen::MatrixXcd u = (-kI * h).exp();
  Eigen::VectorXcd x(n3 + n4);
  x << in.amp3 * s3, in.amp4 * s4;
  const Eigen::VectorXcd y = u * x;
  TmState out = TmState::zero(dec.grid);
  out.amp3 = y.head(n3) / s3;
  out.amp4 = y.tail(n4) / s4;
  return out;
}

double max_diff(const TmState& a, const TmState& b) {
  return std::max((a.amp3 - b.amp3).cwiseAbs().maxCoeff(), (a.amp4 - b.amp4).cwiseAbs().maxCoeff());
}

double max_amp(const TmState& a) {
  return std::max(a.amp3.cwiseAbs().maxCoeff(), a.amp4.cwiseAbs().maxCoeff());
}

}  // namespace

TEST(GaussianInput, NormalisedOnGrid) {
  const auto grid = toy_grid(200, 180);
  const auto s = gaussian_input(grid, Band::signal3, grid.band3.centre(), 1e12);
  EXPECT_NEAR(s.norm_squared(), 1.0, 1e-10);
  EXPECT_EQ(s.amp4.cwiseAbs().maxCoeff(), 0.0);
}

TEST(GaussianInput, ContinuumAmplitudeHasUnitNorm) {
  const auto grid = toy_grid(400, 16);
  const auto& b = grid.band3;
  double sum = 0.0;
  for (int i = 0; i < b.points; ++i) {
    const double f = gaussian_amplitude(b.at(i), b.centre(), 1e12);
    sum += f * f * b.spacing();
  }
  EXPECT_NEAR(sum, 1.0, 1e-6);
}

TEST(GaussianInput, ShiftedOverlapIsAnalytic) {
  const double sigma = 0.8e12;
  const auto grid = toy_grid(400, 16, 2e15, 1e15, 8e12);
  const double c = grid.band3.centre();
  const auto a = gaussian_input(grid, Band::signal3, c - 1.5 * sigma, sigma);
  const auto b = gaussian_input(grid, Band::signal3, c + 1.5 * sigma, sigma);
  EXPECT_NEAR(inner(a, b).real(), std::exp(-4.5), 1e-6);
}

TEST(GaussianInput, RejectsUnresolvedAndMisplacedInputs) {
  const auto grid = toy_grid(64, 64);
  const double dw = grid.band4.spacing();
  EXPECT_THROW(gaussian_input(grid, Band::signal4, grid.band4.centre(), 1.5 * dw), ResolutionError);
  EXPECT_NO_THROW(gaussian_input(grid, Band::signal4, grid.band4.centre(), 2.0 * dw));
  EXPECT_THROW(gaussian_input(grid, Band::signal3, grid.band3.omega_max + 1e12, 1e12), DomainError);
  EXPECT_THROW(gaussian_input(grid, Band::signal3, grid.band3.centre(), 0.0), DomainError);
}

TEST(Project, FundamentalModeAndOrthogonalState) {
  const auto grid = toy_grid(60, 60);
  const auto dec = decompose(pair_kernel(grid, {0.6, 0.3, 0.1}));
  TmState s = TmState::zero(grid);
  s.amp3 = dec.modes3.col(0);
  auto c = project(s, dec);
  EXPECT_NEAR(std::abs(c.lambda3[0] - 1.0), 0.0, 1e-8);
  EXPECT_NEAR(c.lambda3.tail(2).norm(), 0.0, 1e-8);
  EXPECT_NEAR(c.residual3, 0.0, 1e-8);

  // A high-order Hermite-Gauss function is orthogonal to the retained span.
  const auto hg = hermite_gauss(grid.band4, 5, grid.band4.centre(), 0.2 * 10e12);
  TmState o = TmState::zero(grid);
  o.amp4 = hg.col(4);
  c = project(o, dec);
  EXPECT_NEAR(c.lambda4.norm(), 0.0, 1e-8);
  EXPECT_NEAR(c.residual4, 1.0, 1e-8);
}

TEST(Project, CoefficientsPlusResidualGiveNorm) {
  std::mt19937_64 rng(8);
  const auto grid = toy_grid(40, 44);
  const auto dec = decompose(random_smooth_kernel(grid, 4, rng));
  for (int t = 0; t < 5; ++t) {
    const auto s = random_state(grid, rng);
    const auto c = project(s, dec);
    EXPECT_NEAR(c.lambda3.squaredNorm() + c.residual3, s.amp3.squaredNorm() * grid.band3.spacing(), 1e-8);
    EXPECT_NEAR(c.lambda4.squaredNorm() + c.residual4, s.amp4.squaredNorm() * grid.band4.spacing(), 1e-8);
  }
}

TEST(Evolve, ZeroAnglesAreBitExactIdentity) {
  std::mt19937_64 rng(1);
  const auto grid = toy_grid(32, 32);
  const auto dec = decompose(random_smooth_kernel(grid, 3, rng));
  const auto s = random_state(grid, rng);
  const auto out = evolve(s, dec, make_angles(std::vector<double>(dec.rank(), 0.0), 0.7));
  EXPECT_TRUE(out.amp3 == s.amp3);
  EXPECT_TRUE(out.amp4 == s.amp4);
}

TEST(Evolve, FullConversionOnSinglePair) {
  const auto grid = toy_grid(48, 48);
  const auto dec = decompose(pair_kernel(grid, {1.0}));
  TmState s = TmState::zero(grid);
  s.amp3 = dec.modes3.col(0);
  const auto out = evolve(s, dec, make_angles({kPi / 2.0}, 0.0));
  const Eigen::VectorXcd expected = -kI * dec.modes4.col(0);
  EXPECT_LT((out.amp4 - expected).cwiseAbs().maxCoeff(), 1e-10 * expected.cwiseAbs().maxCoeff());
  EXPECT_LT(out.amp3.cwiseAbs().maxCoeff(), 1e-10 * expected.cwiseAbs().maxCoeff());
}

TEST(Evolve, MatchesMatrixExponentialOracle) {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto grid = toy_grid(20, 18);
  // Two-pair kernel from the constructed example, then random rank <= 3 kernels.
  std::vector<FcmKernel> kernels{pair_kernel(grid, {0.8, 0.2})};
  for (int r = 1; r <= 3; ++r) kernels.push_back(random_smooth_kernel(grid, r, rng));
  for (const auto& k : kernels) {
    const auto dec = decompose(k, 1e-6);
    ASSERT_LE(dec.rank(), 3);
    std::vector<double> mags;
    for (int j = 0; j < dec.rank(); ++j) mags.push_back(3.0 * u(rng) * std::sqrt(dec.kappa[j]));
    const auto angles = make_angles(mags, 2.0 * kPi * u(rng));
    for (int t = 0; t < 10; ++t) {
      const auto s = random_state(grid, rng);
      const auto real = evolve(s, dec, angles);
      const auto oracle = oracle_evolve(s, dec, angles);
      EXPECT_LT(max_diff(real, oracle), 1e-8 * max_amp(oracle));
    }
  }
}

TEST(Evolve, UnitaryAndLinear) {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    const auto grid = toy_grid(36, 30);
    const auto dec = decompose(random_smooth_kernel(grid, 4, rng));
    std::vector<double> mags;
    for (int j = 0; j < dec.rank(); ++j) mags.push_back(4.0 * u(rng));
    const auto angles = make_angles(mags, u(rng) * 6.0);
    const auto s = random_state(grid, rng);
    const auto t = random_state(grid, rng);
    EXPECT_NEAR(evolve(s, dec, angles).norm_squared(), 1.0, 1e-10);
    const cplx alpha{0.3, -1.2}, beta{-0.7, 0.4};
    const auto lhs = evolve(alpha * s + beta * t, dec, angles);
    const auto rhs = alpha * evolve(s, dec, angles) + beta * evolve(t, dec, angles);
    EXPECT_LT(max_diff(lhs, rhs), 1e-10 * max_amp(rhs));
  }
}

TEST(Evolve, PairsDoNotMix) {
  const auto grid = toy_grid(40, 40);
  const auto dec = decompose(pair_kernel(grid, {0.5, 0.3, 0.2}));
  TmState s = TmState::zero(grid);
  s.amp3 = 0.6 * dec.modes3.col(0) + 0.8 * dec.modes3.col(2);
  const auto out = evolve(s, dec, make_angles({0.9, 1.3, 0.4}, 0.3));
  const auto c = project(out, dec);
  EXPECT_LT(std::abs(c.lambda3[1]), 1e-12);
  EXPECT_LT(std::abs(c.lambda4[1]), 1e-12);
}

TEST(IdealQubit, ClosedFormRotations) {
  auto q = ideal_qubit_output({1.0, 0.0}, 0.0, 0.0);
  EXPECT_EQ(q.x, cplx(1.0, 0.0));
  EXPECT_EQ(q.y, cplx(0.0, 0.0));

  q = ideal_qubit_output({1.0, 0.0}, kPi / 4.0, 0.0);
  EXPECT_NEAR(std::abs(q.x - std::cos(kPi / 4.0)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(q.y - (-kI * std::sin(kPi / 4.0))), 0.0, 1e-15);

  const auto once = ideal_qubit_output({1.0, 0.0}, kPi / 2.0, 0.0);
  const auto twice = ideal_qubit_output(once, kPi / 2.0, 0.0);
  EXPECT_NEAR(std::abs(twice.x - cplx(-1.0, 0.0)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(twice.y), 0.0, 1e-15);

  EXPECT_THROW(ideal_qubit_output({1.0, 1.0}, 0.1, 0.0), DomainError);
}

TEST(Fidelity, IdealAndOrthogonalOutputs) {
  const auto grid = toy_grid(40, 40);
  const auto dec = decompose(pair_kernel(grid, {0.7, 0.3}));
  const Qubit ideal{cplx(0.6, 0.0), cplx(0.0, 0.8)};
  EXPECT_NEAR(fidelity(embed_fundamental(dec, ideal), dec, ideal), 1.0, 1e-12);
  TmState other = TmState::zero(grid);
  other.amp3 = dec.modes3.col(1);
  other.amp4 = dec.modes4.col(1);
  other *= 1.0 / std::sqrt(2.0);
  EXPECT_NEAR(fidelity(other, dec, ideal), 0.0, 1e-12);
}

TEST(Fidelity, SeparableKernelPreparesExactly) {
  // Scenario iii: the Gaussian input equals phi_0, so every Theta_0 gives F = 1.
  const auto grid = toy_grid(120, 100);
  const auto dec = decompose(pair_kernel(grid, {1.0}));
  const double width = 0.2 * (grid.band3.omega_max - grid.band3.omega_min);
  const auto in = gaussian_input(grid, Band::signal3, grid.band3.centre(), width);
  for (double theta : {0.0, kPi / 8.0, kPi / 4.0, kPi / 2.0, 1.0}) {
    const auto angles = make_angles({theta}, 0.4);
    const auto out = evolve(in, dec, angles);
    EXPECT_NEAR(fidelity(out, dec, ideal_qubit_output({1.0, 0.0}, theta, 0.4)), 1.0, 1e-8);
  }
}

TEST(Fidelity, BoundedForRandomInputs) {
  std::mt19937_64 rng(13);
  const auto grid = toy_grid(30, 30);
  const auto dec = decompose(random_smooth_kernel(grid, 3, rng));
  for (int t = 0; t < 20; ++t) {
    const auto s = random_state(grid, rng);
    const double f = fidelity(s, dec, {cplx(0.6, 0.0), cplx(0.0, 0.8)});
    EXPECT_GE(f, 0.0);
    EXPECT_LE(f, 1.0);
  }
}

TEST(Centroid, SymmetricModeSitsAtBandCentre) {
  const auto grid = toy_grid(64, 64);
  const auto dec = decompose(pair_kernel(grid, {1.0}));
  EXPECT_NEAR(fundamental_centroid(dec), grid.band3.centre(), 1e-9 * grid.band3.centre());
}

TEST(Project, OptimalGaussianOverlapsFundamentalMode) {
  const auto ctx = GateContext::build(reference_setup(0.01));
  const auto& dec = ctx.analysis->modes;
  const auto opt = optimize_bandwidth(dec, ctx.angles(), {}, default_bandwidth_search(ctx.setup.pumps));
  const auto in = gaussian_input(dec.grid, Band::signal3, opt.centre, opt.sigma);
  const double overlap = std::norm(project(in, dec).lambda3[0]);
  // The preparation fidelity is this overlap for every Theta_0.
  EXPECT_NEAR(overlap, opt.fidelity, 1e-12);
  EXPECT_GT(overlap, 0.9) << "sigma* = " << opt.sigma;
}
