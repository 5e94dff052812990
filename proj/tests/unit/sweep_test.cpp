#include <gtest/gtest.h>

#include "../common/fixtures.hpp"
#include "tmq/errors.hpp"

using namespace tmq;
using namespace tmq::testing;

namespace {

struct PairFixture {
  FrequencyGrid grid = toy_grid(160, 160);
  double width = 0.2 * 10e12;  // amplitude width of the Hermite-Gauss fundamental
  SchmidtDecomposition dec = decompose(pair_kernel(grid, {1.0}));
};

bool same_records(const std::vector<SweepRecord>& a, const std::vector<SweepRecord>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].value != b[i].value || a[i].observables != b[i].observables ||
        a[i].failures != b[i].failures || a[i].error != b[i].error)
      return false;
  }
  return true;
}

SweepPlan reference_plan(SweptParameter swept, std::vector<double> values) {
  SweepPlan plan;
  plan.swept = swept;
  plan.values = std::move(values);
  plan.fixed = reference_setup(0.01, 96, 257);
  plan.input.sigma = 2e12;
  plan.outputs = {Observable::fidelity, Observable::kappa, Observable::theta0, Observable::deviation,
                  Observable::schmidt_number};
  return plan;
}

}  // namespace

TEST(OptimizeBandwidth, SelfMatchOnGaussianPair) {
  PairFixture f;
  const auto opt = optimize_bandwidth(f.dec, make_angles({0.8}, 0.0), {}, {f.width / 10.0, f.width * 10.0, 1e-3});
  EXPECT_NEAR(opt.sigma / f.width, 1.0, 5e-3);
  EXPECT_NEAR(opt.fidelity, 1.0, 1e-6);
  EXPECT_FALSE(opt.hit_bound);
  EXPECT_NEAR(opt.centre, f.grid.band3.centre(), 1e-9 * opt.centre);
}

TEST(OptimizeBandwidth, BeatsEveryProbePoint) {
  PairFixture f;
  const auto angles = make_angles({0.8}, 0.0);
  const BandwidthSearch search{f.width / 10.0, f.width * 10.0, 1e-3};
  const auto opt = optimize_bandwidth(f.dec, angles, {}, search);
  InputPolicy centred;
  centred.centre = opt.centre;
  for (int i = 0; i < 16; ++i) {
    const double s = search.lo * std::pow(search.hi / search.lo, i / 15.0);
    EXPECT_GE(opt.fidelity, preparation_fidelity(f.dec, angles, centred, s) - 1e-12);
  }
}

TEST(OptimizeBandwidth, AgreesWithDenseProbeOnRandomKernels) {
  std::mt19937_64 rng(31);
  const auto grid = toy_grid(128, 128);
  for (int trial = 0; trial < 5; ++trial) {
    const auto dec = decompose(random_smooth_kernel(grid, 3, rng));
    const auto angles = make_angles(std::vector<double>(dec.rank(), 0.6), 0.2);
    const BandwidthSearch search{3e11, 1e13, 1e-3};
    const auto opt = optimize_bandwidth(dec, angles, {}, search);
    InputPolicy centred;
    centred.centre = opt.centre;
    double best = -1.0, best_sigma = 0.0;
    const double lo = opt.lo_effective;
    for (int i = 0; i < 64; ++i) {
      const double s = lo * std::pow(search.hi / lo, i / 63.0);
      const double fv = preparation_fidelity(dec, angles, centred, s);
      if (fv > best) best = fv, best_sigma = s;
    }
    const double step = std::log(search.hi / lo) / 63.0;
    EXPECT_GE(opt.fidelity, best - 1e-9) << "trial " << trial;
    EXPECT_LE(std::abs(std::log(opt.sigma / best_sigma)), step + 1e-3) << "trial " << trial;
  }
}

TEST(OptimizeBandwidth, FlagsBoundInsteadOfThrowing) {
  PairFixture f;
  const auto opt = optimize_bandwidth(f.dec, make_angles({0.3}, 0.0), {}, {f.width / 10.0, f.width / 3.0, 1e-3});
  EXPECT_TRUE(opt.hit_bound);
  EXPECT_NEAR(opt.sigma, f.width / 3.0, 2e-3 * f.width);
}

TEST(OptimizeBandwidth, ClampsLowerBoundToGridResolution) {
  PairFixture f;
  const auto opt = optimize_bandwidth(f.dec, make_angles({0.3}, 0.0), {}, {1.0, f.width * 10.0, 1e-3});
  EXPECT_EQ(opt.lo_effective, min_resolvable_sigma(f.grid.band3));
  EXPECT_NO_THROW(gaussian_input(f.grid, Band::signal3, f.grid.band3.centre(), opt.lo_effective));
  EXPECT_THROW(optimize_bandwidth(f.dec, make_angles({0.3}, 0.0), {}, {1.0, 2.0, 1e-3}), ResolutionError);
  EXPECT_THROW(optimize_bandwidth(f.dec, make_angles({0.3}, 0.0), {}, {2.0, 1.0, 1e-3}), DomainError);
}

TEST(OptimizeBandwidth, ContextOverloadRebuildsAtLength) {
  const auto ctx = GateContext::build(reference_setup(0.01, 96, 257));
  const auto search = default_bandwidth_search(ctx.setup.pumps);
  const auto a = optimize_bandwidth(ctx, 0.01, search);
  const auto b = optimize_bandwidth(ctx.analysis->modes, ctx.angles(), {}, search);
  EXPECT_EQ(a.sigma, b.sigma);
  EXPECT_EQ(a.fidelity, b.fidelity);
  const auto c = optimize_bandwidth(ctx, 0.005, search);
  EXPECT_NE(c.fidelity, a.fidelity);
}

TEST(SweepPlan, Validation) {
  auto plan = reference_plan(SweptParameter::L, {0.005, 0.01});
  EXPECT_NO_THROW(plan.validate());
  plan.values = {};
  EXPECT_THROW(plan.validate(), ConfigError);
  plan.values = {0.005, 0.01, 0.01};
  EXPECT_THROW(plan.validate(), ConfigError);
  plan.values = {0.01, 0.005, 0.02};
  EXPECT_THROW(plan.validate(), ConfigError);
  plan.values = {0.02, 0.01};
  EXPECT_NO_THROW(plan.validate());
  plan.values = {-0.01, 0.01};
  EXPECT_THROW(plan.validate(), ConfigError);
  plan.values = {0.01};
  plan.optimize = BandwidthSearch{2.0, 1.0, 1e-3};
  EXPECT_THROW(plan.validate(), ConfigError);
  plan.optimize.reset();
  plan.input.sigma.reset();
  EXPECT_THROW(plan.validate(), ConfigError);
  plan.outputs = {Observable::optimal_sigma_in};
  EXPECT_THROW(plan.validate(), ConfigError);
  EXPECT_THROW(run_sweep(plan), ConfigError);
}

TEST(RunSweep, DeterministicAcrossThreadCounts) {
  const auto plan = reference_plan(SweptParameter::L, {0.004, 0.006, 0.008, 0.012});
  const auto a = run_sweep(plan, 1);
  const auto b = run_sweep(plan, 3);
  const auto c = run_sweep(plan, 1);
  EXPECT_TRUE(same_records(a, b));
  EXPECT_TRUE(same_records(a, c));
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].value, plan.values[i]);
    EXPECT_TRUE(a[i].error.empty());
    EXPECT_EQ(a[i].observables.size(), observable_columns(plan).size());
  }
}

TEST(RunSweep, PowerSweepSharesOneDecomposition) {
  auto plan = reference_plan(SweptParameter::P1, {1e-5, 4e-5, 9e-5});
  const auto r = run_sweep(plan, 2);
  ASSERT_EQ(r.size(), 3u);
  EXPECT_EQ(*r[0].find("kappa_0"), *r[2].find("kappa_0"));
  EXPECT_NEAR(*r[1].find("theta0") / *r[0].find("theta0"), 2.0, 1e-14);
  EXPECT_NEAR(*r[2].find("theta0") / *r[0].find("theta0"), 3.0, 1e-14);
}

TEST(RunSweep, FailuresStayWithTheirPoint) {
  auto plan = reference_plan(SweptParameter::sigma_in, {1e9, 1e12, 2e12});
  plan.outputs = {Observable::fidelity, Observable::theta0};
  const auto r = run_sweep(plan, 2);
  ASSERT_EQ(r.size(), 3u);
  // 1e9 rad/s is far below the grid spacing: fidelity fails, theta0 survives.
  ASSERT_EQ(r[0].failures.size(), 1u);
  EXPECT_EQ(r[0].failures[0].first, "fidelity");
  EXPECT_NE(r[0].failures[0].second.find("grid points"), std::string::npos);
  EXPECT_NE(r[0].find("theta0"), nullptr);
  auto single = plan;
  single.values = {1e12, 2e12};
  const auto s = run_sweep(single, 1);
  EXPECT_EQ(r[1].observables, s[0].observables);
  EXPECT_EQ(r[2].observables, s[1].observables);
}

TEST(RunSweep, PointLevelErrorsAreRecordedNotThrown) {
  // omega2 nodes outside the pump-2 window fail the map itself.
  auto plan = reference_plan(SweptParameter::L, {0.005, 0.01});
  plan.fixed.quadrature.half_width_sigmas = 40.0;
  const auto r = run_sweep(plan, 1);
  for (const auto& rec : r) {
    EXPECT_FALSE(rec.error.empty());
    EXPECT_TRUE(rec.observables.empty());
  }
}

TEST(RunSweep, OptimisedSweepReportsSigmaAndDiagnostics) {
  auto plan = reference_plan(SweptParameter::L, {0.005, 0.02});
  plan.optimize = default_bandwidth_search(plan.fixed.pumps);
  plan.outputs = {Observable::fidelity, Observable::optimal_sigma_in};
  const auto r = run_sweep(plan, 1);
  for (const auto& rec : r) {
    ASSERT_TRUE(rec.error.empty()) << rec.error;
    EXPECT_GT(*rec.find("optimal_sigma_in"), 0.0);
    EXPECT_GT(rec.diagnostics.optimizer_iterations, 5);
    EXPECT_EQ(rec.diagnostics.grid3, 96);
    EXPECT_NEAR(rec.diagnostics.kappa_retained, 1.0, 1e-8);
  }
  EXPECT_GT(*r[0].find("fidelity"), *r[1].find("fidelity"));
}

// Regression values on the default reference grid (512 points, 1025 nodes), bulk
// Si3N4 index, gamma = 1 /(W m).
TEST(OptimizeBandwidth, ReferenceConfigRegressionAtOneCentimetre) {
  const auto ctx = GateContext::build(reference_setup(0.01));
  const auto opt = optimize_bandwidth(ctx.analysis->modes, ctx.angles(), {}, default_bandwidth_search(ctx.setup.pumps));
  EXPECT_NEAR(opt.fidelity, 0.491675, 5e-6);
  EXPECT_NEAR(opt.sigma, 1.699e12, 0.01e12);
  EXPECT_NEAR(ctx.analysis->modes.kappa[0], 0.522092, 5e-6);
  EXPECT_FALSE(opt.hit_bound);
}
