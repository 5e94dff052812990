#include <gtest/gtest.h>

#include <fstream>
#include <random>
#include <sstream>

#include "../common/fixtures.hpp"
#include "tmq/errors.hpp"

using namespace tmq;
using namespace tmq::testing;

namespace {

const Window kWide{1e14, 1e16};

DispersionModel constant_model(double k) {
  TaylorExpansion flat{0.0, {k}};
  return DispersionModel::polynomial({flat, flat, flat, flat}, {kWide, kWide, kWide, kWide});
}

}  // namespace

TEST(PropagationConstant, VacuumLineIsOmegaOverC) {
  const auto model = vacuum_model(kWide);
  for (double w : {2e14, 1.2e15, 2.4e15, 9e15})
    for (Band b : kAllBands) EXPECT_NEAR(propagation_constant(model, b, w), w / kLight, 1e-15 * w / kLight);
}

TEST(PropagationConstant, ConstantTermOnly) {
  const auto model = constant_model(5e6);
  for (double w : {2e14, 1e15, 5e15}) EXPECT_EQ(propagation_constant(model, Band::signal4, w), 5e6);
}

TEST(PropagationConstant, PolynomialAtReferenceIsBetaZero) {
  TaylorExpansion t{1.3e15, {7.123456789e6, 6.7e-9, 3.1e-25, -2e-40}};
  const auto model = DispersionModel::polynomial({t, t, t, t}, {kWide, kWide, kWide, kWide});
  EXPECT_EQ(model.propagation_constant(Band::pump2, 1.3e15), 7.123456789e6);
}

TEST(PropagationConstant, SellmeierIndexAt1550nm) {
  // Independent evaluation of the bulk Si3N4 formula at 1.55 um.
  const double expected = 1.9962797317138814;
  const auto data = builtin_sellmeier("si3n4-bulk");
  EXPECT_NEAR(data.index(1.55), expected, 1e-12);
  const double w = omega_of_um(1.55);
  const auto model = DispersionModel::sellmeier(data, {kWide, kWide, kWide, kWide});
  EXPECT_NEAR(model.refractive_index(Band::pump1, w), expected, 1e-12);
  EXPECT_NEAR(model.propagation_constant(Band::pump1, w), expected * w / kLight, 1e-12 * w / kLight);
}

TEST(PropagationConstant, OutsideWindowNamesBandAndWindow) {
  const auto model = vacuum_model({1e15, 2e15});
  try {
    model.propagation_constant(Band::signal3, 2.5e15);
    FAIL() << "expected DomainError";
  } catch (const DomainError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("signal3"), std::string::npos) << msg;
    EXPECT_NE(msg.find("[1e+15, 2e+15]"), std::string::npos) << msg;
  }
  EXPECT_THROW(model.propagation_constant(Band::pump1, 0.5e15), DomainError);
}

TEST(PropagationConstant, SellmeierRefusesWavelengthsOutsideFit) {
  const auto data = builtin_sellmeier("si3n4-bulk");
  const auto model = DispersionModel::sellmeier(data, {kWide, kWide, kWide, kWide});
  EXPECT_THROW(model.propagation_constant(Band::signal4, omega_of_um(6.0)), DomainError);
  EXPECT_THROW(model.propagation_constant(Band::signal3, omega_of_um(0.25)), DomainError);
}

TEST(PhaseMismatch, VacuumLinePhaseMatchesExactly) {
  const auto model = vacuum_model(kWide);
  const double w2 = 2.4e15, w3 = 1.6e15, w4 = 0.4e15;
  const double k = w2 / kLight;
  EXPECT_NEAR(phase_mismatch(model, {}, w2, w3, w4), 0.0, 1e-14 * k);
}

TEST(PhaseMismatch, EqualConstantsCancel) {
  const auto model = constant_model(8.5e6);
  EXPECT_EQ(phase_mismatch(model, {}, 2.4e15, 1.6e15, 0.4e15), 0.0);
}

TEST(PhaseMismatch, MatchesHandSummedPolynomial) {
  const double wr = 1.5e15;
  const std::array<double, 4> b0{1e6, 2e6, 3e6, 4e6};
  const std::array<double, 4> b1{6.6e-9, 6.8e-9, 7.0e-9, 7.3e-9};
  std::array<TaylorExpansion, 4> bands;
  for (int i = 0; i < 4; ++i) bands[i] = {wr, {b0[i], b1[i]}};
  const auto model = DispersionModel::polynomial(bands, {kWide, kWide, kWide, kWide});
  const auto p = reference_pumps();
  const double w2 = p.pump2.omega0, w3 = 1.6457e15, w4 = 4.147e14;
  const double w1 = w2 - w3 + w4;
  auto k = [&](int i, double w) { return b0[i] + b1[i] * (w - wr); };
  const double hand = k(0, w1) + k(2, w3) - k(1, w2) - k(3, w4);
  EXPECT_NEAR(phase_mismatch(model, {}, w2, w3, w4), hand, 1e-9 * std::abs(k(3, w4)));
}

TEST(PhaseMismatch, ConventionFlipNegatesExactly) {
  const auto model = DispersionModel::sellmeier(builtin_sellmeier("si3n4-bulk"),
                                                {kWide, kWide, kWide, kWide});
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> w2d(2.3e15, 2.5e15), w3d(1.5e15, 1.8e15), w4d(4e14, 5e14);
  const PhaseMismatchSpec standard{MismatchConvention::standard};
  const PhaseMismatchSpec negated{MismatchConvention::negated};
  for (int i = 0; i < 100; ++i) {
    const double w2 = w2d(rng), w3 = w3d(rng), w4 = w4d(rng);
    EXPECT_EQ(phase_mismatch(model, negated, w2, w3, w4), -phase_mismatch(model, standard, w2, w3, w4));
  }
}

TEST(PhaseMismatch, IdlerPumpClosesEnergyConservation) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> d(1e14, 3e15);
  for (int i = 0; i < 100; ++i) {
    const double w2 = d(rng) + 3e15, w3 = d(rng), w4 = d(rng);
    const double w1 = idler_pump_frequency(w2, w3, w4);
    EXPECT_NEAR(w1 + w3, w2 + w4, 4e-16 * (w2 + w4));
  }
}

TEST(PhaseMismatch, PropagatesWindowErrors) {
  const auto model = vacuum_model({1e15, 3e15});
  EXPECT_THROW(phase_mismatch(model, {}, 2.4e15, 1.6e15, 0.4e15), DomainError);
}

TEST(Sellmeier, ShippedFileMatchesBuiltin) {
  const auto file = load_sellmeier(std::string(TMQ_SOURCE_DIR) + "/data/si3n4_bulk.sellmeier");
  const auto builtin = builtin_sellmeier("si3n4-bulk");
  EXPECT_EQ(file, builtin);
  EXPECT_EQ(builtin.name, "si3n4-bulk");
  EXPECT_EQ(builtin.b.size(), 2u);
}

TEST(Sellmeier, RejectsMalformedFiles) {
  auto parse = [](const std::string& text) {
    std::istringstream in(text);
    return parse_sellmeier(in);
  };
  const std::string ok = "B1 = 1\nC1 = 0.01\nlambda_min_um = 0.5\nlambda_max_um = 2\n";
  EXPECT_NO_THROW(parse(ok));
  EXPECT_THROW(parse(ok + "D1 = 3\n"), ConfigError);
  EXPECT_THROW(parse(ok + "B1 = 2\n"), ConfigError);
  EXPECT_THROW(parse("B1 = 1\nlambda_min_um = 0.5\nlambda_max_um = 2\n"), ConfigError);
  EXPECT_THROW(parse("B1 = 1\nC1 = 0.01\nlambda_max_um = 2\n"), ConfigError);
  EXPECT_THROW(parse("B1 = one\nC1 = 0.01\nlambda_min_um = 0.5\nlambda_max_um = 2\n"), ConfigError);
  EXPECT_THROW(builtin_sellmeier("silicon"), ConfigError);
  EXPECT_THROW(load_sellmeier("/nonexistent/file.sellmeier"), ConfigError);
}
