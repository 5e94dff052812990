#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "tmq/constants.hpp"

namespace tmq {

// The four interacting fields: two classical pumps and the two single-photon
// signal bands that exchange the photon.
enum class Band : int { pump1 = 1, pump2 = 2, signal3 = 3, signal4 = 4 };

inline constexpr std::array<Band, 4> kAllBands = {Band::pump1, Band::pump2, Band::signal3,
                                                  Band::signal4};

inline std::size_t band_index(Band b) { return static_cast<std::size_t>(b) - 1; }
std::string_view band_name(Band b);

// Closed angular-frequency interval [lo, hi] in rad/s.
struct Window {
  double lo = 0.0;
  double hi = 0.0;
  bool contains(double omega) const { return omega >= lo && omega <= hi; }
  bool operator==(const Window&) const = default;
};

// n^2 = 1 + sum_i B_i lambda^2 / (lambda^2 - C_i), lambda in micrometres.
struct SellmeierData {
  std::string name;
  std::string version;
  std::string source;
  std::vector<double> b;  // dimensionless
  std::vector<double> c;  // um^2
  double lambda_min_um = 0.0;
  double lambda_max_um = 0.0;

  double index(double lambda_um) const;
  bool operator==(const SellmeierData&) const = default;
};

// Plain-text "key = value" format, '#' comments. Required keys: B1.., C1..,
// lambda_min_um, lambda_max_um. Optional: name, version, source.
SellmeierData parse_sellmeier(std::istream& in);
SellmeierData load_sellmeier(const std::filesystem::path& path);

// Data files compiled into the library, addressed as "builtin:<name>".
// Currently only "si3n4-bulk".
std::vector<std::string> builtin_sellmeier_names();
SellmeierData builtin_sellmeier(const std::string& name);

// k(omega) = sum_m beta[m] (omega - omega_ref)^m / m!, beta[m] in s^m/m.
struct TaylorExpansion {
  double omega_ref = 0.0;
  std::vector<double> beta;

  double operator()(double omega) const;
  bool operator==(const TaylorExpansion&) const = default;
};

enum class DispersionKind { sellmeier_effective, polynomial_expansion };

std::string_view to_string(DispersionKind kind);

// Propagation constants k(omega) per band. Immutable once built; every
// evaluation checks the band's validity window and never extrapolates.
class DispersionModel {
 public:
  static DispersionModel sellmeier(SellmeierData data, std::array<Window, 4> windows,
                                   std::string label = {}, PhysicalConstants constants = {});
  static DispersionModel polynomial(std::array<TaylorExpansion, 4> bands,
                                    std::array<Window, 4> windows, std::string label = {},
                                    PhysicalConstants constants = {});

  // Same physics, different validity windows.
  DispersionModel with_windows(std::array<Window, 4> windows) const;

  DispersionKind kind() const { return kind_; }
  const std::string& label() const { return label_; }
  const Window& window(Band b) const { return windows_[band_index(b)]; }
  const std::array<Window, 4>& windows() const { return windows_; }
  const SellmeierData& sellmeier_data() const { return sellmeier_; }
  const TaylorExpansion& expansion(Band b) const { return taylor_[band_index(b)]; }
  double speed_of_light() const { return c_; }

  // rad/m. Throws DomainError outside the band window.
  double propagation_constant(Band b, double omega) const;
  // Effective index n = k c / omega; must be positive.
  double refractive_index(Band b, double omega) const;

  bool operator==(const DispersionModel&) const = default;

 private:
  DispersionKind kind_ = DispersionKind::polynomial_expansion;
  std::string label_;
  std::array<Window, 4> windows_{};
  SellmeierData sellmeier_;
  std::array<TaylorExpansion, 4> taylor_{};
  double c_ = PhysicalConstants{}.c;
};

inline double propagation_constant(const DispersionModel& model, Band b, double omega) {
  return model.propagation_constant(b, omega);
}

enum class MismatchConvention { standard, negated };

// standard: dk = k1(w1) + k3(w3) - k2(w2) - k4(w4) with w1 = w2 - w3 + w4.
struct PhaseMismatchSpec {
  MismatchConvention convention = MismatchConvention::standard;
  double sign() const { return convention == MismatchConvention::standard ? 1.0 : -1.0; }
  bool operator==(const PhaseMismatchSpec&) const = default;
};

// Pump-1 frequency closing energy conservation w1 + w3 = w2 + w4.
inline double idler_pump_frequency(double w2, double w3, double w4) { return w2 - w3 + w4; }

double phase_mismatch(const DispersionModel& model, const PhaseMismatchSpec& spec, double w2,
                      double w3, double w4);

}  // namespace tmq
