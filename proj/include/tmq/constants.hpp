#pragma once

namespace tmq {

// CODATA 2018 exact / recommended values. Passed by value wherever a
// computation depends on them so tests can rescale individual constants.
struct PhysicalConstants {
  double hbar = 1.054571817e-34;  // J s
  double c = 299792458.0;         // m/s
  bool operator==(const PhysicalConstants&) const = default;
};

inline constexpr double kPi = 3.14159265358979323846;

}  // namespace tmq
