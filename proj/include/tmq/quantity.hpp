#pragma once

#include <array>
#include <string>
#include <string_view>

namespace tmq {

// Exponents over (m, s, kg, cycle, angle). Angles and cycles are tracked as
// dimensions so that rad/s, Hz and 1/s cannot be confused in a config file.
struct Dimension {
  std::array<int, 5> exp{};

  Dimension operator*(const Dimension& o) const;
  Dimension operator/(const Dimension& o) const;
  Dimension pow(int p) const;
  bool operator==(const Dimension&) const = default;
};

namespace dims {
inline constexpr Dimension none{};
inline constexpr Dimension length{{1, 0, 0, 0, 0}};
inline constexpr Dimension time{{0, 1, 0, 0, 0}};
inline constexpr Dimension angle{{0, 0, 0, 0, 1}};
inline constexpr Dimension angular_frequency{{0, -1, 0, 0, 1}};
inline constexpr Dimension frequency{{0, -1, 0, 1, 0}};
inline constexpr Dimension power{{2, -3, 1, 0, 0}};
inline constexpr Dimension nonlinearity{{-3, 3, -1, 0, 0}};  // 1/(W m)
}  // namespace dims

// SI factor and dimension of a unit expression.
struct Unit {
  double scale = 1.0;
  Dimension dim;
};

// Grammar: products and quotients of atoms, '^' integer powers, parentheses,
// '*' or whitespace for multiplication. A leading "/" or "1/" inverts the
// rest. Atoms are m, s, g, W, J, Hz, rad, deg, each with an optional SI
// prefix (T G M k c m u µ n p f).
Unit parse_unit(std::string_view text);

struct Quantity {
  double value = 0.0;  // SI
  Dimension dim;
};

// "<number> <unit>", e.g. "1.55 um", "0.3e12 rad/s", "1 /(W m)".
// A bare number is rejected: every physical quantity needs a unit.
Quantity parse_quantity(std::string_view text);

// Canonical spelling used when writing configs.
std::string unit_symbol(const Dimension& dim);
std::string format_quantity(double value, const Dimension& dim);

}  // namespace tmq
