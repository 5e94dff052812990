#include "tmq/quantity.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <optional>
#include <utility>

#include "tmq/constants.hpp"
#include "tmq/errors.hpp"

namespace tmq {

Dimension Dimension::operator*(const Dimension& o) const {
  Dimension d;
  for (std::size_t i = 0; i < exp.size(); ++i) d.exp[i] = exp[i] + o.exp[i];
  return d;
}

Dimension Dimension::operator/(const Dimension& o) const {
  Dimension d;
  for (std::size_t i = 0; i < exp.size(); ++i) d.exp[i] = exp[i] - o.exp[i];
  return d;
}

Dimension Dimension::pow(int p) const {
  Dimension d;
  for (std::size_t i = 0; i < exp.size(); ++i) d.exp[i] = exp[i] * p;
  return d;
}

namespace {

struct BaseUnit {
  std::string_view symbol;
  double scale;
  Dimension dim;
};

constexpr BaseUnit kBase[] = {
    {"m", 1.0, dims::length},
    {"s", 1.0, dims::time},
    {"g", 1e-3, {{0, 0, 1, 0, 0}}},
    {"W", 1.0, dims::power},
    {"J", 1.0, {{2, -2, 1, 0, 0}}},
    {"Hz", 1.0, dims::frequency},
    {"rad", 1.0, dims::angle},
    {"deg", kPi / 180.0, dims::angle},
};

constexpr std::pair<std::string_view, double> kPrefix[] = {
    {"T", 1e12}, {"G", 1e9}, {"M", 1e6}, {"k", 1e3}, {"c", 1e-2}, {"m", 1e-3},
    {"u", 1e-6}, {"\xC2\xB5", 1e-6}, {"n", 1e-9}, {"p", 1e-12}, {"f", 1e-15},
};

std::optional<Unit> lookup_atom(std::string_view name) {
  for (const auto& b : kBase)
    if (name == b.symbol) return Unit{b.scale, b.dim};
  for (const auto& [p, f] : kPrefix) {
    if (name.size() <= p.size() || name.substr(0, p.size()) != p) continue;
    const auto rest = name.substr(p.size());
    for (const auto& b : kBase)
      if (rest == b.symbol) return Unit{f * b.scale, b.dim};
  }
  return std::nullopt;
}

class UnitParser {
 public:
  explicit UnitParser(std::string_view text) : s_(text) {}

  Unit parse() {
    skip_space();
    Unit u;
    if (peek() == '/') {
      ++pos_;
      u = rest_of_expression(invert(factor()));
    } else if (peek() == '1' && next_non_space(pos_ + 1) == '/') {
      pos_ = skip_from(pos_ + 1) + 1;
      u = rest_of_expression(invert(factor()));
    } else {
      u = rest_of_expression(factor());
    }
    skip_space();
    if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    return u;
  }

 private:
  std::string_view s_;
  std::size_t pos_ = 0;

  [[noreturn]] void fail(const std::string& why) const {
    throw ConfigError("unit \"" + std::string(s_) + "\": " + why);
  }

  char peek() const { return pos_ < s_.size() ? s_[pos_] : '\0'; }
  std::size_t skip_from(std::size_t p) const {
    while (p < s_.size() && std::isspace(static_cast<unsigned char>(s_[p]))) ++p;
    return p;
  }
  char next_non_space(std::size_t p) const {
    p = skip_from(p);
    return p < s_.size() ? s_[p] : '\0';
  }
  void skip_space() { pos_ = skip_from(pos_); }

  static Unit invert(const Unit& u) { return {1.0 / u.scale, dims::none / u.dim}; }
  static Unit times(const Unit& a, const Unit& b) { return {a.scale * b.scale, a.dim * b.dim}; }

  static bool starts_factor(char c) {
    return c == '(' || std::isalpha(static_cast<unsigned char>(c)) ||
           static_cast<unsigned char>(c) >= 0x80;
  }

  Unit expression() { return rest_of_expression(factor()); }

  Unit rest_of_expression(Unit u) {
    for (;;) {
      skip_space();
      const char c = peek();
      if (c == '*') {
        ++pos_;
        u = times(u, factor());
      } else if (c == '/') {
        ++pos_;
        u = times(u, invert(factor()));
      } else if (starts_factor(c)) {
        u = times(u, factor());
      } else {
        return u;
      }
    }
  }

  Unit factor() {
    skip_space();
    Unit u;
    if (peek() == '(') {
      ++pos_;
      u = expression();
      skip_space();
      if (peek() != ')') fail("missing ')'");
      ++pos_;
    } else {
      const std::size_t start = pos_;
      while (pos_ < s_.size() && (std::isalpha(static_cast<unsigned char>(s_[pos_])) ||
                                  static_cast<unsigned char>(s_[pos_]) >= 0x80))
        ++pos_;
      if (pos_ == start) fail(pos_ < s_.size() ? "expected a unit at '" + std::string(1, s_[pos_]) + "'"
                                               : "expected a unit");
      const auto name = s_.substr(start, pos_ - start);
      const auto atom = lookup_atom(name);
      if (!atom) fail("unknown unit '" + std::string(name) + "'");
      u = *atom;
    }
    skip_space();
    if (peek() == '^') {
      ++pos_;
      skip_space();
      int p = 0;
      const char* first = s_.data() + pos_;
      const char* last = s_.data() + s_.size();
      if (first != last && *first == '+') ++first;
      const auto [ptr, ec] = std::from_chars(first, last, p);
      if (ec != std::errc()) fail("bad exponent");
      pos_ = static_cast<std::size_t>(ptr - s_.data());
      u = {std::pow(u.scale, p), u.dim.pow(p)};
    }
    return u;
  }
};

}  // namespace

Unit parse_unit(std::string_view text) {
  if (text.find_first_not_of(" \t") == std::string_view::npos)
    throw ConfigError("empty unit");
  return UnitParser(text).parse();
}

Quantity parse_quantity(std::string_view text) {
  const auto begin = text.find_first_not_of(" \t");
  if (begin == std::string_view::npos) throw ConfigError("empty quantity");
  text.remove_prefix(begin);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || !std::isfinite(v))
    throw ConfigError("quantity \"" + std::string(text) + "\": expected a number first");
  const std::string_view rest(ptr, text.data() + text.size() - ptr);
  if (rest.find_first_not_of(" \t") == std::string_view::npos)
    throw ConfigError("quantity \"" + std::string(text) + "\": missing unit");
  const Unit u = parse_unit(rest);
  return {v * u.scale, u.dim};
}

std::string unit_symbol(const Dimension& dim) {
  if (dim == dims::none) return "1";
  if (dim == dims::length) return "m";
  if (dim == dims::time) return "s";
  if (dim == dims::angle) return "rad";
  if (dim == dims::angular_frequency) return "rad/s";
  if (dim == dims::frequency) return "Hz";
  if (dim == dims::power) return "W";
  if (dim == dims::nonlinearity) return "1/(W m)";
  static constexpr std::string_view names[] = {"m", "s", "kg", "(Hz s)", "rad"};
  std::string num, den;
  for (std::size_t i = 0; i < dim.exp.size(); ++i) {
    const int e = dim.exp[i];
    if (e == 0) continue;
    std::string& out = e > 0 ? num : den;
    if (!out.empty()) out += ' ';
    out += names[i];
    if (std::abs(e) != 1) out += "^" + std::to_string(std::abs(e));
  }
  if (den.empty()) return num;
  return (num.empty() ? "1" : num) + "/(" + den + ")";
}

std::string format_quantity(double value, const Dimension& dim) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return std::string(buf) + " " + unit_symbol(dim);
}

}  // namespace tmq
