#include "tmq/dispersion.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "tmq/errors.hpp"

namespace tmq {

std::string_view band_name(Band b) {
  switch (b) {
    case Band::pump1: return "pump1";
    case Band::pump2: return "pump2";
    case Band::signal3: return "signal3";
    case Band::signal4: return "signal4";
  }
  return "?";
}

std::string_view to_string(DispersionKind kind) {
  return kind == DispersionKind::sellmeier_effective ? "sellmeier-effective"
                                                     : "polynomial-expansion";
}

double SellmeierData::index(double lambda_um) const {
  const double l2 = lambda_um * lambda_um;
  double n2 = 1.0;
  for (std::size_t i = 0; i < b.size(); ++i) n2 += b[i] * l2 / (l2 - c[i]);
  return std::sqrt(n2);
}

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double to_number(const std::string& key, const std::string& text) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || trim(text.substr(used)) != "")
    throw ConfigError("sellmeier: value of '" + key + "' is not a number: " + text);
  return v;
}

}  // namespace

SellmeierData parse_sellmeier(std::istream& in) {
  std::map<std::string, std::string> kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("sellmeier: line " + std::to_string(lineno) + " is not 'key = value'");
    const auto key = trim(line.substr(0, eq));
    if (!kv.emplace(key, trim(line.substr(eq + 1))).second)
      throw ConfigError("sellmeier: duplicate key '" + key + "'");
  }

  SellmeierData d;
  auto take = [&](const std::string& key) -> std::string {
    auto it = kv.find(key);
    if (it == kv.end()) return {};
    auto v = it->second;
    kv.erase(it);
    return v;
  };
  d.name = take("name");
  d.version = take("version");
  d.source = take("source");
  for (int i = 1;; ++i) {
    const auto bk = "B" + std::to_string(i);
    const auto ck = "C" + std::to_string(i);
    const bool has_b = kv.count(bk) != 0;
    const bool has_c = kv.count(ck) != 0;
    if (!has_b && !has_c) break;
    if (has_b != has_c) throw ConfigError("sellmeier: " + bk + " and " + ck + " must both be set");
    d.b.push_back(to_number(bk, take(bk)));
    d.c.push_back(to_number(ck, take(ck)));
  }
  for (const char* key : {"lambda_min_um", "lambda_max_um"})
    if (!kv.count(key)) throw ConfigError(std::string("sellmeier: missing key '") + key + "'");
  d.lambda_min_um = to_number("lambda_min_um", take("lambda_min_um"));
  d.lambda_max_um = to_number("lambda_max_um", take("lambda_max_um"));
  if (!kv.empty()) throw ConfigError("sellmeier: unknown key '" + kv.begin()->first + "'");
  if (d.b.empty()) throw ConfigError("sellmeier: no resonance terms (B1/C1)");
  if (!(d.lambda_min_um > 0.0 && d.lambda_max_um > d.lambda_min_um))
    throw ConfigError("sellmeier: invalid wavelength range");
  return d;
}

SellmeierData load_sellmeier(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open sellmeier file " + path.string());
  return parse_sellmeier(in);
}

double TaylorExpansion::operator()(double omega) const {
  if (beta.empty()) return 0.0;
  const double x = omega - omega_ref;
  // Horner form of sum beta_m x^m / m!
  double k = beta.back();
  for (std::size_t m = beta.size() - 1; m-- > 0;) k = beta[m] + k * x / static_cast<double>(m + 1);
  return k;
}

DispersionModel DispersionModel::sellmeier(SellmeierData data, std::array<Window, 4> windows,
                                           std::string label, PhysicalConstants constants) {
  DispersionModel m;
  m.kind_ = DispersionKind::sellmeier_effective;
  m.sellmeier_ = std::move(data);
  m.windows_ = windows;
  m.label_ = std::move(label);
  m.c_ = constants.c;
  return m;
}

DispersionModel DispersionModel::polynomial(std::array<TaylorExpansion, 4> bands,
                                            std::array<Window, 4> windows, std::string label,
                                            PhysicalConstants constants) {
  DispersionModel m;
  m.kind_ = DispersionKind::polynomial_expansion;
  m.taylor_ = std::move(bands);
  m.windows_ = windows;
  m.label_ = std::move(label);
  m.c_ = constants.c;
  return m;
}

DispersionModel DispersionModel::with_windows(std::array<Window, 4> windows) const {
  DispersionModel m = *this;
  m.windows_ = windows;
  return m;
}

double DispersionModel::propagation_constant(Band b, double omega) const {
  const Window& w = window(b);
  if (!w.contains(omega)) {
    std::ostringstream msg;
    msg.precision(10);
    msg << "dispersion: omega = " << omega << " rad/s outside validity window of band "
        << band_name(b) << " [" << w.lo << ", " << w.hi << "] rad/s";
    throw DomainError(msg.str());
  }
  if (kind_ == DispersionKind::polynomial_expansion) return taylor_[band_index(b)](omega);

  const double lambda_um = 2.0 * kPi * c_ / omega * 1e6;
  if (lambda_um < sellmeier_.lambda_min_um || lambda_um > sellmeier_.lambda_max_um) {
    std::ostringstream msg;
    msg << "dispersion: wavelength " << lambda_um << " um (band " << band_name(b)
        << ") outside Sellmeier range [" << sellmeier_.lambda_min_um << ", "
        << sellmeier_.lambda_max_um << "] um";
    throw DomainError(msg.str());
  }
  return sellmeier_.index(lambda_um) * omega / c_;
}

double DispersionModel::refractive_index(Band b, double omega) const {
  const double n = propagation_constant(b, omega) * c_ / omega;
  if (!(n > 0.0) || !std::isfinite(n))
    throw DomainError("dispersion: non-positive effective index in band " +
                      std::string(band_name(b)));
  return n;
}

double phase_mismatch(const DispersionModel& model, const PhaseMismatchSpec& spec, double w2,
                      double w3, double w4) {
  const double w1 = idler_pump_frequency(w2, w3, w4);
  const double dk = model.propagation_constant(Band::pump1, w1) +
                    model.propagation_constant(Band::signal3, w3) -
                    model.propagation_constant(Band::pump2, w2) -
                    model.propagation_constant(Band::signal4, w4);
  return spec.sign() * dk;
}

}  // namespace tmq
