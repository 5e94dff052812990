#include "tmq/fcm.hpp"

#include <algorithm>
#include <sstream>

#include "tmq/errors.hpp"
#include "tmq/numerics.hpp"
#include "tmq/parallel.hpp"

namespace tmq {

namespace {

// Pump-1 envelope terms with (omega1 - omega1_0)^2 / sigma1^2 above this are
// below 1e-26 relative and are skipped. This also keeps k1 evaluations within
// +-sqrt(60) sigma1 of the pump centre.
constexpr double kEnvelopeExponentCut = 60.0;

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(10);
  s << v;
  return s.str();
}

}  // namespace

void PumpPair::validate() const {
  for (const auto* p : {&pump1, &pump2}) {
    const char* name = p == &pump1 ? "pump1" : "pump2";
    if (!(p->sigma > 0.0)) throw DomainError(std::string(name) + ": bandwidth must be > 0");
    if (!(p->power >= 0.0)) throw DomainError(std::string(name) + ": power must be >= 0");
    if (!(p->rep_rate > 0.0)) throw DomainError(std::string(name) + ": repetition rate must be > 0");
    if (!(p->omega0 > 0.0)) throw DomainError(std::string(name) + ": centre frequency must be > 0");
  }
  if (!std::isfinite(relative_phase)) throw DomainError("pumps: relative phase not finite");
}

void WaveguideSpec::validate() const {
  if (!(length > 0.0)) throw DomainError("waveguide: length must be > 0");
  if (!(gamma > 0.0)) throw DomainError("waveguide: gamma must be > 0");
}

Eigen::VectorXd BandGrid::samples() const {
  Eigen::VectorXd s(points);
  for (int i = 0; i < points; ++i) s[i] = at(i);
  return s;
}

Eigen::VectorXd BandGrid::weights() const { return Eigen::VectorXd::Constant(points, spacing()); }

void BandGrid::validate(std::string_view name) const {
  if (points < 2) throw DomainError(std::string(name) + ": grid needs at least 2 points");
  if (!(omega_max > omega_min) || !(omega_min > 0.0))
    throw DomainError(std::string(name) + ": grid needs 0 < omega_min < omega_max");
}

const BandGrid& FrequencyGrid::band(Band b) const {
  if (b == Band::signal3) return band3;
  if (b == Band::signal4) return band4;
  throw DomainError("frequency grid only covers the signal bands");
}

void FrequencyGrid::validate() const {
  band3.validate("band3");
  band4.validate("band4");
}

double FcmKernel::weighted_norm_squared() const {
  const double w = grid.band3.spacing() * grid.band4.spacing();
  double sum = 0.0;
  for (Eigen::Index m = 0; m < values.rows(); ++m)
    for (Eigen::Index n = 0; n < values.cols(); ++n) sum += std::norm(values(m, n));
  return sum * w;
}

bool same_map(const ConversionSetup& a, const ConversionSetup& b) {
  auto shape = [](const Pump& p) { return std::pair(p.omega0, p.sigma); };
  return shape(a.pumps.pump1) == shape(b.pumps.pump1) &&
         shape(a.pumps.pump2) == shape(b.pumps.pump2) &&
         a.waveguide.length == b.waveguide.length &&
         a.waveguide.dispersion == b.waveguide.dispersion && a.grid == b.grid &&
         a.quadrature == b.quadrature && a.mismatch == b.mismatch && a.constants == b.constants;
}

double sinc(double x) {
  if (std::abs(x) < 1e-6) return 1.0 - x * x / 6.0;
  return std::sin(x) / x;
}

cplx coupling_strength(const PumpPair& pumps, const WaveguideSpec& wg,
                       const PhysicalConstants& constants) {
  pumps.validate();
  wg.validate();
  const Pump& p1 = pumps.pump1;
  const Pump& p2 = pumps.pump2;
  const double n1 = wg.dispersion.refractive_index(Band::pump1, p1.omega0);
  const double n2 = wg.dispersion.refractive_index(Band::pump2, p2.omega0);
  const double prefactor =
      3.0 * std::sqrt(2.0) * constants.hbar * wg.length / (8.0 * std::pow(kPi, 2.5));
  const double radicand = p1.power * p2.power * n1 * n2 /
                          (p1.rep_rate * p2.rep_rate * p1.sigma * p2.sigma * p1.omega0 * p2.omega0);
  return std::polar(prefactor * wg.gamma * std::sqrt(radicand), pumps.relative_phase);
}

FcmKernel make_kernel(const FrequencyGrid& grid, Eigen::MatrixXcd values, cplx xi_bar) {
  grid.validate();
  if (values.rows() != grid.band3.points || values.cols() != grid.band4.points)
    throw DomainError("kernel shape does not match the frequency grid");
  FcmKernel k{grid, std::move(values), xi_bar, 0.0};
  const double norm = std::sqrt(k.weighted_norm_squared());
  if (!(norm > 0.0) || !std::isfinite(norm))
    throw DegenerateKernelError("frequency-conversion map is identically zero (norm " + fmt(norm) +
                                "); pumps may be spectrally disjoint from the grid");
  k.values /= norm;
  k.norm_const = norm;
  return k;
}

FcmKernel build_kernel(const ConversionSetup& setup, int threads) {
  const PumpPair& pumps = setup.pumps;
  const WaveguideSpec& wg = setup.waveguide;
  const DispersionModel& disp = wg.dispersion;
  pumps.validate();
  wg.validate();
  setup.grid.validate();
  const auto& quad = setup.quadrature;
  if (quad.nodes < 3) throw DomainError("quadrature: need at least 3 nodes");
  if (!(quad.half_width_sigmas > 0.0)) throw DomainError("quadrature: half width must be > 0");

  const Pump& p1 = pumps.pump1;
  const Pump& p2 = pumps.pump2;
  const double sign = setup.mismatch.sign();
  const double half_len = 0.5 * wg.length;

  const Eigen::VectorXd w3 = setup.grid.band3.samples();
  const Eigen::VectorXd w4 = setup.grid.band4.samples();
  const int n3 = static_cast<int>(w3.size());
  const int n4 = static_cast<int>(w4.size());

  // omega2 trapezoid nodes.
  const int nq = quad.nodes;
  const double q_lo = p2.omega0 - quad.half_width_sigmas * p2.sigma;
  const double hq = 2.0 * quad.half_width_sigmas * p2.sigma / (nq - 1);
  std::vector<double> wq(nq), k2(nq), a2w(nq);
  for (int q = 0; q < nq; ++q) {
    wq[q] = q_lo + q * hq;
    k2[q] = disp.propagation_constant(Band::pump2, wq[q]);
    a2w[q] = spectral_envelope(p2, wq[q]) * ((q == 0 || q == nq - 1) ? 0.5 * hq : hq);
  }

  std::vector<double> k3(n3), k4(n4), s3(n3), s4(n4);
  for (int m = 0; m < n3; ++m) {
    k3[m] = disp.propagation_constant(Band::signal3, w3[m]);
    s3[m] = std::sqrt(w3[m] / disp.refractive_index(Band::signal3, w3[m]));
  }
  for (int n = 0; n < n4; ++n) {
    k4[n] = disp.propagation_constant(Band::signal4, w4[n]);
    s4[n] = std::sqrt(w4[n] / disp.refractive_index(Band::signal4, w4[n]));
  }

  const double cut = std::sqrt(kEnvelopeExponentCut) * p1.sigma;
  Eigen::MatrixXcd g(n3, n4);
  parallel_for(static_cast<std::size_t>(n3), threads, [&](std::size_t row) {
    const int m = static_cast<int>(row);
    for (int n = 0; n < n4; ++n) {
      // omega1 = omega2 - d must stay within `cut` of the pump-1 centre.
      const double d = w3[m] - w4[n];
      const double fa = std::ceil((p1.omega0 + d - cut - q_lo) / hq);
      const double fb = std::floor((p1.omega0 + d + cut - q_lo) / hq);
      const int qa = static_cast<int>(std::clamp(fa, 0.0, static_cast<double>(nq)));
      const int qb = static_cast<int>(std::clamp(fb, -1.0, static_cast<double>(nq - 1)));
      double re = 0.0, im = 0.0;
      for (int q = qa; q <= qb; ++q) {
        const double w1 = idler_pump_frequency(wq[q], w3[m], w4[n]);
        const double env = spectral_envelope(p1, w1) * a2w[q];
        // Same sum as phase_mismatch(); k2, k3, k4 are tabulated.
        const double dk =
            sign * (disp.propagation_constant(Band::pump1, w1) + k3[m] - k2[q] - k4[n]);
        const double x = half_len * dk;
        const double amp = sinc(x) * env;
        re += amp * std::cos(x);
        im -= amp * std::sin(x);
      }
      g(m, n) = cplx(re, im) * (s3[m] * s4[n]);
    }
  });

  return make_kernel(setup.grid, std::move(g), coupling_strength(pumps, wg, setup.constants));
}

FrequencyGrid grid_auto(const PumpPair& pumps, const WaveguideSpec& wg, double centre3,
                        double centre4, double span_factor, int points) {
  if (!(span_factor > 0.0)) throw DomainError("grid_auto: span_factor must be > 0");
  if (points < 16) throw DomainError("grid_auto: need at least 16 points");
  pumps.validate();
  const double half = span_factor * (pumps.pump1.sigma + pumps.pump2.sigma);
  FrequencyGrid g{{centre3 - half, centre3 + half, points}, {centre4 - half, centre4 + half, points}};
  g.validate();
  for (Band b : {Band::signal3, Band::signal4}) {
    const Window& w = wg.dispersion.window(b);
    const BandGrid& bg = g.band(b);
    if (bg.omega_min < w.lo || bg.omega_max > w.hi)
      throw DomainError("grid_auto: band " + std::string(band_name(b)) + " grid [" +
                        fmt(bg.omega_min) + ", " + fmt(bg.omega_max) +
                        "] escapes the dispersion validity window [" + fmt(w.lo) + ", " +
                        fmt(w.hi) + "]");
  }
  return g;
}

std::array<Window, 4> default_windows(const PumpPair& pumps, double centre3, double centre4,
                                      double sigmas) {
  const double s1 = pumps.pump1.sigma, s2 = pumps.pump2.sigma;
  const double ss = s1 + s2;
  return {Window{pumps.pump1.omega0 - sigmas * s1, pumps.pump1.omega0 + sigmas * s1},
          Window{pumps.pump2.omega0 - sigmas * s2, pumps.pump2.omega0 + sigmas * s2},
          Window{centre3 - sigmas * ss, centre3 + sigmas * ss},
          Window{centre4 - sigmas * ss, centre4 + sigmas * ss}};
}

std::vector<SignalCentres> phase_matched_centres(const DispersionModel& model,
                                                 const PhaseMismatchSpec& spec,
                                                 const PumpPair& pumps) {
  const double w1 = pumps.pump1.omega0;
  const double w2 = pumps.pump2.omega0;
  const double shift = w2 - w1;  // omega3 - omega4
  const Window& win3 = model.window(Band::signal3);
  const Window& win4 = model.window(Band::signal4);
  double lo = std::max(win4.lo, win3.lo - shift);
  double hi = std::min(win4.hi, win3.hi - shift);
  if (!(hi > lo)) throw DomainError("phase matching: signal windows do not overlap");
  // Sellmeier ranges are closed; stay strictly inside.
  const double pad = 1e-9 * (hi - lo);
  lo += pad;
  hi -= pad;

  auto mismatch = [&](double w4) { return phase_mismatch(model, spec, w2, w4 + shift, w4); };
  constexpr int kScan = 4096;
  std::vector<SignalCentres> roots;
  double xa = lo, fa = mismatch(lo);
  for (int i = 1; i <= kScan; ++i) {
    const double xb = lo + (hi - lo) * i / kScan;
    const double fb = mismatch(xb);
    if (fa == 0.0) {
      roots.push_back({xa + shift, xa, false});
    } else if ((fa < 0) != (fb < 0) && fb != 0.0) {
      const auto r = find_root(mismatch, xa, xb, fa, fb, 1e-12 * xb, 0.0);
      roots.push_back({r.x + shift, r.x, false});
    }
    xa = xb, fa = fb;
  }
  if (fa == 0.0) roots.push_back({xa + shift, xa, false});
  for (auto& r : roots) r.degenerate = std::abs(r.omega4 - w1) <= 1e-6 * w1;
  return roots;
}

}  // namespace tmq
