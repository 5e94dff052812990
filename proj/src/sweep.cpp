#include "tmq/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <future>
#include <mutex>

#include "tmq/errors.hpp"
#include "tmq/numerics.hpp"
#include "tmq/parallel.hpp"

namespace tmq {

BandwidthSearch default_bandwidth_search(const PumpPair& pumps) {
  return {pumps.pump1.sigma / 30.0, pumps.pump1.sigma * 30.0, 1e-3};
}

double min_resolvable_sigma(const BandGrid& grid) {
  // Any interval of length 4 sigma holds at least floor(4 sigma / spacing)
  // cell centres, so 2 spacings always gives the 8 points gaussian_input needs.
  return 2.0 * grid.spacing();
}

double input_centre(const SchmidtDecomposition& dec, const InputPolicy& policy) {
  if (policy.centre) return *policy.centre;
  if (policy.band == Band::signal3) return fundamental_centroid(dec);
  const auto& b4 = dec.grid.band4;
  const Eigen::VectorXd mag = dec.modes4.col(0).cwiseAbs();
  return mag.dot(b4.samples()) / mag.sum();
}

double preparation_fidelity(const SchmidtDecomposition& dec, const RotationAngles& angles,
                            const InputPolicy& policy, double sigma) {
  if (policy.band != Band::signal3 && policy.band != Band::signal4)
    throw DomainError("preparation_fidelity: input band must be signal3 or signal4");
  const TmState in = gaussian_input(dec.grid, policy.band, input_centre(dec, policy), sigma);
  const TmState out = evolve(in, dec, angles);
  const Qubit basis = policy.band == Band::signal3 ? Qubit{1.0, 0.0} : Qubit{0.0, 1.0};
  return fidelity(out, dec, ideal_qubit_output(basis, angles.magnitude[0], angles.phase));
}

BandwidthOptimum optimize_bandwidth(const SchmidtDecomposition& dec, const RotationAngles& angles,
                                    const InputPolicy& policy, const BandwidthSearch& search) {
  if (!(search.lo > 0.0 && search.hi > search.lo))
    throw DomainError("optimize_bandwidth: bounds must satisfy 0 < lo < hi");
  if (!(search.rel_tol > 0.0)) throw DomainError("optimize_bandwidth: rel_tol must be > 0");
  const BandGrid& bg = dec.grid.band(policy.band);
  const double lo = std::max(search.lo, min_resolvable_sigma(bg));
  if (!(search.hi > lo))
    throw ResolutionError("optimize_bandwidth: the grid cannot resolve any sigma_in in the bracket");

  BandwidthOptimum best;
  best.centre = input_centre(dec, policy);
  best.lo_effective = lo;
  InputPolicy fixed = policy;
  fixed.centre = best.centre;
  auto f = [&](double log_sigma) {
    return preparation_fidelity(dec, angles, fixed, std::exp(log_sigma));
  };
  const double a = std::log(lo), b = std::log(search.hi);
  const double tol = std::log1p(search.rel_tol);
  const auto g = golden_section_maximize(f, a, b, tol);
  best.sigma = std::exp(g.x);
  best.fidelity = g.value;
  best.iterations = g.iterations;
  best.hit_bound = (g.x - a) <= tol || (b - g.x) <= tol;
  return best;
}

BandwidthOptimum optimize_bandwidth(const GateContext& ctx, double length,
                                    const BandwidthSearch& search, const InputPolicy& policy) {
  ConversionSetup s = ctx.setup;
  s.waveguide.length = length;
  const GateContext at = ctx.with_setup(std::move(s));
  return optimize_bandwidth(at.analysis->modes, at.angles(), policy, search);
}

std::string to_string(SweptParameter p) {
  switch (p) {
    case SweptParameter::L: return "L";
    case SweptParameter::sigma_in: return "sigma_in";
    case SweptParameter::P1: return "P1";
    case SweptParameter::P2: return "P2";
  }
  return "?";
}

SweptParameter parse_swept_parameter(const std::string& text) {
  if (text == "L") return SweptParameter::L;
  if (text == "sigma_in") return SweptParameter::sigma_in;
  if (text == "P1") return SweptParameter::P1;
  if (text == "P2") return SweptParameter::P2;
  throw ConfigError("unknown sweep parameter '" + text + "' (expected L, sigma_in, P1 or P2)");
}

std::string to_string(Observable o) {
  switch (o) {
    case Observable::fidelity: return "fidelity";
    case Observable::kappa: return "kappa";
    case Observable::theta0: return "theta0";
    case Observable::deviation: return "deviation";
    case Observable::optimal_sigma_in: return "optimal_sigma_in";
    case Observable::schmidt_number: return "schmidt_number";
  }
  return "?";
}

Observable parse_observable(const std::string& text) {
  for (auto o : {Observable::fidelity, Observable::kappa, Observable::theta0, Observable::deviation,
                 Observable::optimal_sigma_in, Observable::schmidt_number})
    if (to_string(o) == text) return o;
  throw ConfigError("unknown observable '" + text + "'");
}

void SweepPlan::validate() const {
  if (values.empty()) throw ConfigError("sweep: no values to sweep");
  for (double v : values) {
    if (!std::isfinite(v)) throw ConfigError("sweep: non-finite sweep value");
    const bool positive = swept == SweptParameter::L || swept == SweptParameter::sigma_in;
    if (positive ? !(v > 0.0) : !(v >= 0.0))
      throw ConfigError("sweep: " + to_string(swept) + " values must be " +
                        (positive ? "> 0" : ">= 0"));
  }
  const bool increasing = std::adjacent_find(values.begin(), values.end(), std::greater_equal<>()) == values.end();
  const bool decreasing = std::adjacent_find(values.begin(), values.end(), std::less_equal<>()) == values.end();
  if (!increasing && !decreasing) throw ConfigError("sweep: values must be strictly monotone");
  if (optimize && !(optimize->lo > 0.0 && optimize->hi > optimize->lo && optimize->rel_tol > 0.0))
    throw ConfigError("sweep: optimiser bounds must satisfy 0 < lo < hi with rel_tol > 0");
  if (outputs.empty()) throw ConfigError("sweep: no observables requested");
  if (kappa_count < 1) throw ConfigError("sweep: kappa_count must be >= 1");
  if (swept == SweptParameter::sigma_in && optimize)
    throw ConfigError("sweep: cannot sweep sigma_in and optimise it at the same time");
  const bool needs_sigma = std::any_of(outputs.begin(), outputs.end(), [](Observable o) {
    return o == Observable::fidelity || o == Observable::deviation;
  });
  if (needs_sigma && !optimize && swept != SweptParameter::sigma_in && !input.sigma)
    throw ConfigError("sweep: fidelity/deviation need input.sigma, a sigma_in sweep or optimisation");
  if (std::find(outputs.begin(), outputs.end(), Observable::optimal_sigma_in) != outputs.end() &&
      !optimize)
    throw ConfigError("sweep: optimal_sigma_in requires optimize_sigma_in");
}

const double* SweepRecord::find(const std::string& column) const {
  for (const auto& [name, v] : observables)
    if (name == column) return &v;
  return nullptr;
}

std::vector<std::string> observable_columns(const SweepPlan& plan) {
  std::vector<std::string> cols;
  for (Observable o : plan.outputs) {
    if (o == Observable::kappa) {
      for (int j = 0; j < plan.kappa_count; ++j) cols.push_back("kappa_" + std::to_string(j));
    } else {
      cols.push_back(to_string(o));
    }
  }
  return cols;
}

namespace {

using AnalysisPtr = std::shared_ptr<const Analysis>;

class AnalysisCache {
 public:
  explicit AnalysisCache(double threshold) : threshold_(threshold) {}

  // Returns the future for `setup`, creating and filling it if absent.
  AnalysisPtr fetch(const ConversionSetup& setup) {
    std::shared_ptr<std::promise<AnalysisPtr>> mine;
    std::shared_future<AnalysisPtr> future;
    {
      std::lock_guard<std::mutex> lock(mutex_);
      for (auto& [key, f] : entries_)
        if (same_map(key, setup)) {
          future = f;
          break;
        }
      if (!future.valid()) {
        mine = std::make_shared<std::promise<AnalysisPtr>>();
        future = mine->get_future().share();
        entries_.emplace_back(setup, future);
      }
    }
    if (mine) {
      try {
        mine->set_value(std::make_shared<const Analysis>(analyze(setup, threshold_, 1)));
      } catch (...) {
        mine->set_exception(std::current_exception());
      }
    }
    return future.get();
  }

 private:
  double threshold_;
  std::mutex mutex_;
  std::vector<std::pair<ConversionSetup, std::shared_future<AnalysisPtr>>> entries_;
};

ConversionSetup setup_at(const SweepPlan& plan, double value) {
  ConversionSetup s = plan.fixed;
  switch (plan.swept) {
    case SweptParameter::L: s.waveguide.length = value; break;
    case SweptParameter::P1: s.pumps.pump1.power = value; break;
    case SweptParameter::P2: s.pumps.pump2.power = value; break;
    case SweptParameter::sigma_in: break;
  }
  return s;
}

SweepRecord evaluate(const SweepPlan& plan, std::size_t index, AnalysisCache& cache) {
  SweepRecord rec;
  rec.value = plan.values[index];
  try {
    const ConversionSetup setup = setup_at(plan, rec.value);
    const AnalysisPtr analysis = cache.fetch(setup);
    const auto& dec = analysis->modes;
    const cplx xi = coupling_strength(setup.pumps, setup.waveguide, setup.constants);
    const RotationAngles angles = rotation_angles(dec, xi, analysis->kernel.norm_const, setup.constants);

    rec.diagnostics.grid3 = dec.grid.band3.points;
    rec.diagnostics.grid4 = dec.grid.band4.points;
    rec.diagnostics.rank = dec.rank();
    rec.diagnostics.kappa_retained = dec.kappa.sum();

    std::optional<double> sigma;
    std::optional<BandwidthOptimum> optimum;
    std::string sigma_error;
    try {
      if (plan.optimize) {
        optimum = optimize_bandwidth(dec, angles, plan.input, *plan.optimize);
        sigma = optimum->sigma;
        rec.diagnostics.optimizer_iterations = optimum->iterations;
        rec.diagnostics.bound_hit = optimum->hit_bound;
      } else if (plan.swept == SweptParameter::sigma_in) {
        sigma = rec.value;
      } else {
        sigma = plan.input.sigma;
      }
    } catch (const std::exception& e) {
      sigma_error = e.what();
    }

    auto need_sigma = [&]() {
      if (!sigma) throw Error(sigma_error.empty() ? "no input bandwidth" : sigma_error);
      return *sigma;
    };

    for (Observable o : plan.outputs) {
      const std::string name = to_string(o);
      try {
        switch (o) {
          case Observable::fidelity: {
            const double f = optimum ? optimum->fidelity
                                     : preparation_fidelity(dec, angles, plan.input, need_sigma());
            rec.observables.emplace_back(name, f);
            break;
          }
          case Observable::kappa:
            for (int j = 0; j < plan.kappa_count; ++j)
              rec.observables.emplace_back("kappa_" + std::to_string(j),
                                           j < dec.rank() ? dec.kappa[j] : 0.0);
            break;
          case Observable::theta0:
            rec.observables.emplace_back(name, angles.magnitude[0]);
            break;
          case Observable::deviation: {
            const TmState in = gaussian_input(dec.grid, plan.input.band,
                                              input_centre(dec, plan.input), need_sigma());
            rec.observables.emplace_back(name, gate_deviation(in, plan.gate, dec, angles).deviation);
            break;
          }
          case Observable::optimal_sigma_in:
            rec.observables.emplace_back(name, need_sigma());
            break;
          case Observable::schmidt_number:
            rec.observables.emplace_back(name, schmidt_number(dec));
            break;
        }
      } catch (const std::exception& e) {
        rec.failures.emplace_back(name, e.what());
      }
    }
  } catch (const std::exception& e) {
    rec.error = e.what();
    rec.observables.clear();
  }
  return rec;
}

}  // namespace

std::vector<SweepRecord> run_sweep(const SweepPlan& plan, int threads) {
  plan.validate();
  AnalysisCache cache(plan.threshold);
  std::vector<SweepRecord> records(plan.values.size());
  parallel_for(plan.values.size(), threads,
               [&](std::size_t i) { records[i] = evaluate(plan, i, cache); });
  return records;
}

}  // namespace tmq
