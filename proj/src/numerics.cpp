#include "tmq/numerics.hpp"

#include <utility>

namespace tmq {

RootResult find_root(const std::function<double(double)>& f, double a, double b, double fa,
                     double fb, double xtol, double ftol, int max_iterations) {
  RootResult r;
  if (fa == 0.0) return {a, 0.0, 0, true};
  if (fb == 0.0) return {b, 0.0, 0, true};
  int side = 0;
  double best = a, fbest = fa;
  if (std::abs(fb) < std::abs(fa)) best = b, fbest = fb;
  for (r.iterations = 1; r.iterations <= max_iterations; ++r.iterations) {
    double x = (a * fb - b * fa) / (fb - fa);
    // Keep the iterate strictly inside; fall back to bisection otherwise.
    if (!(x > std::min(a, b) && x < std::max(a, b))) x = 0.5 * (a + b);
    const double fx = f(x);
    if (std::abs(fx) < std::abs(fbest)) best = x, fbest = fx;
    if (std::abs(fx) <= ftol || fx == 0.0) return {x, fx, r.iterations, true};
    if ((fx > 0) == (fb > 0)) {
      b = x, fb = fx;
      if (side == -1) fa *= 0.5;
      side = -1;
    } else {
      a = x, fa = fx;
      if (side == 1) fb *= 0.5;
      side = 1;
    }
    if (std::abs(b - a) <= xtol) return {best, fbest, r.iterations, std::abs(fbest) <= ftol};
  }
  return {best, fbest, max_iterations, false};
}

GoldenResult golden_section_maximize(const std::function<double(double)>& f, double a, double b,
                                     double tol, int max_iterations) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c), fd = f(d);
  int it = 0;
  while (std::abs(b - a) > tol && it < max_iterations) {
    ++it;
    if (fc >= fd) {
      b = d, d = c, fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c, c = d, fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  return fc >= fd ? GoldenResult{c, fc, it} : GoldenResult{d, fd, it};
}

}  // namespace tmq
