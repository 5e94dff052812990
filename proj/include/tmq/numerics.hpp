#pragma once

#include <cmath>
#include <functional>

namespace tmq {

struct RootResult {
  double x = 0.0;
  double f = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Bracketed Illinois (modified regula falsi) iteration. Requires
// sign(fa) != sign(fb) or one of them zero. Stops when |f| <= ftol or the
// bracket is narrower than xtol.
RootResult find_root(const std::function<double(double)>& f, double a, double b, double fa,
                     double fb, double xtol, double ftol, int max_iterations = 200);

struct GoldenResult {
  double x = 0.0;
  double value = 0.0;
  int iterations = 0;
};

// Golden-section search for the maximum of a unimodal f on [a, b]; stops when
// the bracket is narrower than tol.
GoldenResult golden_section_maximize(const std::function<double(double)>& f, double a, double b,
                                     double tol, int max_iterations = 500);

}  // namespace tmq
