#pragma once

#include <cmath>
#include <limits>
#include <utility>

#include "error.hpp"
#include "rng.hpp"

namespace cbm {

/*!
 * Stationary gamma degradation process.
 *
 * X(t) ~ Gamma(shape = a*t, rate = b), so E[X(t)] = a*t/b and
 * Var[X(t)] = a*t/b^2. Note the rate parameterization: a sampler taking a
 * scale argument must be given 1/b.
 */
struct GammaProcess {
  double a = 10.0 / 9.0;    ///< shape growth per year
  double b = 100.0 / 9.0;   ///< rate, 1/degradation-unit

  void validate() const {
    detail::require(std::isfinite(a) && a > 0, "gamma process: a must be > 0");
    detail::require(std::isfinite(b) && b > 0, "gamma process: b must be > 0");
  }

  /// Mean degradation growth per year, a/b.
  double mean_rate() const noexcept { return a / b; }
};

struct Moments {
  double mean;
  double variance;
};

/// Gamma density with the given shape and rate, evaluated in log space.
inline double gamma_pdf(double x, double shape, double rate) {
  detail::require(shape > 0 && std::isfinite(shape), "gamma_pdf: shape must be > 0");
  detail::require(rate > 0 && std::isfinite(rate), "gamma_pdf: rate must be > 0");
  detail::require(x >= 0, "gamma_pdf: x must be >= 0");
  if (x == 0) {
    if (shape < 1) return std::numeric_limits<double>::infinity();
    return shape == 1 ? rate : 0.0;
  }
  const double log_pdf = shape * std::log(rate) + (shape - 1) * std::log(x) -
                         rate * x - std::lgamma(shape);
  return std::exp(log_pdf);
}

inline Moments gamma_moments(const GammaProcess& proc, double t) {
  proc.validate();
  detail::require(t >= 0, "gamma_moments: t must be >= 0");
  return {proc.a * t / proc.b, proc.a * t / (proc.b * proc.b)};
}

/*!
 * Draw from Gamma(shape, rate).
 *
 * Marsaglia-Tsang squeeze for shape >= 1. For shape < 1 a Gamma(shape + 1)
 * draw is scaled by U^(1/shape). shape == 0 is the point mass at zero.
 */
template <class Stream>
double sample_gamma(double shape, double rate, Stream& rng) {
  detail::require(shape >= 0 && std::isfinite(shape), "sample_gamma: shape must be >= 0");
  detail::require(rate > 0 && std::isfinite(rate), "sample_gamma: rate must be > 0");
  if (shape == 0) return 0.0;

  const double boosted = shape < 1 ? shape + 1 : shape;
  const double d = boosted - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);

  double v = 0;
  for (;;) {
    double z = 0;
    do {
      z = rng.normal();
      v = 1 + c * z;
    } while (v <= 0);
    v = v * v * v;
    const double u = rng.uniform();
    const double z2 = z * z;
    if (u < 1 - 0.0331 * z2 * z2) break;
    if (std::log(u) < 0.5 * z2 + d * (1 - v + std::log(v))) break;
  }

  double result = d * v;
  if (shape < 1) result *= std::pow(rng.uniform(), 1.0 / shape);
  return result / rate;
}

/// Degradation level tau years after the last replacement.
template <class Stream>
double sample_degradation(const GammaProcess& proc, double tau, Stream& rng) {
  detail::require(tau >= 0, "sample_degradation: tau must be >= 0");
  if (tau == 0) return 0.0;
  return sample_gamma(proc.a * tau, proc.b, rng);
}

}  // namespace cbm
