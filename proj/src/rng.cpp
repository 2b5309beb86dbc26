#include "interlace/rng.hpp"

#include <cmath>

#include "interlace/errors.hpp"

namespace interlace {

namespace {

// Hormann (1993), "The transformed rejection method for generating Poisson
// random variables", algorithm PTRS. Valid for mean >= 10.
std::uint64_t poisson_ptrs(Rng& rng, double mean) {
  const double slam = std::sqrt(mean);
  const double loglam = std::log(mean);
  const double b = 0.931 + 2.53 * slam;
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double vr = 0.9277 - 3.6224 / (b - 2);
  for (;;) {
    const double u = rng.uniform() - 0.5;
    const double v = rng.uniform();
    const double us = 0.5 - std::fabs(u);
    const double k = std::floor((2 * a / us + b) * u + mean + 0.43);
    if (us >= 0.07 && v <= vr) {
      return static_cast<std::uint64_t>(k);
    }
    if (k < 0 || (us < 0.013 && v > us)) {
      continue;
    }
    const double lhs = std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b);
    const double rhs = -mean + k * loglam - std::lgamma(k + 1);
    if (lhs <= rhs) {
      return static_cast<std::uint64_t>(k);
    }
  }
}

}  // namespace

std::uint64_t Rng::poisson(double mean) {
  if (!(mean >= 0) || !std::isfinite(mean)) {
    throw ArgumentError("poisson mean must be finite and nonnegative");
  }
  if (mean > 1e15) {
    throw ArgumentError("poisson mean overflows the variate range");
  }
  if (mean == 0) {
    return 0;
  }
  if (mean < 30) {
    // Sequential inversion of the CDF.
    double p = std::exp(-mean);
    double cdf = p;
    const double target = uniform();
    std::uint64_t k = 0;
    while (target >= cdf) {
      ++k;
      p *= mean / static_cast<double>(k);
      const double next = cdf + p;
      if (next == cdf) {
        break;  // remaining tail is below double resolution
      }
      cdf = next;
    }
    return k;
  }
  return poisson_ptrs(*this, mean);
}

}  // namespace interlace
