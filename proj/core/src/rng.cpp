#include "radloc/rng.hpp"

#include <cmath>
#include <vector>

#include "radloc/errors.hpp"

namespace radloc {

namespace {

constexpr double kLogSqrt2Pi = 0.91893853320467274178;  // log(sqrt(2*pi))
constexpr std::size_t kTableSize = 1024;

const std::vector<double>& log_factorial_table() {
  static const std::vector<double> table = [] {
    std::vector<double> t(kTableSize, 0.0);
    double acc = 0.0;
    for (std::size_t k = 1; k < kTableSize; ++k) {
      acc += std::log(static_cast<double>(k));
      t[k] = acc;
    }
    return t;
  }();
  return table;
}

}  // namespace

double log_factorial(std::uint64_t k) {
  if (k < kTableSize) return log_factorial_table()[k];
  const double x = static_cast<double>(k);
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  // Stirling-De Moivre series; next term ~1/(1680 x^7) < 1e-21 for k >= 1024.
  return (x + 0.5) * std::log(x) - x + kLogSqrt2Pi +
         inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 / 1260.0));
}

double Xoshiro256pp::normal01() noexcept {
  double u1 = uniform01();
  const double u2 = uniform01();
  if (u1 <= 0.0) u1 = 0x1.0p-53;
  constexpr double kTwoPi = 6.28318530717958647692;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

namespace {

// Transformed rejection with squeeze (Hormann 1993), valid for lambda >= 10.
std::uint64_t poisson_ptrs(Xoshiro256pp& rng, double lambda) {
  const double slam = std::sqrt(lambda);
  const double loglam = std::log(lambda);
  const double b = 0.931 + 2.53 * slam;
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double v_r = 0.9277 - 3.6224 / (b - 2.0);

  for (;;) {
    const double u = rng.uniform01() - 0.5;
    const double v = rng.uniform01();
    const double us = 0.5 - std::abs(u);
    const double kf = std::floor((2.0 * a / us + b) * u + lambda + 0.43);
    if (us >= 0.07 && v <= v_r) return static_cast<std::uint64_t>(kf);
    if (kf < 0.0 || (us < 0.013 && v > us)) continue;
    const auto k = static_cast<std::uint64_t>(kf);
    if (std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b) <=
        -lambda + kf * loglam - log_factorial(k)) {
      return k;
    }
  }
}

}  // namespace

std::uint64_t poisson(Xoshiro256pp& rng, double lambda) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw NumericError("poisson: mean must be finite and non-negative");
  if (lambda == 0.0) return 0;
  if (lambda < 10.0) {
    const double limit = std::exp(-lambda);
    std::uint64_t k = 0;
    double p = 1.0;
    do {
      ++k;
      p *= rng.uniform01();
    } while (p > limit);
    return k - 1;
  }
  return poisson_ptrs(rng, lambda);
}

}  // namespace radloc
