#pragma once

#include <cstdint>
#include <vector>

#include "radloc/geometry.hpp"

namespace radloc {

inline constexpr double kBqPerCurie = 3.7e10;

struct SourceSpec {
  double activity_ci = 10e-6;      // curies; > 0
  double photons_per_decay = 2.0;  // Co-60 emits two gammas per decay
  SourcePose pose;
};

struct AcquisitionSpec {
  double live_time_s = 14.0;     // > 0
  double background_cps = 5.0;   // counts/s per detector; >= 0
};

struct Scene {
  ArrayGeometry array;
  SourceSpec source;
  std::vector<Obstruction> obstructions;
  AcquisitionSpec acquisition;
};

/// Per-detector counts ordered by detector index. Real-valued in analytic
/// mode, integer-valued after Poisson or Monte Carlo sampling.
using CountVector = std::vector<double>;

/// Throws NumericError / UsageError when a Scene invariant is violated
/// (source inside a detector disk, non-positive live time, ...).
void validate(const Scene& scene);

/// Convenience overload taking the scene's own source position.
double attenuation_factor(const Scene& scene, std::size_t det_index);

/// Analytic expectation: for each detector,
///   lambda_d = A_bq * ppd * t * face_area/(4 pi r_d^2) * eff * attenuation
///            + background * t
/// with r_d the source-to-center distance. The signal term is what carries
/// the inverse-square law and the activity*time equivalence.
CountVector expected_counts(const Scene& scene);

/// Independent Poisson draws per detector. Detector d draws from the
/// substream derive_stream(seed, d), so each detector's counts depend only
/// on (seed, d, lambda_d).
CountVector sample_counts(const CountVector& lambda, std::uint64_t seed);

/// Monte Carlo forward model: n_photons rays emitted isotropically in the
/// plane; a ray crossing a detector disk registers with probability
/// eff * exp(-sum mu L) along its own path up to the entry point. With
/// `physical` set, hit counts are rescaled onto the analytic normalization
/// (planar geometric flux -> 3-D 1/(4 pi r^2) flux, total emission
/// A_bq * ppd * live_time) and a Poisson background draw is added; otherwise
/// raw hit counts are returned. Deterministic in (scene, n_photons, seed)
/// independent of `threads`.
CountVector mc_counts(const Scene& scene, std::int64_t n_photons,
                      std::uint64_t seed, bool physical = true,
                      int threads = 1);

}  // namespace radloc
