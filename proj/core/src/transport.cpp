#include "radloc/transport.hpp"

#include <algorithm>
#include <cmath>

#include "radloc/errors.hpp"
#include "radloc/parallel.hpp"
#include "radloc/rng.hpp"

namespace radloc {

void validate(const Scene& scene) {
  if (scene.array.detectors.size() < 2)
    throw UsageError("scene: need at least 2 detectors");
  for (const DetectorSpec& det : scene.array.detectors) {
    if (det.radius_m <= 0.0) throw UsageError("scene: detector radius <= 0");
    if (det.intrinsic_efficiency <= 0.0 || det.intrinsic_efficiency > 1.0)
      throw UsageError("scene: intrinsic efficiency outside (0, 1]");
    if (det.face_area_m2 <= 0.0) throw UsageError("scene: face area <= 0");
    if (det.mu_self_per_m < 0.0) throw UsageError("scene: mu_self < 0");
  }
  for (const Obstruction& ob : scene.obstructions) {
    if (ob.width_m <= 0.0 || ob.height_m <= 0.0)
      throw UsageError("scene: obstruction with non-positive extent");
    if (ob.mu_per_m < 0.0) throw UsageError("scene: obstruction mu < 0");
  }
  if (scene.source.activity_ci <= 0.0) throw UsageError("scene: activity <= 0");
  if (scene.source.photons_per_decay <= 0.0)
    throw UsageError("scene: photons_per_decay <= 0");
  if (scene.source.pose.distance_m <= 0.0)
    throw UsageError("scene: source distance <= 0");
  if (scene.acquisition.live_time_s <= 0.0)
    throw UsageError("scene: live time <= 0");
  if (scene.acquisition.background_cps < 0.0)
    throw UsageError("scene: background rate < 0");

  const Point2 src = polar_to_cartesian(scene.source.pose);
  for (const DetectorSpec& det : scene.array.detectors) {
    const double dx = src.x - det.center.x;
    const double dy = src.y - det.center.y;
    if (dx * dx + dy * dy <= det.radius_m * det.radius_m)
      throw NumericError("scene: source inside a detector disk");
  }
}

double attenuation_factor(const Scene& scene, std::size_t det_index) {
  return attenuation_factor(polar_to_cartesian(scene.source.pose), det_index,
                            scene.array, scene.obstructions);
}

CountVector expected_counts(const Scene& scene) {
  validate(scene);
  const Point2 src = polar_to_cartesian(scene.source.pose);
  const double emitted = scene.source.activity_ci * kBqPerCurie *
                         scene.source.photons_per_decay *
                         scene.acquisition.live_time_s;
  const double background =
      scene.acquisition.background_cps * scene.acquisition.live_time_s;

  CountVector lambda(scene.array.detectors.size());
  for (std::size_t d = 0; d < scene.array.detectors.size(); ++d) {
    const DetectorSpec& det = scene.array.detectors[d];
    const double dx = src.x - det.center.x;
    const double dy = src.y - det.center.y;
    const double r2 = dx * dx + dy * dy;
    if (r2 == 0.0) throw NumericError("expected_counts: zero source distance");
    const double att = attenuation_factor(src, d, scene.array,
                                          scene.obstructions);
    lambda[d] = emitted * det.face_area_m2 / (4.0 * kPi * r2) *
                    det.intrinsic_efficiency * att +
                background;
  }
  return lambda;
}

CountVector sample_counts(const CountVector& lambda, std::uint64_t seed) {
  CountVector counts(lambda.size());
  for (std::size_t d = 0; d < lambda.size(); ++d) {
    if (!(lambda[d] >= 0.0))
      throw NumericError("sample_counts: negative or NaN mean");
    Xoshiro256pp rng(derive_stream(seed, d));
    counts[d] = static_cast<double>(poisson(rng, lambda[d]));
  }
  return counts;
}

namespace {

struct DiskCrossing {
  double entry_t;  // distance along the ray to the disk entry point
  std::size_t det;
};

// Entry distance of ray (origin, dir) into the disk, or a negative value if
// the ray misses. dir must be unit length.
double ray_disk_entry(Point2 origin, Point2 dir, Point2 center, double radius) {
  const double fx = origin.x - center.x;
  const double fy = origin.y - center.y;
  const double qb = fx * dir.x + fy * dir.y;
  const double qc = fx * fx + fy * fy - radius * radius;
  const double disc = qb * qb - qc;
  if (disc <= 0.0) return -1.0;
  const double t = -qb - std::sqrt(disc);  // origin outside: first root
  return t > 0.0 ? t : -1.0;
}

}  // namespace

CountVector mc_counts(const Scene& scene, std::int64_t n_photons,
                      std::uint64_t seed, bool physical, int threads) {
  if (n_photons <= 0) throw NumericError("mc_counts: n_photons <= 0");
  validate(scene);

  const Point2 src = polar_to_cartesian(scene.source.pose);
  const std::size_t n_det = scene.array.detectors.size();
  const int workers = resolve_threads(threads);

  // Per-worker tallies merged in detector order keeps the result exact and
  // scheduling-independent (hit counts are integers, per-ray RNG streams
  // derive from the ray index alone).
  std::vector<std::vector<std::uint64_t>> tallies(
      std::max(1, workers), std::vector<std::uint64_t>(n_det, 0));

  const auto trace_ray = [&](std::size_t ray, std::vector<std::uint64_t>& tally,
                             std::vector<DiskCrossing>& scratch) {
    Xoshiro256pp rng(derive_stream(seed, ray));
    const double phi = 2.0 * kPi * rng.uniform01();
    const Point2 dir{std::cos(phi), std::sin(phi)};

    scratch.clear();
    for (std::size_t d = 0; d < n_det; ++d) {
      const DetectorSpec& det = scene.array.detectors[d];
      const double t = ray_disk_entry(src, dir, det.center, det.radius_m);
      if (t > 0.0) scratch.push_back({t, d});
    }
    if (scratch.empty()) return;
    std::sort(scratch.begin(), scratch.end(),
              [](const DiskCrossing& a, const DiskCrossing& b) {
                return a.entry_t != b.entry_t ? a.entry_t < b.entry_t
                                              : a.det < b.det;
              });

    for (const DiskCrossing& crossing : scratch) {
      const DetectorSpec& det = scene.array.detectors[crossing.det];
      const Point2 entry{src.x + crossing.entry_t * dir.x,
                         src.y + crossing.entry_t * dir.y};
      double exponent = 0.0;
      for (const Obstruction& ob : scene.obstructions) {
        const double len = segment_rect_length(src, entry, ob);
        if (len > 0.0) exponent += ob.mu_per_m * len;
      }
      for (std::size_t j = 0; j < n_det; ++j) {
        if (j == crossing.det) continue;
        const DetectorSpec& other = scene.array.detectors[j];
        const double len = segment_circle_chord_length(
            src, entry, other.center, other.radius_m);
        if (len > 0.0) exponent += other.mu_self_per_m * len;
      }
      const double p_register = det.intrinsic_efficiency * std::exp(-exponent);
      if (rng.uniform01() < p_register) ++tally[crossing.det];
    }
  };

  {
    std::vector<std::vector<DiskCrossing>> scratches(tallies.size());
    const auto n_rays = static_cast<std::size_t>(n_photons);
    const std::size_t stride = tallies.size();
    parallel_for(stride, workers, [&](std::size_t w) {
      for (std::size_t ray = w; ray < n_rays; ray += stride)
        trace_ray(ray, tallies[w], scratches[w]);
    });
  }

  std::vector<std::uint64_t> hits(n_det, 0);
  for (const auto& tally : tallies)
    for (std::size_t d = 0; d < n_det; ++d) hits[d] += tally[d];

  CountVector counts(n_det);
  if (!physical) {
    for (std::size_t d = 0; d < n_det; ++d)
      counts[d] = static_cast<double>(hits[d]);
    return counts;
  }

  // Planar-to-3D normalization: per detector, the ratio of its analytic flux
  // fraction (3-D 1/(4 pi r^2) law) to its planar geometric capture
  // probability in the same scene with nothing absorbing. This keeps every
  // detector's MC expectation on the analytic scale regardless of how the
  // ring spreads the source-to-detector distances.
  const double emitted = scene.source.activity_ci * kBqPerCurie *
                         scene.source.photons_per_decay *
                         scene.acquisition.live_time_s;
  const double background =
      scene.acquisition.background_cps * scene.acquisition.live_time_s;
  for (std::size_t d = 0; d < n_det; ++d) {
    const DetectorSpec& det = scene.array.detectors[d];
    const double dx = src.x - det.center.x;
    const double dy = src.y - det.center.y;
    const double r = std::sqrt(dx * dx + dy * dy);
    const double analytic = det.face_area_m2 / (4.0 * kPi * r * r);
    const double geometric = std::asin(std::min(1.0, det.radius_m / r)) / kPi;
    const double scale =
        (analytic / geometric) * (emitted / static_cast<double>(n_photons));
    Xoshiro256pp bg_rng(derive_stream(seed ^ 0xbac6d0u, d));
    counts[d] = std::floor(static_cast<double>(hits[d]) * scale + 0.5) +
                static_cast<double>(poisson(bg_rng, background));
  }
  return counts;
}

}  // namespace radloc
