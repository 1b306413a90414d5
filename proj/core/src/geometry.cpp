#include "radloc/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "radloc/errors.hpp"

namespace radloc {

ArrayGeometry ArrayGeometry::make_ring(int n_detectors, double ring_radius_m,
                                       const DetectorSpec& prototype) {
  if (n_detectors < 2)
    throw UsageError("ArrayGeometry: need at least 2 detectors");
  ArrayGeometry array;
  array.ring_radius_m = ring_radius_m;
  array.detectors.reserve(static_cast<std::size_t>(n_detectors));
  for (int k = 0; k < n_detectors; ++k) {
    DetectorSpec det = prototype;
    const double phi = 2.0 * kPi * k / n_detectors;
    det.center = {ring_radius_m * std::cos(phi), ring_radius_m * std::sin(phi)};
    array.detectors.push_back(det);
  }
  return array;
}

Point2 polar_to_cartesian(const SourcePose& pose) {
  const double theta = pose.angle_deg * kPi / 180.0;
  return {pose.distance_m * std::cos(theta), pose.distance_m * std::sin(theta)};
}

double segment_circle_chord_length(Point2 a, Point2 b, Point2 center,
                                   double radius) {
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  const double fx = a.x - center.x;
  const double fy = a.y - center.y;
  const double len2 = dx * dx + dy * dy;
  if (len2 == 0.0) return 0.0;

  // |f + t*d|^2 = radius^2
  const double qb = fx * dx + fy * dy;
  const double qc = fx * fx + fy * fy - radius * radius;
  const double disc = qb * qb - len2 * qc;
  if (disc <= 0.0) return 0.0;  // disjoint or tangent

  const double sq = std::sqrt(disc);
  const double t0 = std::clamp((-qb - sq) / len2, 0.0, 1.0);
  const double t1 = std::clamp((-qb + sq) / len2, 0.0, 1.0);
  return (t1 - t0) * std::sqrt(len2);
}

double segment_rect_length(Point2 a, Point2 b, const Obstruction& rect) {
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  const double xlo = rect.center.x - 0.5 * rect.width_m;
  const double xhi = rect.center.x + 0.5 * rect.width_m;
  const double ylo = rect.center.y - 0.5 * rect.height_m;
  const double yhi = rect.center.y + 0.5 * rect.height_m;

  double tmin = 0.0;
  double tmax = 1.0;
  const auto clip_axis = [&](double origin, double dir, double lo,
                             double hi) -> bool {
    if (dir == 0.0) return origin >= lo && origin <= hi;
    double t0 = (lo - origin) / dir;
    double t1 = (hi - origin) / dir;
    if (t0 > t1) std::swap(t0, t1);
    tmin = std::max(tmin, t0);
    tmax = std::min(tmax, t1);
    return true;
  };

  if (!clip_axis(a.x, dx, xlo, xhi)) return 0.0;
  if (!clip_axis(a.y, dy, ylo, yhi)) return 0.0;
  if (tmax <= tmin) return 0.0;
  return (tmax - tmin) * std::sqrt(dx * dx + dy * dy);
}

double attenuation_factor(Point2 source, std::size_t det_index,
                          const ArrayGeometry& array,
                          std::span<const Obstruction> obstructions) {
  if (det_index >= array.detectors.size())
    throw std::out_of_range("attenuation_factor: detector index");
  const DetectorSpec& target = array.detectors[det_index];

  const double sx = source.x - target.center.x;
  const double sy = source.y - target.center.y;
  if (sx * sx + sy * sy <= target.radius_m * target.radius_m)
    throw NumericError("attenuation_factor: source inside target detector");

  double exponent = 0.0;
  for (const Obstruction& ob : obstructions) {
    const double len = segment_rect_length(source, target.center, ob);
    if (len > 0.0) exponent += ob.mu_per_m * len;  // skip L=0 (mu may be inf)
  }
  for (std::size_t j = 0; j < array.detectors.size(); ++j) {
    if (j == det_index) continue;
    const DetectorSpec& other = array.detectors[j];
    const double len = segment_circle_chord_length(
        source, target.center, other.center, other.radius_m);
    if (len > 0.0) exponent += other.mu_self_per_m * len;
  }
  return std::exp(-exponent);
}

}  // namespace radloc
