#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace radloc {

inline constexpr double kPi = 3.14159265358979323846;

/// Default linear attenuation coefficient of solid concrete, 1/m. Set to
/// ln(1e6)/1.40 so that 0.10 m of concrete in front of a 1 uCi source
/// attenuates exactly as much as 1.50 m in front of a 1 Ci source.
inline constexpr double kMuConcretePerM = 9.868221827117338;

struct Point2 {
  double x = 0.0;  // meters
  double y = 0.0;  // meters
};

/// Source position in the array frame. Angle 0 lies on the +x axis,
/// counterclockwise positive.
struct SourcePose {
  double distance_m = 1.0;  // > 0
  double angle_deg = 0.0;   // [0, 360)
};

/// A 12 cm scintillator: disk cross-section in the plane for occlusion and
/// Monte Carlo capture, square face area for flux, high intrinsic efficiency
/// at the energies of interest.
struct DetectorSpec {
  Point2 center;
  double radius_m = 0.06;              // circular cross-section in the plane
  double intrinsic_efficiency = 0.85;  // (0, 1]
  double face_area_m2 = 0.015;         // effective flux-capture cross-section
  double mu_self_per_m = 50.0;         // attenuation when occluding others
};

/// Detectors evenly spaced on a ring; index order is fixed and defines the
/// feature order everywhere downstream.
struct ArrayGeometry {
  std::vector<DetectorSpec> detectors;
  double ring_radius_m = 0.35;

  /// Ring of n copies of `prototype`, detector 0 on the +x axis.
  static ArrayGeometry make_ring(int n_detectors, double ring_radius_m = 0.35,
                                 const DetectorSpec& prototype = {});

  std::size_t size() const { return detectors.size(); }
};

/// Axis-aligned rectangular absorber.
struct Obstruction {
  Point2 center;
  double width_m = 0.0;   // extent along x
  double height_m = 0.0;  // extent along y
  double mu_per_m = kMuConcretePerM;
};

Point2 polar_to_cartesian(const SourcePose& pose);

/// Length of the part of segment ab inside the closed disk; 0 if disjoint.
/// Clipped to the segment, symmetric in (a, b).
double segment_circle_chord_length(Point2 a, Point2 b, Point2 center,
                                   double radius);

/// Length of segment ab inside the rectangle (parametric slab clipping);
/// 0 if disjoint.
double segment_rect_length(Point2 a, Point2 b, const Obstruction& rect);

/// Beer-Lambert survival factor exp(-sum mu_j L_j) along the segment from
/// `source` to the center of detector `det_index`. The sum runs over all
/// obstructions and all *other* detectors crossed by the segment (rear
/// detectors see the array's own material; that self-occlusion is what makes
/// the response angular). Throws NumericError if the source lies inside the
/// target detector's disk.
double attenuation_factor(Point2 source, std::size_t det_index,
                          const ArrayGeometry& array,
                          std::span<const Obstruction> obstructions);

}  // namespace radloc
