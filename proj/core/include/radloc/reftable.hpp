#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "radloc/matrix.hpp"
#include "radloc/transport.hpp"

namespace radloc {

/// Calibrated mean detector responses as a function of source angle at a
/// fixed distance: the traditional directional baseline.
struct ReferenceTable {
  std::vector<double> calib_angles_deg;  // row order
  Matrix responses;                      // |angles| x n_detectors
  double calib_distance_m = 2.0;
  double calib_activity_ci = 0.0;
  double calib_time_s = 0.0;
};

/// Builds a table from the scene template (whose pose distance is the
/// calibration distance): each row is the mean of `replicates` Poisson
/// acquisitions, or the exact expectation when `noiseless` is set.
ReferenceTable calibrate(const Scene& scene_template,
                         std::span<const double> angles_deg, int replicates,
                         std::uint64_t seed, bool noiseless = false);

/// Row index minimizing the sum of squared differences to the raw query;
/// ties break toward the smallest angle. With `normalize_query` both sides
/// are unit-normed first (non-baseline variant).
int predict_row(const ReferenceTable& table, std::span<const double> x,
                bool normalize_query = false);

/// The calibration angle of the best-matching row.
double predict_angle(const ReferenceTable& table, std::span<const double> x,
                     bool normalize_query = false);

}  // namespace radloc
