#include "radloc/reftable.hpp"

#include <limits>

#include "radloc/errors.hpp"
#include "radloc/rng.hpp"
#include "radloc/scaling.hpp"

namespace radloc {

ReferenceTable calibrate(const Scene& scene_template,
                         std::span<const double> angles_deg, int replicates,
                         std::uint64_t seed, bool noiseless) {
  if (angles_deg.empty()) throw UsageError("calibrate: no angles");
  if (replicates < 1) throw UsageError("calibrate: replicates < 1");

  ReferenceTable table;
  table.calib_angles_deg.assign(angles_deg.begin(), angles_deg.end());
  table.calib_distance_m = scene_template.source.pose.distance_m;
  table.calib_activity_ci = scene_template.source.activity_ci;
  table.calib_time_s = scene_template.acquisition.live_time_s;
  table.responses = Matrix(angles_deg.size(),
                           scene_template.array.detectors.size());

  for (std::size_t a = 0; a < angles_deg.size(); ++a) {
    Scene scene = scene_template;
    scene.source.pose.angle_deg = angles_deg[a];
    const CountVector lambda = expected_counts(scene);
    auto row = table.responses.row(a);
    if (noiseless) {
      for (std::size_t d = 0; d < lambda.size(); ++d) row[d] = lambda[d];
      continue;
    }
    for (int rep = 0; rep < replicates; ++rep) {
      const CountVector counts = sample_counts(
          lambda, derive_stream(seed, a * 0x10000ull + static_cast<std::uint64_t>(rep)));
      for (std::size_t d = 0; d < counts.size(); ++d) row[d] += counts[d];
    }
    for (std::size_t d = 0; d < lambda.size(); ++d) row[d] /= replicates;
  }
  return table;
}

int predict_row(const ReferenceTable& table, std::span<const double> x,
                bool normalize_query) {
  if (x.size() != table.responses.cols)
    throw SchemaError("predict_row: dimension mismatch");
  if (table.responses.rows == 0) throw SchemaError("predict_row: empty table");

  ScalerParams unit;
  unit.kind = ScalerKind::kUnitNorm;
  std::vector<double> query(x.begin(), x.end());
  if (normalize_query) query = unit.transform(x);

  int best = 0;
  double best_sse = std::numeric_limits<double>::infinity();
  double best_angle = std::numeric_limits<double>::infinity();
  std::vector<double> row_buf;
  for (std::size_t r = 0; r < table.responses.rows; ++r) {
    std::span<const double> row = table.responses.row(r);
    if (normalize_query) {
      row_buf = unit.transform(row);
      row = row_buf;
    }
    double sse = 0.0;
    for (std::size_t d = 0; d < row.size(); ++d) {
      const double diff = row[d] - query[d];
      sse += diff * diff;
    }
    const double angle = table.calib_angles_deg[r];
    if (sse < best_sse || (sse == best_sse && angle < best_angle)) {
      best_sse = sse;
      best_angle = angle;
      best = static_cast<int>(r);
    }
  }
  return best;
}

double predict_angle(const ReferenceTable& table, std::span<const double> x,
                     bool normalize_query) {
  return table.calib_angles_deg[static_cast<std::size_t>(
      predict_row(table, x, normalize_query))];
}

}  // namespace radloc
