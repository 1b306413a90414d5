#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "radloc/dataset.hpp"
#include "radloc/model_io.hpp"

namespace radloc {

/// Shortest arc between two angles, degrees in [0, 180].
double circular_error(double pred_deg, double truth_deg);

/// (mean, 1.96 * s / sqrt(n)) with sample standard deviation s; n >= 2.
std::pair<double, double> mean_ci95(std::span<const double> values);

struct DistanceBreakdownRow {
  double distance_m = 0.0;
  int n = 0;
  double angle_accuracy = 0.0;
  double mean_angular_error_deg = 0.0;
  double distance_bin_accuracy = 0.0;
};

/// Evaluation report. Angle fields are populated for angle predictors
/// (models with an angle target, reference tables), distance fields for
/// distance-bin models; the per-distance breakdown is always filled and
/// reproduces the accuracy-vs-distance curves.
struct Metrics {
  std::string predictor;  // "knn", "reference_table", ...
  std::string scaler;
  std::string target;     // "angle" or "distance"
  int n = 0;

  double angle_accuracy = -1.0;
  double mean_angular_error_deg = -1.0;
  double angular_error_ci95 = -1.0;

  double distance_bin_accuracy = -1.0;
  double mean_relative_distance_error_pct = -1.0;
  double relative_distance_error_ci95 = -1.0;
  double median_relative_distance_error_pct = -1.0;

  std::vector<DistanceBreakdownRow> by_distance;
};

struct EvalOptions {
  /// Percentile bootstrap CIs instead of the normal approximation.
  bool bootstrap = false;
  int bootstrap_resamples = 1000;
  std::uint64_t bootstrap_seed = 0;
  /// When set, the predictor's attached scaler kind must match.
  std::optional<ScalerKind> expect_pipeline;
};

Metrics evaluate_model(const TrainedModel& model, const Dataset& test,
                       const EvalOptions& options = {});
Metrics evaluate_reference_table(const ReferenceTable& table,
                                 const Dataset& test,
                                 const EvalOptions& options = {});
Metrics evaluate_predictor(const Predictor& predictor, const Dataset& test,
                           const EvalOptions& options = {});

/// Flat CSV: a summary row (distance column "all") plus one row per
/// evaluated distance, for each metrics block. Plot-ready.
void write_metrics_csv(std::span<const Metrics> metrics,
                       const std::filesystem::path& path,
                       const std::string& dataset_name);

/// Structured-text (JSON) report for one metrics block.
std::string metrics_to_json(const Metrics& metrics,
                            const std::string& dataset_name,
                            const std::string& provenance_json = "");

}  // namespace radloc
