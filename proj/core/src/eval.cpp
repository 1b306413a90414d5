#include "radloc/eval.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>

#include <nlohmann/json.hpp>

#include "radloc/errors.hpp"
#include "radloc/rng.hpp"
#include "radloc/stats.hpp"

namespace radloc {

using nlohmann::json;

double circular_error(double pred_deg, double truth_deg) {
  if (!std::isfinite(pred_deg) || !std::isfinite(truth_deg))
    throw NumericError("circular_error: non-finite angle");
  const double delta = std::fmod(std::abs(pred_deg - truth_deg), 360.0);
  return std::min(delta, 360.0 - delta);
}

std::pair<double, double> mean_ci95(std::span<const double> values) {
  if (values.size() < 2) throw NumericError("mean_ci95: need n >= 2");
  const double m = mean(values);
  const double s = sample_stddev(values);
  return {m, 1.96 * s / std::sqrt(static_cast<double>(values.size()))};
}

namespace {

std::pair<double, double> ci_of(std::span<const double> values,
                                const EvalOptions& options) {
  if (!options.bootstrap) return mean_ci95(values);
  // Percentile bootstrap on the mean.
  Xoshiro256pp rng(options.bootstrap_seed);
  std::vector<double> means(static_cast<std::size_t>(options.bootstrap_resamples));
  for (auto& replicate : means) {
    double acc = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i)
      acc += values[rng.below(values.size())];
    replicate = acc / static_cast<double>(values.size());
  }
  std::sort(means.begin(), means.end());
  const double lo = quantile_sorted(means, 0.025);
  const double hi = quantile_sorted(means, 0.975);
  return {mean(values), 0.5 * (hi - lo)};
}

struct PredictionRow {
  double predicted_value = 0.0;  // degrees or bin midpoint
  int predicted_class = -1;      // -1 for reference tables
};

Metrics evaluate_rows(const std::vector<PredictionRow>& rows,
                      const Dataset& test, TargetKind target,
                      const EvalOptions& options) {
  Metrics metrics;
  metrics.target = to_string(target);
  metrics.n = static_cast<int>(test.samples.size());

  std::map<double, std::vector<std::size_t>> by_distance;
  for (std::size_t i = 0; i < test.samples.size(); ++i)
    by_distance[test.samples[i].true_distance_m].push_back(i);

  const auto angle_hit = [&](std::size_t i) {
    if (rows[i].predicted_class >= 0)
      return rows[i].predicted_class == test.samples[i].angle_class;
    // Reference tables predict raw angles; exact match up to rounding.
    return circular_error(rows[i].predicted_value,
                          test.samples[i].true_angle_deg) < 1e-9;
  };

  if (target == TargetKind::kAngle) {
    std::vector<double> errors(test.samples.size());
    std::size_t hits = 0;
    for (std::size_t i = 0; i < test.samples.size(); ++i) {
      errors[i] =
          circular_error(rows[i].predicted_value, test.samples[i].true_angle_deg);
      if (angle_hit(i)) ++hits;
    }
    metrics.angle_accuracy =
        static_cast<double>(hits) / static_cast<double>(test.samples.size());
    if (errors.size() >= 2) {
      const auto [m, hw] = ci_of(errors, options);
      metrics.mean_angular_error_deg = m;
      metrics.angular_error_ci95 = hw;
    } else {
      metrics.mean_angular_error_deg = errors.empty() ? 0.0 : errors.front();
      metrics.angular_error_ci95 = 0.0;
    }
    for (const auto& [distance, idx] : by_distance) {
      DistanceBreakdownRow row;
      row.distance_m = distance;
      row.n = static_cast<int>(idx.size());
      double err_acc = 0.0;
      int dist_hits = 0;
      for (std::size_t i : idx) {
        err_acc += errors[i];
        if (angle_hit(i)) ++dist_hits;
      }
      row.mean_angular_error_deg = err_acc / static_cast<double>(idx.size());
      row.angle_accuracy =
          static_cast<double>(dist_hits) / static_cast<double>(idx.size());
      metrics.by_distance.push_back(row);
    }
    return metrics;
  }

  // Distance-bin target.
  std::vector<double> rel_errors(test.samples.size());
  std::size_t hits = 0;
  for (std::size_t i = 0; i < test.samples.size(); ++i) {
    const Sample& sample = test.samples[i];
    if (rows[i].predicted_class == sample.distance_bin) ++hits;
    rel_errors[i] = 100.0 *
                    std::abs(rows[i].predicted_value - sample.true_distance_m) /
                    sample.true_distance_m;
  }
  metrics.distance_bin_accuracy =
      static_cast<double>(hits) / static_cast<double>(test.samples.size());
  if (rel_errors.size() >= 2) {
    const auto [m, hw] = ci_of(rel_errors, options);
    metrics.mean_relative_distance_error_pct = m;
    metrics.relative_distance_error_ci95 = hw;
  } else {
    metrics.mean_relative_distance_error_pct =
        rel_errors.empty() ? 0.0 : rel_errors.front();
    metrics.relative_distance_error_ci95 = 0.0;
  }
  metrics.median_relative_distance_error_pct = quantile(rel_errors, 0.5);
  for (const auto& [distance, idx] : by_distance) {
    DistanceBreakdownRow row;
    row.distance_m = distance;
    row.n = static_cast<int>(idx.size());
    int dist_hits = 0;
    for (std::size_t i : idx)
      if (rows[i].predicted_class == test.samples[i].distance_bin) ++dist_hits;
    row.distance_bin_accuracy =
        static_cast<double>(dist_hits) / static_cast<double>(idx.size());
    metrics.by_distance.push_back(row);
  }
  return metrics;
}

}  // namespace

Metrics evaluate_model(const TrainedModel& model, const Dataset& test,
                       const EvalOptions& options) {
  if (test.samples.empty()) throw SchemaError("evaluate: empty test set");
  if (test.feature_dim() != model.input_dim &&
      model.scaler.kind == ScalerKind::kRobust)
    throw SchemaError("evaluate: feature width mismatch");
  if (options.expect_pipeline && *options.expect_pipeline != model.scaler.kind)
    throw SchemaError("evaluate: pipeline mismatch (model was trained with " +
                      to_string(model.scaler.kind) + ")");

  std::vector<PredictionRow> rows(test.samples.size());
  for (std::size_t i = 0; i < test.samples.size(); ++i) {
    const int cls = model.predict(test.samples[i].counts);
    rows[i].predicted_class = cls;
    rows[i].predicted_value =
        static_cast<std::size_t>(cls) < model.class_values.size()
            ? model.class_values[static_cast<std::size_t>(cls)]
            : 0.0;
  }
  Metrics metrics = evaluate_rows(rows, test, model.target, options);
  metrics.predictor = to_string(model.kind);
  metrics.scaler = to_string(model.scaler.kind);
  return metrics;
}

Metrics evaluate_reference_table(const ReferenceTable& table,
                                 const Dataset& test,
                                 const EvalOptions& options) {
  if (test.samples.empty()) throw SchemaError("evaluate: empty test set");
  if (test.feature_dim() != table.responses.cols)
    throw SchemaError("evaluate: feature width mismatch");
  if (options.expect_pipeline && *options.expect_pipeline != ScalerKind::kNone)
    throw SchemaError(
        "evaluate: pipeline mismatch (reference table compares raw counts)");

  std::vector<PredictionRow> rows(test.samples.size());
  for (std::size_t i = 0; i < test.samples.size(); ++i)
    rows[i].predicted_value = predict_angle(table, test.samples[i].counts);
  Metrics metrics = evaluate_rows(rows, test, TargetKind::kAngle, options);
  metrics.predictor = "reference_table";
  metrics.scaler = "none";
  return metrics;
}

Metrics evaluate_predictor(const Predictor& predictor, const Dataset& test,
                           const EvalOptions& options) {
  if (const auto* model = std::get_if<TrainedModel>(&predictor))
    return evaluate_model(*model, test, options);
  return evaluate_reference_table(std::get<ReferenceTable>(predictor), test,
                                  options);
}

namespace {

void append_cell(std::string& out, double v) {
  if (v < 0.0) {  // not populated for this target
    out += "na";
    return;
  }
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, res.ptr);
}

}  // namespace

void write_metrics_csv(std::span<const Metrics> metrics,
                       const std::filesystem::path& path,
                       const std::string& dataset_name) {
  std::string out =
      "predictor,scaler,target,dataset,distance_m,n,angle_accuracy,"
      "mean_angular_error_deg,angular_error_ci95,distance_bin_accuracy,"
      "mean_relative_distance_error_pct,relative_distance_error_ci95\n";
  const auto row = [&](const Metrics& m, const std::string& distance,
                       int n, double angle_acc, double angle_err,
                       double angle_ci, double dist_acc, double rel_err,
                       double rel_ci) {
    out += m.predictor + ',' + m.scaler + ',' + m.target + ',' + dataset_name +
           ',' + distance + ',' + std::to_string(n) + ',';
    append_cell(out, angle_acc);
    out += ',';
    append_cell(out, angle_err);
    out += ',';
    append_cell(out, angle_ci);
    out += ',';
    append_cell(out, dist_acc);
    out += ',';
    append_cell(out, rel_err);
    out += ',';
    append_cell(out, rel_ci);
    out += '\n';
  };
  for (const Metrics& m : metrics) {
    row(m, "all", m.n, m.angle_accuracy, m.mean_angular_error_deg,
        m.angular_error_ci95, m.distance_bin_accuracy,
        m.mean_relative_distance_error_pct, m.relative_distance_error_ci95);
    for (const DistanceBreakdownRow& d : m.by_distance) {
      char buf[32];
      const auto res = std::to_chars(buf, buf + sizeof(buf), d.distance_m);
      row(m, std::string(buf, res.ptr), d.n,
          m.target == "angle" ? d.angle_accuracy : -1.0,
          m.target == "angle" ? d.mean_angular_error_deg : -1.0, -1.0,
          m.target == "distance" ? d.distance_bin_accuracy : -1.0, -1.0, -1.0);
    }
  }
  std::ofstream file(path, std::ios::binary);
  if (!file)
    throw SchemaError("metrics: cannot open for writing: " + path.string());
  file.write(out.data(), static_cast<std::streamsize>(out.size()));
}

std::string metrics_to_json(const Metrics& metrics,
                            const std::string& dataset_name,
                            const std::string& provenance_json) {
  json by_distance = json::array();
  for (const DistanceBreakdownRow& d : metrics.by_distance) {
    json row{{"distance_m", d.distance_m}, {"n", d.n}};
    if (metrics.target == "angle") {
      row["angle_accuracy"] = d.angle_accuracy;
      row["mean_angular_error_deg"] = d.mean_angular_error_deg;
    } else {
      row["distance_bin_accuracy"] = d.distance_bin_accuracy;
    }
    by_distance.push_back(std::move(row));
  }
  json j{{"predictor", metrics.predictor},
         {"scaler", metrics.scaler},
         {"target", metrics.target},
         {"dataset", dataset_name},
         {"n", metrics.n},
         {"by_distance", std::move(by_distance)}};
  if (metrics.target == "angle") {
    j["angle_accuracy"] = metrics.angle_accuracy;
    j["mean_angular_error_deg"] = metrics.mean_angular_error_deg;
    j["angular_error_ci95"] = metrics.angular_error_ci95;
  } else {
    j["distance_bin_accuracy"] = metrics.distance_bin_accuracy;
    j["mean_relative_distance_error_pct"] =
        metrics.mean_relative_distance_error_pct;
    j["relative_distance_error_ci95"] = metrics.relative_distance_error_ci95;
    j["median_relative_distance_error_pct"] =
        metrics.median_relative_distance_error_pct;
  }
  j["provenance"] =
      provenance_json.empty() ? json(nullptr) : json::parse(provenance_json);
  return j.dump(2);
}

}  // namespace radloc
