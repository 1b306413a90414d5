#include "radloc/models.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "model_fit.hpp"
#include "radloc/errors.hpp"

namespace radloc {

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::kLogReg: return "logreg";
    case ModelKind::kSvm: return "svm";
    case ModelKind::kKnn: return "knn";
    case ModelKind::kDtree: return "dtree";
    case ModelKind::kMlp: return "mlp";
  }
  return "knn";
}

ModelKind model_kind_from_string(const std::string& name) {
  if (name == "logreg") return ModelKind::kLogReg;
  if (name == "svm") return ModelKind::kSvm;
  if (name == "knn") return ModelKind::kKnn;
  if (name == "dtree") return ModelKind::kDtree;
  if (name == "mlp") return ModelKind::kMlp;
  throw UsageError("unknown model kind: " + name);
}

std::string to_string(TargetKind target) {
  return target == TargetKind::kAngle ? "angle" : "distance";
}

TargetKind target_from_string(const std::string& name) {
  if (name == "angle") return TargetKind::kAngle;
  if (name == "distance") return TargetKind::kDistance;
  throw UsageError("unknown target: " + name);
}

namespace {

void validate_training_data(const LabeledMatrix& data) {
  if (data.features.rows == 0 || data.features.cols == 0)
    throw SchemaError("fit: empty training matrix");
  if (data.labels.size() != data.features.rows)
    throw SchemaError("fit: labels/features row mismatch");
  if (data.n_classes < 2) throw SchemaError("fit: need at least 2 classes");
  if (data.features.rows < static_cast<std::size_t>(data.n_classes))
    throw SchemaError("fit: fewer samples than classes");
  for (double v : data.features.data)
    if (!std::isfinite(v)) throw SchemaError("fit: non-finite feature");
  std::vector<int> counts(static_cast<std::size_t>(data.n_classes), 0);
  for (int label : data.labels) {
    if (label < 0 || label >= data.n_classes)
      throw SchemaError("fit: label out of range");
    ++counts[static_cast<std::size_t>(label)];
  }
  for (int c = 0; c < data.n_classes; ++c)
    if (counts[static_cast<std::size_t>(c)] == 0)
      throw NumericError("fit: empty class " + std::to_string(c));
}

int argmax_lowest(std::span<const double> scores) {
  int best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i)
    if (scores[i] > scores[static_cast<std::size_t>(best)])
      best = static_cast<int>(i);
  return best;
}

// One-vs-rest decision values of far-away queries pile up at -1 within a few
// ulps (every task answers "not mine"), so a plain argmax would be decided by
// rounding noise and could flip under a rescaled input. Values within a
// relative 1e-9 of the maximum count as ties and resolve to the lowest class.
int argmax_with_tolerance(std::span<const double> scores) {
  double best = scores[0];
  for (double s : scores) best = std::max(best, s);
  const double cut = best - 1e-9 * std::max(1.0, std::abs(best));
  for (std::size_t i = 0; i < scores.size(); ++i)
    if (scores[i] >= cut) return static_cast<int>(i);
  return 0;
}

int knn_vote(const KnnParams& params, int k, std::span<const double> x,
             int n_classes) {
  const auto neighbors =
      params.tree.query(x, std::min<int>(k, static_cast<int>(params.labels.size())));
  std::vector<int> votes(static_cast<std::size_t>(n_classes), 0);
  for (const auto& [dist, idx] : neighbors)
    ++votes[static_cast<std::size_t>(params.labels[static_cast<std::size_t>(idx)])];
  const int top = *std::max_element(votes.begin(), votes.end());
  // Majority; ties break toward the nearest neighbor among tied classes.
  for (const auto& [dist, idx] : neighbors) {
    const int cls = params.labels[static_cast<std::size_t>(idx)];
    if (votes[static_cast<std::size_t>(cls)] == top) return cls;
  }
  return 0;  // unreachable: neighbors is non-empty
}

}  // namespace

double gini(std::span<const int> class_counts) {
  long total = 0;
  for (int c : class_counts) total += c;
  if (total <= 0) throw NumericError("gini: empty node");
  double acc = 0.0;
  for (int c : class_counts) {
    const double p = static_cast<double>(c) / static_cast<double>(total);
    acc += p * p;
  }
  return 1.0 - acc;
}

TrainedModel fit(const ModelConfig& config, const LabeledMatrix& data) {
  validate_training_data(data);
  TrainedModel model;
  model.kind = config.kind;
  model.config = config;
  model.input_dim = data.features.cols;
  model.n_classes = data.n_classes;
  switch (config.kind) {
    case ModelKind::kLogReg: model.params = detail::fit_logreg(config, data); break;
    case ModelKind::kSvm: model.params = detail::fit_svm(config, data); break;
    case ModelKind::kKnn: model.params = detail::fit_knn(config, data); break;
    case ModelKind::kDtree: model.params = detail::fit_dtree(config, data); break;
    case ModelKind::kMlp: model.params = detail::fit_mlp(config, data); break;
  }
  return model;
}

int TrainedModel::classify(std::span<const double> features) const {
  if (features.size() != input_dim)
    throw SchemaError("predict: dimension mismatch");

  if (const auto* logreg = std::get_if<LogRegParams>(&params)) {
    std::vector<double> scores(static_cast<std::size_t>(n_classes), 0.0);
    for (int c = 0; c < n_classes; ++c) {
      double z = logreg->weights.at(input_dim, static_cast<std::size_t>(c));
      for (std::size_t j = 0; j < input_dim; ++j)
        z += logreg->weights.at(j, static_cast<std::size_t>(c)) * features[j];
      scores[static_cast<std::size_t>(c)] = z;
    }
    return argmax_lowest(scores);
  }
  if (const auto* svm = std::get_if<SvmParams>(&params)) {
    std::vector<double> scores(static_cast<std::size_t>(n_classes));
    for (int c = 0; c < n_classes; ++c)
      scores[static_cast<std::size_t>(c)] = svm->decision(c, features);
    return argmax_with_tolerance(scores);
  }
  if (const auto* knn = std::get_if<KnnParams>(&params))
    return knn_vote(*knn, config.knn_k, features, n_classes);
  if (const auto* dtree = std::get_if<DtreeParams>(&params)) {
    int node = 0;
    while (dtree->nodes[static_cast<std::size_t>(node)].feature >= 0) {
      const DtreeNode& n = dtree->nodes[static_cast<std::size_t>(node)];
      node = features[static_cast<std::size_t>(n.feature)] <= n.threshold
                 ? n.left
                 : n.right;
    }
    return dtree->nodes[static_cast<std::size_t>(node)].leaf_class;
  }
  const auto& mlp = std::get<MlpParams>(params);
  const auto scores = mlp.softmax_scores(features);
  return argmax_lowest(scores);
}

int TrainedModel::predict(std::span<const double> raw_x) const {
  if (scaler.kind == ScalerKind::kRobust &&
      raw_x.size() != scaler.robust.median.size())
    throw SchemaError("predict: dimension mismatch");
  return classify(scaler.transform(raw_x));
}

double TrainedModel::predict_value(std::span<const double> raw_x) const {
  const auto cls = static_cast<std::size_t>(predict(raw_x));
  if (cls >= class_values.size())
    throw SchemaError("predict_value: no class values attached");
  return class_values[cls];
}

TrainedModel train(const TrainSpec& spec, const Dataset& train_ds) {
  if (train_ds.samples.empty()) throw SchemaError("train: empty dataset");

  const std::size_t n_det = train_ds.feature_dim();
  Matrix raw(train_ds.samples.size(), n_det);
  for (std::size_t i = 0; i < train_ds.samples.size(); ++i) {
    if (train_ds.samples[i].counts.size() != n_det)
      throw SchemaError("train: inconsistent feature width");
    std::copy(train_ds.samples[i].counts.begin(),
              train_ds.samples[i].counts.end(),
              raw.data.begin() + static_cast<std::ptrdiff_t>(i * n_det));
  }

  LabeledMatrix data;
  const ScalerParams scaler = ScalerParams::fit(spec.scaler, raw, spec.norm);
  scaler.transform_all(raw, data.features);

  std::vector<double> class_values;
  if (spec.target == TargetKind::kAngle) {
    data.n_classes = static_cast<int>(train_ds.angle_classes_deg.size());
    class_values = train_ds.angle_classes_deg;
    data.labels.reserve(train_ds.samples.size());
    for (const Sample& s : train_ds.samples) data.labels.push_back(s.angle_class);
  } else {
    data.n_classes = train_ds.bin_spec.bins();
    for (int b = 0; b < data.n_classes; ++b)
      class_values.push_back(train_ds.bin_spec.midpoint(b));
    data.labels.reserve(train_ds.samples.size());
    for (const Sample& s : train_ds.samples) data.labels.push_back(s.distance_bin);
  }

  TrainedModel model = fit(spec.config, data);
  model.target = spec.target;
  model.scaler = scaler;
  model.class_values = std::move(class_values);
  return model;
}

}  // namespace radloc
