#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "radloc/balltree.hpp"
#include "radloc/dataset.hpp"
#include "radloc/matrix.hpp"
#include "radloc/scaling.hpp"

namespace radloc {

enum class ModelKind { kLogReg, kSvm, kKnn, kDtree, kMlp };
enum class TargetKind { kAngle, kDistance };

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& name);
std::string to_string(TargetKind target);
TargetKind target_from_string(const std::string& name);

/// Hyperparameters for all five kinds; unused fields are ignored. Defaults
/// follow the evaluated configurations: L-BFGS logistic regression (100
/// iterations, L2 1.0), Gini decision tree (depth 10), RBF SVM
/// (gamma = 1/(n_features * variance), C = 1.0), kNN (k = 5, ball tree leaf
/// 30, Minkowski p = 2), and a 3x15 ReLU MLP trained 300 epochs with Adam
/// and L2 1e-4.
struct ModelConfig {
  ModelKind kind = ModelKind::kKnn;
  std::uint64_t seed = 0;

  int logreg_iterations = 100;
  double logreg_l2 = 1.0;

  int dtree_max_depth = 10;

  double svm_c = 1.0;
  double svm_tol = 1e-3;
  int svm_max_passes = 10'000;

  int knn_k = 5;
  int knn_leaf_size = 30;
  double knn_minkowski_p = 2.0;

  std::vector<int> mlp_hidden = {15, 15, 15};
  int mlp_epochs = 300;
  int mlp_batch = 32;
  double mlp_learning_rate = 1e-3;
  double mlp_l2 = 1e-4;
  double mlp_adam_beta1 = 0.9;
  double mlp_adam_beta2 = 0.999;
  double mlp_adam_epsilon = 1e-8;
};

/// Post-scaling training data.
struct LabeledMatrix {
  Matrix features;
  std::vector<int> labels;
  int n_classes = 0;
};

struct LogRegParams {
  Matrix weights;  // (n_features + 1) x n_classes; last row is the bias
  std::vector<double> objective_trace;
};

struct SvmParams {
  double gamma = 1.0;
  Matrix train;      // support data (all training rows)
  Matrix dual_coef;  // n_classes x n_rows: alpha_i * y_i per one-vs-rest task
  std::vector<double> bias;  // per class

  /// One-vs-rest decision value sum_i dual_coef[cls][i] K(x_i, x) + b_cls.
  double decision(int cls, std::span<const double> x) const;
};

struct KnnParams {
  BallTree tree;  // owns the training matrix
  std::vector<int> labels;
};

struct DtreeNode {
  int feature = -1;       // -1 for leaves
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  int leaf_class = -1;
};

struct DtreeParams {
  std::vector<DtreeNode> nodes;  // node 0 is the root
};

struct MlpParams {
  std::vector<Matrix> weights;              // layer l: fan_in x fan_out
  std::vector<std::vector<double>> biases;  // layer l: fan_out
  std::vector<double> epoch_loss;           // full-set objective per epoch

  std::vector<double> flatten() const;
  void unflatten(std::span<const double> flat);

  /// Mean cross-entropy over the batch plus (l2/2)*||W||^2, with gradients
  /// written in flatten() order. Shared by training and gradient checks.
  double loss_and_gradient(const Matrix& x, std::span<const int> labels,
                           double l2, std::span<double> grad) const;
  std::vector<double> softmax_scores(std::span<const double> x) const;
};

struct TrainedModel {
  ModelKind kind = ModelKind::kKnn;
  ModelConfig config;
  TargetKind target = TargetKind::kAngle;
  ScalerParams scaler;
  std::vector<double> class_values;  // angle degrees or bin midpoints
  std::size_t input_dim = 0;
  int n_classes = 0;
  std::variant<LogRegParams, SvmParams, KnnParams, DtreeParams, MlpParams>
      params;

  /// Applies the attached scaler, then classifies.
  int predict(std::span<const double> raw_x) const;
  /// Classifies already-scaled features.
  int classify(std::span<const double> features) const;
  /// class_values[predict(raw_x)].
  double predict_value(std::span<const double> raw_x) const;
};

/// Trains on post-scaling data. Deterministic under (config.seed, data);
/// throws NumericError on an empty class and SchemaError on non-finite
/// features.
TrainedModel fit(const ModelConfig& config, const LabeledMatrix& data);

/// Gini impurity 1 - sum_y (count_y / total)^2. Throws on an empty node.
double gini(std::span<const int> class_counts);

struct SplitCandidate {
  int feature = -1;
  double threshold = 0.0;
  double cost = 0.0;  // weighted child impurity
  bool valid() const { return feature >= 0; }
};

/// Best axis-aligned split of the rows in `rows`: minimizes the weighted
/// Gini over all features and thresholds at midpoints of consecutive sorted
/// distinct values; ties go to the lowest feature index, then the lowest
/// threshold. Invalid candidate when no split strictly improves.
SplitCandidate best_split(const Matrix& features, std::span<const int> labels,
                          std::span<const int> rows, int n_classes);

/// Full pipeline convenience: fits the scaler on the dataset's counts,
/// transforms, and trains against the requested target. The returned model
/// carries the fitted scaler and the class values (grid angles or FD bin
/// midpoints).
struct TrainSpec {
  ModelConfig config;
  ScalerKind scaler = ScalerKind::kNone;
  NormSpec norm;
  TargetKind target = TargetKind::kAngle;
};
TrainedModel train(const TrainSpec& spec, const Dataset& train_ds);

}  // namespace radloc
