#include "model_fit.hpp"
#include "radloc/errors.hpp"

namespace radloc::detail {

KnnParams fit_knn(const ModelConfig& config, const LabeledMatrix& data) {
  if (config.knn_k < 1) throw UsageError("knn: k < 1");
  KnnParams params;
  params.tree =
      BallTree(data.features, config.knn_leaf_size, config.knn_minkowski_p);
  params.labels = data.labels;
  return params;
}

}  // namespace radloc::detail
