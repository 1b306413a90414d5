#pragma once

#include "radloc/models.hpp"

namespace radloc::detail {

LogRegParams fit_logreg(const ModelConfig& config, const LabeledMatrix& data);
SvmParams fit_svm(const ModelConfig& config, const LabeledMatrix& data);
KnnParams fit_knn(const ModelConfig& config, const LabeledMatrix& data);
DtreeParams fit_dtree(const ModelConfig& config, const LabeledMatrix& data);
MlpParams fit_mlp(const ModelConfig& config, const LabeledMatrix& data);

}  // namespace radloc::detail
