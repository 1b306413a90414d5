#include <algorithm>
#include <cmath>

#include "model_fit.hpp"
#include "radloc/lbfgs.hpp"

namespace radloc::detail {

// Multinomial softmax regression. Flat parameter layout is row-major
// (n_features + 1) x n_classes with the bias in the last row; the objective
// is mean NLL + (l2/2)*||weights||^2 with the bias excluded from the penalty.
LogRegParams fit_logreg(const ModelConfig& config, const LabeledMatrix& data) {
  const std::size_t n = data.features.cols;
  const auto k = static_cast<std::size_t>(data.n_classes);
  const std::size_t m = data.features.rows;
  const double inv_m = 1.0 / static_cast<double>(m);
  const double l2 = config.logreg_l2;

  const LbfgsObjective objective = [&](std::span<const double> w,
                                       std::span<double> grad) {
    std::fill(grad.begin(), grad.end(), 0.0);
    double loss = 0.0;
    std::vector<double> z(k);
    for (std::size_t i = 0; i < m; ++i) {
      const auto x = data.features.row(i);
      for (std::size_t c = 0; c < k; ++c) {
        double acc = w[n * k + c];  // bias row
        for (std::size_t j = 0; j < n; ++j) acc += w[j * k + c] * x[j];
        z[c] = acc;
      }
      const double zmax = *std::max_element(z.begin(), z.end());
      double sum = 0.0;
      for (std::size_t c = 0; c < k; ++c) {
        z[c] = std::exp(z[c] - zmax);
        sum += z[c];
      }
      const auto label = static_cast<std::size_t>(data.labels[i]);
      loss -= inv_m * std::log(z[label] / sum);
      for (std::size_t c = 0; c < k; ++c) {
        const double delta = (z[c] / sum - (c == label ? 1.0 : 0.0)) * inv_m;
        for (std::size_t j = 0; j < n; ++j) grad[j * k + c] += delta * x[j];
        grad[n * k + c] += delta;
      }
    }
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t c = 0; c < k; ++c) {
        loss += 0.5 * l2 * w[j * k + c] * w[j * k + c];
        grad[j * k + c] += l2 * w[j * k + c];
      }
    return loss;
  };

  LbfgsOptions options;
  options.max_iterations = config.logreg_iterations;
  options.memory = 10;
  LbfgsResult result =
      lbfgs_minimize(objective, std::vector<double>((n + 1) * k, 0.0), options);

  LogRegParams params;
  params.weights = Matrix(n + 1, k);
  params.weights.data = std::move(result.x);
  params.objective_trace = std::move(result.objective_trace);
  return params;
}

}  // namespace radloc::detail
