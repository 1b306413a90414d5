#include <algorithm>
#include <cmath>

#include "model_fit.hpp"
#include "radloc/errors.hpp"
#include "radloc/rng.hpp"

namespace radloc {

std::vector<double> MlpParams::flatten() const {
  std::vector<double> flat;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    flat.insert(flat.end(), weights[l].data.begin(), weights[l].data.end());
    flat.insert(flat.end(), biases[l].begin(), biases[l].end());
  }
  return flat;
}

void MlpParams::unflatten(std::span<const double> flat) {
  std::size_t pos = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(pos),
                weights[l].data.size(), weights[l].data.begin());
    pos += weights[l].data.size();
    std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(pos),
                biases[l].size(), biases[l].begin());
    pos += biases[l].size();
  }
}

namespace {

// Forward pass through all layers; activations[l] holds the output of layer
// l (post-ReLU for hidden layers, softmax at the top).
void forward(const MlpParams& net, std::span<const double> x,
             std::vector<std::vector<double>>& activations) {
  const std::size_t n_layers = net.weights.size();
  activations.resize(n_layers + 1);
  activations[0].assign(x.begin(), x.end());
  for (std::size_t l = 0; l < n_layers; ++l) {
    const Matrix& w = net.weights[l];
    const auto& b = net.biases[l];
    auto& out = activations[l + 1];
    out.assign(w.cols, 0.0);
    const auto& in = activations[l];
    for (std::size_t i = 0; i < w.rows; ++i) {
      const double a = in[i];
      if (a == 0.0) continue;
      const double* wrow = w.data.data() + i * w.cols;
      for (std::size_t j = 0; j < w.cols; ++j) out[j] += a * wrow[j];
    }
    for (std::size_t j = 0; j < w.cols; ++j) out[j] += b[j];
    if (l + 1 < n_layers) {
      for (double& v : out) v = std::max(0.0, v);  // ReLU
    } else {
      const double zmax = *std::max_element(out.begin(), out.end());
      double sum = 0.0;
      for (double& v : out) {
        v = std::exp(v - zmax);
        sum += v;
      }
      for (double& v : out) v /= sum;
    }
  }
}

}  // namespace

std::vector<double> MlpParams::softmax_scores(std::span<const double> x) const {
  std::vector<std::vector<double>> activations;
  forward(*this, x, activations);
  return activations.back();
}

double MlpParams::loss_and_gradient(const Matrix& x,
                                    std::span<const int> labels, double l2,
                                    std::span<double> grad) const {
  std::fill(grad.begin(), grad.end(), 0.0);
  const std::size_t n_layers = weights.size();
  const std::size_t batch = x.rows;
  const double inv_batch = 1.0 / static_cast<double>(batch);

  // Gradient slices in flatten() order.
  std::vector<std::span<double>> grad_w(n_layers);
  std::vector<std::span<double>> grad_b(n_layers);
  std::size_t pos = 0;
  for (std::size_t l = 0; l < n_layers; ++l) {
    grad_w[l] = grad.subspan(pos, weights[l].data.size());
    pos += weights[l].data.size();
    grad_b[l] = grad.subspan(pos, biases[l].size());
    pos += biases[l].size();
  }

  double loss = 0.0;
  std::vector<std::vector<double>> activations;
  std::vector<double> delta;
  std::vector<double> delta_prev;
  for (std::size_t s = 0; s < batch; ++s) {
    forward(*this, x.row(s), activations);
    const auto& probs = activations.back();
    const auto label = static_cast<std::size_t>(labels[s]);
    loss -= inv_batch * std::log(std::max(probs[label], 1e-300));

    delta.assign(probs.begin(), probs.end());
    delta[label] -= 1.0;
    for (double& d : delta) d *= inv_batch;

    for (std::size_t l = n_layers; l-- > 0;) {
      const Matrix& w = weights[l];
      const auto& in = activations[l];
      for (std::size_t i = 0; i < w.rows; ++i) {
        const double a = in[i];
        if (a != 0.0) {
          double* gw = grad_w[l].data() + i * w.cols;
          for (std::size_t j = 0; j < w.cols; ++j) gw[j] += a * delta[j];
        }
      }
      for (std::size_t j = 0; j < w.cols; ++j) grad_b[l][j] += delta[j];
      if (l == 0) break;
      delta_prev.assign(w.rows, 0.0);
      for (std::size_t i = 0; i < w.rows; ++i) {
        if (in[i] <= 0.0) continue;  // ReLU gate (in = post-activation)
        const double* wrow = w.data.data() + i * w.cols;
        double acc = 0.0;
        for (std::size_t j = 0; j < w.cols; ++j) acc += wrow[j] * delta[j];
        delta_prev[i] = acc;
      }
      delta.swap(delta_prev);
    }
  }

  for (std::size_t l = 0; l < n_layers; ++l) {
    const auto& wd = weights[l].data;
    for (std::size_t i = 0; i < wd.size(); ++i) {
      loss += 0.5 * l2 * wd[i] * wd[i];
      grad_w[l][i] += l2 * wd[i];
    }
  }
  return loss;
}

namespace detail {

MlpParams fit_mlp(const ModelConfig& config, const LabeledMatrix& data) {
  if (config.mlp_hidden.empty()) throw UsageError("mlp: no hidden layers");
  std::vector<std::size_t> dims;
  dims.push_back(data.features.cols);
  for (int h : config.mlp_hidden) {
    if (h < 1) throw UsageError("mlp: hidden width < 1");
    dims.push_back(static_cast<std::size_t>(h));
  }
  dims.push_back(static_cast<std::size_t>(data.n_classes));

  MlpParams net;
  Xoshiro256pp init_rng(derive_stream(config.seed, 0x311));
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    Matrix w(dims[l], dims[l + 1]);
    const double limit = std::sqrt(6.0 / static_cast<double>(dims[l] + dims[l + 1]));
    for (double& v : w.data) v = (2.0 * init_rng.uniform01() - 1.0) * limit;
    net.weights.push_back(std::move(w));
    net.biases.emplace_back(dims[l + 1], 0.0);
  }

  std::vector<double> params = net.flatten();
  std::vector<double> grad(params.size());
  std::vector<double> adam_m(params.size(), 0.0);
  std::vector<double> adam_v(params.size(), 0.0);
  const double beta1 = config.mlp_adam_beta1;
  const double beta2 = config.mlp_adam_beta2;
  const double eps = config.mlp_adam_epsilon;
  const double lr = config.mlp_learning_rate;
  long step = 0;

  const std::size_t m = data.features.rows;
  const auto batch_size =
      static_cast<std::size_t>(std::max(1, config.mlp_batch));
  std::vector<std::size_t> order(m);
  for (std::size_t i = 0; i < m; ++i) order[i] = i;

  Matrix batch_x;
  std::vector<int> batch_y;
  for (int epoch = 0; epoch < config.mlp_epochs; ++epoch) {
    Xoshiro256pp shuffle_rng(
        derive_stream(config.seed, 0x5EA + static_cast<std::uint64_t>(epoch)));
    for (std::size_t i = m - 1; i > 0; --i)
      std::swap(order[i], order[shuffle_rng.below(i + 1)]);

    for (std::size_t start = 0; start < m; start += batch_size) {
      const std::size_t count = std::min(batch_size, m - start);
      batch_x = Matrix(count, data.features.cols);
      batch_y.resize(count);
      for (std::size_t i = 0; i < count; ++i) {
        const std::size_t src = order[start + i];
        std::copy(data.features.row(src).begin(), data.features.row(src).end(),
                  batch_x.row(i).begin());
        batch_y[i] = data.labels[src];
      }
      net.unflatten(params);
      net.loss_and_gradient(batch_x, batch_y, config.mlp_l2, grad);

      ++step;
      const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step));
      const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step));
      for (std::size_t i = 0; i < params.size(); ++i) {
        adam_m[i] = beta1 * adam_m[i] + (1.0 - beta1) * grad[i];
        adam_v[i] = beta2 * adam_v[i] + (1.0 - beta2) * grad[i] * grad[i];
        params[i] -=
            lr * (adam_m[i] / bc1) / (std::sqrt(adam_v[i] / bc2) + eps);
      }
    }

    net.unflatten(params);
    net.epoch_loss.push_back(
        net.loss_and_gradient(data.features, data.labels, config.mlp_l2, grad));
  }
  net.unflatten(params);
  return net;
}

}  // namespace detail

}  // namespace radloc
