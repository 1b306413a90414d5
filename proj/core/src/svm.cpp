#include <cmath>
#include <cstdio>
#include <limits>

#include "model_fit.hpp"
#include "radloc/errors.hpp"

namespace radloc::detail {

namespace {

// Sequential minimal optimization for one soft-margin RBF task, after Platt.
// Everything is index-ordered and RNG-free, so training is deterministic.
class Smo {
 public:
  Smo(const Matrix& x, std::vector<double> y, double c, double gamma,
      double tol, int max_passes)
      : x_(x),
        y_(std::move(y)),
        c_(c),
        gamma_(gamma),
        tol_(tol),
        max_passes_(max_passes),
        m_(x.rows),
        alpha_(x.rows, 0.0),
        error_(x.rows) {
    sq_norm_.resize(m_);
    for (std::size_t i = 0; i < m_; ++i) {
      double acc = 0.0;
      for (double v : x_.row(i)) acc += v * v;
      sq_norm_[i] = acc;
    }
    // f = 0 everywhere at the start.
    for (std::size_t i = 0; i < m_; ++i) error_[i] = -y_[i];
  }

  void solve() {
    bool examine_all = true;
    int passes = 0;
    while (passes < max_passes_) {
      int changed = 0;
      if (examine_all) {
        for (std::size_t i = 0; i < m_; ++i) changed += examine(i);
      } else {
        for (std::size_t i = 0; i < m_; ++i)
          if (is_free(i)) changed += examine(i);
      }
      ++passes;
      if (examine_all) {
        if (changed == 0) break;
        examine_all = false;
      } else if (changed == 0) {
        examine_all = true;
      }
    }
  }

  const std::vector<double>& alpha() const { return alpha_; }
  double bias() const { return b_; }

 private:
  bool is_free(std::size_t i) const {
    return alpha_[i] > 0.0 && alpha_[i] < c_;
  }

  double kernel(std::size_t i, std::size_t j) const {
    const auto a = x_.row(i);
    const auto b = x_.row(j);
    double dot = 0.0;
    for (std::size_t d = 0; d < a.size(); ++d) dot += a[d] * b[d];
    return std::exp(-gamma_ * (sq_norm_[i] + sq_norm_[j] - 2.0 * dot));
  }

  int examine(std::size_t i2) {
    const double r2 = error_[i2] * y_[i2];
    if (!((r2 < -tol_ && alpha_[i2] < c_) || (r2 > tol_ && alpha_[i2] > 0.0)))
      return 0;

    // Second-choice heuristic: the free point with maximal |E1 - E2|.
    std::size_t best = m_;
    double best_gap = -1.0;
    for (std::size_t i = 0; i < m_; ++i) {
      if (!is_free(i)) continue;
      const double gap = std::abs(error_[i] - error_[i2]);
      if (gap > best_gap) {
        best_gap = gap;
        best = i;
      }
    }
    if (best < m_ && take_step(best, i2)) return 1;
    for (std::size_t off = 1; off <= m_; ++off) {
      const std::size_t i1 = (i2 + off) % m_;
      if (is_free(i1) && take_step(i1, i2)) return 1;
    }
    for (std::size_t off = 1; off <= m_; ++off) {
      const std::size_t i1 = (i2 + off) % m_;
      if (!is_free(i1) && take_step(i1, i2)) return 1;
    }
    return 0;
  }

  bool take_step(std::size_t i1, std::size_t i2) {
    if (i1 == i2) return false;
    const double a1 = alpha_[i1];
    const double a2 = alpha_[i2];
    const double y1 = y_[i1];
    const double y2 = y_[i2];
    const double e1 = error_[i1];
    const double e2 = error_[i2];
    const double s = y1 * y2;

    double lo;
    double hi;
    if (s < 0.0) {
      lo = std::max(0.0, a2 - a1);
      hi = std::min(c_, c_ + a2 - a1);
    } else {
      lo = std::max(0.0, a1 + a2 - c_);
      hi = std::min(c_, a1 + a2);
    }
    if (lo >= hi) return false;

    const double k11 = kernel(i1, i1);
    const double k12 = kernel(i1, i2);
    const double k22 = kernel(i2, i2);
    const double eta = k11 + k22 - 2.0 * k12;

    double a2_new;
    if (eta > 0.0) {
      a2_new = a2 + y2 * (e1 - e2) / eta;
      a2_new = std::min(hi, std::max(lo, a2_new));
    } else {
      // Degenerate (duplicate points): evaluate the objective at the ends.
      const double f1 = y1 * e1 - a1 * k11 - s * a2 * k12;
      const double f2 = y2 * e2 - s * a1 * k12 - a2 * k22;
      const double l1 = a1 + s * (a2 - lo);
      const double h1 = a1 + s * (a2 - hi);
      const double obj_lo = l1 * f1 + lo * f2 + 0.5 * l1 * l1 * k11 +
                            0.5 * lo * lo * k22 + s * lo * l1 * k12;
      const double obj_hi = h1 * f1 + hi * f2 + 0.5 * h1 * h1 * k11 +
                            0.5 * hi * hi * k22 + s * hi * h1 * k12;
      if (obj_lo < obj_hi - 1e-12) a2_new = lo;
      else if (obj_hi < obj_lo - 1e-12) a2_new = hi;
      else return false;
    }
    if (std::abs(a2_new - a2) < 1e-8 * (a2_new + a2 + 1e-8)) return false;
    const double a1_new = a1 + s * (a2 - a2_new);

    // Bias so that a free multiplier sits exactly on its margin.
    const double b1 = b_ - e1 - y1 * (a1_new - a1) * k11 -
                      y2 * (a2_new - a2) * k12;
    const double b2 = b_ - e2 - y1 * (a1_new - a1) * k12 -
                      y2 * (a2_new - a2) * k22;
    double b_new;
    if (a1_new > 0.0 && a1_new < c_) b_new = b1;
    else if (a2_new > 0.0 && a2_new < c_) b_new = b2;
    else b_new = 0.5 * (b1 + b2);

    const double d1 = y1 * (a1_new - a1);
    const double d2 = y2 * (a2_new - a2);
    const double db = b_new - b_;
    for (std::size_t i = 0; i < m_; ++i)
      error_[i] += d1 * kernel(i1, i) + d2 * kernel(i2, i) + db;

    alpha_[i1] = a1_new;
    alpha_[i2] = a2_new;
    b_ = b_new;
    return true;
  }

  const Matrix& x_;
  std::vector<double> y_;
  double c_;
  double gamma_;
  double tol_;
  int max_passes_;
  std::size_t m_;
  std::vector<double> alpha_;
  std::vector<double> error_;
  std::vector<double> sq_norm_;
  double b_ = 0.0;
};

}  // namespace

SvmParams fit_svm(const ModelConfig& config, const LabeledMatrix& data) {
  SvmParams params;
  params.train = data.features;

  // gamma = 1 / (n_features * variance of all feature entries).
  double mean = 0.0;
  for (double v : data.features.data) mean += v;
  mean /= static_cast<double>(data.features.data.size());
  double var = 0.0;
  for (double v : data.features.data) var += (v - mean) * (v - mean);
  var /= static_cast<double>(data.features.data.size());
  if (var > 0.0) {
    params.gamma = 1.0 / (static_cast<double>(data.features.cols) * var);
  } else {
    params.gamma = 1.0;
    std::fprintf(stderr,
                 "radloc: svm: degenerate features (zero variance); "
                 "falling back to gamma = 1\n");
  }

  const auto k = static_cast<std::size_t>(data.n_classes);
  params.dual_coef = Matrix(k, data.features.rows);
  params.bias.resize(k);
  std::vector<double> y(data.features.rows);
  for (std::size_t cls = 0; cls < k; ++cls) {
    for (std::size_t i = 0; i < y.size(); ++i)
      y[i] = data.labels[i] == static_cast<int>(cls) ? 1.0 : -1.0;
    Smo smo(data.features, y, config.svm_c, params.gamma, config.svm_tol,
            config.svm_max_passes);
    smo.solve();
    for (std::size_t i = 0; i < y.size(); ++i)
      params.dual_coef.at(cls, i) = smo.alpha()[i] * y[i];
    params.bias[cls] = smo.bias();
  }
  return params;
}

}  // namespace radloc::detail

namespace radloc {

double SvmParams::decision(int cls, std::span<const double> x) const {
  double sq_x = 0.0;
  for (double v : x) sq_x += v * v;
  double acc = bias[static_cast<std::size_t>(cls)];
  for (std::size_t i = 0; i < train.rows; ++i) {
    const double coef = dual_coef.at(static_cast<std::size_t>(cls), i);
    if (coef == 0.0) continue;
    const auto xi = train.row(i);
    double dot = 0.0;
    double sq_i = 0.0;
    for (std::size_t d = 0; d < x.size(); ++d) {
      dot += xi[d] * x[d];
      sq_i += xi[d] * xi[d];
    }
    acc += coef * std::exp(-gamma * (sq_x + sq_i - 2.0 * dot));
  }
  return acc;
}

}  // namespace radloc
