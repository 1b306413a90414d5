#include "radloc/scaling.hpp"

#include <algorithm>
#include <cmath>

#include "radloc/errors.hpp"
#include "radloc/stats.hpp"

namespace radloc {

RobustParams fit_robust(const Matrix& train) {
  if (train.empty()) throw NumericError("fit_robust: empty matrix");
  RobustParams params;
  params.median.resize(train.cols);
  params.scale.resize(train.cols);
  std::vector<double> column(train.rows);
  for (std::size_t c = 0; c < train.cols; ++c) {
    for (std::size_t r = 0; r < train.rows; ++r) column[r] = train.at(r, c);
    std::sort(column.begin(), column.end());
    params.median[c] = quantile_sorted(column, 0.5);
    const double iqr =
        quantile_sorted(column, 0.75) - quantile_sorted(column, 0.25);
    params.scale[c] = iqr > 0.0 ? iqr : 1.0;
  }
  return params;
}

std::vector<double> transform_robust(const RobustParams& params,
                                     std::span<const double> x) {
  if (x.size() != params.median.size())
    throw SchemaError("transform_robust: dimension mismatch");
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    out[i] = (x[i] - params.median[i]) / params.scale[i];
  return out;
}

namespace {

double norm_lp(std::span<const double> x, double p) {
  if (p == 2.0) {
    double acc = 0.0;
    for (double v : x) acc += v * v;
    return std::sqrt(acc);
  }
  if (p == 1.0) {
    double acc = 0.0;
    for (double v : x) acc += std::abs(v);
    return acc;
  }
  double acc = 0.0;
  for (double v : x) acc += std::pow(std::abs(v), p);
  return std::pow(acc, 1.0 / p);
}

}  // namespace

std::vector<double> unit_norm(std::span<const double> x, NormSpec spec) {
  if (spec.p < 1.0) throw UsageError("unit_norm: p < 1");
  const double norm = norm_lp(x, spec.p);
  if (norm == 0.0) throw NumericError("unit_norm: zero vector");
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] / norm;
  return out;
}

std::string to_string(ScalerKind kind) {
  switch (kind) {
    case ScalerKind::kNone: return "none";
    case ScalerKind::kUnitNorm: return "unit_norm";
    case ScalerKind::kRobust: return "robust";
  }
  return "none";
}

ScalerKind scaler_kind_from_string(const std::string& name) {
  if (name == "none" || name == "raw") return ScalerKind::kNone;
  if (name == "unit_norm" || name == "unit-norm") return ScalerKind::kUnitNorm;
  if (name == "robust") return ScalerKind::kRobust;
  throw UsageError("unknown scaler: " + name);
}

ScalerParams ScalerParams::fit(ScalerKind kind, const Matrix& train,
                               NormSpec norm) {
  ScalerParams params;
  params.kind = kind;
  params.norm = norm;
  if (kind == ScalerKind::kRobust) params.robust = fit_robust(train);
  return params;
}

std::vector<double> ScalerParams::transform(std::span<const double> x) const {
  switch (kind) {
    case ScalerKind::kNone:
      return {x.begin(), x.end()};
    case ScalerKind::kRobust:
      return transform_robust(robust, x);
    case ScalerKind::kUnitNorm: {
      bool all_zero = true;
      for (double v : x)
        if (v != 0.0) {
          all_zero = false;
          break;
        }
      if (all_zero) return std::vector<double>(x.size(), 0.0);
      return unit_norm(x, norm);
    }
  }
  return {x.begin(), x.end()};
}

std::size_t ScalerParams::transform_all(const Matrix& in, Matrix& out) const {
  out = Matrix(in.rows, in.cols);
  std::size_t degenerate = 0;
  for (std::size_t r = 0; r < in.rows; ++r) {
    const auto row = in.row(r);
    if (kind == ScalerKind::kUnitNorm) {
      bool all_zero = true;
      for (double v : row)
        if (v != 0.0) {
          all_zero = false;
          break;
        }
      if (all_zero) ++degenerate;
    }
    const auto transformed = transform(row);
    std::copy(transformed.begin(), transformed.end(),
              out.data.begin() + static_cast<std::ptrdiff_t>(r * in.cols));
  }
  return degenerate;
}

}  // namespace radloc
