#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "radloc/matrix.hpp"

namespace radloc {

/// Per-sample l_p normalization order.
struct NormSpec {
  double p = 2.0;  // >= 1
};

/// Per-feature median and interquartile scale fitted on training data.
/// Degenerate features (zero IQR) get scale 1 so transforms stay finite.
struct RobustParams {
  std::vector<double> median;
  std::vector<double> scale;
};

/// fit on an M x N training matrix: column medians and (Q3 - Q1) with the
/// linear-interpolation quantile convention.
RobustParams fit_robust(const Matrix& train);

/// (x - median) / scale, elementwise.
std::vector<double> transform_robust(const RobustParams& params,
                                     std::span<const double> x);

/// x / ||x||_p. Throws NumericError on the zero vector; the pipeline level
/// maps that case to all-zeros instead (see ScalerParams::transform).
std::vector<double> unit_norm(std::span<const double> x, NormSpec spec = {});

enum class ScalerKind { kNone, kUnitNorm, kRobust };

std::string to_string(ScalerKind kind);
ScalerKind scaler_kind_from_string(const std::string& name);

/// A fitted feature pipeline: raw pass-through, per-sample unit norm, or
/// robust standardization. Immutable after fit; transforms are pure.
struct ScalerParams {
  ScalerKind kind = ScalerKind::kNone;
  NormSpec norm;        // kUnitNorm
  RobustParams robust;  // kRobust

  static ScalerParams fit(ScalerKind kind, const Matrix& train,
                          NormSpec norm = {});

  /// Zero-count samples under unit norm come back as all-zeros rather than
  /// erroring, so evaluation survives pathological draws; callers that care
  /// use transform_all and report the degenerate count.
  std::vector<double> transform(std::span<const double> x) const;

  /// Transforms every row; returns the number of degenerate (zero-norm) rows.
  std::size_t transform_all(const Matrix& in, Matrix& out) const;
};

}  // namespace radloc
