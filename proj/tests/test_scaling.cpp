#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "radloc/errors.hpp"
#include "radloc/rng.hpp"
#include "radloc/scaling.hpp"
#include "radloc/stats.hpp"

using namespace radloc;

namespace {

Matrix column_matrix(const std::vector<double>& values) {
  Matrix m(values.size(), 1);
  for (std::size_t i = 0; i < values.size(); ++i) m.at(i, 0) = values[i];
  return m;
}

}  // namespace

TEST_CASE("fit_robust: median and interquartile scale") {
  const Matrix m = column_matrix({1, 2, 3, 4, 5, 6, 7, 8, 9});
  const RobustParams params = fit_robust(m);
  CHECK(params.median[0] == doctest::Approx(5.0));
  CHECK(params.scale[0] == doctest::Approx(4.0));  // Q3=7, Q1=3

  const RobustParams again = fit_robust(m);
  CHECK(params.median == again.median);
  CHECK(params.scale == again.scale);
}

TEST_CASE("fit_robust: constant column gets unit scale") {
  const Matrix m = column_matrix({4, 4, 4, 4, 4});
  const RobustParams params = fit_robust(m);
  CHECK(params.median[0] == 4.0);
  CHECK(params.scale[0] == 1.0);
  CHECK_THROWS_AS(fit_robust(Matrix{}), NumericError);
}

TEST_CASE("transform_robust: centering, worked value, affinity") {
  const Matrix m = column_matrix({1, 2, 3, 4, 5, 6, 7, 8, 9});
  const RobustParams params = fit_robust(m);

  CHECK(transform_robust(params, std::vector<double>{5.0})[0] ==
        doctest::Approx(0.0));
  CHECK(transform_robust(params, std::vector<double>{9.0})[0] ==
        doctest::Approx(1.0));

  const auto a = transform_robust(params, std::vector<double>{7.5});
  const auto b = transform_robust(params, std::vector<double>{2.5});
  CHECK(a[0] - b[0] == doctest::Approx((7.5 - 2.5) / 4.0));

  CHECK_THROWS_AS(transform_robust(params, std::vector<double>{1.0, 2.0}),
                  SchemaError);
}

TEST_CASE("unit_norm: worked examples") {
  const auto v = unit_norm(std::vector<double>{3, 4});
  CHECK(v[0] == doctest::Approx(0.6));
  CHECK(v[1] == doctest::Approx(0.8));

  const auto already = unit_norm(std::vector<double>{1, 0, 0, 0}, {3.0});
  CHECK(already == std::vector<double>{1, 0, 0, 0});

  const auto l1 = unit_norm(std::vector<double>{10, 10, 10, 10}, {1.0});
  for (double x : l1) CHECK(x == doctest::Approx(0.25));

  CHECK_THROWS_AS(unit_norm(std::vector<double>{0, 0, 0}), NumericError);
}

TEST_CASE("unit_norm: scale invariance and unit length") {
  Xoshiro256pp rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> x(8);
    for (double& v : x) v = rng.uniform01() * 1000.0;
    const double c = 0.01 + rng.uniform01() * 100.0;
    std::vector<double> cx = x;
    for (double& v : cx) v *= c;

    const auto nx = unit_norm(x);
    const auto ncx = unit_norm(cx);
    for (std::size_t i = 0; i < x.size(); ++i)
      CHECK(nx[i] == doctest::Approx(ncx[i]).epsilon(1e-12));

    double norm = 0.0;
    for (double v : nx) norm += v * v;
    CHECK(std::sqrt(norm) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("pipeline: zero-count sample maps to zeros under unit norm") {
  ScalerParams scaler;
  scaler.kind = ScalerKind::kUnitNorm;
  const auto out = scaler.transform(std::vector<double>{0, 0, 0});
  CHECK(out == std::vector<double>(3, 0.0));

  Matrix m(2, 3);
  m.row(1)[0] = 5.0;
  Matrix transformed;
  CHECK(scaler.transform_all(m, transformed) == 1);
}

TEST_CASE("robust-transformed training matrix is median-0, IQR-1") {
  Xoshiro256pp rng(17);
  Matrix train(64, 5);
  for (double& v : train.data) v = std::floor(rng.uniform01() * 500.0);
  for (std::size_t r = 0; r < train.rows; ++r) train.at(r, 4) = 7.0;  // degenerate

  const ScalerParams scaler = ScalerParams::fit(ScalerKind::kRobust, train);
  Matrix out;
  scaler.transform_all(train, out);

  std::vector<double> column(out.rows);
  for (std::size_t c = 0; c < out.cols; ++c) {
    for (std::size_t r = 0; r < out.rows; ++r) column[r] = out.at(r, c);
    CHECK(std::abs(quantile(column, 0.5)) < 1e-12);
    const double iqr = quantile(column, 0.75) - quantile(column, 0.25);
    if (c < 4) CHECK(iqr == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("both transforms are monotone per coordinate") {
  Xoshiro256pp rng(23);
  Matrix train(32, 3);
  for (double& v : train.data) v = rng.uniform01() * 100.0;
  const ScalerParams robust = ScalerParams::fit(ScalerKind::kRobust, train);
  ScalerParams unit;
  unit.kind = ScalerKind::kUnitNorm;

  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> lo(3), hi(3);
    for (std::size_t i = 0; i < 3; ++i) {
      lo[i] = rng.uniform01() * 100.0;
      hi[i] = lo[i];
    }
    const std::size_t j = rng.below(3);
    hi[j] = lo[j] + 1.0 + rng.uniform01() * 10.0;

    const auto rlo = robust.transform(lo);
    const auto rhi = robust.transform(hi);
    CHECK(rlo[j] < rhi[j]);
  }
}
