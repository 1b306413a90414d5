#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "radloc/errors.hpp"
#include "radloc/reftable.hpp"
#include "radloc/stats.hpp"

using namespace radloc;

namespace {

Scene calibration_scene(double distance_m = 2.0) {
  Scene scene;
  scene.array = ArrayGeometry::make_ring(8);
  scene.source.activity_ci = 10e-6;
  scene.source.pose = {distance_m, 0.0};
  return scene;
}

std::vector<double> grid_angles(double step) {
  std::vector<double> angles;
  for (double a = 0.0; a < 360.0; a += step) angles.push_back(a);
  return angles;
}

}  // namespace

TEST_CASE("noiseless calibration rows equal the analytic expectation") {
  Scene scene = calibration_scene();
  const auto angles = grid_angles(45.0);
  const ReferenceTable table = calibrate(scene, angles, 1, 0, /*noiseless=*/true);
  for (std::size_t a = 0; a < angles.size(); ++a) {
    scene.source.pose.angle_deg = angles[a];
    const CountVector lambda = expected_counts(scene);
    for (std::size_t d = 0; d < lambda.size(); ++d)
      CHECK(table.responses.at(a, d) == lambda[d]);
  }
  CHECK(table.calib_distance_m == 2.0);
}

TEST_CASE("rows at 45-degree offsets are cyclic shifts of each other") {
  const Scene scene = calibration_scene();
  const auto angles = grid_angles(5.0);
  const ReferenceTable table = calibrate(scene, angles, 1, 0, true);
  const std::size_t rows = table.responses.rows;
  const std::size_t shift = 45 / 5;
  for (std::size_t a = 0; a + shift < rows; a += 7) {
    for (std::size_t d = 0; d < 8; ++d)
      CHECK(table.responses.at(a + shift, (d + 1) % 8) ==
            doctest::Approx(table.responses.at(a, d)).epsilon(1e-9));
  }
}

TEST_CASE("row standard error shrinks like sqrt(replicates)") {
  const Scene scene = calibration_scene();
  const std::vector<double> angles{0.0};

  const auto spread = [&](int replicates) {
    std::vector<double> values;
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
      const ReferenceTable t = calibrate(scene, angles, replicates, seed);
      values.push_back(t.responses.at(0, 0));
    }
    return sample_stddev(values);
  };

  const double wide = spread(10);
  const double tight = spread(1000);
  CHECK(wide / tight > 5.0);   // ideal ratio 10
  CHECK(wide / tight < 20.0);
}

TEST_CASE("predict_angle: exact on calibration rows, member of the grid") {
  const Scene scene = calibration_scene();
  const auto angles = grid_angles(5.0);
  const ReferenceTable table = calibrate(scene, angles, 25, 3);
  for (std::size_t a = 0; a < angles.size(); a += 5)
    CHECK(predict_angle(table, table.responses.row(a)) == angles[a]);
}

TEST_CASE("noiseless queries on the calibration grid recover every angle") {
  Scene scene = calibration_scene();
  const auto angles = grid_angles(5.0);
  const ReferenceTable table = calibrate(scene, angles, 1, 0, true);
  for (double truth : angles) {
    scene.source.pose.angle_deg = truth;
    CHECK(predict_angle(table, expected_counts(scene)) == truth);
  }
}

TEST_CASE("ties break toward the smallest angle") {
  ReferenceTable table;
  table.calib_angles_deg = {10.0, 50.0, 200.0};
  table.responses = Matrix(3, 2);
  table.responses.row(0)[0] = 1.0;
  table.responses.row(2)[0] = 1.0;  // duplicate of row 0 at a larger angle
  table.responses.row(1)[0] = 9.0;
  CHECK(predict_angle(table, std::vector<double>{1.0, 0.0}) == 10.0);
}

TEST_CASE("queries far from the calibration distance degrade") {
  Scene scene = calibration_scene(2.0);
  const auto angles = grid_angles(5.0);
  const ReferenceTable table = calibrate(scene, angles, 100, 9);

  const auto mean_error = [&](double query_distance) {
    Scene q = scene;
    q.source.pose.distance_m = query_distance;
    double acc = 0.0;
    int n = 0;
    for (double truth : angles) {
      q.source.pose.angle_deg = truth;
      const CountVector counts =
          sample_counts(expected_counts(q), 1000 + static_cast<std::uint64_t>(n));
      const double pred = predict_angle(table, counts);
      const double delta = std::fmod(std::abs(pred - truth), 360.0);
      acc += std::min(delta, 360.0 - delta);
      ++n;
    }
    return acc / n;
  };

  CHECK(mean_error(10.0) > mean_error(2.0));
}

TEST_CASE("normalized-query variant is amplitude-blind") {
  const Scene scene = calibration_scene(2.0);
  const auto angles = grid_angles(15.0);
  const ReferenceTable table = calibrate(scene, angles, 1, 0, true);
  for (std::size_t a = 0; a < angles.size(); a += 3) {
    std::vector<double> scaled(table.responses.row(a).begin(),
                               table.responses.row(a).end());
    for (double& v : scaled) v *= 40.0;  // e.g. a much stronger source
    CHECK(predict_angle(table, scaled, /*normalize_query=*/true) == angles[a]);
  }
}

TEST_CASE("predict_angle rejects mismatched dimensions") {
  const Scene scene = calibration_scene();
  const ReferenceTable table = calibrate(scene, grid_angles(45.0), 1, 0, true);
  CHECK_THROWS_AS(predict_angle(table, std::vector<double>{1.0, 2.0}),
                  SchemaError);
}
