#include <cmath>

#include "radloc/dataset.hpp"
#include "radloc/errors.hpp"

namespace radloc {

namespace {

std::vector<double> arange(double start, double stop_inclusive, double step) {
  std::vector<double> values;
  const auto n = static_cast<int>(std::floor((stop_inclusive - start) / step + 0.5));
  for (int k = 0; k <= n; ++k) values.push_back(start + k * step);
  return values;
}

Scene s_scene() {
  Scene scene;
  scene.array = ArrayGeometry::make_ring(8);
  scene.source.activity_ci = 10e-6;  // 10 uCi
  scene.source.photons_per_decay = 2.0;
  scene.acquisition.live_time_s = 14.0;
  scene.acquisition.background_cps = 5.0;
  return scene;
}

Scene l_scene() {
  Scene scene;
  scene.array = ArrayGeometry::make_ring(4);
  scene.source.activity_ci = 1e-6;  // lab source, ~1 uCi
  scene.source.photons_per_decay = 2.0;
  scene.acquisition.live_time_s = 300.0;  // 5 minute counts
  scene.acquisition.background_cps = 5.0;
  return scene;
}

// Fixed wall mimicking a concrete building face: 1 m thick, 5 m long,
// centered 3.5 m out on the +x axis.
Obstruction s2_wall() {
  Obstruction wall;
  wall.center = {3.5, 0.0};
  wall.width_m = 1.0;
  wall.height_m = 5.0;
  return wall;
}

// Ten candidate block positions on a 3 m circle; each block is 0.5 m thick
// and 2 m long, oriented by its dominant axis so it roughly faces the array.
std::vector<Obstruction> moving_candidates() {
  std::vector<Obstruction> candidates;
  for (int k = 0; k < 10; ++k) {
    const double phi = 2.0 * kPi * k / 10.0;
    Obstruction block;
    block.center = {3.0 * std::cos(phi), 3.0 * std::sin(phi)};
    if (std::abs(std::cos(phi)) >= std::abs(std::sin(phi))) {
      block.width_m = 0.5;
      block.height_m = 2.0;
    } else {
      block.width_m = 2.0;
      block.height_m = 0.5;
    }
    candidates.push_back(block);
  }
  return candidates;
}

Obstruction l2_block() {
  Obstruction block;
  block.center = {1.5, 0.75};
  block.width_m = 0.5;
  block.height_m = 2.0;
  return block;
}

}  // namespace

Preset preset(const std::string& name) {
  Preset p;
  p.grid.seed = 7;
  p.grid.mode = TransportMode::kAnalyticPoisson;

  if (name == "S1" || name == "S2" || name == "S3") {
    p.scene = s_scene();
    p.grid.angles_deg = name == "S3" ? arange(0.0, 90.0, 1.0)
                                     : arange(0.0, 359.0, 1.0);
    p.grid.distances_m = arange(1.0, 15.0, 0.5);
    p.grid.replicates = 1;
  } else if (name == "S1-small" || name == "S2-small") {
    p.scene = s_scene();
    p.grid.angles_deg = arange(0.0, 355.0, 5.0);
    p.grid.distances_m = arange(1.0, 15.0, 0.5);
    p.grid.replicates = 5;
  } else if (name == "S3-small") {
    p.scene = s_scene();
    p.grid.angles_deg = arange(0.0, 90.0, 5.0);
    p.grid.distances_m = arange(1.0, 15.0, 0.5);
    p.grid.replicates = 5;
  } else if (name == "L1" || name == "L2") {
    p.scene = l_scene();
    p.grid.angles_deg = arange(0.0, 90.0, 15.0);
    p.grid.distances_m = arange(0.5, 3.0, 0.5);
    p.grid.replicates = 3;
  } else {
    throw UsageError("unknown preset: " + name);
  }

  if (name == "S2" || name == "S2-small") {
    p.grid.policy = ObstructionPolicy::kFixed;
    p.grid.fixed = {s2_wall()};
  } else if (name == "S3" || name == "S3-small") {
    p.grid.policy = ObstructionPolicy::kMoving;
    p.grid.candidates = moving_candidates();
  } else if (name == "L2") {
    p.grid.policy = ObstructionPolicy::kFixed;
    p.grid.fixed = {l2_block()};
  }
  return p;
}

std::vector<std::string> preset_names() {
  return {"S1", "S2", "S3", "L1", "L2", "S1-small", "S2-small", "S3-small"};
}

}  // namespace radloc
