// Acceptance suite: one self-contained check per shipped claim, one
// PASS/FAIL line each, nonzero exit if anything fails. Thresholds are fixed
// here, not configurable; seeds are frozen so every run is reproducible.

#include <sys/wait.h>

#include <cstdarg>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "radloc/balltree.hpp"
#include "radloc/dataset.hpp"
#include "radloc/eval.hpp"
#include "radloc/model_io.hpp"
#include "radloc/models.hpp"
#include "radloc/reftable.hpp"
#include "radloc/rng.hpp"
#include "radloc/stats.hpp"

using namespace radloc;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

std::string fmt(const char* format, ...) {
  va_list args;
  va_start(args, format);
  char buf[512];
  std::vsnprintf(buf, sizeof(buf), format, args);
  va_end(args);
  return buf;
}

// ---------------------------------------------------------------------------
// C1: noiseless reference-table recovery on the S1 angle grid at 2 m.
Outcome c1_noiseless_recovery() {
  const auto start = std::chrono::steady_clock::now();
  Preset p = preset("S1");
  Scene calib = p.scene;
  calib.source.pose.distance_m = 2.0;
  const ReferenceTable table =
      calibrate(calib, p.grid.angles_deg, 1, 0, /*noiseless=*/true);

  std::size_t hits = 0;
  Scene query = calib;
  for (double truth : p.grid.angles_deg) {
    query.source.pose.angle_deg = truth;
    if (predict_angle(table, expected_counts(query)) == truth) ++hits;
  }
  const double elapsed = seconds_since(start);
  const bool pass = hits == p.grid.angles_deg.size() && elapsed < 1.0;
  return {pass, fmt("%zu/%zu angles recovered exactly in %.2f s (< 1 s)",
                    hits, p.grid.angles_deg.size(), elapsed)};
}

// ---------------------------------------------------------------------------
// C2: Freedman-Diaconis binning of 72000 uniform distances on [1, 15] m.
Outcome c2_fd_bins() {
  const auto start = std::chrono::steady_clock::now();
  std::vector<double> values(72000);
  for (std::size_t i = 0; i < values.size(); ++i)
    values[i] = 1.0 + 14.0 * static_cast<double>(i) / (values.size() - 1);
  const BinSpec spec = fd_bin_spec(values);
  const double elapsed = seconds_since(start);
  const bool pass = spec.bins() == 42 && std::abs(spec.width - 0.3365) <= 0.001 &&
                    elapsed < 1.0;
  return {pass, fmt("%d bins (want 42), width %.5f m (0.3365 +/- 0.001), %.3f s",
                    spec.bins(), spec.width, elapsed)};
}

// ---------------------------------------------------------------------------
// Shared S1-small split for C3/C4/C8.
struct SplitData {
  Dataset train_ds;
  Dataset test_ds;
  Dataset full;
};

SplitData s1_small_split() {
  const Preset p = preset("S1-small");  // seed 7 built in
  SplitData data;
  data.full = generate(p.grid, p.scene, 4);
  auto [train_ds, test_ds] = split(data.full, 0.2, 42);
  data.train_ds = std::move(train_ds);
  data.test_ds = std::move(test_ds);
  return data;
}

// C3: kNN + unit norm cuts the mean circular angular error by at least 25%
// against the 2 m reference table, and is strictly better at every evaluated
// distance >= 4 m.
Outcome c3_directional_angle(const SplitData& data) {
  const auto start = std::chrono::steady_clock::now();

  TrainSpec spec;
  spec.config.kind = ModelKind::kKnn;
  spec.config.seed = 1;
  spec.scaler = ScalerKind::kUnitNorm;
  spec.target = TargetKind::kAngle;
  const TrainedModel knn = train(spec, data.train_ds);
  const Metrics mk = evaluate_model(knn, data.test_ds);

  const Preset p = preset("S1-small");
  Scene calib = p.scene;
  calib.source.pose.distance_m = 2.0;
  const ReferenceTable table = calibrate(calib, p.grid.angles_deg, 100, 4242);
  const Metrics mt = evaluate_reference_table(table, data.test_ds);

  int violations = 0;
  for (std::size_t i = 0; i < mk.by_distance.size(); ++i) {
    if (mk.by_distance[i].distance_m < 4.0) continue;
    if (mk.by_distance[i].mean_angular_error_deg >=
        mt.by_distance[i].mean_angular_error_deg)
      ++violations;
  }
  const double ratio = mk.mean_angular_error_deg / mt.mean_angular_error_deg;
  const double elapsed = seconds_since(start);
  const bool pass = ratio <= 0.75 && violations == 0 && elapsed < 120.0;
  return {pass,
          fmt("knn+unit_norm %.2f deg vs table %.2f deg (ratio %.3f <= 0.75), "
              "%d per-distance violations >= 4 m, %.1f s (< 120 s)",
              mk.mean_angular_error_deg, mt.mean_angular_error_deg, ratio,
              violations, elapsed)};
}

// C4: kNN + robust standardization predicts distance bins at >= 5x chance
// and at least as well as raw counts.
Outcome c4_directional_distance(const SplitData& data) {
  const auto start = std::chrono::steady_clock::now();

  TrainSpec spec;
  spec.config.kind = ModelKind::kKnn;
  spec.config.seed = 1;
  spec.target = TargetKind::kDistance;
  spec.scaler = ScalerKind::kRobust;
  const Metrics robust =
      evaluate_model(train(spec, data.train_ds), data.test_ds);
  spec.scaler = ScalerKind::kNone;
  const Metrics raw = evaluate_model(train(spec, data.train_ds), data.test_ds);

  const double chance = 1.0 / data.full.bin_spec.bins();
  const double elapsed = seconds_since(start);
  const bool pass = robust.distance_bin_accuracy >= 5.0 * chance &&
                    robust.distance_bin_accuracy >= raw.distance_bin_accuracy &&
                    elapsed < 120.0;
  return {pass,
          fmt("robust %.4f >= 5x chance %.4f and >= raw %.4f, %.1f s (< 120 s)",
              robust.distance_bin_accuracy, 5.0 * chance,
              raw.distance_bin_accuracy, elapsed)};
}

// ---------------------------------------------------------------------------
// C5: Monte Carlo counts agree with the analytic expectation within
// 4*sqrt(lambda) per detector (lambda >= 100) on a fixed obstructed scene.
Outcome c5_mc_agreement() {
  const auto start = std::chrono::steady_clock::now();

  // Slab fully covers every sight wedge; detectors do not occlude each
  // other, so the center-line attenuation is exact for the whole wedge.
  DetectorSpec quiet;
  quiet.mu_self_per_m = 0.0;
  Scene scene;
  scene.array = ArrayGeometry::make_ring(8, 0.35, quiet);
  scene.source.activity_ci = 10e-6;
  scene.source.pose = {2.0, 25.0};
  Obstruction slab;
  slab.center = {0.9, 0.0};
  slab.width_m = 0.05;
  slab.height_m = 8.0;
  scene.obstructions = {slab};

  const CountVector lambda = expected_counts(scene);
  const CountVector mc = mc_counts(scene, 1'000'000, 1000, true, 4);
  int checked = 0;
  double worst = 0.0;
  for (std::size_t d = 0; d < lambda.size(); ++d) {
    if (lambda[d] < 100.0) continue;
    ++checked;
    worst = std::max(worst, std::abs(mc[d] - lambda[d]) / std::sqrt(lambda[d]));
  }
  const double elapsed = seconds_since(start);
  const bool pass = checked == 8 && worst <= 4.0 && elapsed < 10.0;
  return {pass, fmt("%d detectors checked, worst |mc-lambda|/sqrt(lambda) = "
                    "%.2f (<= 4), %.1f s (< 10 s)",
                    checked, worst, elapsed)};
}

// ---------------------------------------------------------------------------
// C6: physics identities of the analytic forward model.
Outcome c6_physics_identities() {
  const auto start = std::chrono::steady_clock::now();
  std::string failures;

  DetectorSpec quiet;
  quiet.mu_self_per_m = 0.0;
  const auto point_scene = [&](double activity, double time, double r) {
    Scene scene;
    scene.array = ArrayGeometry::make_ring(4, 0.0, quiet);
    scene.source.activity_ci = activity;
    scene.source.pose = {r, 0.0};
    scene.acquisition.live_time_s = time;
    scene.acquisition.background_cps = 0.0;
    return scene;
  };

  {  // inverse square
    const CountVector near = expected_counts(point_scene(10e-6, 14.0, 3.0));
    const CountVector far = expected_counts(point_scene(10e-6, 14.0, 6.0));
    for (std::size_t d = 0; d < near.size(); ++d)
      if (std::abs(far[d] - near[d] / 4.0) / (near[d] / 4.0) > 1e-9)
        failures += " inverse-square";
  }
  {  // activity x time
    const CountVector a = expected_counts(point_scene(10e-6, 14.0, 2.0));
    const CountVector b = expected_counts(point_scene(5e-6, 28.0, 2.0));
    if (a != b) failures += " activity-time";
  }
  {  // attenuation equivalence: 1 uCi @ 0.10 m concrete == 1 Ci @ 1.50 m
    Scene weak = point_scene(1e-6, 14.0, 3.0);
    Obstruction thin;
    thin.center = {1.05, 0.0};
    thin.width_m = 0.10;
    thin.height_m = 4.0;
    weak.obstructions = {thin};
    Scene strong = point_scene(1.0, 14.0, 3.0);
    Obstruction thick = thin;
    thick.center = {1.75, 0.0};
    thick.width_m = 1.50;
    strong.obstructions = {thick};
    const CountVector lw = expected_counts(weak);
    const CountVector ls = expected_counts(strong);
    for (std::size_t d = 0; d < lw.size(); ++d)
      if (std::abs(lw[d] - ls[d]) / ls[d] > 1e-6) failures += " attenuation";
  }
  const double elapsed = seconds_since(start);
  const bool pass = failures.empty() && elapsed < 1.0;
  return {pass, failures.empty()
                    ? fmt("inverse-square 1e-9, activity*time exact, "
                          "attenuation equivalence 1e-6, %.3f s",
                          elapsed)
                    : "failed:" + failures};
}

// ---------------------------------------------------------------------------
// C7: oracle equivalences (kNN linear scan, exhaustive splits, MLP
// finite-difference gradients).
Outcome c7_oracles() {
  const auto start = std::chrono::steady_clock::now();
  std::string failures;

  {  // kNN vs linear scan, 200 queries, integer features for distance ties
    Xoshiro256pp rng(21);
    Matrix points(200, 4);
    for (double& v : points.data) v = static_cast<double>(rng.below(8));
    const BallTree tree(points, 30);
    for (int trial = 0; trial < 200 && failures.empty(); ++trial) {
      std::vector<double> q(4);
      for (double& v : q) v = static_cast<double>(rng.below(8));
      const auto got = tree.query(q, 5);

      std::vector<std::pair<double, int>> all(points.rows);
      for (std::size_t i = 0; i < points.rows; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < points.cols; ++j) {
          const double diff = q[j] - points.at(i, j);
          acc += diff * diff;
        }
        all[i] = {std::sqrt(acc), static_cast<int>(i)};
      }
      std::sort(all.begin(), all.end());
      all.resize(5);
      if (got != all) failures += " knn-oracle";
    }
  }

  {  // decision-tree splits vs exhaustive enumeration
    Xoshiro256pp rng(61);
    for (int node = 0; node < 20 && failures.empty(); ++node) {
      Matrix x(50, 4);
      std::vector<int> labels(50);
      for (double& v : x.data) v = static_cast<double>(rng.below(8));
      for (int& l : labels) l = static_cast<int>(rng.below(3));
      std::vector<int> rows(50);
      for (int i = 0; i < 50; ++i) rows[i] = i;
      const SplitCandidate got = best_split(x, labels, rows, 3);

      SplitCandidate want;
      want.cost = std::numeric_limits<double>::infinity();
      for (std::size_t f = 0; f < 4; ++f) {
        std::vector<double> values;
        for (int r : rows) values.push_back(x.at(static_cast<std::size_t>(r), f));
        std::sort(values.begin(), values.end());
        values.erase(std::unique(values.begin(), values.end()), values.end());
        for (std::size_t v = 0; v + 1 < values.size(); ++v) {
          const double t = 0.5 * (values[v] + values[v + 1]);
          std::vector<int> lc(3, 0);
          std::vector<int> rc(3, 0);
          std::size_t nl = 0;
          for (int r : rows) {
            const auto label = static_cast<std::size_t>(labels[static_cast<std::size_t>(r)]);
            if (x.at(static_cast<std::size_t>(r), f) <= t) {
              ++lc[label];
              ++nl;
            } else {
              ++rc[label];
            }
          }
          const auto gini_of = [](const std::vector<int>& counts, std::size_t n) {
            double acc = 0.0;
            for (int c : counts) {
              const double p = static_cast<double>(c) / static_cast<double>(n);
              acc += p * p;
            }
            return 1.0 - acc;
          };
          const double cost = static_cast<double>(nl) / 50.0 * gini_of(lc, nl) +
                              static_cast<double>(50 - nl) / 50.0 *
                                  gini_of(rc, 50 - nl);
          if (cost < want.cost) {
            want.cost = cost;
            want.feature = static_cast<int>(f);
            want.threshold = t;
          }
        }
      }
      if (got.feature != want.feature || got.threshold != want.threshold ||
          got.cost != want.cost)
        failures += " split-oracle";
    }
  }

  double worst_grad = 0.0;
  {  // MLP gradients vs central differences at a kink-safe random net
    Xoshiro256pp rng(97);
    LabeledMatrix data;
    data.n_classes = 4;
    data.features = Matrix(24, 5);
    for (double& v : data.features.data) v = rng.uniform01() * 8.0;
    data.labels.resize(24);
    for (int& l : data.labels) l = static_cast<int>(rng.below(4));

    MlpParams net;
    Xoshiro256pp init(1);
    const std::vector<std::size_t> dims{5, 15, 15, 15, 4};
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
      Matrix w(dims[l], dims[l + 1]);
      const double limit =
          std::sqrt(6.0 / static_cast<double>(dims[l] + dims[l + 1]));
      for (double& v : w.data) v = (2.0 * init.uniform01() - 1.0) * limit;
      net.weights.push_back(std::move(w));
      net.biases.emplace_back(dims[l + 1], 0.1);
    }

    std::vector<double> params = net.flatten();
    std::vector<double> grad(params.size());
    net.loss_and_gradient(data.features, data.labels, 1e-4, grad);
    const double eps = 1e-5;
    std::vector<double> scratch(params.size());
    for (std::size_t i = 0; i < params.size(); ++i) {
      std::vector<double> perturbed = params;
      perturbed[i] += eps;
      net.unflatten(perturbed);
      const double f_plus =
          net.loss_and_gradient(data.features, data.labels, 1e-4, scratch);
      perturbed[i] = params[i] - eps;
      net.unflatten(perturbed);
      const double f_minus =
          net.loss_and_gradient(data.features, data.labels, 1e-4, scratch);
      const double fd = (f_plus - f_minus) / (2 * eps);
      worst_grad = std::max(worst_grad,
                            std::abs(grad[i] - fd) /
                                std::max({std::abs(grad[i]), std::abs(fd), 1e-8}));
    }
    if (worst_grad > 1e-4) failures += " mlp-gradient";
  }

  const double elapsed = seconds_since(start);
  return {failures.empty(),
          failures.empty()
              ? fmt("knn==scan (200 queries), splits==enumeration (20 nodes), "
                    "mlp grad rel err %.2e <= 1e-4, %.1f s",
                    worst_grad, elapsed)
              : "failed:" + failures};
}

// ---------------------------------------------------------------------------
// C8: scaling invariances across all five model kinds on ~500 samples.
Outcome c8_scaling_invariance(const SplitData& data) {
  const auto start = std::chrono::steady_clock::now();

  // Stratified ~500-sample subset keeps every angle class populated.
  const auto [rest, subset] =
      split(data.full, 500.0 / static_cast<double>(data.full.samples.size()), 11);
  (void)rest;

  std::string failures;
  for (const ModelKind kind :
       {ModelKind::kLogReg, ModelKind::kSvm, ModelKind::kKnn, ModelKind::kDtree,
        ModelKind::kMlp}) {
    TrainSpec spec;
    spec.config.kind = kind;
    spec.config.seed = 2;
    spec.scaler = ScalerKind::kUnitNorm;
    spec.target = TargetKind::kAngle;
    const TrainedModel model = train(spec, subset);

    for (const Sample& sample : subset.samples) {
      const int base = model.predict(sample.counts);
      for (const double c : {0.1, 3.0, 1000.0}) {
        CountVector scaled = sample.counts;
        for (double& v : scaled) v *= c;
        if (model.predict(scaled) != base) {
          failures += " " + to_string(kind);
          break;
        }
      }
      if (!failures.empty() && failures.ends_with(to_string(kind))) break;
    }
  }

  // Robust-transformed training matrix: per-feature median 0 within 1e-12.
  Matrix raw(subset.samples.size(), subset.feature_dim());
  for (std::size_t i = 0; i < subset.samples.size(); ++i)
    std::copy(subset.samples[i].counts.begin(), subset.samples[i].counts.end(),
              raw.row(i).begin());
  const ScalerParams robust = ScalerParams::fit(ScalerKind::kRobust, raw);
  Matrix transformed;
  robust.transform_all(raw, transformed);
  double worst_median = 0.0;
  std::vector<double> column(transformed.rows);
  for (std::size_t c = 0; c < transformed.cols; ++c) {
    for (std::size_t r = 0; r < transformed.rows; ++r)
      column[r] = transformed.at(r, c);
    std::sort(column.begin(), column.end());
    worst_median = std::max(
        worst_median, std::abs(quantile_sorted(column, 0.5)));
  }
  if (worst_median > 1e-12) failures += " robust-median";

  const double elapsed = seconds_since(start);
  return {failures.empty(),
          failures.empty()
              ? fmt("c*x == x for c in {0.1, 3, 1000} across 5 kinds on %zu "
                    "samples; robust median %.1e <= 1e-12; %.1f s",
                    subset.samples.size(), worst_median, elapsed)
              : "failed:" + failures};
}

// ---------------------------------------------------------------------------
// C9: CLI re-runs are byte-identical.
Outcome c9_cli_determinism() {
  const auto start = std::chrono::steady_clock::now();

  std::string cli;
  if (const char* env = std::getenv("RADLOC_CLI")) cli = env;
  if (cli.empty() || !fs::exists(cli))
    return {false, "RADLOC_CLI does not point at the radloc binary"};

  const fs::path dir = fs::temp_directory_path() / "radloc_acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const auto run = [&](const std::string& args) {
    const std::string cmd = cli + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) && WEXITSTATUS(status) == 0;
  };
  const auto slurp = [](const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    return std::string{std::istreambuf_iterator<char>(f), {}};
  };

  std::string failures;
  const std::string sim =
      "simulate --preset S1-small --replicates 1 --seed 7 --out ";
  if (!run(sim + (dir / "a.csv").string()) ||
      !run(sim + (dir / "b.csv").string()) ||
      slurp(dir / "a.csv") != slurp(dir / "b.csv") ||
      slurp(dir / "a.csv").empty())
    failures += " simulate";

  const std::string train_cmd = "train --dataset " + (dir / "a.csv").string() +
                                " --model knn --scaler unit_norm --seed 3 --out ";
  if (!run(train_cmd + (dir / "m1.json").string()) ||
      !run(train_cmd + (dir / "m2.json").string()) ||
      slurp(dir / "m1.json") != slurp(dir / "m2.json"))
    failures += " train";

  const std::string eval_cmd = "evaluate --model " + (dir / "m1.json").string() +
                               " --dataset " + (dir / "a.csv").string() +
                               " --out ";
  if (!run(eval_cmd + (dir / "e1.csv").string()) ||
      !run(eval_cmd + (dir / "e2.csv").string()) ||
      slurp(dir / "e1.csv") != slurp(dir / "e2.csv"))
    failures += " evaluate";

  fs::remove_all(dir);
  const double elapsed = seconds_since(start);
  return {failures.empty(),
          failures.empty()
              ? fmt("simulate/train/evaluate re-runs byte-identical, %.1f s",
                    elapsed)
              : "failed:" + failures};
}

// ---------------------------------------------------------------------------
// C10: a moving obstruction strictly lowers kNN+unit-norm angle accuracy
// against the obstruction-free counterpart on the same grid.
Outcome c10_moving_obstruction() {
  const auto start = std::chrono::steady_clock::now();

  const Preset p = preset("S3-small");
  ScenarioGrid free_grid = p.grid;
  free_grid.policy = ObstructionPolicy::kNone;

  const auto accuracy_for = [&](const ScenarioGrid& grid) {
    const Dataset ds = generate(grid, p.scene, 4);
    const auto [train_ds, test_ds] = split(ds, 0.2, 42);
    TrainSpec spec;
    spec.config.kind = ModelKind::kKnn;
    spec.config.seed = 1;
    spec.scaler = ScalerKind::kUnitNorm;
    spec.target = TargetKind::kAngle;
    return evaluate_model(train(spec, train_ds), test_ds).angle_accuracy;
  };

  const double obstructed = accuracy_for(p.grid);
  const double open = accuracy_for(free_grid);
  const double elapsed = seconds_since(start);
  return {obstructed < open,
          fmt("obstructed %.4f < obstruction-free %.4f, %.1f s", obstructed,
              open, elapsed)};
}

}  // namespace

int main() {
  const auto suite_start = std::chrono::steady_clock::now();
  int failures = 0;
  const auto report = [&](const char* name, const Outcome& outcome) {
    std::printf("[%s] %s: %s\n", outcome.pass ? "PASS" : "FAIL", name,
                outcome.detail.c_str());
    std::fflush(stdout);
    if (!outcome.pass) ++failures;
  };

  report("C1 noiseless table recovery", c1_noiseless_recovery());
  report("C2 Freedman-Diaconis bins", c2_fd_bins());

  const SplitData data = s1_small_split();
  report("C3 directional angle headline", c3_directional_angle(data));
  report("C4 directional distance headline", c4_directional_distance(data));
  report("C5 MC/analytic agreement", c5_mc_agreement());
  report("C6 physics identities", c6_physics_identities());
  report("C7 oracle equivalences", c7_oracles());
  report("C8 scaling invariances", c8_scaling_invariance(data));
  report("C9 CLI determinism", c9_cli_determinism());
  report("C10 moving-obstruction robustness", c10_moving_obstruction());

  std::printf("%d/10 criteria passed in %.1f s\n", 10 - failures,
              seconds_since(suite_start));
  return failures == 0 ? 0 : 1;
}
