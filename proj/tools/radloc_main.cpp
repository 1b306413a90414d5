// radloc: batch front end for the detector-array source localization
// pipeline. Subcommands mirror the workflow: simulate counts, calibrate a
// reference table, train a classifier, evaluate it, and pivot the metrics
// into plot-ready tables. Every output embeds a provenance block (tool
// version, config hash, seeds) sufficient to reproduce it byte for byte.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "radloc/dataset.hpp"
#include "radloc/errors.hpp"
#include "radloc/eval.hpp"
#include "radloc/model_io.hpp"
#include "radloc/models.hpp"
#include "radloc/parallel.hpp"
#include "radloc/reftable.hpp"
#include "radloc/version.hpp"

using nlohmann::json;
using namespace radloc;

namespace {

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t hash = 0xcbf29ce484222325ull;
  for (const char c : text) {
    hash ^= static_cast<unsigned char>(c);
    hash *= 0x100000001b3ull;
  }
  return hash;
}

std::string hex64(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(value));
  return buf;
}

json scene_to_json(const Scene& scene) {
  const DetectorSpec& det = scene.array.detectors.front();
  return json{{"detectors", scene.array.detectors.size()},
              {"ring_radius_m", scene.array.ring_radius_m},
              {"detector_radius_m", det.radius_m},
              {"intrinsic_efficiency", det.intrinsic_efficiency},
              {"face_area_m2", det.face_area_m2},
              {"mu_self_per_m", det.mu_self_per_m},
              {"activity_ci", scene.source.activity_ci},
              {"photons_per_decay", scene.source.photons_per_decay},
              {"live_time_s", scene.acquisition.live_time_s},
              {"background_cps", scene.acquisition.background_cps}};
}

void scene_from_json(const json& j, Scene& scene) {
  DetectorSpec proto = scene.array.detectors.empty() ? DetectorSpec{}
                                                     : scene.array.detectors.front();
  int n = static_cast<int>(scene.array.detectors.size());
  double ring = scene.array.ring_radius_m;
  if (j.contains("detectors")) n = j["detectors"].get<int>();
  if (j.contains("ring_radius_m")) ring = j["ring_radius_m"].get<double>();
  if (j.contains("detector_radius_m")) proto.radius_m = j["detector_radius_m"];
  if (j.contains("intrinsic_efficiency"))
    proto.intrinsic_efficiency = j["intrinsic_efficiency"];
  if (j.contains("face_area_m2")) proto.face_area_m2 = j["face_area_m2"];
  if (j.contains("mu_self_per_m")) proto.mu_self_per_m = j["mu_self_per_m"];
  scene.array = ArrayGeometry::make_ring(n, ring, proto);
  if (j.contains("activity_ci")) scene.source.activity_ci = j["activity_ci"];
  if (j.contains("photons_per_decay"))
    scene.source.photons_per_decay = j["photons_per_decay"];
  if (j.contains("live_time_s")) scene.acquisition.live_time_s = j["live_time_s"];
  if (j.contains("background_cps"))
    scene.acquisition.background_cps = j["background_cps"];
}

std::vector<double> range_or_list(const json& j) {
  if (j.is_array()) return j.get<std::vector<double>>();
  std::vector<double> values;
  const double start = j.at("start").get<double>();
  const double stop = j.at("stop").get<double>();
  const double step = j.at("step").get<double>();
  if (step <= 0.0) throw UsageError("grid range: step <= 0");
  const auto n = static_cast<int>(std::floor((stop - start) / step + 0.5));
  for (int k = 0; k <= n; ++k) values.push_back(start + k * step);
  return values;
}

Obstruction obstruction_from_json(const json& j) {
  Obstruction ob;
  ob.center = {j.at("center").at(0).get<double>(),
               j.at("center").at(1).get<double>()};
  ob.width_m = j.at("width_m").get<double>();
  ob.height_m = j.at("height_m").get<double>();
  ob.mu_per_m = j.value("mu_per_m", kMuConcretePerM);
  return ob;
}

void grid_from_json(const json& j, ScenarioGrid& grid) {
  if (j.contains("angles_deg")) grid.angles_deg = range_or_list(j["angles_deg"]);
  if (j.contains("distances_m"))
    grid.distances_m = range_or_list(j["distances_m"]);
  if (j.contains("replicates")) grid.replicates = j["replicates"].get<int>();
  if (j.contains("seed")) grid.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("n_photons")) grid.n_photons = j["n_photons"].get<std::int64_t>();
  if (j.contains("mode")) {
    const auto mode = j["mode"].get<std::string>();
    if (mode == "analytic_poisson") grid.mode = TransportMode::kAnalyticPoisson;
    else if (mode == "monte_carlo") grid.mode = TransportMode::kMonteCarlo;
    else throw UsageError("unknown transport mode: " + mode);
  }
  if (j.contains("policy")) {
    const auto policy = j["policy"].get<std::string>();
    if (policy == "none") grid.policy = ObstructionPolicy::kNone;
    else if (policy == "fixed") grid.policy = ObstructionPolicy::kFixed;
    else if (policy == "moving") grid.policy = ObstructionPolicy::kMoving;
    else throw UsageError("unknown obstruction policy: " + policy);
  }
  if (j.contains("obstructions")) {
    grid.fixed.clear();
    for (const auto& ob : j["obstructions"])
      grid.fixed.push_back(obstruction_from_json(ob));
  }
  if (j.contains("candidates")) {
    grid.candidates.clear();
    for (const auto& ob : j["candidates"])
      grid.candidates.push_back(obstruction_from_json(ob));
  }
}

json load_config_file(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream file(path);
  if (!file) throw UsageError("cannot open config file: " + path);
  try {
    json j;
    file >> j;
    if (!j.is_object()) throw UsageError("config file must hold a JSON object");
    return j;
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("config file parse error: ") + e.what());
  }
}

std::string make_provenance(const std::string& command, const json& effective) {
  json p{{"tool", "radloc"},
         {"version", kVersion},
         {"command", command},
         {"config_hash", hex64(fnv1a(effective.dump()))},
         {"effective", effective}};
  return p.dump();
}

// Shared simulate/calibrate option bundle.
struct ScenarioOptions {
  std::string preset_name;
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> replicates;
  std::optional<double> activity_ci;
  std::optional<double> live_time_s;
  int threads = 0;

  void attach(CLI::App* cmd) {
    cmd->add_option("--preset", preset_name,
                    "Scenario preset (S1, S2, S3, L1, L2, S1-small, S2-small, "
                    "S3-small)");
    cmd->add_option("--config", config_path,
                    "JSON config file; flags override its values");
    cmd->add_option("--seed", seed, "Generation seed");
    cmd->add_option("--replicates", replicates, "Replicates per grid cell");
    cmd->add_option("--activity-uci", activity_ci,
                    "Source activity in microcuries")
        ->transform(CLI::AsNumberWithUnit(
            std::map<std::string, double>{{"uCi", 1.0}}, CLI::AsNumberWithUnit::CASE_SENSITIVE));
    cmd->add_option("--live-time", live_time_s, "Acquisition live time, s");
    cmd->add_option("--threads", threads,
                    "Worker cap (0 = RADLOC_THREADS or 1)");
  }

  // Resolution order: defaults, preset, config file, flags.
  Preset resolve(json* effective_out) const {
    Preset p = preset(preset_name.empty() ? "S1-small" : preset_name);
    const json file = load_config_file(config_path);
    if (file.contains("scene")) scene_from_json(file["scene"], p.scene);
    if (file.contains("grid")) grid_from_json(file["grid"], p.grid);
    if (seed) p.grid.seed = *seed;
    if (replicates) p.grid.replicates = *replicates;
    if (activity_ci) p.scene.source.activity_ci = *activity_ci * 1e-6;
    if (live_time_s) p.scene.acquisition.live_time_s = *live_time_s;
    if (effective_out) {
      (*effective_out)["scene"] = scene_to_json(p.scene);
      (*effective_out)["grid"] = json{{"angles_deg", p.grid.angles_deg},
                                      {"distances_m", p.grid.distances_m},
                                      {"policy", to_string(p.grid.policy)},
                                      {"replicates", p.grid.replicates},
                                      {"mode", to_string(p.grid.mode)},
                                      {"n_photons", p.grid.n_photons},
                                      {"seed", p.grid.seed}};
      if (!preset_name.empty()) (*effective_out)["preset"] = preset_name;
    }
    return p;
  }
};

int cmd_simulate(const ScenarioOptions& scenario, const std::string& out_path,
                 std::optional<double> split_fraction,
                 std::uint64_t split_seed) {
  json effective;
  const Preset p = scenario.resolve(&effective);
  if (split_fraction) {
    effective["split"] = {{"test_fraction", *split_fraction},
                          {"seed", split_seed}};
  }
  const std::string provenance = make_provenance("simulate", effective);

  Dataset ds = generate(p.grid, p.scene, resolve_threads(scenario.threads));
  ds.provenance = provenance;
  write_csv(ds, out_path);

  if (split_fraction) {
    const auto [train_ds, test_ds] = split(ds, *split_fraction, split_seed);
    const std::filesystem::path base(out_path);
    const auto stem = base.parent_path() / base.stem();
    write_csv(train_ds, stem.string() + ".train.csv");
    write_csv(test_ds, stem.string() + ".test.csv");
  }
  std::cout << "wrote " << out_path << " (" << ds.samples.size()
            << " samples, " << ds.bin_spec.bins() << " distance bins)\n";
  return 0;
}

int cmd_calibrate(const ScenarioOptions& scenario, double distance_m,
                  int replicates, std::uint64_t seed, bool noiseless,
                  const std::string& out_path) {
  json effective;
  Preset p = scenario.resolve(&effective);
  effective["calibration"] = {{"distance_m", distance_m},
                              {"replicates", replicates},
                              {"seed", seed},
                              {"noiseless", noiseless}};

  Scene calib_scene = p.scene;
  calib_scene.source.pose.distance_m = distance_m;
  calib_scene.obstructions.clear();  // tables are calibrated in the open
  const ReferenceTable table =
      calibrate(calib_scene, p.grid.angles_deg, replicates, seed, noiseless);
  save_reference_table(table, out_path,
                       make_provenance("calibrate", effective));
  std::cout << "wrote " << out_path << " (" << table.calib_angles_deg.size()
            << " angles at " << distance_m << " m)\n";
  return 0;
}

int cmd_train(const std::string& dataset_path, const std::string& model_name,
              const std::string& scaler_name, const std::string& target_name,
              std::uint64_t seed, const std::string& config_path,
              const std::string& out_path) {
  const json file = load_config_file(config_path);

  TrainSpec spec;
  spec.config.kind = model_kind_from_string(model_name);
  spec.config.seed = seed;
  spec.scaler = scaler_kind_from_string(scaler_name);
  spec.target = target_from_string(target_name);
  if (file.contains("train")) {
    const json& t = file["train"];
    spec.config.logreg_iterations =
        t.value("logreg_iterations", spec.config.logreg_iterations);
    spec.config.logreg_l2 = t.value("logreg_l2", spec.config.logreg_l2);
    spec.config.dtree_max_depth =
        t.value("dtree_max_depth", spec.config.dtree_max_depth);
    spec.config.svm_c = t.value("svm_c", spec.config.svm_c);
    spec.config.svm_tol = t.value("svm_tol", spec.config.svm_tol);
    spec.config.svm_max_passes =
        t.value("svm_max_passes", spec.config.svm_max_passes);
    spec.config.knn_k = t.value("knn_k", spec.config.knn_k);
    spec.config.knn_leaf_size =
        t.value("knn_leaf_size", spec.config.knn_leaf_size);
    spec.config.knn_minkowski_p =
        t.value("knn_minkowski_p", spec.config.knn_minkowski_p);
    spec.config.mlp_hidden = t.value("mlp_hidden", spec.config.mlp_hidden);
    spec.config.mlp_epochs = t.value("mlp_epochs", spec.config.mlp_epochs);
    spec.config.mlp_batch = t.value("mlp_batch", spec.config.mlp_batch);
    spec.config.mlp_learning_rate =
        t.value("mlp_learning_rate", spec.config.mlp_learning_rate);
    spec.config.mlp_l2 = t.value("mlp_l2", spec.config.mlp_l2);
    if (t.contains("norm_p")) spec.norm.p = t["norm_p"].get<double>();
  }

  const Dataset ds = read_csv(dataset_path);
  const TrainedModel model = train(spec, ds);

  json effective{{"dataset", dataset_path},
                 {"model", model_name},
                 {"scaler", scaler_name},
                 {"target", target_name},
                 {"seed", seed}};
  save_model(model, out_path, make_provenance("train", effective));
  std::cout << "wrote " << out_path << " (" << to_string(model.kind) << ", "
            << model.n_classes << " classes)\n";
  return 0;
}

int cmd_evaluate(const std::string& predictor_path,
                 const std::string& dataset_path, const std::string& out_path,
                 const std::string& report_path, bool bootstrap,
                 std::uint64_t bootstrap_seed) {
  const Predictor predictor = load_predictor(predictor_path);
  const Dataset test = read_csv(dataset_path);

  EvalOptions options;
  options.bootstrap = bootstrap;
  options.bootstrap_seed = bootstrap_seed;
  const Metrics metrics = evaluate_predictor(predictor, test, options);

  const std::string dataset_name =
      std::filesystem::path(dataset_path).stem().string();
  write_metrics_csv(std::vector<Metrics>{metrics}, out_path, dataset_name);

  json effective{{"predictor", predictor_path},
                 {"dataset", dataset_path},
                 {"bootstrap", bootstrap},
                 {"bootstrap_seed", bootstrap_seed}};
  if (!report_path.empty()) {
    std::ofstream report(report_path, std::ios::binary);
    if (!report)
      throw SchemaError("cannot open report for writing: " + report_path);
    report << metrics_to_json(metrics, dataset_name,
                              make_provenance("evaluate", effective))
           << '\n';
  }

  std::cout << metrics.predictor << "+" << metrics.scaler << " on "
            << dataset_name << ": ";
  if (metrics.target == "angle") {
    std::cout << "angle_accuracy=" << metrics.angle_accuracy
              << " mean_angular_error=" << metrics.mean_angular_error_deg
              << " (ci95 +/- " << metrics.angular_error_ci95 << ")\n";
  } else {
    std::cout << "distance_bin_accuracy=" << metrics.distance_bin_accuracy
              << " mean_rel_error_pct="
              << metrics.mean_relative_distance_error_pct << " (ci95 +/- "
              << metrics.relative_distance_error_ci95 << ")\n";
  }
  return 0;
}

// Pivot per-distance accuracy rows from evaluate's CSVs into one wide,
// plot-ready table: one row per distance, one column per predictor run.
int cmd_report(const std::vector<std::string>& metrics_paths,
               const std::string& out_path) {
  struct Column {
    std::string name;
    std::map<double, std::string> cells;
  };
  std::vector<Column> columns;
  std::map<double, bool> distances;

  for (const std::string& path : metrics_paths) {
    std::ifstream file(path);
    if (!file) throw SchemaError("cannot open metrics csv: " + path);
    std::string line;
    if (!std::getline(file, line) ||
        !line.starts_with("predictor,scaler,target,dataset,distance_m,"))
      throw SchemaError("not a radloc metrics csv: " + path);
    std::map<std::string, Column> per_run;
    while (std::getline(file, line)) {
      if (line.empty()) continue;
      std::vector<std::string> cells;
      std::size_t start = 0;
      while (true) {
        const auto comma = line.find(',', start);
        cells.push_back(line.substr(start, comma - start));
        if (comma == std::string::npos) break;
        start = comma + 1;
      }
      if (cells.size() < 12) throw SchemaError("short metrics row in " + path);
      if (cells[4] == "all") continue;
      const double distance = std::stod(cells[4]);
      const std::string key =
          cells[0] + "+" + cells[1] + "+" + cells[2] + "@" + cells[3];
      // Angle runs report angle accuracy, distance runs bin accuracy.
      const std::string accuracy = cells[2] == "angle" ? cells[6] : cells[9];
      per_run[key].name = key;
      per_run[key].cells[distance] = accuracy;
      distances[distance] = true;
    }
    for (auto& [key, column] : per_run) columns.push_back(std::move(column));
  }
  if (columns.empty()) throw SchemaError("no per-distance rows found");

  std::string out = "distance_m";
  for (const Column& c : columns) out += "," + c.name;
  out += '\n';
  for (const auto& [distance, unused] : distances) {
    out += std::to_string(distance);
    for (const Column& c : columns) {
      const auto it = c.cells.find(distance);
      out += ',';
      out += it == c.cells.end() ? "na" : it->second;
    }
    out += '\n';
  }
  std::ofstream file(out_path, std::ios::binary);
  if (!file) throw SchemaError("cannot open for writing: " + out_path);
  file << out;
  std::cout << "wrote " << out_path << " (" << distances.size()
            << " distances x " << columns.size() << " runs)\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"radloc: detector-array radioactive source localization"};
  app.set_version_flag("--version", std::string("radloc ") + kVersion);
  app.require_subcommand(1);

  // simulate
  auto* simulate = app.add_subcommand(
      "simulate", "Generate a counts dataset from a scenario grid");
  ScenarioOptions sim_scenario;
  sim_scenario.attach(simulate);
  std::string sim_out = "dataset.csv";
  std::optional<double> sim_split;
  std::uint64_t sim_split_seed = 42;
  simulate->add_option("--out", sim_out, "Output CSV path");
  simulate->add_option("--split", sim_split,
                       "Also write stratified .train/.test files");
  simulate->add_option("--split-seed", sim_split_seed, "Split seed");

  // calibrate
  auto* calibrate_cmd = app.add_subcommand(
      "calibrate", "Build a reference table at a fixed distance");
  ScenarioOptions cal_scenario;
  cal_scenario.attach(calibrate_cmd);
  double cal_distance = 2.0;
  int cal_replicates = 100;
  std::uint64_t cal_seed = 4242;
  bool cal_noiseless = false;
  std::string cal_out = "reference_table.json";
  calibrate_cmd->add_option("--distance", cal_distance, "Calibration distance, m");
  calibrate_cmd->add_option("--table-replicates", cal_replicates,
                            "Acquisitions averaged per angle");
  calibrate_cmd->add_option("--table-seed", cal_seed, "Calibration seed");
  calibrate_cmd->add_flag("--noiseless", cal_noiseless,
                          "Store exact expectations instead of Poisson means");
  calibrate_cmd->add_option("--out", cal_out, "Output container path");

  // train
  auto* train_cmd =
      app.add_subcommand("train", "Fit a classifier on a dataset CSV");
  std::string train_dataset;
  std::string train_model = "knn";
  std::string train_scaler = "unit_norm";
  std::string train_target = "angle";
  std::uint64_t train_seed = 1;
  std::string train_config;
  std::string train_out = "model.json";
  train_cmd->add_option("--dataset", train_dataset, "Training CSV")->required();
  train_cmd->add_option("--model", train_model,
                        "logreg | svm | knn | dtree | mlp");
  train_cmd->add_option("--scaler", train_scaler, "none | unit_norm | robust");
  train_cmd->add_option("--target", train_target, "angle | distance");
  train_cmd->add_option("--seed", train_seed, "Model seed");
  train_cmd->add_option("--config", train_config,
                        "JSON config with a {\"train\": ...} section");
  train_cmd->add_option("--out", train_out, "Output container path");

  // evaluate
  auto* evaluate_cmd = app.add_subcommand(
      "evaluate", "Score a model or reference table on a dataset CSV");
  std::string eval_model;
  std::string eval_dataset;
  std::string eval_out = "metrics.csv";
  std::string eval_report;
  bool eval_bootstrap = false;
  std::uint64_t eval_bootstrap_seed = 0;
  evaluate_cmd->add_option("--model", eval_model, "Model or table container")
      ->required();
  evaluate_cmd->add_option("--dataset", eval_dataset, "Evaluation CSV")
      ->required();
  evaluate_cmd->add_option("--out", eval_out, "Metrics CSV path");
  evaluate_cmd->add_option("--report", eval_report,
                           "Also write a JSON report here");
  evaluate_cmd->add_flag("--bootstrap", eval_bootstrap,
                         "Percentile-bootstrap confidence intervals");
  evaluate_cmd->add_option("--bootstrap-seed", eval_bootstrap_seed,
                           "Bootstrap resampling seed");

  // report
  auto* report_cmd = app.add_subcommand(
      "report", "Pivot metrics CSVs into an accuracy-vs-distance table");
  std::vector<std::string> report_inputs;
  std::string report_out = "by_distance.csv";
  report_cmd->add_option("inputs", report_inputs, "Metrics CSVs from evaluate")
      ->required();
  report_cmd->add_option("--out", report_out, "Output CSV path");

  try {
    app.parse(argc, argv);
    if (simulate->parsed())
      return cmd_simulate(sim_scenario, sim_out, sim_split, sim_split_seed);
    if (calibrate_cmd->parsed())
      return cmd_calibrate(cal_scenario, cal_distance, cal_replicates,
                           cal_seed, cal_noiseless, cal_out);
    if (train_cmd->parsed())
      return cmd_train(train_dataset, train_model, train_scaler, train_target,
                       train_seed, train_config, train_out);
    if (evaluate_cmd->parsed())
      return cmd_evaluate(eval_model, eval_dataset, eval_out, eval_report,
                          eval_bootstrap, eval_bootstrap_seed);
    if (report_cmd->parsed()) return cmd_report(report_inputs, report_out);
    return 1;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help / --version
    std::cerr << "error: usage: " << e.what() << '\n';
    return 1;
  } catch (const UsageError& e) {
    std::cerr << "error: usage: " << e.what() << '\n';
    return 1;
  } catch (const SchemaError& e) {
    std::cerr << "error: schema: " << e.what() << '\n';
    return 2;
  } catch (const NumericError& e) {
    std::cerr << "error: numeric: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: internal: " << e.what() << '\n';
    return 3;
  }
}
