#include "radloc/model_io.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "radloc/errors.hpp"
#include "radloc/version.hpp"

namespace radloc {

using nlohmann::json;

namespace {

constexpr int kFormatVersion = 1;

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (std::size_t r = 0; r < m.rows; ++r) {
    json row = json::array();
    for (double v : m.row(r)) row.push_back(v);
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const json& rows) {
  Matrix m;
  m.rows = rows.size();
  m.cols = m.rows == 0 ? 0 : rows.at(0).size();
  m.data.reserve(m.rows * m.cols);
  for (const auto& row : rows) {
    if (row.size() != m.cols) throw SchemaError("container: ragged matrix");
    for (const auto& v : row) m.data.push_back(v.get<double>());
  }
  return m;
}

json scaler_to_json(const ScalerParams& scaler) {
  json j{{"kind", to_string(scaler.kind)}};
  if (scaler.kind == ScalerKind::kUnitNorm) j["p"] = scaler.norm.p;
  if (scaler.kind == ScalerKind::kRobust) {
    j["median"] = scaler.robust.median;
    j["scale"] = scaler.robust.scale;
  }
  return j;
}

ScalerParams scaler_from_json(const json& j) {
  ScalerParams scaler;
  scaler.kind = scaler_kind_from_string(j.at("kind").get<std::string>());
  if (scaler.kind == ScalerKind::kUnitNorm)
    scaler.norm.p = j.value("p", 2.0);
  if (scaler.kind == ScalerKind::kRobust) {
    scaler.robust.median = j.at("median").get<std::vector<double>>();
    scaler.robust.scale = j.at("scale").get<std::vector<double>>();
  }
  return scaler;
}

json hyperparameters_to_json(const ModelConfig& config) {
  switch (config.kind) {
    case ModelKind::kLogReg:
      return {{"iterations", config.logreg_iterations},
              {"l2", config.logreg_l2},
              {"seed", config.seed}};
    case ModelKind::kDtree:
      return {{"max_depth", config.dtree_max_depth}, {"seed", config.seed}};
    case ModelKind::kSvm:
      return {{"c", config.svm_c},
              {"tol", config.svm_tol},
              {"max_passes", config.svm_max_passes},
              {"seed", config.seed}};
    case ModelKind::kKnn:
      return {{"k", config.knn_k},
              {"leaf_size", config.knn_leaf_size},
              {"minkowski_p", config.knn_minkowski_p},
              {"seed", config.seed}};
    case ModelKind::kMlp:
      return {{"hidden", config.mlp_hidden},
              {"epochs", config.mlp_epochs},
              {"batch", config.mlp_batch},
              {"learning_rate", config.mlp_learning_rate},
              {"l2", config.mlp_l2},
              {"seed", config.seed}};
  }
  return {};
}

ModelConfig hyperparameters_from_json(ModelKind kind, const json& j) {
  ModelConfig config;
  config.kind = kind;
  config.seed = j.value("seed", 0ull);
  switch (kind) {
    case ModelKind::kLogReg:
      config.logreg_iterations = j.value("iterations", config.logreg_iterations);
      config.logreg_l2 = j.value("l2", config.logreg_l2);
      break;
    case ModelKind::kDtree:
      config.dtree_max_depth = j.value("max_depth", config.dtree_max_depth);
      break;
    case ModelKind::kSvm:
      config.svm_c = j.value("c", config.svm_c);
      config.svm_tol = j.value("tol", config.svm_tol);
      config.svm_max_passes = j.value("max_passes", config.svm_max_passes);
      break;
    case ModelKind::kKnn:
      config.knn_k = j.value("k", config.knn_k);
      config.knn_leaf_size = j.value("leaf_size", config.knn_leaf_size);
      config.knn_minkowski_p = j.value("minkowski_p", config.knn_minkowski_p);
      break;
    case ModelKind::kMlp:
      config.mlp_hidden = j.value("hidden", config.mlp_hidden);
      config.mlp_epochs = j.value("epochs", config.mlp_epochs);
      config.mlp_batch = j.value("batch", config.mlp_batch);
      config.mlp_learning_rate =
          j.value("learning_rate", config.mlp_learning_rate);
      config.mlp_l2 = j.value("l2", config.mlp_l2);
      break;
  }
  return config;
}

json parameters_to_json(const TrainedModel& model) {
  if (const auto* logreg = std::get_if<LogRegParams>(&model.params))
    return {{"weights", matrix_to_json(logreg->weights)}};
  if (const auto* svm = std::get_if<SvmParams>(&model.params))
    return {{"gamma", svm->gamma},
            {"train", matrix_to_json(svm->train)},
            {"dual_coef", matrix_to_json(svm->dual_coef)},
            {"bias", svm->bias}};
  if (const auto* knn = std::get_if<KnnParams>(&model.params))
    return {{"train", matrix_to_json(knn->tree.points())},
            {"labels", knn->labels}};
  if (const auto* dtree = std::get_if<DtreeParams>(&model.params)) {
    json nodes = json::array();
    for (const DtreeNode& n : dtree->nodes)
      nodes.push_back({n.feature, n.threshold, n.left, n.right, n.leaf_class});
    return {{"nodes", std::move(nodes)}};
  }
  const auto& mlp = std::get<MlpParams>(model.params);
  json layers = json::array();
  for (std::size_t l = 0; l < mlp.weights.size(); ++l)
    layers.push_back(
        {{"weights", matrix_to_json(mlp.weights[l])}, {"bias", mlp.biases[l]}});
  return {{"layers", std::move(layers)}};
}

void parameters_from_json(TrainedModel& model, const json& j) {
  switch (model.kind) {
    case ModelKind::kLogReg: {
      LogRegParams params;
      params.weights = matrix_from_json(j.at("weights"));
      model.params = std::move(params);
      return;
    }
    case ModelKind::kSvm: {
      SvmParams params;
      params.gamma = j.at("gamma").get<double>();
      params.train = matrix_from_json(j.at("train"));
      params.dual_coef = matrix_from_json(j.at("dual_coef"));
      params.bias = j.at("bias").get<std::vector<double>>();
      model.params = std::move(params);
      return;
    }
    case ModelKind::kKnn: {
      KnnParams params;
      // The tree is rebuilt from the stored training set; construction is
      // deterministic, so predictions round-trip exactly.
      params.tree = BallTree(matrix_from_json(j.at("train")),
                             model.config.knn_leaf_size,
                             model.config.knn_minkowski_p);
      params.labels = j.at("labels").get<std::vector<int>>();
      model.params = std::move(params);
      return;
    }
    case ModelKind::kDtree: {
      DtreeParams params;
      for (const auto& n : j.at("nodes")) {
        if (n.size() != 5) throw SchemaError("container: bad tree node");
        params.nodes.push_back({n.at(0).get<int>(), n.at(1).get<double>(),
                                n.at(2).get<int>(), n.at(3).get<int>(),
                                n.at(4).get<int>()});
      }
      model.params = std::move(params);
      return;
    }
    case ModelKind::kMlp: {
      MlpParams params;
      for (const auto& layer : j.at("layers")) {
        params.weights.push_back(matrix_from_json(layer.at("weights")));
        params.biases.push_back(layer.at("bias").get<std::vector<double>>());
      }
      model.params = std::move(params);
      return;
    }
  }
  throw SchemaError("container: unknown parameters");
}

json load_container(const std::filesystem::path& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw SchemaError("container: cannot open: " + path.string());
  json j;
  try {
    file >> j;
  } catch (const json::parse_error&) {
    throw SchemaError("container: corrupt file: " + path.string());
  }
  if (!j.is_object() || !j.contains("kind") || !j.contains("format_version"))
    throw SchemaError("container: missing kind or format_version");
  if (j["format_version"].get<int>() != kFormatVersion)
    throw SchemaError("container: unsupported format_version");
  return j;
}

void write_container(const json& j, const std::filesystem::path& path) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw SchemaError("container: cannot open for writing: " + path.string());
  file << j.dump(2) << '\n';
}

}  // namespace

void save_model(const TrainedModel& model, const std::filesystem::path& path,
                const std::string& provenance_json) {
  json j{{"format_version", kFormatVersion},
         {"tool_version", kVersion},
         {"kind", to_string(model.kind)},
         {"target", to_string(model.target)},
         {"hyperparameters", hyperparameters_to_json(model.config)},
         {"scaler", scaler_to_json(model.scaler)},
         {"classes", model.class_values},
         {"input_dim", model.input_dim},
         {"n_classes", model.n_classes},
         {"parameters", parameters_to_json(model)}};
  j["provenance"] = provenance_json.empty() ? json(nullptr)
                                            : json::parse(provenance_json);
  write_container(j, path);
}

TrainedModel load_model(const std::filesystem::path& path) {
  const json j = load_container(path);
  const auto kind_name = j["kind"].get<std::string>();
  if (kind_name == "reference_table")
    throw SchemaError("container: expected a model, found a reference table");

  TrainedModel model;
  model.kind = model_kind_from_string(kind_name);
  model.config = hyperparameters_from_json(model.kind, j.at("hyperparameters"));
  model.target = target_from_string(j.at("target").get<std::string>());
  model.scaler = scaler_from_json(j.at("scaler"));
  model.class_values = j.at("classes").get<std::vector<double>>();
  model.input_dim = j.at("input_dim").get<std::size_t>();
  model.n_classes = j.at("n_classes").get<int>();
  try {
    parameters_from_json(model, j.at("parameters"));
  } catch (const json::exception&) {
    throw SchemaError("container: malformed parameters");
  }
  return model;
}

void save_reference_table(const ReferenceTable& table,
                          const std::filesystem::path& path,
                          const std::string& provenance_json) {
  json j{{"format_version", kFormatVersion},
         {"tool_version", kVersion},
         {"kind", "reference_table"},
         {"calib_angles_deg", table.calib_angles_deg},
         {"responses", matrix_to_json(table.responses)},
         {"calib_distance_m", table.calib_distance_m},
         {"calib_activity_ci", table.calib_activity_ci},
         {"calib_time_s", table.calib_time_s}};
  j["provenance"] = provenance_json.empty() ? json(nullptr)
                                            : json::parse(provenance_json);
  write_container(j, path);
}

ReferenceTable load_reference_table(const std::filesystem::path& path) {
  const json j = load_container(path);
  if (j["kind"].get<std::string>() != "reference_table")
    throw SchemaError("container: expected a reference table, found kind '" +
                      j["kind"].get<std::string>() + "'");
  ReferenceTable table;
  table.calib_angles_deg =
      j.at("calib_angles_deg").get<std::vector<double>>();
  table.responses = matrix_from_json(j.at("responses"));
  table.calib_distance_m = j.at("calib_distance_m").get<double>();
  table.calib_activity_ci = j.at("calib_activity_ci").get<double>();
  table.calib_time_s = j.at("calib_time_s").get<double>();
  if (table.responses.rows != table.calib_angles_deg.size())
    throw SchemaError("container: table rows/angles mismatch");
  return table;
}

Predictor load_predictor(const std::filesystem::path& path) {
  const json j = load_container(path);
  if (j["kind"].get<std::string>() == "reference_table")
    return load_reference_table(path);
  return load_model(path);
}

}  // namespace radloc
