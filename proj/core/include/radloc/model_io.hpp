#pragma once

#include <filesystem>
#include <string>
#include <variant>

#include "radloc/models.hpp"
#include "radloc/reftable.hpp"

namespace radloc {

/// Self-describing JSON containers with a top-level kind tag. A reference
/// table and a trained model share the format; the typed loaders reject the
/// other's kind, load_predictor accepts either.
void save_model(const TrainedModel& model, const std::filesystem::path& path,
                const std::string& provenance_json = "");
TrainedModel load_model(const std::filesystem::path& path);

void save_reference_table(const ReferenceTable& table,
                          const std::filesystem::path& path,
                          const std::string& provenance_json = "");
ReferenceTable load_reference_table(const std::filesystem::path& path);

using Predictor = std::variant<TrainedModel, ReferenceTable>;
Predictor load_predictor(const std::filesystem::path& path);

}  // namespace radloc
