#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "radloc/transport.hpp"

namespace radloc {

enum class ObstructionPolicy { kNone, kFixed, kMoving };
enum class TransportMode { kAnalyticPoisson, kMonteCarlo };

std::string to_string(ObstructionPolicy policy);
std::string to_string(TransportMode mode);

/// The scenario grid a dataset is generated from: one sample per
/// (angle, distance, replicate) cell.
struct ScenarioGrid {
  std::vector<double> angles_deg;
  std::vector<double> distances_m;
  ObstructionPolicy policy = ObstructionPolicy::kNone;
  std::vector<Obstruction> fixed;       // kFixed: always present
  std::vector<Obstruction> candidates;  // kMoving: one drawn per sample
  int replicates = 1;
  TransportMode mode = TransportMode::kAnalyticPoisson;
  std::int64_t n_photons = 1'000'000;  // kMonteCarlo only
  std::uint64_t seed = 7;

  std::size_t sample_count() const {
    return angles_deg.size() * distances_m.size() *
           static_cast<std::size_t>(replicates);
  }
};

/// Distance bins: edges[0] = min value, steps of `width`, last edge clamped
/// to the max value.
struct BinSpec {
  std::vector<double> edges;
  double width = 0.0;

  int bins() const { return static_cast<int>(edges.size()) - 1; }
  int index_of(double value) const;
  double midpoint(int bin) const;
};

/// Freedman-Diaconis binning: width = 2*IQR(values)/n^(1/3). Throws
/// NumericError when the IQR is zero (all-equal values).
BinSpec fd_bin_spec(std::span<const double> values);

struct Sample {
  CountVector counts;
  int angle_class = 0;
  int distance_bin = 0;
  double true_angle_deg = 0.0;
  double true_distance_m = 0.0;
  int obstruction_id = -1;  // -1 = no obstruction drawn
};

struct Dataset {
  std::vector<Sample> samples;
  std::vector<double> angle_classes_deg;
  BinSpec bin_spec;
  std::string grid_provenance;  // JSON echo of the generating grid, or ""
  std::string provenance;       // caller-supplied provenance block, or ""

  std::size_t feature_dim() const {
    return samples.empty() ? 0 : samples.front().counts.size();
  }
};

/// One deterministic pass over the grid. Sample i draws from substreams of
/// derive_stream(grid.seed, i), so the result is identical for any thread
/// count. The scene template supplies everything the grid does not (array,
/// activity, acquisition); its pose and obstructions are overwritten.
Dataset generate(const ScenarioGrid& grid, const Scene& scene_template,
                 int threads = 1);

/// Stratified split by angle class; deterministic under `seed`; disjoint.
std::pair<Dataset, Dataset> split(const Dataset& ds, double test_fraction,
                                  std::uint64_t seed);

/// CSV with a `# radloc-dataset {...}` metadata line, then the fixed header
/// det_0..det_{N-1},true_angle_deg,true_distance_m,angle_class,distance_bin,
/// obstruction_id. UTF-8, comma-separated, '.' decimal, LF endings;
/// shortest-round-trip float formatting makes re-runs byte-identical.
void write_csv(const Dataset& ds, const std::filesystem::path& path);
Dataset read_csv(const std::filesystem::path& path);

/// Named presets (S1, S2, S3, L1, L2 and their -small variants) mirroring
/// the benchmark scenarios: S presets use an 8-detector ring, full rotation,
/// 1-15 m; L presets a 4-detector ring, 0-90 degrees, 0.5-3 m.
struct Preset {
  ScenarioGrid grid;
  Scene scene;
};
Preset preset(const std::string& name);
std::vector<std::string> preset_names();

}  // namespace radloc
