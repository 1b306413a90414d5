#include "radloc/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "radloc/errors.hpp"
#include "radloc/parallel.hpp"
#include "radloc/rng.hpp"
#include "radloc/stats.hpp"

namespace radloc {

using nlohmann::json;

std::string to_string(ObstructionPolicy policy) {
  switch (policy) {
    case ObstructionPolicy::kNone: return "none";
    case ObstructionPolicy::kFixed: return "fixed";
    case ObstructionPolicy::kMoving: return "moving";
  }
  return "none";
}

std::string to_string(TransportMode mode) {
  return mode == TransportMode::kMonteCarlo ? "monte_carlo"
                                            : "analytic_poisson";
}

int BinSpec::index_of(double value) const {
  if (edges.size() < 2) throw NumericError("BinSpec: no bins");
  const int n = bins();
  const auto raw = static_cast<int>(std::floor((value - edges.front()) / width));
  return std::clamp(raw, 0, n - 1);
}

double BinSpec::midpoint(int bin) const {
  if (bin < 0 || bin >= bins()) throw NumericError("BinSpec: bin out of range");
  return 0.5 * (edges[static_cast<std::size_t>(bin)] +
                edges[static_cast<std::size_t>(bin) + 1]);
}

BinSpec fd_bin_spec(std::span<const double> values) {
  if (values.size() < 4) throw NumericError("fd_bin_spec: need n >= 4");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double iqr =
      quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
  if (iqr <= 0.0) throw NumericError("fd_bin_spec: zero IQR (all-equal values)");

  BinSpec spec;
  spec.width = 2.0 * iqr / std::cbrt(static_cast<double>(sorted.size()));
  const double lo = sorted.front();
  const double hi = sorted.back();
  const int n_bins = static_cast<int>(std::ceil((hi - lo) / spec.width));
  spec.edges.reserve(static_cast<std::size_t>(n_bins) + 1);
  for (int k = 0; k < n_bins; ++k) spec.edges.push_back(lo + k * spec.width);
  spec.edges.push_back(hi);  // final edge clamped to the max value
  return spec;
}

namespace {

json grid_to_json(const ScenarioGrid& grid) {
  const auto obstructions_to_json = [](const std::vector<Obstruction>& list) {
    json arr = json::array();
    for (const Obstruction& ob : list)
      arr.push_back({{"center", {ob.center.x, ob.center.y}},
                     {"width_m", ob.width_m},
                     {"height_m", ob.height_m},
                     {"mu_per_m", ob.mu_per_m}});
    return arr;
  };
  return json{{"angles_deg", grid.angles_deg},
              {"distances_m", grid.distances_m},
              {"policy", to_string(grid.policy)},
              {"fixed", obstructions_to_json(grid.fixed)},
              {"candidates", obstructions_to_json(grid.candidates)},
              {"replicates", grid.replicates},
              {"mode", to_string(grid.mode)},
              {"n_photons", grid.n_photons},
              {"seed", grid.seed}};
}

// Sub-stream tags hung off the per-sample stream.
constexpr std::uint64_t kCountsTag = 1;
constexpr std::uint64_t kObstructionTag = 2;
constexpr std::uint64_t kMcTag = 3;

}  // namespace

Dataset generate(const ScenarioGrid& grid, const Scene& scene_template,
                 int threads) {
  if (grid.angles_deg.empty() || grid.distances_m.empty())
    throw UsageError("generate: empty angle or distance list");
  if (grid.replicates < 1) throw UsageError("generate: replicates < 1");
  if (grid.policy == ObstructionPolicy::kMoving && grid.candidates.empty())
    throw UsageError("generate: moving policy with no candidates");

  const std::size_t n_angles = grid.angles_deg.size();
  const std::size_t n_dist = grid.distances_m.size();
  const auto reps = static_cast<std::size_t>(grid.replicates);
  const std::size_t total = n_angles * n_dist * reps;

  Dataset ds;
  ds.samples.resize(total);
  ds.angle_classes_deg = grid.angles_deg;
  ds.grid_provenance = grid_to_json(grid).dump();

  parallel_for(total, resolve_threads(threads), [&](std::size_t i) {
    const std::size_t ai = i / (n_dist * reps);
    const std::size_t di = (i / reps) % n_dist;
    const std::uint64_t stream = derive_stream(grid.seed, i);

    Scene scene = scene_template;
    scene.source.pose = {grid.distances_m[di], grid.angles_deg[ai]};
    int obstruction_id = -1;
    switch (grid.policy) {
      case ObstructionPolicy::kNone:
        scene.obstructions.clear();
        break;
      case ObstructionPolicy::kFixed:
        scene.obstructions = grid.fixed;
        break;
      case ObstructionPolicy::kMoving: {
        Xoshiro256pp pick(derive_stream(stream, kObstructionTag));
        obstruction_id = static_cast<int>(pick.below(grid.candidates.size()));
        scene.obstructions = {grid.candidates[static_cast<std::size_t>(obstruction_id)]};
        break;
      }
    }

    Sample& sample = ds.samples[i];
    if (grid.mode == TransportMode::kAnalyticPoisson) {
      sample.counts =
          sample_counts(expected_counts(scene), derive_stream(stream, kCountsTag));
    } else {
      sample.counts =
          mc_counts(scene, grid.n_photons, derive_stream(stream, kMcTag));
    }
    sample.angle_class = static_cast<int>(ai);
    sample.true_angle_deg = grid.angles_deg[ai];
    sample.true_distance_m = grid.distances_m[di];
    sample.obstruction_id = obstruction_id;
  });

  std::vector<double> distances(total);
  for (std::size_t i = 0; i < total; ++i)
    distances[i] = ds.samples[i].true_distance_m;
  ds.bin_spec = fd_bin_spec(distances);
  for (Sample& sample : ds.samples)
    sample.distance_bin = ds.bin_spec.index_of(sample.true_distance_m);
  return ds;
}

std::pair<Dataset, Dataset> split(const Dataset& ds, double test_fraction,
                                  std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    throw UsageError("split: test_fraction outside (0, 1)");

  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < ds.samples.size(); ++i)
    by_class[ds.samples[i].angle_class].push_back(i);

  std::vector<char> in_test(ds.samples.size(), 0);
  for (auto& [cls, indices] : by_class) {
    if (indices.size() < 2)
      throw SchemaError("split: angle class " + std::to_string(cls) +
                        " has fewer than 2 samples");
    Xoshiro256pp rng(derive_stream(seed, static_cast<std::uint64_t>(cls)));
    for (std::size_t i = indices.size() - 1; i > 0; --i)
      std::swap(indices[i], indices[rng.below(i + 1)]);
    auto take = static_cast<std::size_t>(
        std::llround(test_fraction * static_cast<double>(indices.size())));
    take = std::clamp<std::size_t>(take, 1, indices.size() - 1);
    for (std::size_t i = 0; i < take; ++i) in_test[indices[i]] = 1;
  }

  Dataset train;
  Dataset test;
  for (Dataset* part : {&train, &test}) {
    part->angle_classes_deg = ds.angle_classes_deg;
    part->bin_spec = ds.bin_spec;
    part->grid_provenance = ds.grid_provenance;
    part->provenance = ds.provenance;
  }
  for (std::size_t i = 0; i < ds.samples.size(); ++i)
    (in_test[i] ? test : train).samples.push_back(ds.samples[i]);
  return {std::move(train), std::move(test)};
}

namespace {

void append_number(std::string& out, double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, res.ptr);
}

double parse_double(std::string_view cell, std::size_t line_no) {
  double v = 0.0;
  const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (res.ec != std::errc{} || res.ptr != cell.data() + cell.size())
    throw SchemaError("csv: non-numeric cell at line " +
                      std::to_string(line_no));
  return v;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return fields;
}

std::string expected_header(std::size_t n_det) {
  std::string header;
  for (std::size_t d = 0; d < n_det; ++d) {
    header += "det_" + std::to_string(d) + ",";
  }
  header +=
      "true_angle_deg,true_distance_m,angle_class,distance_bin,obstruction_id";
  return header;
}

constexpr std::string_view kMetaPrefix = "# radloc-dataset ";

}  // namespace

void write_csv(const Dataset& ds, const std::filesystem::path& path) {
  const std::size_t n_det = ds.feature_dim();
  json meta{{"format_version", 1},
            {"angle_classes_deg", ds.angle_classes_deg},
            {"bin_edges_m", ds.bin_spec.edges},
            {"bin_width_m", ds.bin_spec.width}};
  meta["grid"] = ds.grid_provenance.empty()
                     ? json(nullptr)
                     : json::parse(ds.grid_provenance);
  meta["provenance"] =
      ds.provenance.empty() ? json(nullptr) : json::parse(ds.provenance);

  std::string out;
  out.reserve(ds.samples.size() * 64 + 256);
  out += kMetaPrefix;
  out += meta.dump();
  out += '\n';
  out += expected_header(n_det);
  out += '\n';
  for (const Sample& sample : ds.samples) {
    for (double c : sample.counts) {
      append_number(out, c);
      out += ',';
    }
    append_number(out, sample.true_angle_deg);
    out += ',';
    append_number(out, sample.true_distance_m);
    out += ',';
    out += std::to_string(sample.angle_class);
    out += ',';
    out += std::to_string(sample.distance_bin);
    out += ',';
    out += std::to_string(sample.obstruction_id);
    out += '\n';
  }

  std::ofstream file(path, std::ios::binary);
  if (!file) throw SchemaError("csv: cannot open for writing: " + path.string());
  file.write(out.data(), static_cast<std::streamsize>(out.size()));
}

Dataset read_csv(const std::filesystem::path& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw SchemaError("csv: cannot open: " + path.string());

  Dataset ds;
  std::string line;
  std::size_t line_no = 0;
  bool have_meta = false;

  if (!std::getline(file, line)) throw SchemaError("csv: empty file");
  ++line_no;
  if (line.starts_with(kMetaPrefix)) {
    json meta;
    try {
      meta = json::parse(line.substr(kMetaPrefix.size()));
    } catch (const json::parse_error&) {
      throw SchemaError("csv: corrupt metadata line");
    }
    ds.angle_classes_deg = meta.at("angle_classes_deg").get<std::vector<double>>();
    ds.bin_spec.edges = meta.at("bin_edges_m").get<std::vector<double>>();
    ds.bin_spec.width = meta.at("bin_width_m").get<double>();
    if (!meta.at("grid").is_null()) ds.grid_provenance = meta["grid"].dump();
    if (!meta.at("provenance").is_null())
      ds.provenance = meta["provenance"].dump();
    have_meta = true;
    if (!std::getline(file, line)) throw SchemaError("csv: missing header");
    ++line_no;
  }

  // Header fixes the detector count (possibly zero for header-only files).
  const auto header_fields = split_fields(line);
  if (header_fields.size() < 5) throw SchemaError("csv: malformed header");
  const std::size_t n_det = header_fields.size() - 5;
  if (line != expected_header(n_det)) throw SchemaError("csv: malformed header");

  while (std::getline(file, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != n_det + 5)
      throw SchemaError("csv: inconsistent field count at line " +
                        std::to_string(line_no));
    Sample sample;
    sample.counts.resize(n_det);
    for (std::size_t d = 0; d < n_det; ++d)
      sample.counts[d] = parse_double(fields[d], line_no);
    sample.true_angle_deg = parse_double(fields[n_det], line_no);
    sample.true_distance_m = parse_double(fields[n_det + 1], line_no);
    sample.angle_class =
        static_cast<int>(parse_double(fields[n_det + 2], line_no));
    sample.distance_bin =
        static_cast<int>(parse_double(fields[n_det + 3], line_no));
    sample.obstruction_id =
        static_cast<int>(parse_double(fields[n_det + 4], line_no));
    ds.samples.push_back(std::move(sample));
  }

  if (!have_meta) {
    // Foreign file: reconstruct what we can. Angle classes from the data;
    // uniform bins covering the observed range with the stored label count.
    std::vector<double> angles;
    std::vector<double> distances;
    int max_bin = 0;
    for (const Sample& s : ds.samples) {
      angles.push_back(s.true_angle_deg);
      distances.push_back(s.true_distance_m);
      max_bin = std::max(max_bin, s.distance_bin);
    }
    std::sort(angles.begin(), angles.end());
    angles.erase(std::unique(angles.begin(), angles.end()), angles.end());
    ds.angle_classes_deg = angles;
    if (!distances.empty()) {
      const auto [lo, hi] = std::minmax_element(distances.begin(), distances.end());
      const int n_bins = max_bin + 1;
      const double width = (*hi > *lo) ? (*hi - *lo) / n_bins : 1.0;
      ds.bin_spec.width = width;
      for (int k = 0; k <= n_bins; ++k)
        ds.bin_spec.edges.push_back(*lo + k * width);
      if (*hi > *lo) ds.bin_spec.edges.back() = *hi;
    }
  }
  return ds;
}

}  // namespace radloc
