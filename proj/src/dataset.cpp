#include "quantiscene/dataset.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <set>
#include <sstream>

#include "quantiscene/checksum.hpp"
#include "quantiscene/errors.hpp"
#include "quantiscene/parallel.hpp"
#include "quantiscene/rng.hpp"

namespace quantiscene {

namespace fs = std::filesystem;

std::uint64_t master_seed_from_env(std::uint64_t fallback) {
  const char* value = std::getenv("QUANTISCENE_SEED");
  if (value == nullptr || *value == '\0') return fallback;
  try {
    std::size_t used = 0;
    const std::uint64_t seed = std::stoull(value, &used, 0);
    if (value[used] != '\0') throw std::invalid_argument("trailing characters");
    return seed;
  } catch (const std::exception&) {
    throw std::invalid_argument(std::string("QUANTISCENE_SEED is not an unsigned integer: '") +
                                value + "'");
  }
}

namespace {

std::string_view to_string(CollisionPolicy p) noexcept {
  return p == CollisionPolicy::none_allowed ? "none_allowed" : "overlap_quarter";
}

CollisionPolicy collision_from_string(const std::string& name) {
  if (name == "none_allowed") return CollisionPolicy::none_allowed;
  if (name == "overlap_quarter") return CollisionPolicy::overlap_quarter;
  throw std::invalid_argument("unknown collision policy '" + name + "'");
}

std::string_view to_string(ContrastAttribute a) noexcept {
  return a == ContrastAttribute::shape ? "shape" : "color";
}

ContrastAttribute contrast_from_string(const std::string& name) {
  if (name == "shape") return ContrastAttribute::shape;
  if (name == "color") return ContrastAttribute::color;
  throw std::invalid_argument("unknown contrast attribute '" + name + "'");
}

std::string_view to_string(Antialias a) noexcept {
  return a == Antialias::none ? "none" : "supersample_4x";
}

Antialias antialias_from_string(const std::string& name) {
  if (name == "none") return Antialias::none;
  if (name == "supersample_4x") return Antialias::supersample_4x;
  throw std::invalid_argument("unknown antialiasing mode '" + name + "'");
}

const std::vector<Ratio>& standard_ratios() {
  static const std::vector<Ratio> ratios{{1, 2}, {2, 3}, {3, 4}, {4, 5}, {5, 6}, {6, 7}, {7, 8}};
  return ratios;
}

constexpr std::array kModes{PositionMode::random, PositionMode::partitioned, PositionMode::paired};

EvalConfig cell_config(PositionMode mode, bool area, std::vector<Ratio> ratios, int budget) {
  EvalConfig c;
  c.mode = mode;
  c.area_controlled = area;
  c.ratios = std::move(ratios);
  c.object_budget = budget;
  return c;
}

std::string padded(std::size_t index) {
  std::ostringstream out;
  out << std::setw(6) << std::setfill('0') << index;
  return out.str();
}

template <typename Generate>
auto with_resampling(std::uint64_t base_seed, Generate&& generate) {
  for (int attempt = 0;; ++attempt) {
    const std::uint64_t seed =
        attempt == 0 ? base_seed : derive_seed(base_seed, static_cast<std::uint64_t>(attempt));
    try {
      return std::pair{generate(seed), seed};
    } catch (const PlacementFailure&) {
      if (attempt + 1 >= kMaxResamples) throw;
    }
  }
}

std::uint64_t caption_seed(std::uint64_t scene_seed) {
  return derive_seed(scene_seed, hash_tag("caption"));
}

}  // namespace

Json to_json(const EvalConfig& config) {
  Json j;
  j["mode"] = to_string(config.mode);
  j["area_controlled"] = config.area_controlled;
  Json& ratios = j["ratios"] = Json::array();
  for (const Ratio& r : config.ratios) ratios.push_back(r.label());
  if (config.contrast) j["contrast"] = to_string(*config.contrast);
  j["object_budget"] = config.object_budget;
  j["collision"] = to_string(config.collision);
  j["sizes"] = {config.sizes.lo, config.sizes.hi};
  return j;
}

EvalConfig eval_config_from_json(const Json& j) {
  EvalConfig c;
  c.mode = position_mode_from_string(j.at("mode").get<std::string>());
  c.area_controlled = j.value("area_controlled", false);
  c.ratios.clear();
  for (const Json& r : j.at("ratios")) c.ratios.push_back(parse_ratio(r.get<std::string>()));
  if (c.ratios.empty()) throw std::invalid_argument("cell needs at least one ratio");
  if (const auto it = j.find("contrast"); it != j.end()) {
    c.contrast = contrast_from_string(it->get<std::string>());
  }
  c.object_budget = j.value("object_budget", 15);
  c.collision = collision_from_string(j.value("collision", std::string("none_allowed")));
  if (const auto it = j.find("sizes"); it != j.end()) {
    c.sizes = {it->at(0).get<double>(), it->at(1).get<double>()};
    if (!(c.sizes.lo > 0.0 && c.sizes.lo <= c.sizes.hi && c.sizes.hi <= 1.0)) {
      throw std::invalid_argument("size range must satisfy 0 < lo <= hi <= 1");
    }
  }
  for (const Ratio& r : c.ratios) validate(RatioSpec{r, 1}, c.object_budget);
  return c;
}

GridConfig GridConfig::standard() {
  GridConfig g;
  for (PositionMode mode : kModes) {
    for (bool area : {false, true}) {
      g.cells.push_back(cell_config(mode, area, standard_ratios(), 15));
      for (const Ratio& r : standard_ratios()) g.cells.push_back(cell_config(mode, area, {r}, 15));
    }
  }
  return g;
}

GridConfig GridConfig::extended() {
  GridConfig g;
  for (PositionMode mode : kModes) {
    for (bool area : {false, true}) {
      for (int n = 1; n <= 10; ++n) {
        g.cells.push_back(cell_config(mode, area, {Ratio{n, n + 1}}, std::max(15, 2 * n + 1)));
      }
    }
  }
  return g;
}

Json to_json(const GridConfig& grid) {
  Json j;
  j["master_seed"] = grid.master_seed;
  j["instances_per_cell"] = grid.instances_per_cell;
  Json& cells = j["cells"] = Json::array();
  for (const EvalConfig& c : grid.cells) cells.push_back(to_json(c));
  return j;
}

GridConfig grid_from_json(const Json& j) {
  if (!j.is_object()) throw std::invalid_argument("grid config must be a JSON object");
  GridConfig g;
  if (const auto it = j.find("preset"); it != j.end()) {
    const auto name = it->get<std::string>();
    if (name == "standard") {
      g = GridConfig::standard();
    } else if (name == "extended") {
      g = GridConfig::extended();
    } else {
      throw std::invalid_argument("unknown grid preset '" + name + "'");
    }
  } else if (const auto cells = j.find("cells"); cells != j.end()) {
    for (const Json& c : *cells) g.cells.push_back(eval_config_from_json(c));
  } else {
    std::vector<PositionMode> modes(kModes.begin(), kModes.end());
    if (const auto it = j.find("modes"); it != j.end()) {
      modes.clear();
      for (const Json& m : *it) modes.push_back(position_mode_from_string(m.get<std::string>()));
    }
    std::vector<bool> areas{false, true};
    if (const auto it = j.find("area_controlled"); it != j.end()) {
      areas.clear();
      for (const Json& a : *it) areas.push_back(a.get<bool>());
    }
    std::vector<Ratio> ratios = standard_ratios();
    if (const auto it = j.find("ratios"); it != j.end()) {
      ratios.clear();
      for (const Json& r : *it) ratios.push_back(parse_ratio(r.get<std::string>()));
    }
    const bool mixed = j.value("include_mixed", true);
    const int budget = j.value("object_budget", 15);
    for (PositionMode mode : modes) {
      for (bool area : areas) {
        if (mixed && ratios.size() > 1) g.cells.push_back(cell_config(mode, area, ratios, budget));
        for (const Ratio& r : ratios) {
          g.cells.push_back(cell_config(mode, area, {r}, std::max(budget, r.small + r.large)));
        }
      }
    }
  }
  g.master_seed = j.value("master_seed", kDefaultMasterSeed);
  g.instances_per_cell = j.value("instances_per_cell", 1024);
  if (g.instances_per_cell < 1) throw std::invalid_argument("instances_per_cell must be positive");
  if (g.cells.empty()) throw std::invalid_argument("grid has no cells");
  std::set<std::string> labels;
  for (const EvalConfig& c : g.cells) {
    if (!labels.insert(c.label()).second) {
      throw std::invalid_argument("duplicate grid cell " + c.label());
    }
  }
  return g;
}

std::vector<InstanceRecord> generate_eval_records(const GridConfig& grid, unsigned threads) {
  const auto per_cell = static_cast<std::size_t>(grid.instances_per_cell);
  std::vector<InstanceRecord> records(grid.cells.size() * per_cell);
  parallel_for(records.size(), threads, [&](std::size_t index) {
    const EvalConfig& config = grid.cells[index / per_cell];
    const std::size_t k = index % per_cell;
    const auto [eval, seed] =
        with_resampling(seed_for(grid.master_seed, config.label(), k),
                        [&](std::uint64_t s) { return generate_eval_scene(config, s); });
    Rng caption_rng(caption_seed(seed));
    InstanceRecord& r = records[index];
    r.id = "eval-" + padded(index);
    r.image_path = "eval/" + padded(index) + ".png";
    r.caption_ast = eval_caption_for(eval.metadata, caption_rng);
    r.caption_text = realize(r.caption_ast);
    r.agreement = evaluate(r.caption_ast, eval.scene);
    r.cell = CellRef::of(config);
    r.counts = std::pair{eval.metadata.minority_count, eval.metadata.majority_count};
    r.seed = seed;
    r.scene = eval.scene;
  });
  return records;
}

EvalScene regenerate_eval_scene(const GridConfig& grid, const InstanceRecord& record) {
  if (!record.cell) throw DatasetError("record '" + record.id + "' has no evaluation cell");
  const std::string label = record.cell->label();
  for (const EvalConfig& c : grid.cells) {
    if (c.label() == label) return generate_eval_scene(c, record.seed);
  }
  throw DatasetError("record '" + record.id + "' refers to unknown cell " + label);
}

std::vector<InstanceRecord> generate_train_records(const TrainGenConfig& config,
                                                   unsigned threads) {
  if (config.images < 1) throw std::invalid_argument("need at least one training image");
  const auto per_image = static_cast<std::size_t>(config.train.captions_per_image);
  if (per_image < 1) throw std::invalid_argument("need at least one caption per image");
  std::vector<InstanceRecord> records(static_cast<std::size_t>(config.images) * per_image);
  parallel_for(static_cast<std::size_t>(config.images), threads, [&](std::size_t image) {
    const auto [scene, seed] =
        with_resampling(seed_for(config.master_seed, "train", image),
                        [&](std::uint64_t s) { return generate_training_scene(config.train, s); });
    Rng caption_rng(caption_seed(seed));
    for (std::size_t k = 0; k < per_image; ++k) {
      const SampledCaption sampled =
          sample_training_caption(scene, config.train.captioner, caption_rng);
      InstanceRecord& r = records[image * per_image + k];
      r.id = "train-" + padded(image) + "-" + std::to_string(k);
      r.image_path = "train/" + padded(image) + ".png";
      r.caption_ast = sampled.caption;
      r.caption_text = realize(sampled.caption);
      r.agreement = sampled.agreement;
      r.seed = seed;
      r.scene = scene;
    }
  });
  return records;
}

Json to_json(const DatasetManifest& m) {
  Json j;
  j["version"] = m.version;
  j["master_seed"] = m.master_seed;
  j["rng_version"] = m.rng_version;
  Json& splits = j["splits"] = Json::array();
  for (const SplitInfo& s : m.splits) {
    splits.push_back({{"name", s.name}, {"images", s.images}, {"records", s.records}});
  }
  if (m.captioner) j["captioner"] = *m.captioner;
  if (m.grid) j["grid"] = *m.grid;
  j["raster"] = {{"resolution", m.raster.resolution},
                 {"antialias", to_string(m.raster.antialias)},
                 {"background",
                  {m.raster.background.r, m.raster.background.g, m.raster.background.b}}};
  Json& files = j["files"] = Json::object();
  for (const auto& [path, sum] : m.files) files[path] = sum;
  return j;
}

DatasetManifest manifest_from_json(const Json& j) {
  DatasetManifest m;
  m.version = j.at("version").get<std::string>();
  if (m.version != kDatasetVersion) {
    throw DatasetError("unsupported dataset version '" + m.version + "'");
  }
  m.master_seed = j.at("master_seed").get<std::uint64_t>();
  m.rng_version = j.at("rng_version").get<std::string>();
  for (const Json& s : j.at("splits")) {
    m.splits.push_back({s.at("name").get<std::string>(), s.at("images").get<std::int64_t>(),
                        s.at("records").get<std::int64_t>()});
  }
  if (const auto it = j.find("captioner"); it != j.end()) m.captioner = it->get<std::string>();
  if (const auto it = j.find("grid"); it != j.end()) m.grid = *it;
  const Json& raster = j.at("raster");
  m.raster.resolution = raster.at("resolution").get<int>();
  m.raster.antialias = antialias_from_string(raster.at("antialias").get<std::string>());
  const Json& bg = raster.at("background");
  m.raster.background = {bg.at(0).get<std::uint8_t>(), bg.at(1).get<std::uint8_t>(),
                         bg.at(2).get<std::uint8_t>()};
  for (const auto& [path, sum] : j.at("files").items()) m.files[path] = sum.get<std::string>();
  return m;
}

namespace {

void write_file(const fs::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DatasetError("cannot write " + path.string());
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DatasetError("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace

DatasetManifest write_dataset(const std::vector<InstanceRecord>& records, const fs::path& out_dir,
                              const DatasetOptions& options) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw DatasetError("cannot create " + out_dir.string() + ": " + ec.message());

  DatasetManifest manifest;
  manifest.master_seed = options.master_seed;
  manifest.rng_version = std::string(kRngVersion);
  manifest.captioner = options.captioner;
  manifest.grid = options.grid;
  manifest.raster = options.raster;

  std::string lines;
  std::vector<const InstanceRecord*> image_owner;
  std::set<std::string> ids;
  std::set<std::string> paths;
  for (const InstanceRecord& r : records) {
    if (!ids.insert(r.id).second) throw DatasetError("duplicate record id '" + r.id + "'");
    if (const auto problem = consistency_violation(r)) {
      throw DatasetError("record '" + r.id + "': " + *problem);
    }
    lines += to_json(r).dump();
    lines += '\n';
    if (paths.insert(r.image_path).second) image_owner.push_back(&r);
  }
  write_file(out_dir / kRecordsFile,
             std::span(reinterpret_cast<const std::uint8_t*>(lines.data()), lines.size()));
  manifest.files[std::string(kRecordsFile)] = sha256_hex(lines);

  if (options.write_images) {
    for (const std::string& p : paths) {
      fs::create_directories((out_dir / p).parent_path(), ec);
      if (ec) throw DatasetError("cannot create directory for " + p + ": " + ec.message());
    }
    std::vector<std::string> sums(image_owner.size());
    parallel_for(image_owner.size(), options.threads, [&](std::size_t i) {
      const InstanceRecord& r = *image_owner[i];
      if (!r.scene) throw DatasetError("record '" + r.id + "' has no scene to render");
      const auto png = encode_png(render(*r.scene, options.raster));
      write_file(out_dir / r.image_path, png);
      sums[i] = sha256_hex(png);
    });
    for (std::size_t i = 0; i < image_owner.size(); ++i) {
      manifest.files[image_owner[i]->image_path] = sums[i];
    }
  }
  manifest.splits.push_back({options.split, static_cast<std::int64_t>(paths.size()),
                             static_cast<std::int64_t>(records.size())});
  const std::string text = to_json(manifest).dump(2) + "\n";
  write_file(out_dir / kManifestFile,
             std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
  return manifest;
}

Dataset read_dataset(const fs::path& dir, bool verify_checksums) {
  Dataset d;
  d.root = dir;
  try {
    d.manifest = manifest_from_json(Json::parse(read_file(dir / kManifestFile)));
  } catch (const DatasetError&) {
    throw;
  } catch (const std::exception& e) {
    throw DatasetError((dir / kManifestFile).string() + ": " + e.what());
  }
  const std::string lines = read_file(dir / kRecordsFile);
  if (verify_checksums) {
    const auto it = d.manifest.files.find(std::string(kRecordsFile));
    if (it == d.manifest.files.end() || it->second != sha256_hex(lines)) {
      throw DatasetError((dir / kRecordsFile).string() + ": checksum mismatch");
    }
  }
  std::istringstream in(lines);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      d.records.push_back(record_from_json(Json::parse(line)));
    } catch (const std::exception& e) {
      throw DatasetError((dir / kRecordsFile).string() + ":" + std::to_string(line_no) + ": " +
                         e.what());
    }
  }
  if (verify_checksums) {
    for (const auto& [path, sum] : d.manifest.files) {
      if (path == kRecordsFile) continue;
      const std::string bytes = read_file(dir / path);
      if (sha256_hex(bytes) != sum) throw DatasetError((dir / path).string() + ": checksum mismatch");
    }
  }
  return d;
}

VerifyReport verify_dataset(const fs::path& dir, unsigned threads) {
  VerifyReport report;
  Dataset d = read_dataset(dir, false);
  report.records = d.records.size();
  std::mutex lock;
  auto problem = [&](std::string text) {
    std::lock_guard guard(lock);
    report.problems.push_back(std::move(text));
  };

  for (const auto& [path, sum] : d.manifest.files) {
    try {
      if (sha256_hex(read_file(dir / path)) != sum) problem(path + ": checksum mismatch");
    } catch (const DatasetError& e) {
      problem(e.what());
    }
  }

  std::optional<GridConfig> grid;
  if (d.manifest.grid) grid = grid_from_json(*d.manifest.grid);
  std::map<std::string, const InstanceRecord*> first_with_image;
  for (const InstanceRecord& r : d.records) first_with_image.emplace(r.image_path, &r);
  report.images = first_with_image.size();

  parallel_for(d.records.size(), threads, [&](std::size_t i) {
    const InstanceRecord& r = d.records[i];
    if (const auto p = consistency_violation(r)) problem(r.id + ": " + *p);
    if (!r.scene) return;
    if (!policy_violations(*r.scene).empty()) problem(r.id + ": collision policy violated");
    if (grid && r.cell) {
      try {
        const EvalScene regenerated = regenerate_eval_scene(*grid, r);
        if (to_json(regenerated.scene) != to_json(*r.scene)) {
          problem(r.id + ": scene differs from its regeneration");
        }
        const std::string label = r.cell->label();
        for (const EvalConfig& c : grid->cells) {
          if (c.label() != label) continue;
          if (const auto v = invariant_violation(c, regenerated)) problem(r.id + ": " + *v);
        }
        if (r.counts && *r.counts != std::pair{regenerated.metadata.minority_count,
                                               regenerated.metadata.majority_count}) {
          problem(r.id + ": counts differ from the generated scene");
        }
      } catch (const std::exception& e) {
        problem(r.id + ": " + e.what());
      }
    }
    const auto owner = first_with_image.find(r.image_path);
    if (owner->second == &r && d.manifest.files.count(r.image_path)) {
      const auto png = encode_png(render(*r.scene, d.manifest.raster));
      if (sha256_hex(png) != d.manifest.files.at(r.image_path)) {
        problem(r.image_path + ": image differs from a fresh rendering of the scene");
      }
    }
  });
  std::sort(report.problems.begin(), report.problems.end());
  return report;
}

}  // namespace quantiscene
