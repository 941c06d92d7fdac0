#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "quantiscene/generator.hpp"
#include "quantiscene/json_fwd.hpp"
#include "quantiscene/raster.hpp"
#include "quantiscene/record.hpp"

namespace quantiscene {

inline constexpr std::string_view kDatasetVersion = "quantiscene-dataset/1";
inline constexpr std::uint64_t kDefaultMasterSeed = 2018;
/// Scenes whose layout fails are redrawn from derived seeds at most this often.
inline constexpr int kMaxResamples = 64;
inline constexpr std::string_view kRecordsFile = "records.jsonl";
inline constexpr std::string_view kManifestFile = "manifest.json";

/// Master seed from the QUANTISCENE_SEED environment variable, else `fallback`.
std::uint64_t master_seed_from_env(std::uint64_t fallback);

Json to_json(const EvalConfig& config);
EvalConfig eval_config_from_json(const Json& j);

/// Evaluation grid: every cell gets `instances_per_cell` instances.
struct GridConfig {
  std::uint64_t master_seed = kDefaultMasterSeed;
  int instances_per_cell = 1024;
  std::vector<EvalConfig> cells;

  /// 3 modes x 2 area flags x (mixed "all" + 1:2 ... 7:8) = 48 cells, budget 15.
  static GridConfig standard();
  /// 3 modes x 2 area flags x 1:2 ... 10:11 with budget max(15, small + large).
  static GridConfig extended();
};

/// {"master_seed", "instances_per_cell", "cells": [...]}. The reader also
/// accepts the compact form {"preset": "standard"|"extended"} or
/// {"modes", "area_controlled", "ratios", "include_mixed", "object_budget"}.
Json to_json(const GridConfig& grid);
GridConfig grid_from_json(const Json& j);

struct TrainGenConfig {
  std::uint64_t master_seed = kDefaultMasterSeed;
  int images = 4096;
  TrainConfig train;
};

/// Records ordered by cell, then instance index. Deterministic in the config
/// and independent of `threads`.
std::vector<InstanceRecord> generate_eval_records(const GridConfig& grid, unsigned threads = 0);
std::vector<InstanceRecord> generate_train_records(const TrainGenConfig& config,
                                                   unsigned threads = 0);

/// Regenerates the scene of an evaluation record from its cell and seed.
EvalScene regenerate_eval_scene(const GridConfig& grid, const InstanceRecord& record);

struct SplitInfo {
  std::string name;
  std::int64_t images = 0;
  std::int64_t records = 0;
  friend bool operator==(const SplitInfo&, const SplitInfo&) = default;
};

struct DatasetManifest {
  std::string version{kDatasetVersion};
  std::uint64_t master_seed = kDefaultMasterSeed;
  std::string rng_version;
  std::vector<SplitInfo> splits;
  std::optional<std::string> captioner;
  /// Grid configuration of evaluation datasets.
  std::optional<Json> grid;
  RasterConfig raster;
  /// Relative path -> hex SHA-256.
  std::map<std::string, std::string> files;
};

Json to_json(const DatasetManifest& manifest);
DatasetManifest manifest_from_json(const Json& j);

struct DatasetOptions {
  std::string split = "eval";
  std::uint64_t master_seed = kDefaultMasterSeed;
  std::optional<std::string> captioner;
  std::optional<Json> grid;
  RasterConfig raster;
  bool write_images = true;
  unsigned threads = 0;
};

/// Writes records.jsonl, one PNG per distinct image_path (rendered from the
/// inline scene) and manifest.json. Throws DatasetError with file context.
DatasetManifest write_dataset(const std::vector<InstanceRecord>& records,
                              const std::filesystem::path& out_dir, const DatasetOptions& options);

struct Dataset {
  std::filesystem::path root;
  DatasetManifest manifest;
  std::vector<InstanceRecord> records;
};

/// Throws DatasetError on malformed files or, when `verify_checksums` is set,
/// on any checksum mismatch.
Dataset read_dataset(const std::filesystem::path& dir, bool verify_checksums = true);

struct VerifyReport {
  std::size_t records = 0;
  std::size_t images = 0;
  std::vector<std::string> problems;
  bool ok() const noexcept { return problems.empty(); }
};

/// Re-checks checksums, record consistency, collision policy, eval counts and
/// partition/pairing invariants, regenerated scenes and re-rendered images.
VerifyReport verify_dataset(const std::filesystem::path& dir, unsigned threads = 0);

}  // namespace quantiscene
