#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "quantiscene/caption.hpp"
#include "quantiscene/generator.hpp"
#include "quantiscene/json_fwd.hpp"
#include "quantiscene/scene.hpp"

namespace quantiscene {

/// Evaluation-grid cell an instance was drawn from.
struct CellRef {
  PositionMode mode = PositionMode::random;
  bool area_controlled = false;
  /// "small:large", or "all" for the mixed-ratio cell.
  std::string ratio = "1:2";

  /// "<mode>/<size|area>/<ratio>"
  std::string label() const;
  static CellRef of(const EvalConfig& config);
  friend bool operator==(const CellRef&, const CellRef&) = default;
  friend auto operator<=>(const CellRef&, const CellRef&) = default;
};

/// One benchmark item: an image, a caption and its agreement value.
struct InstanceRecord {
  std::string id;
  /// Relative to the dataset directory.
  std::string image_path;
  std::optional<Scene> scene;
  std::string caption_text;
  CaptionAST caption_ast;
  std::optional<bool> agreement;
  /// Evaluation instances only.
  std::optional<CellRef> cell;
  /// Evaluation instances only: (minority, majority) object counts.
  std::optional<std::pair<int, int>> counts;
  /// Seed the scene was generated from.
  std::uint64_t seed = 0;

  friend bool operator==(const InstanceRecord&, const InstanceRecord&) = default;
};

/// Keys in pinned order: id, image_path, seed, cell, counts, caption_text,
/// caption, agreement, scene. Absent optionals are omitted.
Json to_json(const InstanceRecord& record);
InstanceRecord record_from_json(const Json& j);

/// Checks caption_text = realize(caption_ast) and, when the scene is inline,
/// agreement = evaluate(caption_ast, scene). Returns a description of the first
/// violation, or nullopt.
std::optional<std::string> consistency_violation(const InstanceRecord& record);

}  // namespace quantiscene
