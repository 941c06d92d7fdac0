#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "quantiscene/caption.hpp"
#include "quantiscene/rng.hpp"
#include "quantiscene/scene.hpp"

namespace quantiscene {

/// Reduced base ratio small:large, e.g. 2:3.
struct Ratio {
  int small = 1;
  int large = 2;
  std::string label() const;
  double value() const noexcept { return static_cast<double>(large) / small; }
  friend bool operator==(Ratio, Ratio) = default;
};

Ratio parse_ratio(std::string_view text);

/// Concrete contrast counts: multiplier * (small, large).
struct RatioSpec {
  Ratio base;
  int multiplier = 1;
  int minority_count() const noexcept { return multiplier * base.small; }
  int majority_count() const noexcept { return multiplier * base.large; }
  friend bool operator==(RatioSpec, RatioSpec) = default;
};

/// Throws std::invalid_argument unless small < large, gcd(small, large) == 1,
/// multiplier >= 1 and the counts fit within `object_budget`.
void validate(const RatioSpec& ratio, int object_budget);

enum class PositionMode : std::uint8_t { random, partitioned, paired };
enum class ContrastAttribute : std::uint8_t { shape, color };
enum class Captioner : std::uint8_t { q_full, q_half };

std::string_view to_string(PositionMode mode) noexcept;
PositionMode position_mode_from_string(std::string_view name);
std::string_view to_string(Captioner captioner) noexcept;
Captioner captioner_from_string(std::string_view name);

/// Linear object size range, as a fraction of the canvas side.
struct SizeRange {
  double lo = 0.1;
  double hi = 0.25;
  /// E[s^2] for s uniform on [lo, hi].
  double mean_square() const noexcept { return (lo * lo + lo * hi + hi * hi) / 3.0; }
  friend bool operator==(SizeRange, SizeRange) = default;
};

inline constexpr SizeRange kGlobalSizeRange{0.1, 0.25};
inline constexpr int kRetriesPerObject = 100;
inline constexpr int kRestartsPerScene = 10;
/// Paired objects sit no further apart than this multiple of their summed bounding radii.
inline constexpr double kPairDistanceFactor = 1.5;

/// Height/width ratio used when sampling a shape from a linear size.
double aspect(ShapeKind shape) noexcept;
Extent extent_for(ShapeKind shape, double linear_size) noexcept;
/// Area of a generated object per squared linear size.
double generated_area_coefficient(ShapeKind shape) noexcept;

/// Line {p : dot(p - (0.5, 0.5), n) = shift} with unit normal n at `angle`.
struct PartitionLine {
  double angle = 0.0;
  double shift = 0.0;
  /// Signed distance of `point` from the line, positive on the normal's side.
  double offset(Vec2 point) const noexcept;
};

/// Partition line at `angle` whose positive side covers `fraction` of the unit canvas.
PartitionLine partition_for_fraction(double angle, double fraction);
/// Area of the unit canvas on the positive side of `line`.
double positive_area(const PartitionLine& line);

/// One cell of the evaluation grid. More than one ratio makes a mixed cell
/// whose ratio is drawn uniformly per instance.
struct EvalConfig {
  PositionMode mode = PositionMode::random;
  bool area_controlled = false;
  std::vector<Ratio> ratios{Ratio{1, 2}};
  std::optional<ContrastAttribute> contrast;  ///< drawn per instance when empty
  int object_budget = 15;
  CollisionPolicy collision = CollisionPolicy::none_allowed;
  SizeRange sizes = kGlobalSizeRange;

  bool mixed() const noexcept { return ratios.size() > 1; }
  /// "all" for mixed cells, otherwise "small:large".
  std::string ratio_label() const;
  /// "<mode>/<size|area>/<ratio label>"
  std::string label() const;
};

struct EvalMetadata {
  ContrastAttribute contrast = ContrastAttribute::color;
  /// Contrast-attribute predicates for the two groups (e.g. color=red).
  Predicate minority;
  Predicate majority;
  /// Value of the non-contrasted attribute shared by every object.
  Predicate shared;
  RatioSpec ratio;
  int minority_count = 0;
  int majority_count = 0;
  ShapeKind minority_shape = ShapeKind::square;
  ShapeKind majority_shape = ShapeKind::square;
  SizeRange minority_sizes;
  SizeRange majority_sizes;
  /// Partitioned mode: the separating line; minority objects lie on its positive side.
  std::optional<PartitionLine> partition;
  /// Paired mode: (minority index, majority index) pairs built during placement.
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
};

struct EvalScene {
  Scene scene;
  EvalMetadata metadata;
};


EvalScene generate_eval_scene(const EvalConfig& config, std::uint64_t seed);

/// First violated evaluation-scene invariant, or nullopt. Checks exact group
/// counts, attribute contrast, canvas containment, the collision policy, strict
/// partition separation of full footprints, and that the recorded pairs match
/// every minority object to a distinct majority object within
/// kPairDistanceFactor times their summed bounding radii.
std::optional<std::string> invariant_violation(const EvalConfig& config, const EvalScene& scene);

/// "More/less than half the shapes are X." with X one of the two contrasted values.
CaptionAST eval_caption_for(const EvalMetadata& metadata, Rng& rng);

/// Size ranges (minority, majority) under which both groups cover the same
/// expected area. Throws InfeasibleAreaControl if either leaves `global`.
std::pair<SizeRange, SizeRange> size_ranges_for_area_control(int minority_count, int majority_count,
                                                            ShapeKind minority_shape,
                                                            ShapeKind majority_shape,
                                                            SizeRange global = kGlobalSizeRange);
std::pair<SizeRange, SizeRange> size_ranges_for_area_control(const RatioSpec& ratio,
                                                            ShapeKind minority_shape,
                                                            ShapeKind majority_shape,
                                                            SizeRange global = kGlobalSizeRange);

struct TrainConfig {
  int max_objects = 15;
  Captioner captioner = Captioner::q_full;
  CollisionPolicy collision = CollisionPolicy::none_allowed;
  int captions_per_image = 5;
  SizeRange sizes = kGlobalSizeRange;
};

Scene generate_training_scene(const TrainConfig& config, std::uint64_t seed);

struct SampledCaption {
  CaptionAST caption;
  bool agreement = false;
};

/// Draws a caption from the captioner's grammar with a fair coin deciding
/// whether it should be true of the scene.
SampledCaption sample_training_caption(const Scene& scene, Captioner captioner, Rng& rng);

}  // namespace quantiscene
