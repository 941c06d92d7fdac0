#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "quantiscene/geometry.hpp"
#include "quantiscene/json_fwd.hpp"

namespace quantiscene {

enum class ShapeKind : std::uint8_t {
  square,
  rectangle,
  triangle,
  pentagon,
  cross,
  circle,
  semicircle,
  ellipse,
};

enum class Color : std::uint8_t { red, green, blue, yellow, magenta, cyan, gray };

inline constexpr std::array kAllShapes{
    ShapeKind::square, ShapeKind::rectangle, ShapeKind::triangle,   ShapeKind::pentagon,
    ShapeKind::cross,  ShapeKind::circle,    ShapeKind::semicircle, ShapeKind::ellipse};

inline constexpr std::array kAllColors{Color::red,     Color::green, Color::blue, Color::yellow,
                                       Color::magenta, Color::cyan,  Color::gray};

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  friend bool operator==(Rgb, Rgb) = default;
};

std::string_view to_string(ShapeKind shape) noexcept;
std::string_view plural(ShapeKind shape) noexcept;
std::string_view to_string(Color color) noexcept;
Rgb rgb(Color color) noexcept;
std::optional<ShapeKind> shape_from_string(std::string_view name) noexcept;
std::optional<ShapeKind> shape_from_plural(std::string_view name) noexcept;
std::optional<Color> color_from_string(std::string_view name) noexcept;

/// Full extent of the shape's bounding box, as a fraction of the canvas side.
struct Extent {
  double width = 0.0;
  double height = 0.0;
  friend bool operator==(Extent, Extent) = default;
};

/// One shape on the unit canvas.
///
/// Canonical geometry, before rotation about `center` (box = width x height):
///   square, rectangle  the full box
///   triangle           base along the bottom edge, apex at top-center (half the box)
///   pentagon           regular, circumradius width/2, apex pointing up
///   cross              plus sign with arm thickness 1/3 of the box
///   circle, ellipse    inscribed in the box
///   semicircle         upper half of the disk of diameter `width`; flat edge at the
///                      bottom, occupying width x width/2 centered on `center`
/// Square, triangle, pentagon, cross, circle and semicircle require width == height.
struct ObjectSpec {
  ShapeKind shape = ShapeKind::square;
  Color color = Color::red;
  Vec2 center{0.5, 0.5};
  double rotation = 0.0;
  Extent size{0.1, 0.1};
  friend bool operator==(const ObjectSpec&, const ObjectSpec&) = default;
};

enum class CollisionPolicy : std::uint8_t {
  none_allowed,
  /// Pairwise intersection area / smaller object area must not exceed 0.25.
  overlap_quarter,
};

inline constexpr double kMaxOverlapFraction = 0.25;

struct Scene {
  std::vector<ObjectSpec> objects;
  CollisionPolicy collision_policy = CollisionPolicy::none_allowed;
  friend bool operator==(const Scene&, const Scene&) = default;
};

/// Attribute predicate; both fields empty is the universal predicate "shapes".
struct Predicate {
  std::optional<ShapeKind> shape;
  std::optional<Color> color;
  bool negated = false;

  static Predicate universal() { return {}; }
  static Predicate of(ShapeKind s) { return {s, std::nullopt, false}; }
  static Predicate of(Color c) { return {std::nullopt, c, false}; }
  Predicate negation() const {
    Predicate p = *this;
    p.negated = !p.negated;
    return p;
  }
  bool is_universal() const noexcept { return !shape && !color && !negated; }
  friend bool operator==(const Predicate&, const Predicate&) = default;
};

bool matches(const Predicate& predicate, const ObjectSpec& object) noexcept;
std::size_t count_matching(const Scene& scene, const Predicate& predicate) noexcept;
/// Number of objects satisfying both predicates.
std::size_t count_matching(const Scene& scene, const Predicate& a, const Predicate& b) noexcept;

/// Area of the unit-box canonical shape (area = coefficient * width * height).
double area_coefficient(ShapeKind shape) noexcept;
double analytic_area(const ObjectSpec& object) noexcept;

/// Exact point-in-shape test in canvas coordinates.
bool contains(const ObjectSpec& object, Vec2 point) noexcept;

/// Throws std::invalid_argument if the object violates the ObjectSpec invariants
/// (positive size, isotropy, rotation range, fully inside the canvas).
void validate(const ObjectSpec& object);
void validate(const Scene& scene);

/// Polygonal footprint used for canvas containment and collision tests.
/// Curved outlines are approximated by circumscribed polygons, so a footprint
/// always covers its exact shape.
struct Footprint {
  Vec2 center;
  double radius = 0.0;  ///< max distance from center to any footprint vertex
  std::vector<Polygon> pieces;  ///< disjoint convex pieces, counter-clockwise
};

inline constexpr int kCurveSegments = 48;

Footprint footprint(const ObjectSpec& object);
/// Exact polygonal outline for polygonal shapes; for curved shapes an inscribed
/// polygon with `segments` vertices per full turn.
Polygon outline(const ObjectSpec& object, int segments = kCurveSegments);
double bounding_radius(const ObjectSpec& object);

bool inside_canvas(const Footprint& f) noexcept;
bool intersects(const Footprint& a, const Footprint& b) noexcept;
double overlap_area(const Footprint& a, const Footprint& b);
/// Intersection area divided by the smaller object's analytic area.
double overlap_fraction(const ObjectSpec& a, const ObjectSpec& b);
/// True when the pair is admissible under `policy`.
bool compatible(const ObjectSpec& a, const Footprint& fa, const ObjectSpec& b,
                const Footprint& fb, CollisionPolicy policy);
/// Index pairs of objects violating the scene's collision policy.
std::vector<std::pair<std::size_t, std::size_t>> policy_violations(const Scene& scene);

Json to_json(const ObjectSpec& object);
Json to_json(const Scene& scene);
ObjectSpec object_from_json(const Json& j);
Scene scene_from_json(const Json& j);

}  // namespace quantiscene
