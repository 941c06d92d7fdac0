#include "quantiscene/scene.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace quantiscene {
namespace {

using std::numbers::pi;

struct ShapeNames {
  std::string_view singular;
  std::string_view plural;
};

constexpr std::array<ShapeNames, 8> kShapeNames{{{"square", "squares"},
                                                 {"rectangle", "rectangles"},
                                                 {"triangle", "triangles"},
                                                 {"pentagon", "pentagons"},
                                                 {"cross", "crosses"},
                                                 {"circle", "circles"},
                                                 {"semicircle", "semicircles"},
                                                 {"ellipse", "ellipses"}}};

constexpr std::array<std::string_view, 7> kColorNames{"red",     "green", "blue", "yellow",
                                                      "magenta", "cyan",  "gray"};

constexpr std::array<Rgb, 7> kPalette{{{255, 0, 0},
                                       {0, 255, 0},
                                       {0, 0, 255},
                                       {255, 255, 0},
                                       {255, 0, 255},
                                       {0, 255, 255},
                                       {128, 128, 128}}};

constexpr double kThird = 1.0 / 3.0;
constexpr double kSixth = 1.0 / 6.0;

Polygon box(double x0, double y0, double x1, double y1) {
  return {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}};
}

Polygon unit_pentagon() {
  Polygon p;
  for (int k = 0; k < 5; ++k) {
    const double a = pi / 2 + 2 * pi * k / 5;
    p.push_back({0.5 * std::cos(a), 0.5 * std::sin(a)});
  }
  return p;
}

Polygon unit_triangle() { return {{-0.5, -0.5}, {0.5, -0.5}, {0.0, 0.5}}; }

Polygon unit_cross_outline() {
  return {{-kSixth, -0.5}, {kSixth, -0.5}, {kSixth, -kSixth}, {0.5, -kSixth},
          {0.5, kSixth},   {kSixth, kSixth}, {kSixth, 0.5},   {-kSixth, 0.5},
          {-kSixth, kSixth}, {-0.5, kSixth}, {-0.5, -kSixth}, {-kSixth, -kSixth}};
}

Polygon unit_disk(int segments, double radius) {
  Polygon p;
  for (int k = 0; k < segments; ++k) {
    const double a = 2 * pi * k / segments;
    p.push_back({radius * std::cos(a), radius * std::sin(a)});
  }
  return p;
}

// Arc from angle 0 to pi about (0, -1/4); the closing chord is the flat edge.
Polygon unit_half_disk(int segments, double radius) {
  Polygon p;
  for (int k = 0; k <= segments; ++k) {
    const double a = pi * k / segments;
    p.push_back({radius * std::cos(a), -0.25 + radius * std::sin(a)});
  }
  return p;
}

// Convex pieces in unit-box coordinates; curved shapes circumscribed.
std::vector<Polygon> unit_pieces(ShapeKind shape) {
  constexpr int n = kCurveSegments;
  switch (shape) {
    case ShapeKind::square:
    case ShapeKind::rectangle:
      return {box(-0.5, -0.5, 0.5, 0.5)};
    case ShapeKind::triangle:
      return {unit_triangle()};
    case ShapeKind::pentagon:
      return {unit_pentagon()};
    case ShapeKind::cross:
      return {box(-0.5, -kSixth, 0.5, kSixth), box(-kSixth, kSixth, kSixth, 0.5),
              box(-kSixth, -0.5, kSixth, -kSixth)};
    case ShapeKind::circle:
    case ShapeKind::ellipse:
      return {unit_disk(n, 0.5 / std::cos(pi / n))};
    case ShapeKind::semicircle:
      return {unit_half_disk(n / 2, 0.5 / std::cos(pi / n))};
  }
  return {};
}

Polygon unit_outline(ShapeKind shape, int segments) {
  switch (shape) {
    case ShapeKind::cross:
      return unit_cross_outline();
    case ShapeKind::circle:
    case ShapeKind::ellipse:
      return unit_disk(segments, 0.5);
    case ShapeKind::semicircle:
      return unit_half_disk(std::max(segments / 2, 2), 0.5);
    default:
      return unit_pieces(shape).front();
  }
}

Vec2 to_canvas(const ObjectSpec& o, Vec2 unit) noexcept {
  return o.center + rotate({unit.x * o.size.width, unit.y * o.size.height}, o.rotation);
}

bool isotropic(ShapeKind shape) noexcept {
  return shape != ShapeKind::rectangle && shape != ShapeKind::ellipse;
}

bool inside_convex(std::span<const Vec2> poly, Vec2 p) noexcept {
  for (std::size_t i = 0, n = poly.size(); i < n; ++i) {
    if (cross(poly[(i + 1) % n] - poly[i], p - poly[i]) < 0.0) return false;
  }
  return true;
}

template <typename Enum, std::size_t N>
std::optional<Enum> lookup(const std::array<std::string_view, N>& names, std::string_view name) {
  for (std::size_t i = 0; i < N; ++i) {
    if (names[i] == name) return static_cast<Enum>(i);
  }
  return std::nullopt;
}

}  // namespace

std::string_view to_string(ShapeKind shape) noexcept {
  return kShapeNames[static_cast<std::size_t>(shape)].singular;
}
std::string_view plural(ShapeKind shape) noexcept {
  return kShapeNames[static_cast<std::size_t>(shape)].plural;
}
std::string_view to_string(Color color) noexcept {
  return kColorNames[static_cast<std::size_t>(color)];
}
Rgb rgb(Color color) noexcept { return kPalette[static_cast<std::size_t>(color)]; }

std::optional<ShapeKind> shape_from_string(std::string_view name) noexcept {
  for (ShapeKind s : kAllShapes) {
    if (to_string(s) == name) return s;
  }
  return std::nullopt;
}
std::optional<ShapeKind> shape_from_plural(std::string_view name) noexcept {
  for (ShapeKind s : kAllShapes) {
    if (plural(s) == name) return s;
  }
  return std::nullopt;
}
std::optional<Color> color_from_string(std::string_view name) noexcept {
  return lookup<Color>(kColorNames, name);
}

bool matches(const Predicate& predicate, const ObjectSpec& object) noexcept {
  const bool base = (!predicate.shape || *predicate.shape == object.shape) &&
                    (!predicate.color || *predicate.color == object.color);
  return base != predicate.negated;
}

std::size_t count_matching(const Scene& scene, const Predicate& predicate) noexcept {
  return static_cast<std::size_t>(std::count_if(
      scene.objects.begin(), scene.objects.end(),
      [&](const ObjectSpec& o) { return matches(predicate, o); }));
}

std::size_t count_matching(const Scene& scene, const Predicate& a, const Predicate& b) noexcept {
  return static_cast<std::size_t>(std::count_if(
      scene.objects.begin(), scene.objects.end(),
      [&](const ObjectSpec& o) { return matches(a, o) && matches(b, o); }));
}

double area_coefficient(ShapeKind shape) noexcept {
  switch (shape) {
    case ShapeKind::square:
    case ShapeKind::rectangle:
      return 1.0;
    case ShapeKind::triangle:
      return 0.5;
    case ShapeKind::pentagon:
      return 0.625 * std::sin(2 * pi / 5);
    case ShapeKind::cross:
      return 5.0 / 9.0;
    case ShapeKind::circle:
    case ShapeKind::ellipse:
      return pi / 4;
    case ShapeKind::semicircle:
      return pi / 8;
  }
  return 0.0;
}

double analytic_area(const ObjectSpec& object) noexcept {
  return area_coefficient(object.shape) * object.size.width * object.size.height;
}

bool contains(const ObjectSpec& o, Vec2 point) noexcept {
  const Vec2 local = rotate(point - o.center, -o.rotation);
  const double u = local.x / o.size.width;
  const double v = local.y / o.size.height;
  switch (o.shape) {
    case ShapeKind::square:
    case ShapeKind::rectangle:
      return std::abs(u) <= 0.5 && std::abs(v) <= 0.5;
    case ShapeKind::triangle:
      return v >= -0.5 && v <= 0.5 && std::abs(u) <= 0.5 * (0.5 - v);
    case ShapeKind::pentagon: {
      static const Polygon pentagon = unit_pentagon();
      return inside_convex(pentagon, {u, v});
    }
    case ShapeKind::cross:
      return (std::abs(u) <= 0.5 && std::abs(v) <= kSixth) ||
             (std::abs(u) <= kSixth && std::abs(v) <= 0.5);
    case ShapeKind::circle:
    case ShapeKind::ellipse:
      return u * u + v * v <= 0.25;
    case ShapeKind::semicircle:
      return v >= -0.25 && u * u + (v + 0.25) * (v + 0.25) <= 0.25;
  }
  return false;
}

Footprint footprint(const ObjectSpec& object) {
  Footprint f;
  f.center = object.center;
  for (Polygon& piece : unit_pieces(object.shape)) {
    for (Vec2& p : piece) {
      p = to_canvas(object, p);
      f.radius = std::max(f.radius, distance(p, object.center));
    }
    f.pieces.push_back(std::move(piece));
  }
  return f;
}

Polygon outline(const ObjectSpec& object, int segments) {
  Polygon p = unit_outline(object.shape, segments);
  for (Vec2& v : p) v = to_canvas(object, v);
  return p;
}

double bounding_radius(const ObjectSpec& object) { return footprint(object).radius; }

bool inside_canvas(const Footprint& f) noexcept {
  constexpr double tol = 1e-12;
  for (const Polygon& piece : f.pieces) {
    for (Vec2 p : piece) {
      if (p.x < -tol || p.x > 1 + tol || p.y < -tol || p.y > 1 + tol) return false;
    }
  }
  return true;
}

bool intersects(const Footprint& a, const Footprint& b) noexcept {
  if (distance(a.center, b.center) >= a.radius + b.radius) return false;
  for (const Polygon& pa : a.pieces) {
    for (const Polygon& pb : b.pieces) {
      if (convex_intersect(pa, pb)) return true;
    }
  }
  return false;
}

double overlap_area(const Footprint& a, const Footprint& b) {
  if (distance(a.center, b.center) >= a.radius + b.radius) return 0.0;
  double area = 0.0;
  for (const Polygon& pa : a.pieces) {
    for (const Polygon& pb : b.pieces) {
      const Polygon clipped = clip_convex(pa, pb);
      if (clipped.size() >= 3) area += signed_area(clipped);
    }
  }
  return area;
}

double overlap_fraction(const ObjectSpec& a, const ObjectSpec& b) {
  return overlap_area(footprint(a), footprint(b)) / std::min(analytic_area(a), analytic_area(b));
}

bool compatible(const ObjectSpec& a, const Footprint& fa, const ObjectSpec& b,
                const Footprint& fb, CollisionPolicy policy) {
  if (policy == CollisionPolicy::none_allowed) return !intersects(fa, fb);
  const double smaller = std::min(analytic_area(a), analytic_area(b));
  return overlap_area(fa, fb) <= kMaxOverlapFraction * smaller;
}

std::vector<std::pair<std::size_t, std::size_t>> policy_violations(const Scene& scene) {
  std::vector<Footprint> prints;
  prints.reserve(scene.objects.size());
  for (const ObjectSpec& o : scene.objects) prints.push_back(footprint(o));
  std::vector<std::pair<std::size_t, std::size_t>> bad;
  for (std::size_t i = 0; i < prints.size(); ++i) {
    for (std::size_t j = i + 1; j < prints.size(); ++j) {
      if (!compatible(scene.objects[i], prints[i], scene.objects[j], prints[j],
                      scene.collision_policy)) {
        bad.emplace_back(i, j);
      }
    }
  }
  return bad;
}

void validate(const ObjectSpec& object) {
  const auto [w, h] = object.size;
  if (!(w > 0.0 && w <= 1.0 && h > 0.0 && h <= 1.0)) {
    throw std::invalid_argument("object size must lie in (0, 1]");
  }
  if (isotropic(object.shape) && std::abs(w - h) > 1e-12) {
    throw std::invalid_argument(std::string(to_string(object.shape)) +
                                " requires equal width and height");
  }
  if (!(object.rotation >= 0.0 && object.rotation < 2 * pi)) {
    throw std::invalid_argument("rotation must lie in [0, 2pi)");
  }
  if (!inside_canvas(footprint(object))) {
    throw std::invalid_argument("object extends beyond the unit canvas");
  }
}

void validate(const Scene& scene) {
  if (scene.objects.empty()) throw std::invalid_argument("scene has no objects");
  for (const ObjectSpec& o : scene.objects) validate(o);
  if (!policy_violations(scene).empty()) {
    throw std::invalid_argument("scene violates its collision policy");
  }
}

Json to_json(const ObjectSpec& o) {
  Json j;
  j["shape"] = to_string(o.shape);
  j["color"] = to_string(o.color);
  j["center"] = {o.center.x, o.center.y};
  j["rotation"] = o.rotation;
  j["size"] = {o.size.width, o.size.height};
  return j;
}

Json to_json(const Scene& scene) {
  Json objects = Json::array();
  for (const ObjectSpec& o : scene.objects) objects.push_back(to_json(o));
  Json j;
  j["objects"] = std::move(objects);
  if (scene.collision_policy == CollisionPolicy::overlap_quarter) {
    j["collision_policy"] = "overlap_quarter";
  }
  return j;
}

ObjectSpec object_from_json(const Json& j) {
  ObjectSpec o;
  const auto shape = shape_from_string(j.at("shape").get<std::string>());
  const auto color = color_from_string(j.at("color").get<std::string>());
  if (!shape) throw std::invalid_argument("unknown shape " + j.at("shape").dump());
  if (!color) throw std::invalid_argument("unknown color " + j.at("color").dump());
  o.shape = *shape;
  o.color = *color;
  o.center = {j.at("center").at(0).get<double>(), j.at("center").at(1).get<double>()};
  o.rotation = j.at("rotation").get<double>();
  o.size = {j.at("size").at(0).get<double>(), j.at("size").at(1).get<double>()};
  return o;
}

Scene scene_from_json(const Json& j) {
  Scene scene;
  for (const Json& o : j.at("objects")) scene.objects.push_back(object_from_json(o));
  if (j.contains("collision_policy")) {
    const auto policy = j.at("collision_policy").get<std::string>();
    if (policy == "overlap_quarter") {
      scene.collision_policy = CollisionPolicy::overlap_quarter;
    } else if (policy != "none_allowed") {
      throw std::invalid_argument("unknown collision policy " + policy);
    }
  }
  return scene;
}

}  // namespace quantiscene
