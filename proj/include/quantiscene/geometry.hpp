#pragma once

#include <cmath>
#include <span>
#include <vector>

namespace quantiscene {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) noexcept { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) noexcept { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double s, Vec2 v) noexcept { return {s * v.x, s * v.y}; }
  friend Vec2 operator*(Vec2 v, double s) noexcept { return {s * v.x, s * v.y}; }
  friend bool operator==(Vec2, Vec2) = default;
};

inline double dot(Vec2 a, Vec2 b) noexcept { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) noexcept { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 v) noexcept { return std::hypot(v.x, v.y); }
inline double distance(Vec2 a, Vec2 b) noexcept { return norm(a - b); }

inline Vec2 rotate(Vec2 v, double angle) noexcept {
  const double c = std::cos(angle), s = std::sin(angle);
  return {c * v.x - s * v.y, s * v.x + c * v.y};
}

/// Counter-clockwise vertex list.
using Polygon = std::vector<Vec2>;

/// Signed shoelace area (positive for counter-clockwise order).
double signed_area(std::span<const Vec2> poly) noexcept;

/// True when the interiors of two convex polygons overlap by more than
/// `eps` along every separating-axis candidate. Touching polygons do not intersect.
bool convex_intersect(std::span<const Vec2> a, std::span<const Vec2> b, double eps = 1e-12) noexcept;

/// Intersection of two convex polygons (Sutherland-Hodgman); both counter-clockwise.
Polygon clip_convex(std::span<const Vec2> subject, std::span<const Vec2> clip);

}  // namespace quantiscene
