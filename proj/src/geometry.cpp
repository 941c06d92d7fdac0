#include "quantiscene/geometry.hpp"

#include <algorithm>
#include <limits>

namespace quantiscene {

double signed_area(std::span<const Vec2> poly) noexcept {
  double twice = 0.0;
  for (std::size_t i = 0, n = poly.size(); i < n; ++i) twice += cross(poly[i], poly[(i + 1) % n]);
  return 0.5 * twice;
}

namespace {

// True if some edge normal of `a` separates the two polygons.
bool has_separating_axis(std::span<const Vec2> a, std::span<const Vec2> b, double eps) noexcept {
  for (std::size_t i = 0, n = a.size(); i < n; ++i) {
    const Vec2 edge = a[(i + 1) % n] - a[i];
    const Vec2 axis{-edge.y, edge.x};
    double amin = std::numeric_limits<double>::infinity(), amax = -amin;
    double bmin = amin, bmax = -amin;
    for (Vec2 p : a) {
      const double t = dot(p, axis);
      amin = std::min(amin, t);
      amax = std::max(amax, t);
    }
    for (Vec2 p : b) {
      const double t = dot(p, axis);
      bmin = std::min(bmin, t);
      bmax = std::max(bmax, t);
    }
    const double scale = norm(axis);
    if (std::min(amax, bmax) - std::max(amin, bmin) <= eps * scale) return true;
  }
  return false;
}

}  // namespace

bool convex_intersect(std::span<const Vec2> a, std::span<const Vec2> b, double eps) noexcept {
  return !has_separating_axis(a, b, eps) && !has_separating_axis(b, a, eps);
}

Polygon clip_convex(std::span<const Vec2> subject, std::span<const Vec2> clip) {
  Polygon output(subject.begin(), subject.end());
  for (std::size_t i = 0, n = clip.size(); i < n && !output.empty(); ++i) {
    const Vec2 a = clip[i], b = clip[(i + 1) % n];
    const Vec2 edge = b - a;
    auto inside = [&](Vec2 p) { return cross(edge, p - a) >= 0.0; };
    Polygon input;
    input.swap(output);
    for (std::size_t j = 0, m = input.size(); j < m; ++j) {
      const Vec2 p = input[j], q = input[(j + 1) % m];
      const bool p_in = inside(p), q_in = inside(q);
      if (p_in) output.push_back(p);
      if (p_in != q_in) {
        const double t = cross(edge, a - p) / cross(edge, q - p);
        output.push_back(p + t * (q - p));
      }
    }
  }
  return output;
}

}  // namespace quantiscene
