#include <doctest.h>

#include <cmath>
#include <numbers>
#include <set>

#include "quantiscene/rng.hpp"
#include "quantiscene/scene.hpp"

using namespace quantiscene;

namespace {

constexpr double pi = std::numbers::pi;

ObjectSpec make(ShapeKind shape, Color color, Vec2 center = {0.5, 0.5}, double w = 0.2,
                double h = 0.2, double rotation = 0.0) {
  ObjectSpec o;
  o.shape = shape;
  o.color = color;
  o.center = center;
  o.size = {w, h};
  o.rotation = rotation;
  return o;
}

bool isotropic(ShapeKind s) { return s != ShapeKind::rectangle && s != ShapeKind::ellipse; }

// Point-in-shape written independently from the documented canonical layouts.
bool oracle_contains(const ObjectSpec& o, Vec2 p) {
  const double dx = p.x - o.center.x, dy = p.y - o.center.y;
  const double c = std::cos(o.rotation), s = std::sin(o.rotation);
  const double lx = c * dx + s * dy, ly = -s * dx + c * dy;
  const double w = o.size.width, h = o.size.height;
  switch (o.shape) {
    case ShapeKind::square:
    case ShapeKind::rectangle:
      return std::abs(lx) <= w / 2 && std::abs(ly) <= h / 2;
    case ShapeKind::triangle:
      // Apex (0, h/2), base corners (+-w/2, -h/2).
      return ly >= -h / 2 && std::abs(lx) <= (h / 2 - ly) * (w / 2) / h;
    case ShapeKind::pentagon: {
      const double r = w / 2, apothem = r * std::cos(pi / 5);
      for (int k = 0; k < 5; ++k) {
        const double a = pi / 2 + pi / 5 + 2 * pi * k / 5;
        if (lx * std::cos(a) + ly * std::sin(a) > apothem) return false;
      }
      return true;
    }
    case ShapeKind::cross:
      return (std::abs(lx) <= w / 2 && std::abs(ly) <= h / 6) ||
             (std::abs(lx) <= w / 6 && std::abs(ly) <= h / 2);
    case ShapeKind::circle:
    case ShapeKind::ellipse:
      return (lx / w) * (lx / w) + (ly / h) * (ly / h) <= 0.25;
    case ShapeKind::semicircle:
      return ly >= -w / 4 && lx * lx + (ly + w / 4) * (ly + w / 4) <= w * w / 4;
  }
  return false;
}

// Jittered-grid Monte-Carlo area over the object's bounding square.
double sampled_area(const ObjectSpec& o, int side, Rng& rng, int* disagreements) {
  const double half = std::hypot(o.size.width, o.size.height) / 2;
  const double cell = 2 * half / side;
  long hits = 0;
  for (int i = 0; i < side; ++i) {
    for (int j = 0; j < side; ++j) {
      const Vec2 p{o.center.x - half + (i + rng.uniform()) * cell,
                   o.center.y - half + (j + rng.uniform()) * cell};
      const bool inside = oracle_contains(o, p);
      hits += inside ? 1 : 0;
      if (inside != contains(o, p)) ++*disagreements;
    }
  }
  return static_cast<double>(hits) * cell * cell;
}

bool inside_convex(const Polygon& poly, Vec2 p) {
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Vec2 a = poly[i], b = poly[(i + 1) % poly.size()];
    if (cross(b - a, p - a) < -1e-12) return false;
  }
  return true;
}

}  // namespace

TEST_SUITE("scene-model") {
  TEST_CASE("eight shapes and seven colors with distinct RGB triples") {
    CHECK(kAllShapes.size() == 8);
    CHECK(kAllColors.size() == 7);
    std::set<std::tuple<int, int, int>> triples;
    for (Color c : kAllColors) {
      const Rgb v = rgb(c);
      triples.insert({v.r, v.g, v.b});
      CHECK(color_from_string(to_string(c)) == c);
    }
    CHECK(triples.size() == 7);
    for (ShapeKind s : kAllShapes) {
      CHECK(shape_from_string(to_string(s)) == s);
      CHECK(shape_from_plural(plural(s)) == s);
    }
  }

  TEST_CASE("matches: universal, field comparison and negation") {
    const ObjectSpec red_square = make(ShapeKind::square, Color::red);
    const ObjectSpec blue_square = make(ShapeKind::square, Color::blue);
    CHECK(matches(Predicate::universal(), red_square));
    CHECK(matches(Predicate::of(Color::red), red_square));
    CHECK_FALSE(matches(Predicate::of(Color::red), blue_square));
    CHECK(matches(Predicate::of(Color::red).negation(), blue_square));
    CHECK_FALSE(matches(Predicate::of(Color::red).negation(), red_square));
    Predicate both = Predicate::of(Color::red);
    both.shape = ShapeKind::square;
    CHECK(matches(both, red_square));
    CHECK_FALSE(matches(both, make(ShapeKind::circle, Color::red)));
  }

  TEST_CASE("count_matching on constructed scenes") {
    Scene s;
    for (int i = 0; i < 3; ++i) s.objects.push_back(make(ShapeKind::square, Color::red));
    for (int i = 0; i < 2; ++i) s.objects.push_back(make(ShapeKind::square, Color::blue));
    CHECK(count_matching(s, Predicate::of(Color::red)) == 3);
    CHECK(count_matching(s, Predicate::universal()) == 5);
    s.objects.push_back(make(ShapeKind::circle, Color::red));
    s.objects.push_back(make(ShapeKind::circle, Color::green));
    CHECK(count_matching(s, Predicate::universal()) == 7);
    CHECK(count_matching(s, Predicate::of(ShapeKind::circle), Predicate::of(Color::red)) == 1);
  }

  TEST_CASE("partition identity and monotonicity on random scenes") {
    Rng rng(1);
    for (int trial = 0; trial < 500; ++trial) {
      Scene s;
      const auto n = rng.uniform_int(0, 15);
      for (int i = 0; i < n; ++i) {
        s.objects.push_back(make(kAllShapes[static_cast<std::size_t>(rng.uniform_int(0, 7))],
                                 kAllColors[static_cast<std::size_t>(rng.uniform_int(0, 6))]));
      }
      Predicate p = rng.coin() ? Predicate::of(rng.pick(kAllColors)) : Predicate::of(rng.pick(kAllShapes));
      REQUIRE(count_matching(s, p) + count_matching(s, p.negation()) == s.objects.size());
      const std::size_t before = count_matching(s, p);
      ObjectSpec extra = make(p.shape.value_or(ShapeKind::square), p.color.value_or(Color::gray));
      s.objects.push_back(extra);
      REQUIRE(count_matching(s, p) == before + 1);
    }
  }

  TEST_CASE("analytic areas of simple cases") {
    CHECK(analytic_area(make(ShapeKind::square, Color::red, {0.5, 0.5}, 0.1, 0.1)) ==
          doctest::Approx(0.01));
    const double square = analytic_area(make(ShapeKind::square, Color::red));
    CHECK(analytic_area(make(ShapeKind::triangle, Color::red)) == doctest::Approx(square / 2));
    CHECK(analytic_area(make(ShapeKind::circle, Color::red, {0.5, 0.5}, 0.1, 0.1)) ==
          doctest::Approx(pi * 0.0025));
    CHECK(analytic_area(make(ShapeKind::cross, Color::red, {0.5, 0.5}, 0.3, 0.3)) ==
          doctest::Approx(0.09 * 5.0 / 9.0));
    CHECK(analytic_area(make(ShapeKind::semicircle, Color::red, {0.5, 0.5}, 0.2, 0.2)) ==
          doctest::Approx(pi * 0.01 / 2));
    CHECK(analytic_area(make(ShapeKind::ellipse, Color::red, {0.5, 0.5}, 0.2, 0.1)) ==
          doctest::Approx(pi * 0.1 * 0.05));
    CHECK(analytic_area(make(ShapeKind::square, Color::red, {0.5, 0.5}, 0.2, 0.2, 1.0)) ==
          doctest::Approx(square));
  }

  TEST_CASE("analytic area agrees with a sampled point-in-shape oracle") {
    Rng rng(2024);
    for (ShapeKind shape : kAllShapes) {
      for (int k = 0; k < 3; ++k) {
        const double w = rng.uniform(0.1, 0.3);
        const double h = isotropic(shape) ? w : w * rng.uniform(0.3, 0.9);
        const ObjectSpec o =
            make(shape, Color::red, {0.5, 0.5}, w, h, rng.uniform(0.0, 2 * pi));
        int disagreements = 0;
        const double sampled = sampled_area(o, 1000, rng, &disagreements);
        INFO(to_string(shape) << " w=" << w << " h=" << h);
        CHECK(std::abs(sampled - analytic_area(o)) / analytic_area(o) < 0.005);
        // Only points within floating-point distance of the boundary may differ.
        CHECK(disagreements <= 2);
      }
    }
  }

  TEST_CASE("footprint covers the exact shape and stays within its radius") {
    Rng rng(8);
    for (ShapeKind shape : kAllShapes) {
      const double w = 0.2, h = isotropic(shape) ? w : 0.1;
      const ObjectSpec o = make(shape, Color::red, {0.5, 0.5}, w, h, rng.uniform(0.0, 2 * pi));
      const Footprint f = footprint(o);
      for (int i = 0; i < 20000; ++i) {
        const Vec2 p{rng.uniform(0.3, 0.7), rng.uniform(0.3, 0.7)};
        if (!oracle_contains(o, p)) continue;
        bool covered = false;
        for (const Polygon& piece : f.pieces) covered = covered || inside_convex(piece, p);
        REQUIRE(covered);
        REQUIRE(distance(p, o.center) <= f.radius + 1e-12);
      }
    }
  }

  TEST_CASE("collision tests and overlap fraction") {
    const ObjectSpec a = make(ShapeKind::square, Color::red, {0.3, 0.5}, 0.2, 0.2);
    const ObjectSpec far = make(ShapeKind::square, Color::blue, {0.7, 0.5}, 0.2, 0.2);
    const ObjectSpec half = make(ShapeKind::square, Color::blue, {0.4, 0.5}, 0.2, 0.2);
    CHECK_FALSE(intersects(footprint(a), footprint(far)));
    CHECK(intersects(footprint(a), footprint(half)));
    CHECK(intersects(footprint(half), footprint(a)));
    CHECK(overlap_fraction(a, half) == doctest::Approx(0.5));
    CHECK(overlap_fraction(a, a) == doctest::Approx(1.0));
    CHECK(overlap_fraction(a, far) == 0.0);
    // A quarter overlap is admissible under the lenient policy only.
    const ObjectSpec quarter = make(ShapeKind::square, Color::blue, {0.45, 0.5}, 0.2, 0.2);
    CHECK(overlap_fraction(a, quarter) == doctest::Approx(0.25));
    CHECK(compatible(a, footprint(a), quarter, footprint(quarter), CollisionPolicy::overlap_quarter));
    CHECK_FALSE(compatible(a, footprint(a), quarter, footprint(quarter), CollisionPolicy::none_allowed));
    CHECK_FALSE(compatible(a, footprint(a), half, footprint(half), CollisionPolicy::overlap_quarter));
    Scene s{{a, far, half}, CollisionPolicy::none_allowed};
    CHECK(policy_violations(s).size() == 1);
  }

  TEST_CASE("validate rejects objects outside the invariants") {
    CHECK_NOTHROW(validate(make(ShapeKind::square, Color::red)));
    CHECK_THROWS_AS(validate(make(ShapeKind::square, Color::red, {0.05, 0.5})), std::invalid_argument);
    CHECK_THROWS_AS(validate(make(ShapeKind::square, Color::red, {0.5, 0.5}, 0.0, 0.0)),
                    std::invalid_argument);
    CHECK_THROWS_AS(validate(make(ShapeKind::square, Color::red, {0.5, 0.5}, 0.2, 0.1)),
                    std::invalid_argument);
    CHECK_NOTHROW(validate(make(ShapeKind::rectangle, Color::red, {0.5, 0.5}, 0.2, 0.1)));
    CHECK_THROWS_AS(validate(make(ShapeKind::circle, Color::red, {0.5, 0.5}, 0.2, 0.2, 7.0)),
                    std::invalid_argument);
    CHECK_THROWS_AS(validate(Scene{}), std::invalid_argument);
  }

  TEST_CASE("scene JSON uses the pinned field names and round-trips exactly") {
    Rng rng(4);
    Scene s;
    s.objects.push_back(make(ShapeKind::ellipse, Color::cyan, {0.31, 0.62}, 0.2, 0.1, 1.234));
    s.objects.push_back(make(ShapeKind::pentagon, Color::gray, {rng.uniform(0.3, 0.7), 0.4}, 0.15,
                             0.15, rng.uniform(0.0, 6.0)));
    const Json j = to_json(s);
    const Json& first = j.at("objects").at(0);
    std::vector<std::string> keys;
    for (const auto& [k, v] : first.items()) keys.push_back(k);
    CHECK(keys == std::vector<std::string>{"shape", "color", "center", "rotation", "size"});
    CHECK(first.at("shape") == "ellipse");
    CHECK(scene_from_json(Json::parse(j.dump())) == s);
    CHECK_FALSE(j.contains("collision_policy"));
    s.collision_policy = CollisionPolicy::overlap_quarter;
    CHECK(scene_from_json(Json::parse(to_json(s).dump())) == s);
    CHECK_THROWS(object_from_json(Json::parse(R"({"shape":"hexagon","color":"red","center":[0.5,0.5],"rotation":0,"size":[0.1,0.1]})")));
  }
}
