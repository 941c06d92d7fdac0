#include "quantiscene/generator.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include "quantiscene/errors.hpp"

namespace quantiscene {

using std::numbers::pi;

std::string Ratio::label() const { return std::to_string(small) + ":" + std::to_string(large); }

Ratio parse_ratio(std::string_view text) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) {
    throw std::invalid_argument("ratio must look like 'small:large', got '" + std::string(text) + "'");
  }
  auto number = [&](std::string_view part) {
    int value = 0;
    const auto [end, ec] = std::from_chars(part.data(), part.data() + part.size(), value);
    if (ec != std::errc() || end != part.data() + part.size() || part.empty()) {
      throw std::invalid_argument("malformed ratio '" + std::string(text) + "'");
    }
    return value;
  };
  const Ratio ratio{number(text.substr(0, colon)), number(text.substr(colon + 1))};
  validate(RatioSpec{ratio, 1}, std::numeric_limits<int>::max());
  return ratio;
}

void validate(const RatioSpec& ratio, int object_budget) {
  const auto [small, large] = ratio.base;
  if (small < 1 || large <= small) throw std::invalid_argument("ratio requires 1 <= small < large");
  if (std::gcd(small, large) != 1) throw std::invalid_argument("ratio " + ratio.base.label() + " is not reduced");
  if (ratio.multiplier < 1) throw std::invalid_argument("multiplier must be positive");
  if (static_cast<long long>(ratio.multiplier) * (static_cast<long long>(small) + large) > object_budget) {
    throw std::invalid_argument("ratio " + ratio.base.label() + " x" + std::to_string(ratio.multiplier) +
                                " exceeds the object budget");
  }
}

std::string_view to_string(PositionMode mode) noexcept {
  switch (mode) {
    case PositionMode::random: return "random";
    case PositionMode::partitioned: return "partitioned";
    case PositionMode::paired: return "paired";
  }
  return "";
}

PositionMode position_mode_from_string(std::string_view name) {
  if (name == "random") return PositionMode::random;
  if (name == "partitioned") return PositionMode::partitioned;
  if (name == "paired") return PositionMode::paired;
  throw std::invalid_argument("unknown position mode '" + std::string(name) + "'");
}

std::string_view to_string(Captioner captioner) noexcept {
  return captioner == Captioner::q_full ? "q_full" : "q_half";
}

Captioner captioner_from_string(std::string_view name) {
  if (name == "q_full") return Captioner::q_full;
  if (name == "q_half") return Captioner::q_half;
  throw std::invalid_argument("unknown captioner '" + std::string(name) + "'");
}

double aspect(ShapeKind shape) noexcept {
  return shape == ShapeKind::rectangle || shape == ShapeKind::ellipse ? 0.5 : 1.0;
}

Extent extent_for(ShapeKind shape, double linear_size) noexcept {
  return {linear_size, linear_size * aspect(shape)};
}

double generated_area_coefficient(ShapeKind shape) noexcept {
  return area_coefficient(shape) * aspect(shape);
}

std::string EvalConfig::ratio_label() const {
  return mixed() ? "all" : ratios.front().label();
}

std::string EvalConfig::label() const {
  return std::string(to_string(mode)) + "/" + (area_controlled ? "area" : "size") + "/" +
         ratio_label();
}

double PartitionLine::offset(Vec2 point) const noexcept {
  return dot(Vec2{std::cos(angle), std::sin(angle)}, point - Vec2{0.5, 0.5}) - shift;
}

double positive_area(const PartitionLine& line) {
  // Clip the canvas by a square large enough to stand in for the half-plane.
  const Vec2 n{std::cos(line.angle), std::sin(line.angle)};
  const Vec2 t{-n.y, n.x};
  const Vec2 base = Vec2{0.5, 0.5} + n * line.shift;
  const Polygon half{base + t * 4.0, base - t * 4.0, base - t * 4.0 + n * 4.0,
                     base + t * 4.0 + n * 4.0};
  const Polygon canvas{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  return std::abs(signed_area(clip_convex(canvas, half)));
}

PartitionLine partition_for_fraction(double angle, double fraction) {
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw std::invalid_argument("partition fraction must lie in (0, 1)");
  }
  // Every canvas point is within sqrt(2)/2 of the center.
  double lo = -std::numbers::sqrt2 / 2, hi = std::numbers::sqrt2 / 2;
  for (int i = 0; i < 60; ++i) {
    const double mid = 0.5 * (lo + hi);
    (positive_area({angle, mid}) > fraction ? lo : hi) = mid;
  }
  return {angle, 0.5 * (lo + hi)};
}

std::pair<SizeRange, SizeRange> size_ranges_for_area_control(int minority_count, int majority_count,
                                                            ShapeKind minority_shape,
                                                            ShapeKind majority_shape,
                                                            SizeRange global) {
  if (minority_count < 1 || majority_count < 1) {
    throw std::invalid_argument("area control needs positive group counts");
  }
  // Majority sizes are the minority range scaled by `scale`, so that
  // k1 * n1 * E[s1^2] == k2 * n2 * E[s2^2].
  const double scale = std::sqrt(generated_area_coefficient(minority_shape) * minority_count /
                                 (generated_area_coefficient(majority_shape) * majority_count));
  SizeRange minority, majority;
  if (scale <= 1.0) {
    minority = {global.lo / scale, global.hi};
    majority = {global.lo, global.hi * scale};
  } else {
    minority = {global.lo, global.hi / scale};
    majority = {global.lo * scale, global.hi};
  }
  if (minority.lo > minority.hi || majority.lo > majority.hi) {
    throw InfeasibleAreaControl("area control for " + std::to_string(minority_count) + ":" +
                                std::to_string(majority_count) + " " +
                                std::string(to_string(minority_shape)) + "/" +
                                std::string(to_string(majority_shape)) +
                                " needs sizes outside the global range");
  }
  return {minority, majority};
}

std::pair<SizeRange, SizeRange> size_ranges_for_area_control(const RatioSpec& ratio,
                                                            ShapeKind minority_shape,
                                                            ShapeKind majority_shape,
                                                            SizeRange global) {
  return size_ranges_for_area_control(ratio.minority_count(), ratio.majority_count(),
                                      minority_shape, majority_shape, global);
}

namespace {

Footprint translated(Footprint f, Vec2 offset) {
  f.center = f.center + offset;
  for (Polygon& piece : f.pieces) {
    for (Vec2& p : piece) p = p + offset;
  }
  return f;
}

struct Bounds {
  double min_x = std::numeric_limits<double>::infinity(), max_x = -min_x;
  double min_y = min_x, max_y = -min_x;
};

Bounds bounds(const Footprint& f) {
  Bounds b;
  for (const Polygon& piece : f.pieces) {
    for (Vec2 p : piece) {
      b.min_x = std::min(b.min_x, p.x);
      b.max_x = std::max(b.max_x, p.x);
      b.min_y = std::min(b.min_y, p.y);
      b.max_y = std::max(b.max_y, p.y);
    }
  }
  return b;
}

class Layout {
 public:
  explicit Layout(CollisionPolicy policy) : policy_(policy) {}

  bool fits(const ObjectSpec& object, const Footprint& print) const {
    if (!inside_canvas(print)) return false;
    for (std::size_t i = 0; i < objects_.size(); ++i) {
      if (!compatible(object, print, objects_[i], prints_[i], policy_)) return false;
    }
    return true;
  }

  std::size_t add(const ObjectSpec& object, Footprint print) {
    objects_.push_back(object);
    prints_.push_back(std::move(print));
    return objects_.size() - 1;
  }

  const std::vector<ObjectSpec>& objects() const { return objects_; }
  const Footprint& print(std::size_t i) const { return prints_[i]; }

 private:
  CollisionPolicy policy_;
  std::vector<ObjectSpec> objects_;
  std::vector<Footprint> prints_;
};

// Proposes a center for an object whose origin-centered footprint is given.
using CenterProposal = std::function<std::optional<Vec2>(const Footprint& at_origin, Rng&)>;

std::optional<Vec2> uniform_center(const Footprint& at_origin, Rng& rng) {
  const Bounds b = bounds(at_origin);
  if (b.max_x - b.min_x > 1.0 || b.max_y - b.min_y > 1.0) return std::nullopt;
  return Vec2{rng.uniform(-b.min_x, 1.0 - b.max_x), rng.uniform(-b.min_y, 1.0 - b.max_y)};
}

// Tries up to kRetriesPerObject rotations/positions; size and attributes stay fixed.
std::optional<std::size_t> place(Layout& layout, ObjectSpec object, Rng& rng,
                                 const CenterProposal& propose,
                                 const std::function<bool(const ObjectSpec&, const Footprint&)>&
                                     accept = nullptr) {
  for (int attempt = 0; attempt < kRetriesPerObject; ++attempt) {
    object.rotation = rng.uniform(0.0, 2 * pi);
    object.center = {0.0, 0.0};
    const Footprint at_origin = footprint(object);
    const auto center = propose(at_origin, rng);
    if (!center) continue;
    object.center = *center;
    Footprint print = translated(at_origin, *center);
    if (accept && !accept(object, print)) continue;
    if (!layout.fits(object, print)) continue;
    return layout.add(object, std::move(print));
  }
  return std::nullopt;
}

struct GroupPlan {
  ShapeKind shape;
  Color color;
  SizeRange sizes;
  int count;
};

ObjectSpec draw_object(const GroupPlan& group, Rng& rng) {
  ObjectSpec o;
  o.shape = group.shape;
  o.color = group.color;
  o.size = extent_for(group.shape, rng.uniform(group.sizes.lo, group.sizes.hi));
  return o;
}

// Sequential packing jams far less often when larger objects go first.
std::vector<ObjectSpec> largest_first(std::vector<ObjectSpec> objects) {
  std::vector<std::pair<double, std::size_t>> keys;
  for (std::size_t i = 0; i < objects.size(); ++i) {
    keys.emplace_back(-bounding_radius(objects[i]), i);
  }
  std::sort(keys.begin(), keys.end());
  std::vector<ObjectSpec> sorted;
  for (const auto& [key, i] : keys) sorted.push_back(objects[i]);
  return sorted;
}

// One layout attempt; returns nullopt when some object could not be placed.
std::optional<EvalScene> attempt_eval_layout(const EvalConfig& config, const GroupPlan& minority,
                                             const GroupPlan& majority, EvalMetadata meta,
                                             Rng& rng) {
  Layout layout(config.collision);

  auto draw_group = [&](const GroupPlan& g) {
    std::vector<ObjectSpec> drawn;
    for (int i = 0; i < g.count; ++i) drawn.push_back(draw_object(g, rng));
    return drawn;
  };
  using Accept = std::function<bool(const ObjectSpec&, const Footprint&)>;
  auto place_all = [&](const std::vector<ObjectSpec>& objects, const Accept& accept) {
    for (const ObjectSpec& o : objects) {
      if (!place(layout, o, rng, uniform_center, accept)) return false;
    }
    return true;
  };

  switch (config.mode) {
    case PositionMode::random: {
      std::vector<ObjectSpec> objects = draw_group(minority);
      const auto rest = draw_group(majority);
      objects.insert(objects.end(), rest.begin(), rest.end());
      if (!place_all(largest_first(std::move(objects)), nullptr)) return std::nullopt;
      break;
    }
    case PositionMode::partitioned: {
      // Each side gets canvas area in proportion to its group's expected cover.
      const double cover_min = minority.count * generated_area_coefficient(minority.shape) *
                               minority.sizes.mean_square();
      const double cover_maj = majority.count * generated_area_coefficient(majority.shape) *
                               majority.sizes.mean_square();
      const PartitionLine line =
          partition_for_fraction(rng.uniform(0.0, 2 * pi), cover_min / (cover_min + cover_maj));
      meta.partition = line;
      auto side = [line](double sign) -> Accept {
        return [line, sign](const ObjectSpec&, const Footprint& f) {
          for (const Polygon& piece : f.pieces) {
            for (Vec2 p : piece) {
              if (sign * line.offset(p) <= 0.0) return false;
            }
          }
          return true;
        };
      };
      const auto small_group = largest_first(draw_group(minority));
      const auto large_group = largest_first(draw_group(majority));
      if (!place_all(small_group, side(+1.0)) || !place_all(large_group, side(-1.0))) {
        return std::nullopt;
      }
      break;
    }
    case PositionMode::paired: {
      const auto small_group = largest_first(draw_group(minority));
      if (!place_all(small_group, nullptr)) return std::nullopt;
      std::vector<std::size_t> unpaired(layout.objects().size());
      std::iota(unpaired.begin(), unpaired.end(), 0);
      for (const ObjectSpec& proto : largest_first(draw_group(majority))) {
        std::optional<std::size_t> placed;
        if (unpaired.empty()) {
          placed = place(layout, proto, rng, uniform_center);
        } else {
          std::size_t anchor_slot = 0;
          auto next_to_anchor = [&](const Footprint& at_origin, Rng& r) -> std::optional<Vec2> {
            anchor_slot = static_cast<std::size_t>(
                r.uniform_int(0, static_cast<std::int64_t>(unpaired.size()) - 1));
            const Footprint& anchor = layout.print(unpaired[anchor_slot]);
            const double reach = anchor.radius + at_origin.radius;
            const double d = r.uniform(reach, kPairDistanceFactor * reach);
            const double phi = r.uniform(0.0, 2 * pi);
            return anchor.center + Vec2{d * std::cos(phi), d * std::sin(phi)};
          };
          placed = place(layout, proto, rng, next_to_anchor);
          if (placed) {
            meta.pairs.emplace_back(unpaired[anchor_slot], *placed);
            unpaired.erase(unpaired.begin() + static_cast<std::ptrdiff_t>(anchor_slot));
          }
        }
        if (!placed) return std::nullopt;
      }
      break;
    }
  }

  // Shuffle draw order so list position carries no group information.
  std::vector<std::size_t> order(layout.objects().size());
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);
  std::vector<std::size_t> new_index(order.size());
  EvalScene out;
  out.scene.collision_policy = config.collision;
  for (std::size_t i = 0; i < order.size(); ++i) {
    new_index[order[i]] = i;
    out.scene.objects.push_back(layout.objects()[order[i]]);
  }
  for (auto& [a, b] : meta.pairs) {
    a = new_index[a];
    b = new_index[b];
  }
  out.metadata = std::move(meta);
  return out;
}

}  // namespace

EvalScene generate_eval_scene(const EvalConfig& config, std::uint64_t seed) {
  if (config.ratios.empty()) throw std::invalid_argument("evaluation config has no ratios");
  Rng rng(seed);

  const Ratio base = rng.pick(config.ratios);
  const int max_multiplier = config.object_budget / (base.small + base.large);
  RatioSpec ratio{base, 1};
  validate(ratio, config.object_budget);
  ratio.multiplier = static_cast<int>(rng.uniform_int(1, max_multiplier));

  EvalMetadata meta;
  meta.contrast = config.contrast ? *config.contrast
                                  : (rng.coin() ? ContrastAttribute::shape : ContrastAttribute::color);
  meta.ratio = ratio;
  meta.minority_count = ratio.minority_count();
  meta.majority_count = ratio.majority_count();

  GroupPlan minority{}, majority{};
  if (meta.contrast == ContrastAttribute::color) {
    std::array colors = kAllColors;
    rng.shuffle(colors);
    const ShapeKind shape = kAllShapes[static_cast<std::size_t>(rng.uniform_int(0, 7))];
    minority = {shape, colors[0], config.sizes, meta.minority_count};
    majority = {shape, colors[1], config.sizes, meta.majority_count};
    meta.minority = Predicate::of(colors[0]);
    meta.majority = Predicate::of(colors[1]);
    meta.shared = Predicate::of(shape);
  } else {
    std::array shapes = kAllShapes;
    rng.shuffle(shapes);
    const Color color = kAllColors[static_cast<std::size_t>(rng.uniform_int(0, 6))];
    minority = {shapes[0], color, config.sizes, meta.minority_count};
    majority = {shapes[1], color, config.sizes, meta.majority_count};
    meta.minority = Predicate::of(shapes[0]);
    meta.majority = Predicate::of(shapes[1]);
    meta.shared = Predicate::of(color);
  }
  if (config.area_controlled) {
    std::tie(minority.sizes, majority.sizes) =
        size_ranges_for_area_control(ratio, minority.shape, majority.shape, config.sizes);
  }
  meta.minority_shape = minority.shape;
  meta.majority_shape = majority.shape;
  meta.minority_sizes = minority.sizes;
  meta.majority_sizes = majority.sizes;

  for (int restart = 0; restart < kRestartsPerScene; ++restart) {
    if (auto scene = attempt_eval_layout(config, minority, majority, meta, rng)) return *scene;
  }
  throw PlacementFailure("no admissible layout for " + config.label() + " (" +
                         std::to_string(meta.minority_count) + "+" +
                         std::to_string(meta.majority_count) + " objects, " +
                         std::string(to_string(minority.shape)) + "/" +
                         std::string(to_string(majority.shape)) + ")");
}

std::optional<std::string> invariant_violation(const EvalConfig& config, const EvalScene& eval) {
  const Scene& scene = eval.scene;
  const EvalMetadata& meta = eval.metadata;
  if (meta.minority_count != meta.ratio.minority_count() ||
      meta.majority_count != meta.ratio.majority_count()) {
    return "metadata counts differ from the ratio";
  }
  const auto minority = static_cast<int>(count_matching(scene, meta.minority, meta.shared));
  const auto majority = static_cast<int>(count_matching(scene, meta.majority, meta.shared));
  if (minority != meta.minority_count || majority != meta.majority_count ||
      static_cast<int>(scene.objects.size()) != minority + majority) {
    return "group counts differ from the ratio";
  }
  if (meta.minority == meta.majority) return "contrasted groups share their attribute value";
  if (std::find(config.ratios.begin(), config.ratios.end(), meta.ratio.base) ==
      config.ratios.end()) {
    return "ratio " + meta.ratio.base.label() + " is not part of the cell";
  }
  for (const ObjectSpec& o : scene.objects) {
    if (!inside_canvas(footprint(o))) return "object leaves the canvas";
  }
  if (!policy_violations(scene).empty()) return "objects violate the collision policy";

  if (config.mode == PositionMode::partitioned) {
    if (!meta.partition) return "partitioned scene without a partition line";
    for (const ObjectSpec& o : scene.objects) {
      const double sign = matches(meta.minority, o) ? 1.0 : -1.0;
      for (const Polygon& piece : footprint(o).pieces) {
        for (Vec2 p : piece) {
          if (sign * meta.partition->offset(p) <= 0.0) return "object crosses the partition line";
        }
      }
    }
  }
  if (config.mode == PositionMode::paired) {
    if (static_cast<int>(meta.pairs.size()) != meta.minority_count) {
      return "not every minority object is paired";
    }
    std::vector<bool> used(scene.objects.size(), false);
    for (const auto& [a, b] : meta.pairs) {
      if (a >= scene.objects.size() || b >= scene.objects.size()) return "pair index out of range";
      if (used[a] || used[b]) return "object paired twice";
      used[a] = used[b] = true;
      const ObjectSpec& small = scene.objects[a];
      const ObjectSpec& large = scene.objects[b];
      if (!matches(meta.minority, small) || !matches(meta.majority, large)) {
        return "pair does not join a minority and a majority object";
      }
      const double limit = kPairDistanceFactor * (bounding_radius(small) + bounding_radius(large));
      if (distance(small.center, large.center) > limit + 1e-12) return "pair too far apart";
    }
  }
  return std::nullopt;
}

CaptionAST eval_caption_for(const EvalMetadata& metadata, Rng& rng) {
  CaptionAST c;
  c.modifier = rng.coin() ? Modifier::more_than : Modifier::less_than;
  c.quantity = kHalf;
  c.restrictor = Predicate::universal();
  c.scope = rng.coin() ? metadata.minority : metadata.majority;
  c.scope_form = ScopeForm::noun;
  return c;
}

Scene generate_training_scene(const TrainConfig& config, std::uint64_t seed) {
  if (config.max_objects < 2) throw std::invalid_argument("max_objects must be at least 2");
  Rng rng(seed);
  const int count = static_cast<int>(rng.uniform_int(2, config.max_objects));
  std::vector<ObjectSpec> protos;
  for (int i = 0; i < count; ++i) {
    ObjectSpec o;
    o.shape = kAllShapes[static_cast<std::size_t>(rng.uniform_int(0, 7))];
    o.color = kAllColors[static_cast<std::size_t>(rng.uniform_int(0, 6))];
    o.size = extent_for(o.shape, rng.uniform(config.sizes.lo, config.sizes.hi));
    protos.push_back(o);
  }
  for (int restart = 0; restart < kRestartsPerScene; ++restart) {
    Layout layout(config.collision);
    bool ok = true;
    for (const ObjectSpec& proto : protos) {
      if (!place(layout, proto, rng, uniform_center)) {
        ok = false;
        break;
      }
    }
    if (ok) return Scene{layout.objects(), config.collision};
  }
  throw PlacementFailure("no admissible layout for a training scene with " +
                         std::to_string(count) + " objects");
}

namespace {

Predicate random_restrictor(const Scene& scene, Rng& rng) {
  const ObjectSpec& o = scene.objects[static_cast<std::size_t>(
      rng.uniform_int(0, static_cast<std::int64_t>(scene.objects.size()) - 1))];
  switch (rng.uniform_int(0, 2)) {
    case 0: return Predicate::universal();
    case 1: return Predicate::of(o.color);
    default: return Predicate::of(o.shape);
  }
}

// Scope values mostly come from objects inside the restrictor; the rest are
// drawn from the full vocabulary so absent attributes also appear.
std::pair<Predicate, ScopeForm> random_scope(const Scene& scene, const Predicate& restrictor,
                                             Rng& rng) {
  std::vector<const ObjectSpec*> domain;
  for (const ObjectSpec& o : scene.objects) {
    if (matches(restrictor, o)) domain.push_back(&o);
  }
  const bool use_color = rng.coin();
  const bool from_scene = !domain.empty() && rng.bernoulli(0.75);
  const ObjectSpec* source = from_scene ? rng.pick(domain) : nullptr;
  if (use_color) {
    const Color c = source ? source->color
                           : kAllColors[static_cast<std::size_t>(rng.uniform_int(0, 6))];
    return {Predicate::of(c), rng.coin() ? ScopeForm::noun : ScopeForm::adjective};
  }
  const ShapeKind s = source ? source->shape
                             : kAllShapes[static_cast<std::size_t>(rng.uniform_int(0, 7))];
  return {Predicate::of(s), ScopeForm::noun};
}

CaptionAST random_caption(const Scene& scene, Captioner captioner, Rng& rng) {
  CaptionAST c;
  if (captioner == Captioner::q_half) {
    c.modifier = rng.coin() ? Modifier::more_than : Modifier::less_than;
    c.quantity = kHalf;
  } else {
    c.modifier = kAllModifiers[static_cast<std::size_t>(rng.uniform_int(0, 5))];
    const auto quantities = all_quantities();
    c.quantity = quantities[static_cast<std::size_t>(
        rng.uniform_int(0, static_cast<std::int64_t>(quantities.size()) - 1))];
  }
  c.restrictor = random_restrictor(scene, rng);
  std::tie(c.scope, c.scope_form) = random_scope(scene, c.restrictor, rng);
  return c;
}

bool in_grammar(const CaptionAST& c, Captioner captioner) {
  return captioner == Captioner::q_half ? is_half_comparison(c) : is_informative(c);
}

}  // namespace

SampledCaption sample_training_caption(const Scene& scene, Captioner captioner, Rng& rng) {
  if (scene.objects.empty()) throw std::invalid_argument("cannot caption an empty scene");
  const bool target = rng.coin();
  constexpr int kAttempts = 64;
  for (int attempt = 0; attempt < kAttempts; ++attempt) {
    CaptionAST c = random_caption(scene, captioner, rng);
    if (!in_grammar(c, captioner)) continue;
    if (evaluate(c, scene) == target) return {c, target};
    // Flip polarity: the complement is exact for Q-full; for Q-half
    // more/less than half are only complementary off the exact-half case.
    c.modifier = captioner == Captioner::q_half
                     ? (c.modifier == Modifier::more_than ? Modifier::less_than : Modifier::more_than)
                     : complement(c.modifier);
    if (in_grammar(c, captioner) && evaluate(c, scene) == target) return {c, target};
  }
  std::vector<CaptionAST> candidates;
  for (const CaptionAST& c : enumerate_captions()) {
    if (in_grammar(c, captioner) && evaluate(c, scene) == target) candidates.push_back(c);
  }
  if (candidates.empty()) throw std::logic_error("caption grammar cannot reach the target truth value");
  return {rng.pick(candidates), target};
}

}  // namespace quantiscene
