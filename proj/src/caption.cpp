#include "quantiscene/caption.hpp"

#include <limits>
#include <stdexcept>

namespace quantiscene {

std::string_view to_string(Modifier m) noexcept {
  switch (m) {
    case Modifier::less_than: return "less_than";
    case Modifier::at_most: return "at_most";
    case Modifier::exactly: return "exactly";
    case Modifier::at_least: return "at_least";
    case Modifier::more_than: return "more_than";
    case Modifier::not_equal: return "not_equal";
  }
  return "";
}

Modifier complement(Modifier m) noexcept {
  switch (m) {
    case Modifier::less_than: return Modifier::at_least;
    case Modifier::at_least: return Modifier::less_than;
    case Modifier::more_than: return Modifier::at_most;
    case Modifier::at_most: return Modifier::more_than;
    case Modifier::exactly: return Modifier::not_equal;
    case Modifier::not_equal: return Modifier::exactly;
  }
  return m;
}

bool compare(Modifier m, std::int64_t lhs, std::int64_t rhs) noexcept {
  switch (m) {
    case Modifier::less_than: return lhs < rhs;
    case Modifier::at_most: return lhs <= rhs;
    case Modifier::exactly: return lhs == rhs;
    case Modifier::at_least: return lhs >= rhs;
    case Modifier::more_than: return lhs > rhs;
    case Modifier::not_equal: return lhs != rhs;
  }
  return false;
}

std::vector<Quantity> all_quantities() {
  std::vector<Quantity> out;
  for (int n = 0; n <= kMaxNumber; ++n) out.emplace_back(Number{n});
  for (Fraction f : kFractions) out.emplace_back(f);
  return out;
}

bool is_valid(const Quantity& q) noexcept {
  if (const auto* n = std::get_if<Number>(&q)) return n->value >= 0 && n->value <= kMaxNumber;
  const auto f = std::get<Fraction>(q);
  for (Fraction allowed : kFractions) {
    if (allowed == f) return true;
  }
  return false;
}

namespace {

bool single_attribute(const Predicate& p) noexcept {
  return !p.negated && !(p.shape && p.color);
}

}  // namespace

void validate(const CaptionAST& caption) {
  if (!is_valid(caption.quantity)) throw std::invalid_argument("quantity outside the grammar");
  if (!single_attribute(caption.restrictor)) {
    throw std::invalid_argument("restrictor must be universal, one color, or one shape");
  }
  if (!single_attribute(caption.scope) || caption.scope.is_universal()) {
    throw std::invalid_argument("scope must be exactly one color or one shape");
  }
}

bool evaluate(const CaptionAST& caption, const Scene& scene) {
  const auto hits =
      static_cast<std::int64_t>(count_matching(scene, caption.restrictor, caption.scope));
  if (const auto* n = std::get_if<Number>(&caption.quantity)) {
    return compare(caption.modifier, hits, n->value);
  }
  const auto f = std::get<Fraction>(caption.quantity);
  const auto domain = static_cast<std::int64_t>(count_matching(scene, caption.restrictor));
  return compare(caption.modifier, f.den * hits, f.num * domain);
}

bool is_half_comparison(const CaptionAST& caption) noexcept {
  const auto* f = std::get_if<Fraction>(&caption.quantity);
  return f && *f == kHalf &&
         (caption.modifier == Modifier::more_than || caption.modifier == Modifier::less_than);
}

bool is_informative(const CaptionAST& caption) noexcept {
  const Quantity& q = caption.quantity;
  const bool is_all = std::holds_alternative<Fraction>(q) && std::get<Fraction>(q) == Fraction{1, 1};
  const bool is_none = (std::holds_alternative<Fraction>(q) && std::get<Fraction>(q).num == 0) ||
                       (std::holds_alternative<Number>(q) && std::get<Number>(q).value == 0);
  if (caption.modifier == Modifier::more_than && is_all) return false;
  if (caption.modifier == Modifier::less_than && is_none) return false;
  return true;
}

bool verify_most_cardinality(const Scene& scene, const Predicate& a, const Predicate& b) {
  const std::size_t both = count_matching(scene, a, b);
  const std::size_t only_a = count_matching(scene, a, b.negation());
  return both > only_a;
}

PairingTrace trace_most_pairing(const Scene& scene, const Predicate& a, const Predicate& b) {
  std::vector<std::size_t> positive, negative;
  for (std::size_t i = 0; i < scene.objects.size(); ++i) {
    const ObjectSpec& o = scene.objects[i];
    if (!matches(a, o)) continue;
    (matches(b, o) ? positive : negative).push_back(i);
  }

  PairingTrace trace;
  // The matched subset of the pairing definition lives only in this loop: each step moves one
  // pair out of the candidate pools.
  while (!positive.empty() && !negative.empty()) {
    std::size_t best_p = 0, best_n = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < positive.size(); ++i) {
      for (std::size_t j = 0; j < negative.size(); ++j) {
        const double d = distance(scene.objects[positive[i]].center,
                                  scene.objects[negative[j]].center);
        if (d < best) {
          best = d;
          best_p = i;
          best_n = j;
        }
      }
    }
    trace.pairs.emplace_back(positive[best_p], negative[best_n]);
    positive.erase(positive.begin() + static_cast<std::ptrdiff_t>(best_p));
    negative.erase(negative.begin() + static_cast<std::ptrdiff_t>(best_n));
  }

  trace.unmatched_satisfy_b = !positive.empty();
  trace.unmatched = positive.empty() ? negative : positive;
  // Pick any remaining entity and check whether it satisfies B.
  trace.verdict = !trace.unmatched.empty() && matches(b, scene.objects[trace.unmatched.front()]);
  return trace;
}

bool verify_most_pairing(const Scene& scene, const Predicate& a, const Predicate& b) {
  return trace_most_pairing(scene, a, b).verdict;
}

std::vector<CaptionAST> enumerate_captions() {
  std::vector<Predicate> restrictors{Predicate::universal()};
  for (Color c : kAllColors) restrictors.push_back(Predicate::of(c));
  for (ShapeKind s : kAllShapes) restrictors.push_back(Predicate::of(s));

  std::vector<std::pair<Predicate, ScopeForm>> scopes;
  for (Color c : kAllColors) {
    scopes.emplace_back(Predicate::of(c), ScopeForm::adjective);
    scopes.emplace_back(Predicate::of(c), ScopeForm::noun);
  }
  for (ShapeKind s : kAllShapes) scopes.emplace_back(Predicate::of(s), ScopeForm::noun);

  std::vector<CaptionAST> out;
  const auto quantities = all_quantities();
  for (Modifier m : kAllModifiers) {
    for (const Quantity& q : quantities) {
      for (const Predicate& r : restrictors) {
        for (const auto& [scope, form] : scopes) out.push_back({m, q, r, scope, form});
      }
    }
  }
  return out;
}

Json to_json(const Predicate& p) {
  Json j = Json::object();
  if (p.shape) j["shape"] = to_string(*p.shape);
  if (p.color) j["color"] = to_string(*p.color);
  if (p.negated) j["negated"] = true;
  return j;
}

Predicate predicate_from_json(const Json& j) {
  Predicate p;
  if (j.contains("shape")) {
    p.shape = shape_from_string(j.at("shape").get<std::string>());
    if (!p.shape) throw std::invalid_argument("unknown shape " + j.at("shape").dump());
  }
  if (j.contains("color")) {
    p.color = color_from_string(j.at("color").get<std::string>());
    if (!p.color) throw std::invalid_argument("unknown color " + j.at("color").dump());
  }
  p.negated = j.value("negated", false);
  return p;
}

Json to_json(const CaptionAST& c) {
  Json j;
  j["modifier"] = to_string(c.modifier);
  if (const auto* n = std::get_if<Number>(&c.quantity)) {
    j["quantity"] = Json{{"number", n->value}};
  } else {
    const auto f = std::get<Fraction>(c.quantity);
    j["quantity"] = Json{{"fraction", {f.num, f.den}}};
  }
  j["restrictor"] = to_json(c.restrictor);
  j["scope"] = to_json(c.scope);
  j["scope_form"] = c.scope_form == ScopeForm::noun ? "noun" : "adjective";
  return j;
}

CaptionAST caption_from_json(const Json& j) {
  CaptionAST c;
  const auto modifier = j.at("modifier").get<std::string>();
  bool found = false;
  for (Modifier m : kAllModifiers) {
    if (to_string(m) == modifier) {
      c.modifier = m;
      found = true;
    }
  }
  if (!found) throw std::invalid_argument("unknown modifier " + modifier);
  const Json& q = j.at("quantity");
  if (q.contains("number")) {
    c.quantity = Number{q.at("number").get<int>()};
  } else {
    c.quantity = Fraction{q.at("fraction").at(0).get<int>(), q.at("fraction").at(1).get<int>()};
  }
  c.restrictor = predicate_from_json(j.at("restrictor"));
  c.scope = predicate_from_json(j.at("scope"));
  const auto form = j.value("scope_form", std::string("noun"));
  if (form != "noun" && form != "adjective") throw std::invalid_argument("unknown scope_form " + form);
  c.scope_form = form == "noun" ? ScopeForm::noun : ScopeForm::adjective;
  validate(c);
  return c;
}

}  // namespace quantiscene
