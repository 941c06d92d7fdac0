#include "quantiscene/subjects.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "quantiscene/errors.hpp"

namespace quantiscene {

void validate(const AnsParams& params) {
  if (!(params.weber > 1.0)) throw std::invalid_argument("Weber fraction must exceed 1");
}

Side ans_predict(int first, int second, const AnsParams& params, Rng& rng) {
  validate(params);
  if (first < 0 || second < 0) throw std::invalid_argument("counts must be non-negative");
  const double a = rng.normal(first, params.noise() * first);
  const double b = rng.normal(second, params.noise() * second);
  if (a == b) return rng.coin() ? Side::first_larger : Side::second_larger;
  return a > b ? Side::first_larger : Side::second_larger;
}

Side ans_predict(int first, int second, const AnsParams& params, std::uint64_t seed) {
  Rng rng(seed);
  return ans_predict(first, second, params, rng);
}

double ans_accuracy(double ratio, double weber) {
  if (!(ratio >= 1.0)) throw std::invalid_argument("ratio must be at least 1");
  if (!(weber > 1.0)) throw std::invalid_argument("Weber fraction must exceed 1");
  const double z = std::abs(ratio - 1.0) /
                   (std::numbers::sqrt2 * (weber - 1.0) * std::sqrt(ratio * ratio + 1.0));
  return 0.5 * (1.0 + std::erf(z));
}

Side exact_predict(int first, int second) noexcept {
  return first > second ? Side::first_larger : Side::second_larger;
}

bool spatial_pairing_predict(const Scene& scene, const Predicate& a, const Predicate& b,
                             const PairingParams& params, Rng& rng) {
  struct Entity {
    Vec2 center;
    double radius;
    bool paired = false;
  };
  std::vector<Entity> positive, negative;
  for (const ObjectSpec& o : scene.objects) {
    if (!matches(a, o)) continue;
    (matches(b, o) ? positive : negative).push_back({o.center, bounding_radius(o)});
  }
  for (Entity& p : positive) {
    Entity* best = nullptr;
    double best_gap = std::numeric_limits<double>::infinity();
    for (Entity& n : negative) {
      if (n.paired) continue;
      const double gap = distance(p.center, n.center) - p.radius - n.radius;
      if (gap <= params.radius && gap < best_gap) {
        best_gap = gap;
        best = &n;
      }
    }
    if (best) {
      p.paired = true;
      best->paired = true;
    }
  }
  long evidence = 0;
  for (const Entity& p : positive) {
    if (!p.paired && !rng.bernoulli(params.drop_probability)) ++evidence;
  }
  for (const Entity& n : negative) {
    if (!n.paired && !rng.bernoulli(params.drop_probability)) --evidence;
  }
  if (evidence == 0) return rng.coin();
  return evidence > 0;
}

SubjectKind parse_subject(std::string_view spec) {
  if (spec == "exact") return ExactCounter{};
  const auto colon = spec.find(':');
  const std::string kind(spec.substr(0, colon));
  if (colon == std::string_view::npos || (kind != "ans" && kind != "pairing")) {
    throw std::invalid_argument("subject must be exact, ans:<w> or pairing:<radius>, got '" +
                                std::string(spec) + "'");
  }
  double value = 0.0;
  try {
    std::size_t used = 0;
    const std::string number(spec.substr(colon + 1));
    value = number == "inf" ? std::numeric_limits<double>::infinity() : std::stod(number, &used);
    if (number != "inf" && used != number.size()) throw std::invalid_argument("trailing characters");
  } catch (const std::exception&) {
    throw std::invalid_argument("malformed subject parameter in '" + std::string(spec) + "'");
  }
  if (kind == "ans") {
    AnsParams p{value};
    validate(p);
    return AnsSubject{p};
  }
  if (!(value >= 0.0)) throw std::invalid_argument("pairing radius must be non-negative");
  return PairingSubject{PairingParams{value, 0.1}};
}

std::string to_string(const SubjectKind& subject) {
  std::ostringstream out;
  if (std::holds_alternative<ExactCounter>(subject)) {
    out << "exact";
  } else if (const auto* ans = std::get_if<AnsSubject>(&subject)) {
    out << "ans:" << ans->params.weber;
  } else {
    const auto& p = std::get<PairingSubject>(subject);
    out << "pairing:" << p.params.radius;
  }
  return out.str();
}

bool answer_caption(const SubjectKind& subject, const Scene& scene, const CaptionAST& caption,
                    std::uint64_t seed) {
  if (std::holds_alternative<ExactCounter>(subject)) return evaluate(caption, scene);
  if (!is_half_comparison(caption)) {
    throw UnsupportedCaption("subject " + to_string(subject) +
                             " only answers 'more/less than half' captions");
  }
  const Predicate scope = caption.modifier == Modifier::more_than ? caption.scope
                                                                  : caption.scope.negation();
  Rng rng(seed);
  if (const auto* ans = std::get_if<AnsSubject>(&subject)) {
    const auto hits = static_cast<int>(count_matching(scene, caption.restrictor, scope));
    const auto misses =
        static_cast<int>(count_matching(scene, caption.restrictor, scope.negation()));
    return ans_predict(hits, misses, ans->params, rng) == Side::first_larger;
  }
  return spatial_pairing_predict(scene, caption.restrictor, scope,
                                 std::get<PairingSubject>(subject).params, rng);
}

}  // namespace quantiscene
