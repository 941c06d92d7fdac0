#pragma once

#include <cstdint>
#include <string>
#include <variant>

#include "quantiscene/caption.hpp"
#include "quantiscene/rng.hpp"
#include "quantiscene/scene.hpp"

namespace quantiscene {

/// Approximate number system with linear scalar variability: an estimate of a
/// count c is Normal(c, (w - 1) * c) where w is the Weber fraction.
struct AnsParams {
  double weber = 1.14;

  /// Standard deviation per unit count.
  double noise() const noexcept { return weber - 1.0; }
};

/// Throws std::invalid_argument unless w > 1.
void validate(const AnsParams& params);

enum class Side : std::uint8_t { first_larger, second_larger };

/// Noisy comparison of two counts; exact ties in the estimates go to a fair coin.
Side ans_predict(int first, int second, const AnsParams& params, Rng& rng);
Side ans_predict(int first, int second, const AnsParams& params, std::uint64_t seed);

/// Probability that the ANS orders two counts with ratio r = larger/smaller correctly:
/// 1/2 * (1 + erf(|r - 1| / (sqrt(2) * (w - 1) * sqrt(r^2 + 1)))).
double ans_accuracy(double ratio, double weber);

/// Perfect counter. Equal counts answer second_larger ("first is not larger").
Side exact_predict(int first, int second) noexcept;

struct PairingParams {
  /// Largest gap between two objects' bounding circles that still forms a pair.
  double radius = 0.15;
  /// Probability that each unpaired object is overlooked.
  double drop_probability = 0.1;
};

/// Pairing-based "most(A, B)" with limited reach: every A-and-B object, in scene
/// order, pairs with the nearest unpaired A-and-not-B object within `radius`.
/// Unpaired objects are kept as evidence unless dropped; the answer is the sign
/// of (kept A-and-B) - (kept A-and-not-B), with a coin flip on zero.
bool spatial_pairing_predict(const Scene& scene, const Predicate& a, const Predicate& b,
                             const PairingParams& params, Rng& rng);

struct ExactCounter {
  friend bool operator==(const ExactCounter&, const ExactCounter&) = default;
};
struct AnsSubject {
  AnsParams params;
  friend bool operator==(const AnsSubject& x, const AnsSubject& y) {
    return x.params.weber == y.params.weber;
  }
};
struct PairingSubject {
  PairingParams params;
  friend bool operator==(const PairingSubject& x, const PairingSubject& y) {
    return x.params.radius == y.params.radius &&
           x.params.drop_probability == y.params.drop_probability;
  }
};

using SubjectKind = std::variant<ExactCounter, AnsSubject, PairingSubject>;

/// "exact", "ans:<w>", or "pairing:<radius>".
SubjectKind parse_subject(std::string_view spec);
std::string to_string(const SubjectKind& subject);

/// Agreement answer of a built-in subject. ANS and pairing subjects only handle
/// "more/less than half" captions and throw UnsupportedCaption otherwise; a
/// "less than half" caption is answered as most(A, not B).
bool answer_caption(const SubjectKind& subject, const Scene& scene, const CaptionAST& caption,
                    std::uint64_t seed);

}  // namespace quantiscene
