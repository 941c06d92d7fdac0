#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "quantiscene/json_fwd.hpp"
#include "quantiscene/scene.hpp"

namespace quantiscene {

enum class Modifier : std::uint8_t { less_than, at_most, exactly, at_least, more_than, not_equal };

inline constexpr std::array kAllModifiers{Modifier::less_than, Modifier::at_most,
                                          Modifier::exactly,   Modifier::at_least,
                                          Modifier::more_than, Modifier::not_equal};

std::string_view to_string(Modifier m) noexcept;
/// The modifier whose truth value is the negation of `m` on every scene.
Modifier complement(Modifier m) noexcept;
/// Applies the modifier's comparison to lhs <op> rhs.
bool compare(Modifier m, std::int64_t lhs, std::int64_t rhs) noexcept;

/// Absolute count, "zero" to "five".
struct Number {
  int value = 0;
  friend bool operator==(Number, Number) = default;
};

/// Proportion num/den in lowest terms; 0/1 reads "no", 1/1 reads "all".
struct Fraction {
  int num = 1;
  int den = 2;
  friend bool operator==(Fraction, Fraction) = default;
};

using Quantity = std::variant<Number, Fraction>;

inline constexpr int kMaxNumber = 5;
inline constexpr std::array<Fraction, 7> kFractions{
    {{0, 1}, {1, 4}, {1, 3}, {1, 2}, {2, 3}, {3, 4}, {1, 1}}};
inline constexpr Fraction kHalf{1, 2};

/// All 13 quantities of the full caption grammar.
std::vector<Quantity> all_quantities();
bool is_valid(const Quantity& q) noexcept;

/// Surface realization of a color scope: "red" or "red shapes".
enum class ScopeForm : std::uint8_t { adjective, noun };

/// <modifier> <quantity> of <restrictor> are <scope>.
///
/// Restrictors are universal, a single color, or a single shape. Scopes are a
/// single color or a single shape and never universal. `scope_form` only
/// affects wording of color scopes and is ignored by truth evaluation.
struct CaptionAST {
  Modifier modifier = Modifier::more_than;
  Quantity quantity = kHalf;
  Predicate restrictor;
  Predicate scope = Predicate::of(Color::red);
  ScopeForm scope_form = ScopeForm::noun;
  friend bool operator==(const CaptionAST&, const CaptionAST&) = default;
};

/// Throws std::invalid_argument when the AST lies outside the caption grammar.
void validate(const CaptionAST& caption);

/// Exact truth value. With c = |A and B| and n = |A|: numbers compare c <op> k;
/// fractions compare den*c <op> num*n in integer arithmetic (an empty restrictor
/// therefore compares 0 <op> 0).
bool evaluate(const CaptionAST& caption, const Scene& scene);

/// True when the caption is a "more than half" / "less than half" statement.
bool is_half_comparison(const CaptionAST& caption) noexcept;

/// Excludes combinations that are unsatisfiable or trivially true regardless of
/// the scene: (more_than, all) and (less_than, no/zero).
bool is_informative(const CaptionAST& caption) noexcept;

/// most(A, B) as |A and B| > |A and not B|: two global counts, one comparison.
bool verify_most_cardinality(const Scene& scene, const Predicate& a, const Predicate& b);

struct PairingTrace {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;  ///< (A and B, A and not B) indices
  std::vector<std::size_t> unmatched;
  bool unmatched_satisfy_b = false;
  bool verdict = false;
};

/// most(A, B) by one-to-one matching: repeatedly removes the closest remaining
/// (A and B, A and not B) pair by center distance until one side is exhausted,
/// then inspects the remainder.
PairingTrace trace_most_pairing(const Scene& scene, const Predicate& a, const Predicate& b);
bool verify_most_pairing(const Scene& scene, const Predicate& a, const Predicate& b);

/// English surface string, e.g. "More than half the red shapes are squares."
std::string realize(const CaptionAST& caption);

/// Inverse of realize(). Tolerates surplus whitespace and any case on the leading
/// word; accepts "." or "?" as terminator. Throws ParseError with a character offset.
CaptionAST parse(std::string_view text);

/// Every AST of the grammar: 6 modifiers x 13 quantities x 16 restrictors x 22 scopes.
std::vector<CaptionAST> enumerate_captions();

Json to_json(const Predicate& predicate);
Predicate predicate_from_json(const Json& j);
Json to_json(const CaptionAST& caption);
CaptionAST caption_from_json(const Json& j);

}  // namespace quantiscene
