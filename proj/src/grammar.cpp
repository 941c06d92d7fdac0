// Surface grammar for quantifier captions.
//
//   caption    := modifier quantity verb scope ("." | "?")
//   modifier   := "less than" | "at most" | "exactly" | "at least" | "more than" | "not"
//   quantity   := number noun            ; singular noun iff number is "one"
//               | "no" noun-sg | "all" noun-pl | "half the" noun-pl
//               | ("a third" | "two thirds" | "a quarter" | "three quarters") "of the" noun-pl
//   noun       := "shape(s)" | color "shape(s)" | shape-noun
//   verb       := "is" | "are"            ; agrees with the quantity's noun
//   scope      := color | color "shapes" | shape-plural             (plural)
//               | color | article color "shape" | article shape      (singular)

#include <array>
#include <cctype>
#include <optional>
#include <string>

#include "quantiscene/caption.hpp"
#include "quantiscene/errors.hpp"

namespace quantiscene {
namespace {

constexpr std::array<std::string_view, 6> kNumberWords{"zero", "one", "two", "three", "four", "five"};

constexpr std::array<std::string_view, 6> kModifierPhrases{"less than", "at most",   "exactly",
                                                           "at least",  "more than", "not"};

std::string_view phrase(Modifier m) { return kModifierPhrases[static_cast<std::size_t>(m)]; }

std::string_view article(ShapeKind s) { return s == ShapeKind::ellipse ? "an" : "a"; }

std::string restrictor_noun(const Predicate& r, bool singular) {
  std::string out;
  if (r.shape) return std::string(singular ? to_string(*r.shape) : plural(*r.shape));
  if (r.color) out = std::string(to_string(*r.color)) + " ";
  out += singular ? "shape" : "shapes";
  return out;
}

std::string scope_phrase(const Predicate& s, ScopeForm form, bool singular) {
  if (s.shape) {
    return singular ? std::string(article(*s.shape)) + " " + std::string(to_string(*s.shape))
                    : std::string(plural(*s.shape));
  }
  const std::string color(to_string(*s.color));
  if (form == ScopeForm::adjective) return color;
  return singular ? "a " + color + " shape" : color + " shapes";
}

struct QuantityPhrase {
  std::string text;
  bool singular;
};

QuantityPhrase quantity_phrase(const Quantity& q, const Predicate& r) {
  if (const auto* n = std::get_if<Number>(&q)) {
    const bool singular = n->value == 1;
    return {std::string(kNumberWords[static_cast<std::size_t>(n->value)]) + " " +
                restrictor_noun(r, singular),
            singular};
  }
  const auto f = std::get<Fraction>(q);
  const std::string plural_noun = restrictor_noun(r, false);
  if (f == Fraction{0, 1}) return {"no " + restrictor_noun(r, true), true};
  if (f == Fraction{1, 1}) return {"all " + plural_noun, false};
  if (f == Fraction{1, 2}) return {"half the " + plural_noun, false};
  std::string head;
  if (f == Fraction{1, 3}) head = "a third";
  if (f == Fraction{2, 3}) head = "two thirds";
  if (f == Fraction{1, 4}) head = "a quarter";
  if (f == Fraction{3, 4}) head = "three quarters";
  return {head + " of the " + plural_noun, false};
}

struct Token {
  std::string text;
  std::size_t offset;
};

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) { tokenize(); }

  CaptionAST run() {
    CaptionAST ast;
    ast.modifier = parse_modifier();
    const bool singular = parse_quantity(ast);
    expect(singular ? "is" : "are");
    parse_scope(ast, singular);
    if (pos_ < tokens_.size()) fail("unexpected trailing word '" + tokens_[pos_].text + "'");
    return ast;
  }

 private:
  void tokenize() {
    std::size_t end = text_.size();
    while (end > 0 && std::isspace(static_cast<unsigned char>(text_[end - 1]))) --end;
    if (end == 0) throw ParseError("empty caption", 0);
    if (text_[end - 1] != '.' && text_[end - 1] != '?') {
      throw ParseError("caption must end with '.' or '?'", end);
    }
    end_offset_ = end - 1;
    std::size_t i = 0;
    while (i < end_offset_) {
      if (std::isspace(static_cast<unsigned char>(text_[i]))) {
        ++i;
        continue;
      }
      const std::size_t start = i;
      while (i < end_offset_ && !std::isspace(static_cast<unsigned char>(text_[i]))) ++i;
      tokens_.push_back({std::string(text_.substr(start, i - start)), start});
    }
    if (tokens_.empty()) throw ParseError("empty caption", 0);
    for (char& c : tokens_.front().text) {
      c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
  }

  [[noreturn]] void fail(const std::string& message) const {
    const std::size_t at = pos_ < tokens_.size() ? tokens_[pos_].offset : end_offset_;
    throw ParseError(message, at);
  }

  std::string_view peek(std::size_t ahead = 0) const {
    return pos_ + ahead < tokens_.size() ? std::string_view(tokens_[pos_ + ahead].text)
                                         : std::string_view();
  }

  bool accept(std::string_view word) {
    if (peek() != word) return false;
    ++pos_;
    return true;
  }

  void expect(std::string_view word) {
    if (!accept(word)) {
      fail("expected '" + std::string(word) + "', found " + describe());
    }
  }

  std::string describe() const {
    return pos_ < tokens_.size() ? "'" + tokens_[pos_].text + "'" : "end of caption";
  }

  Modifier parse_modifier() {
    for (Modifier m : kAllModifiers) {
      const std::string_view p = phrase(m);
      const auto space = p.find(' ');
      if (space == std::string_view::npos) {
        if (accept(p)) return m;
      } else if (peek() == p.substr(0, space) && peek(1) == p.substr(space + 1)) {
        pos_ += 2;
        return m;
      }
    }
    fail("expected a modifier ('less than', 'at most', 'exactly', 'at least', 'more than', "
         "'not'), found " + describe());
  }

  // Returns true when the quantity phrase is grammatically singular.
  bool parse_quantity(CaptionAST& ast) {
    if (peek() == "two" && peek(1) == "thirds") return parse_partitive(ast, {2, 3}, 2);
    if (peek() == "three" && peek(1) == "quarters") return parse_partitive(ast, {3, 4}, 2);
    if (peek() == "a" && peek(1) == "third") return parse_partitive(ast, {1, 3}, 2);
    if (peek() == "a" && peek(1) == "quarter") return parse_partitive(ast, {1, 4}, 2);
    for (std::size_t n = 0; n < kNumberWords.size(); ++n) {
      if (accept(kNumberWords[n])) {
        ast.quantity = Number{static_cast<int>(n)};
        ast.restrictor = parse_noun(n == 1);
        return n == 1;
      }
    }
    if (accept("no")) {
      ast.quantity = Fraction{0, 1};
      ast.restrictor = parse_noun(true);
      return true;
    }
    if (accept("all")) {
      ast.quantity = Fraction{1, 1};
      ast.restrictor = parse_noun(false);
      return false;
    }
    if (accept("half")) {
      expect("the");
      ast.quantity = kHalf;
      ast.restrictor = parse_noun(false);
      return false;
    }
    fail("expected a quantity, found " + describe());
  }

  bool parse_partitive(CaptionAST& ast, Fraction f, std::size_t words) {
    pos_ += words;
    expect("of");
    expect("the");
    ast.quantity = f;
    ast.restrictor = parse_noun(false);
    return false;
  }

  Predicate parse_noun(bool singular) {
    const std::string_view generic = singular ? "shape" : "shapes";
    if (accept(generic)) return Predicate::universal();
    if (auto color = color_from_string(peek())) {
      ++pos_;
      expect(generic);
      return Predicate::of(*color);
    }
    const auto shape = singular ? shape_from_string(peek()) : shape_from_plural(peek());
    if (shape) {
      ++pos_;
      return Predicate::of(*shape);
    }
    fail(std::string("expected a ") + (singular ? "singular" : "plural") + " noun, found " +
         describe());
  }

  void parse_scope(CaptionAST& ast, bool singular) {
    if (auto color = color_from_string(peek())) {
      ++pos_;
      ast.scope = Predicate::of(*color);
      ast.scope_form = ScopeForm::adjective;
      if (!singular && accept("shapes")) ast.scope_form = ScopeForm::noun;
      return;
    }
    ast.scope_form = ScopeForm::noun;
    if (singular) {
      const std::string_view art = peek();
      if (art != "a" && art != "an") fail("expected 'a' or 'an', found " + describe());
      ++pos_;
      if (auto color = color_from_string(peek())) {
        if (art != "a") fail("article 'an' does not agree with '" + std::string(peek()) + "'");
        ++pos_;
        expect("shape");
        ast.scope = Predicate::of(*color);
        return;
      }
      if (auto shape = shape_from_string(peek())) {
        if (art != article(*shape)) {
          --pos_;
          fail("article '" + std::string(art) + "' does not agree with '" +
               std::string(to_string(*shape)) + "'");
        }
        ++pos_;
        ast.scope = Predicate::of(*shape);
        return;
      }
      fail("expected a color or shape, found " + describe());
    }
    if (auto shape = shape_from_plural(peek())) {
      ++pos_;
      ast.scope = Predicate::of(*shape);
      return;
    }
    fail("expected a color or plural shape, found " + describe());
  }

  std::string_view text_;
  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  std::size_t end_offset_ = 0;
};

}  // namespace

std::string realize(const CaptionAST& caption) {
  validate(caption);
  const auto q = quantity_phrase(caption.quantity, caption.restrictor);
  std::string out(phrase(caption.modifier));
  out += " " + q.text + (q.singular ? " is " : " are ");
  out += scope_phrase(caption.scope, caption.scope_form, q.singular);
  out += ".";
  out[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(out[0])));
  return out;
}

CaptionAST parse(std::string_view text) { return Parser(text).run(); }

}  // namespace quantiscene
