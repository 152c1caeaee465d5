#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace refcam {

/// Coarse part-of-speech classes; fine-grained tags collapse into these.
enum class Pos { Noun, Propn, Adj, Verb, Num, Det, Adp, Pron, Cconj, Part, Other };

std::string_view to_string(Pos pos);
std::optional<Pos> pos_from_string(std::string_view tag);

/// Stands in for the classifier token that leads every text encoding.
inline constexpr std::string_view kSentinelToken = "[CLS]";

struct Token {
  std::string surface;
  std::string lemma;
  Pos pos = Pos::Other;
  std::size_t index = 0;

  friend bool operator==(const Token&, const Token&) = default;
};

/// lemma -> coarse tag table. The built-in table covers closed-class words plus a
/// small open-class vocabulary; files in "lemma<TAB>TAG" form extend or override it.
class Lexicon {
 public:
  static const Lexicon& builtin();

  /// Reads a lexicon file. With extend_builtin the file's entries override the
  /// built-in table instead of replacing it.
  static Lexicon from_file(const std::filesystem::path& path, bool extend_builtin = true);

  void add(std::string lemma, Pos pos);
  std::optional<Pos> lookup(std::string_view lemma) const;
  std::size_t size() const { return entries_.size(); }

  /// Lowercased word -> lemma. Handles irregular and regular plurals and
  /// third-person -s against the table; unknown words only lose a plain plural -s.
  std::string lemmatize(std::string_view word) const;

 private:
  std::unordered_map<std::string, Pos> entries_;
};

std::vector<Token> tokenize_and_tag(std::string_view expression,
                                    const Lexicon& lexicon = Lexicon::builtin());

/// Indices of the sentinel plus every noun, proper noun, adjective, verb, and numeral.
std::vector<std::size_t> filter_effective(std::span<const Token> tokens);

/// Head noun of the leftmost noun phrase. Falls back to the first effective
/// content token, then to the sentinel.
std::size_t extract_primary_noun(std::span<const Token> tokens);

bool detect_positional(std::span<const Token> tokens);
bool is_positional_lemma(std::string_view lemma);

struct ParsedExpression {
  std::vector<Token> tokens;
  std::vector<std::size_t> effective;
  std::size_t primary = 0;
  std::vector<std::size_t> context;
  bool positional = false;

  /// Surface words of the expression, without the sentinel.
  std::vector<std::string> words() const;
};

ParsedExpression parse_expression(std::string_view expression,
                                  const Lexicon& lexicon = Lexicon::builtin());

}  // namespace refcam
