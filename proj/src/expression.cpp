#include "refcam/expression.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <utility>

#include "refcam/errors.hpp"

namespace refcam {

namespace {

constexpr std::array<std::pair<Pos, std::string_view>, 11> kPosNames = {{
    {Pos::Noun, "NOUN"},
    {Pos::Propn, "PROPN"},
    {Pos::Adj, "ADJ"},
    {Pos::Verb, "VERB"},
    {Pos::Num, "NUM"},
    {Pos::Det, "DET"},
    {Pos::Adp, "ADP"},
    {Pos::Pron, "PRON"},
    {Pos::Cconj, "CCONJ"},
    {Pos::Part, "PART"},
    {Pos::Other, "OTHER"},
}};

struct WordList {
  Pos pos;
  std::string_view words;
};

// Closed classes first, then the open-class vocabulary used by the fixtures and
// common referring-expression datasets.
constexpr std::array<WordList, 12> kBuiltinWords = {{
    {Pos::Det, "the a an this that these those each every some any no another either neither "
               "all both"},
    {Pos::Adp, "in on at of with by from into onto for about near under over above below "
               "behind beside besides between among through across along around against "
               "toward towards without within inside outside beneath underneath atop upon off "
               "past via like"},
    {Pos::Pron, "it its he she they them his her hers their theirs him i me my mine we us our "
                "you your who whom whose which what someone something itself"},
    {Pos::Cconj, "and or but nor yet"},
    {Pos::Part, "to not"},
    {Pos::Num, "zero one two three four five six seven eight nine ten eleven twelve dozen"},
    {Pos::Other, "is are was were be been being am there here very partially only also just "
                 "has have had does do did so too almost nearly mostly slightly fully half "
                 "where when while then than"},
    // Positional modifiers and ordinals behave as adjectives inside noun phrases.
    {Pos::Adj, "left right top bottom front back middle center centre closest farthest "
               "furthest nearest far close next leftmost rightmost upper lower first second "
               "third last other same"},
    {Pos::Adj, "red blue green yellow black white brown gray grey pink purple big small large "
               "little tall short long old young new dark bright empty full open wooden tiny "
               "huge fat thin striped plaid"},
    {Pos::Verb, "broken sitting standing wearing holding eating riding walking running "
                "looking lying playing sit stand wear hold eat ride walk run look lie play "
                "carry carrying park parked"},
    {Pos::Noun, "man woman person child kid boy girl guy lady baby player dog cat horse cow "
                "sheep bird elephant zebra giraffe bear car bike bicycle motorcycle bus truck "
                "train boat plane airplane shirt jacket coat hat cap racket ball table chair "
                "couch sofa bed tv laptop phone book cup mug bottle bowl pizza cake sandwich "
                "banana apple orange donut umbrella bag kite skateboard surfboard glass plate "
                "tree building sign light picture image photo shoe side corner row thing "
                "object food screen window door wall vase clock"},
    {Pos::Noun, "bench sink toilet oven fridge refrigerator keyboard mouse remote suitcase "
                "frisbee skis snowboard bat glove wine fork knife spoon broccoli carrot"},
}};

constexpr std::array<std::pair<std::string_view, std::string_view>, 9> kIrregularPlurals = {{
    {"men", "man"},
    {"women", "woman"},
    {"people", "person"},
    {"children", "child"},
    {"kids", "kid"},
    {"mice", "mouse"},
    {"feet", "foot"},
    {"teeth", "tooth"},
    {"knives", "knife"},
}};

constexpr std::array<std::string_view, 18> kPositionalLemmas = {
    "left",  "right", "top",  "bottom", "front", "back",   "behind",  "above",    "below",
    "under", "over",  "near", "next",   "middle", "center", "closest", "farthest", "between",
};

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

bool is_number_word(std::string_view w) {
  bool digit = false;
  for (char c : w) {
    if (std::isdigit(static_cast<unsigned char>(c))) {
      digit = true;
    } else if (c != '.' && c != ',') {
      return false;
    }
  }
  return digit;
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::ranges::transform(out, out.begin(),
                         [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

struct RawWord {
  std::string text;
  bool capitalized = false;
};

std::vector<RawWord> split_words(std::string_view text) {
  std::vector<RawWord> out;
  std::string current;
  bool capitalized = false;
  auto flush = [&] {
    if (current.empty()) return;
    // Title case only; an all-caps word reads as emphasis rather than a name.
    const bool title = capitalized && std::any_of(current.begin() + 1, current.end(), [](char ch) {
      return std::islower(static_cast<unsigned char>(ch)) != 0;
    });
    out.push_back({lower(current), title});
    current.clear();
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const auto c = static_cast<unsigned char>(text[i]);
    // A decimal point between digits stays inside the number.
    const bool inner_point = (c == '.' || c == ',') && !current.empty() && i + 1 < text.size() &&
                             std::isdigit(static_cast<unsigned char>(text[i + 1])) &&
                             std::isdigit(static_cast<unsigned char>(current.back()));
    if (std::isalnum(c) || inner_point) {
      if (current.empty()) capitalized = std::isupper(c) != 0;
      current.push_back(static_cast<char>(c));
    } else {
      flush();
    }
  }
  flush();
  return out;
}

bool comparative_of_adjective(const Lexicon& lexicon, std::string_view stem) {
  auto is_adj = [&](std::string_view w) { return lexicon.lookup(w) == Pos::Adj; };
  if (stem.size() < 2) return false;
  if (is_adj(stem)) return true;
  // bigg-er -> big, larg-er -> large, happi-er -> happy
  if (stem.size() >= 3 && stem[stem.size() - 1] == stem[stem.size() - 2] &&
      is_adj(stem.substr(0, stem.size() - 1))) {
    return true;
  }
  if (is_adj(std::string(stem) + "e")) return true;
  if (stem.back() == 'i' && is_adj(std::string(stem.substr(0, stem.size() - 1)) + "y")) {
    return true;
  }
  return false;
}

Pos tag_word(const Lexicon& lexicon, const std::string& word, const std::string& lemma,
             bool proper_candidate) {
  if (is_number_word(word)) return Pos::Num;
  if (auto pos = lexicon.lookup(word)) return *pos;
  if (auto pos = lexicon.lookup(lemma)) return *pos;
  if (proper_candidate) return Pos::Propn;
  if (word.size() > 4 && ends_with(word, "ing")) return Pos::Verb;
  if (word.size() > 3 && ends_with(word, "ed")) return Pos::Verb;
  if (word.size() > 4 && ends_with(word, "ly")) return Pos::Other;
  if (word.size() > 4 && ends_with(word, "est") &&
      comparative_of_adjective(lexicon, std::string_view(word).substr(0, word.size() - 3))) {
    return Pos::Adj;
  }
  if (word.size() > 3 && ends_with(word, "er") &&
      comparative_of_adjective(lexicon, std::string_view(word).substr(0, word.size() - 2))) {
    return Pos::Adj;
  }
  return Pos::Noun;
}

bool is_content(Pos pos) {
  return pos == Pos::Noun || pos == Pos::Propn || pos == Pos::Adj || pos == Pos::Verb ||
         pos == Pos::Num;
}

bool is_nominal(Pos pos) { return pos == Pos::Noun || pos == Pos::Propn; }

bool is_premodifier(Pos pos) { return pos == Pos::Adj || pos == Pos::Verb || pos == Pos::Num; }

}  // namespace

std::string_view to_string(Pos pos) {
  for (const auto& [p, name] : kPosNames) {
    if (p == pos) return name;
  }
  return "OTHER";
}

std::optional<Pos> pos_from_string(std::string_view tag) {
  for (const auto& [p, name] : kPosNames) {
    if (name == tag) return p;
  }
  return std::nullopt;
}

const Lexicon& Lexicon::builtin() {
  static const Lexicon table = [] {
    Lexicon lex;
    for (const auto& list : kBuiltinWords) {
      std::string_view rest = list.words;
      while (!rest.empty()) {
        const auto space = rest.find(' ');
        const auto word = rest.substr(0, space);
        if (!word.empty()) lex.add(std::string(word), list.pos);
        if (space == std::string_view::npos) break;
        rest.remove_prefix(space + 1);
      }
    }
    return lex;
  }();
  return table;
}

Lexicon Lexicon::from_file(const std::filesystem::path& path, bool extend_builtin) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open lexicon file " + path.string());
  Lexicon lex = extend_builtin ? builtin() : Lexicon{};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0) {
      throw InputError(path.string() + ":" + std::to_string(line_no) +
                       ": expected lemma<TAB>TAG");
    }
    const auto pos = pos_from_string(std::string_view(line).substr(tab + 1));
    if (!pos) {
      throw InputError(path.string() + ":" + std::to_string(line_no) + ": unknown tag '" +
                       line.substr(tab + 1) + "'");
    }
    lex.add(lower(line.substr(0, tab)), *pos);
  }
  return lex;
}

void Lexicon::add(std::string lemma, Pos pos) { entries_[std::move(lemma)] = pos; }

std::optional<Pos> Lexicon::lookup(std::string_view lemma) const {
  const auto it = entries_.find(std::string(lemma));
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

std::string Lexicon::lemmatize(std::string_view word) const {
  for (const auto& [plural, singular] : kIrregularPlurals) {
    if (word == plural) return std::string(singular);
  }
  if (lookup(word) || word.size() <= 3 || is_number_word(word)) return std::string(word);
  auto known = [&](std::string_view w) {
    const auto pos = lookup(w);
    return pos == Pos::Noun || pos == Pos::Verb;
  };
  if (ends_with(word, "ies")) {
    std::string stem = std::string(word.substr(0, word.size() - 3)) + "y";
    if (known(stem) || word.size() > 4) return stem;
  }
  if (ends_with(word, "es")) {
    const auto stem = word.substr(0, word.size() - 2);
    if (known(stem)) return std::string(stem);
  }
  if (ends_with(word, "s") && !ends_with(word, "ss") && !ends_with(word, "us")) {
    return std::string(word.substr(0, word.size() - 1));
  }
  return std::string(word);
}

std::vector<Token> tokenize_and_tag(std::string_view expression, const Lexicon& lexicon) {
  const auto words = split_words(expression);
  if (words.empty()) throw InputError("referring expression is empty");

  std::vector<Token> tokens;
  tokens.reserve(words.size() + 1);
  tokens.push_back({std::string(kSentinelToken), std::string(kSentinelToken), Pos::Other, 0});
  for (std::size_t i = 0; i < words.size(); ++i) {
    const auto& w = words[i];
    std::string lemma = lexicon.lemmatize(w.text);
    // Capitalized words are proper-noun candidates unless they open the expression.
    const bool proper_candidate = w.capitalized && i > 0;
    const Pos pos = tag_word(lexicon, w.text, lemma, proper_candidate);
    if (pos == Pos::Propn) lemma = w.text;
    tokens.push_back({w.text, std::move(lemma), pos, i + 1});
  }
  return tokens;
}

std::vector<std::size_t> filter_effective(std::span<const Token> tokens) {
  std::vector<std::size_t> out;
  for (const auto& token : tokens) {
    if (token.index == 0 || is_content(token.pos)) out.push_back(token.index);
  }
  return out;
}

std::size_t extract_primary_noun(std::span<const Token> tokens) {
  // NP := DET? (ADJ | VERB | NUM)* (NOUN | PROPN)+ ; first start position that matches wins.
  const std::size_t n = tokens.size();
  for (std::size_t start = 1; start < n; ++start) {
    std::size_t i = start;
    if (tokens[i].pos == Pos::Det) ++i;
    while (i < n && is_premodifier(tokens[i].pos)) ++i;
    std::size_t j = i;
    while (j < n && is_nominal(tokens[j].pos)) ++j;
    if (j > i) return tokens[j - 1].index;
  }
  for (std::size_t i = 1; i < n; ++i) {
    if (is_content(tokens[i].pos)) return tokens[i].index;
  }
  return 0;
}

bool is_positional_lemma(std::string_view lemma) {
  return std::ranges::find(kPositionalLemmas, lemma) != kPositionalLemmas.end();
}

bool detect_positional(std::span<const Token> tokens) {
  return std::ranges::any_of(tokens,
                             [](const Token& t) { return is_positional_lemma(t.lemma); });
}

std::vector<std::string> ParsedExpression::words() const {
  std::vector<std::string> out;
  for (const auto& token : tokens) {
    if (token.index != 0) out.push_back(token.surface);
  }
  return out;
}

ParsedExpression parse_expression(std::string_view expression, const Lexicon& lexicon) {
  ParsedExpression parsed;
  parsed.tokens = tokenize_and_tag(expression, lexicon);
  parsed.effective = filter_effective(parsed.tokens);
  parsed.primary = extract_primary_noun(parsed.tokens);
  for (std::size_t idx : parsed.effective) {
    if (idx != parsed.primary) parsed.context.push_back(idx);
  }
  parsed.positional = detect_positional(parsed.tokens);
  return parsed;
}

}  // namespace refcam
