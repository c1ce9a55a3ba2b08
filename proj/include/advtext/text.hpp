#ifndef ADVTEXT_TEXT_HPP
#define ADVTEXT_TEXT_HPP

#include <algorithm>
#include <cstddef>
#include <fstream>
#include <initializer_list>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "advtext/error.hpp"

namespace advtext {

/// Half-open byte range [begin, end) into a source string.
struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const noexcept { return end - begin; }
  friend bool operator==(const Span&, const Span&) = default;
};

enum class TokenKind { word, number, symbol };

struct Token {
  std::string surface;
  Span span;
  std::string normalized;  // ASCII-lowercased surface
  TokenKind kind = TokenKind::symbol;
  bool attackable = false;

  /// Word made only of ASCII letters and internal apostrophes.
  bool alphabetic() const noexcept {
    if (kind != TokenKind::word) return false;
    return std::all_of(surface.begin(), surface.end(), [](char c) {
      return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '\'';
    });
  }

  friend bool operator==(const Token&, const Token&) = default;
};

struct Document {
  std::string source;
  std::vector<Token> tokens;

  std::size_t size() const noexcept { return tokens.size(); }
};

struct Substitution {
  std::size_t position = 0;
  std::string original_surface;
  std::string replacement_surface;
  std::string replacement_lemma;

  friend bool operator==(const Substitution&, const Substitution&) = default;
};

namespace detail {

inline bool is_ascii_letter(unsigned char c) noexcept {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}
inline bool is_ascii_digit(unsigned char c) noexcept { return c >= '0' && c <= '9'; }
inline bool is_space(unsigned char c) noexcept {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}
// Non-ASCII bytes are kept inside words so multibyte sequences are never split.
inline bool is_word_byte(unsigned char c) noexcept { return is_ascii_letter(c) || c >= 0x80; }

inline char ascii_lower(char c) noexcept {
  return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}
inline char ascii_upper(char c) noexcept {
  return (c >= 'a' && c <= 'z') ? static_cast<char>(c - 'a' + 'A') : c;
}

}  // namespace detail

inline std::string to_lower_ascii(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), detail::ascii_lower);
  return out;
}

/// Lowercase word set. Lines of a stopword file hold one word each; `#`
/// starts a comment line.
class StopwordSet {
 public:
  StopwordSet() = default;
  StopwordSet(std::initializer_list<std::string_view> words) {
    for (auto w : words) words_.insert(to_lower_ascii(w));
  }

  static StopwordSet load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw LoadError("cannot open stopword file: " + path);
    StopwordSet set;
    std::string line;
    while (std::getline(in, line)) {
      auto first = line.find_first_not_of(" \t\r");
      if (first == std::string::npos || line[first] == '#') continue;
      auto last = line.find_last_not_of(" \t\r");
      set.words_.insert(to_lower_ascii(std::string_view(line).substr(first, last - first + 1)));
    }
    return set;
  }

  bool contains(std::string_view w) const { return words_.count(std::string(w)) != 0; }
  std::size_t size() const noexcept { return words_.size(); }
  const std::unordered_set<std::string>& words() const noexcept { return words_; }

 private:
  std::unordered_set<std::string> words_;
};

/// Built-in copy of data/stopwords.txt.
inline const StopwordSet& default_stopwords() {
  static const StopwordSet set{
      "a",       "about",   "above",    "after",  "again",     "against",    "all",
      "am",      "an",      "and",      "any",    "are",       "as",         "at",
      "be",      "because", "been",     "before", "being",     "below",      "between",
      "both",    "but",     "by",       "can",    "could",     "did",        "do",
      "does",    "doing",   "down",     "during", "each",      "few",        "for",
      "from",    "further", "had",      "has",    "have",      "having",     "he",
      "her",     "here",    "hers",     "herself", "him",      "himself",    "his",
      "how",     "i",       "if",       "in",     "into",      "is",         "it",
      "its",     "itself",  "just",     "me",     "more",      "most",       "my",
      "myself",  "no",      "nor",      "not",    "now",       "of",         "off",
      "on",      "once",    "only",     "or",     "other",     "our",        "ours",
      "ourselves", "out",   "over",     "own",    "same",      "she",        "should",
      "so",      "some",    "such",     "than",   "that",      "the",        "their",
      "theirs",  "them",    "themselves", "then", "there",     "these",      "they",
      "this",    "those",   "through",  "to",     "too",       "under",      "until",
      "up",      "very",    "was",      "we",     "were",      "what",       "when",
      "where",   "which",   "while",    "who",    "whom",      "why",        "will",
      "with",    "would",   "you",      "your",   "yours",     "yourself",   "yourselves",
  };
  return set;
}

inline bool is_attackable(const Token& token, const StopwordSet& stopwords) {
  return token.alphabetic() && token.surface.size() >= 2 && !stopwords.contains(token.normalized);
}

/// Splits `text` into word, number, and symbol tokens whose spans index the
/// original bytes. Words are maximal letter runs with internal apostrophes;
/// every punctuation byte is its own token; whitespace separates tokens.
inline Document tokenize(std::string_view text, const StopwordSet& stopwords = default_stopwords()) {
  using namespace detail;
  Document doc;
  doc.source.assign(text);
  const std::size_t n = text.size();
  auto byte = [&](std::size_t i) { return static_cast<unsigned char>(text[i]); };

  std::size_t i = 0;
  while (i < n) {
    const unsigned char c = byte(i);
    if (is_space(c)) {
      ++i;
      continue;
    }
    Token tok;
    std::size_t j = i + 1;
    if (is_word_byte(c)) {
      tok.kind = TokenKind::word;
      while (j < n) {
        if (is_word_byte(byte(j))) {
          ++j;
        } else if (byte(j) == '\'' && j + 1 < n && is_word_byte(byte(j + 1))) {
          j += 2;
        } else {
          break;
        }
      }
    } else if (is_ascii_digit(c)) {
      tok.kind = TokenKind::number;
      while (j < n && is_ascii_digit(byte(j))) ++j;
    } else {
      tok.kind = TokenKind::symbol;
    }
    tok.span = {i, j};
    tok.surface.assign(text.substr(i, j - i));
    tok.normalized = to_lower_ascii(tok.surface);
    tok.attackable = is_attackable(tok, stopwords);
    doc.tokens.push_back(std::move(tok));
    i = j;
  }
  return doc;
}

/// Replaces the span of each substituted token with its replacement surface.
/// Bytes outside substituted spans are copied verbatim.
inline std::string splice(const Document& doc, std::span<const Substitution> subs) {
  std::vector<const Substitution*> order;
  order.reserve(subs.size());
  for (const auto& s : subs) {
    if (s.position >= doc.tokens.size()) {
      throw UsageError("substitution position " + std::to_string(s.position) + " out of range (" +
                       std::to_string(doc.tokens.size()) + " tokens)");
    }
    order.push_back(&s);
  }
  std::sort(order.begin(), order.end(),
            [](const Substitution* a, const Substitution* b) { return a->position < b->position; });
  for (std::size_t k = 1; k < order.size(); ++k) {
    if (order[k]->position == order[k - 1]->position) {
      throw UsageError("duplicate substitution position " + std::to_string(order[k]->position));
    }
  }

  std::string out;
  out.reserve(doc.source.size() + 16 * order.size());
  std::size_t cursor = 0;
  for (const Substitution* s : order) {
    const Span& span = doc.tokens[s->position].span;
    out.append(doc.source, cursor, span.begin - cursor);
    out.append(s->replacement_surface);
    cursor = span.end;
  }
  out.append(doc.source, cursor, std::string::npos);
  return out;
}

inline std::string splice(const Document& doc, std::initializer_list<Substitution> subs) {
  return splice(doc, std::span<const Substitution>(subs.begin(), subs.size()));
}

/// Carries the capitalization pattern of `original` over to `replacement`.
inline std::string transfer_case(std::string_view original, std::string_view replacement) {
  std::string out(replacement);
  std::size_t letters = 0, upper = 0;
  for (char c : original) {
    if (detail::is_ascii_letter(static_cast<unsigned char>(c))) {
      ++letters;
      if (c >= 'A' && c <= 'Z') ++upper;
    }
  }
  if (letters >= 2 && upper == letters) {
    std::transform(out.begin(), out.end(), out.begin(), detail::ascii_upper);
  } else if (!original.empty() && original.front() >= 'A' && original.front() <= 'Z' && !out.empty()) {
    out.front() = detail::ascii_upper(out.front());
  }
  return out;
}

inline std::size_t count_alphabetic(const Document& doc) {
  return static_cast<std::size_t>(
      std::count_if(doc.tokens.begin(), doc.tokens.end(), [](const Token& t) { return t.alphabetic(); }));
}

inline std::size_t count_attackable(const Document& doc) {
  return static_cast<std::size_t>(
      std::count_if(doc.tokens.begin(), doc.tokens.end(), [](const Token& t) { return t.attackable; }));
}

}  // namespace advtext

#endif  // ADVTEXT_TEXT_HPP
