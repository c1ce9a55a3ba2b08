#ifndef ADVTEXT_WORDNET_HPP
#define ADVTEXT_WORDNET_HPP

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "advtext/error.hpp"
#include "advtext/text.hpp"

namespace advtext {

enum class PosTag { noun = 0, verb = 1, adjective = 2, adverb = 3 };

inline constexpr std::array<PosTag, 4> kAllPos{PosTag::noun, PosTag::verb, PosTag::adjective,
                                               PosTag::adverb};

/// File-name suffix used by the WordNet database ("noun", "verb", "adj", "adv").
constexpr std::string_view pos_file_name(PosTag pos) {
  switch (pos) {
    case PosTag::noun: return "noun";
    case PosTag::verb: return "verb";
    case PosTag::adjective: return "adj";
    case PosTag::adverb: return "adv";
  }
  return "";
}

constexpr char pos_letter(PosTag pos) {
  switch (pos) {
    case PosTag::noun: return 'n';
    case PosTag::verb: return 'v';
    case PosTag::adjective: return 'a';
    case PosTag::adverb: return 'r';
  }
  return '?';
}

inline bool is_multiword(std::string_view lemma) { return lemma.find('_') != std::string_view::npos; }

/// In-memory Princeton WordNet: per part of speech, the lemma index, the
/// synset member lists, and the morphological exception lists. Immutable
/// once loaded; all queries are const and thread-safe.
class LexicalDb {
 public:
  using Offset = std::uint32_t;

  LexicalDb() = default;

  /// Parses `index.*`, `data.*` and `*.exc` for all four parts of speech.
  static LexicalDb load(const std::filesystem::path& dir);

  /// Programmatic construction: registers a synset and indexes its members.
  void add_synset(PosTag pos, Offset offset, std::vector<std::string> lemmas) {
    auto& part = parts_[idx(pos)];
    for (auto& l : lemmas) {
      l = to_lower_ascii(l);
      auto& offs = part.index[l];
      if (std::find(offs.begin(), offs.end(), offset) == offs.end()) offs.push_back(offset);
    }
    part.synsets[offset] = std::move(lemmas);
  }

  void add_exception(PosTag pos, std::string inflected, std::vector<std::string> bases) {
    auto& list = parts_[idx(pos)].exceptions[std::move(inflected)];
    list.insert(list.end(), bases.begin(), bases.end());
  }

  bool indexed(std::string_view lemma, PosTag pos) const {
    return parts_[idx(pos)].index.count(std::string(lemma)) != 0;
  }

  std::span<const Offset> synset_offsets(std::string_view lemma, PosTag pos) const {
    const auto& index = parts_[idx(pos)].index;
    auto it = index.find(std::string(lemma));
    if (it == index.end()) return {};
    return it->second;
  }

  /// Member lemmas of a synset, or nullptr if the offset is unknown.
  const std::vector<std::string>* synset(PosTag pos, Offset offset) const {
    const auto& synsets = parts_[idx(pos)].synsets;
    auto it = synsets.find(offset);
    return it == synsets.end() ? nullptr : &it->second;
  }

  std::size_t synset_count(PosTag pos) const { return parts_[idx(pos)].synsets.size(); }
  std::size_t lemma_count(PosTag pos) const { return parts_[idx(pos)].index.size(); }

  /// All indexed lemmas for `pos`, sorted.
  std::vector<std::string> lemmas(PosTag pos) const {
    std::vector<std::string> out;
    out.reserve(parts_[idx(pos)].index.size());
    for (const auto& [lemma, offs] : parts_[idx(pos)].index) out.push_back(lemma);
    std::sort(out.begin(), out.end());
    return out;
  }

  /// Morphy-style base forms of `surface` that are indexed under `pos`.
  std::set<std::string> lemmatize(std::string_view surface, PosTag pos) const {
    const auto& part = parts_[idx(pos)];
    std::vector<std::string> forms{std::string(surface)};
    if (auto it = part.exceptions.find(std::string(surface)); it != part.exceptions.end()) {
      forms.insert(forms.end(), it->second.begin(), it->second.end());
    } else {
      for (const auto& [suffix, ending] : detachment_rules(pos)) {
        if (surface.size() > suffix.size() && surface.ends_with(suffix)) {
          std::string base(surface.substr(0, surface.size() - suffix.size()));
          base += ending;
          forms.push_back(std::move(base));
        }
      }
    }
    std::set<std::string> out;
    for (auto& f : forms) {
      if (part.index.count(f)) out.insert(std::move(f));
    }
    return out;
  }

  /// Members of every synset containing `lemma`, across all parts of speech,
  /// minus the lemma itself.
  std::set<std::string> synonyms(std::string_view lemma, bool include_multiword = false) const {
    std::set<std::string> out;
    for (PosTag pos : kAllPos) {
      for (Offset off : synset_offsets(lemma, pos)) {
        const auto* members = synset(pos, off);
        if (!members) continue;
        for (const auto& m : *members) {
          if (m == lemma) continue;
          if (!include_multiword && is_multiword(m)) continue;
          out.insert(m);
        }
      }
    }
    return out;
  }

  friend bool operator==(const LexicalDb& a, const LexicalDb& b) {
    for (std::size_t i = 0; i < 4; ++i) {
      if (a.parts_[i].index != b.parts_[i].index || a.parts_[i].synsets != b.parts_[i].synsets ||
          a.parts_[i].exceptions != b.parts_[i].exceptions) {
        return false;
      }
    }
    return true;
  }

 private:
  struct Part {
    std::unordered_map<std::string, std::vector<Offset>> index;
    std::unordered_map<Offset, std::vector<std::string>> synsets;
    std::unordered_map<std::string, std::vector<std::string>> exceptions;
  };

  static std::size_t idx(PosTag pos) { return static_cast<std::size_t>(pos); }

  static std::span<const std::pair<std::string_view, std::string_view>> detachment_rules(PosTag pos) {
    static constexpr std::pair<std::string_view, std::string_view> noun[] = {
        {"s", ""}, {"ses", "s"}, {"xes", "x"}, {"zes", "z"}, {"ches", "ch"}, {"shes", "sh"}, {"ies", "y"}};
    static constexpr std::pair<std::string_view, std::string_view> verb[] = {
        {"s", ""},  {"ies", "y"}, {"es", "e"},  {"es", ""},
        {"ed", "e"}, {"ed", ""},  {"ing", "e"}, {"ing", ""}};
    static constexpr std::pair<std::string_view, std::string_view> adj[] = {
        {"er", ""}, {"est", ""}, {"er", "e"}, {"est", "e"}};
    switch (pos) {
      case PosTag::noun: return noun;
      case PosTag::verb: return verb;
      case PosTag::adjective: return adj;
      case PosTag::adverb: return {};
    }
    return {};
  }

  std::array<Part, 4> parts_;
};

namespace detail {

inline std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

template <typename Int>
bool parse_int(std::string_view s, Int& value, int base = 10) {
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value, base);
  return ec == std::errc() && ptr == s.data() + s.size();
}

inline std::ifstream open_wordnet_file(const std::filesystem::path& dir, const std::string& name) {
  const auto path = dir / name;
  std::ifstream in(path);
  if (!in) throw LoadError("missing WordNet file: " + name + " (looked in " + dir.string() + ")");
  return in;
}

// Data-file words may carry an adjective marker such as "(a)", "(p)", "(ip)".
inline std::string strip_adj_marker(std::string_view word) {
  if (!word.empty() && word.back() == ')') {
    auto open = word.rfind('(');
    if (open != std::string_view::npos && open > 0) word = word.substr(0, open);
  }
  return to_lower_ascii(word);
}

}  // namespace detail

inline LexicalDb LexicalDb::load(const std::filesystem::path& dir) {
  using detail::parse_int;
  using detail::split_fields;

  // Open everything first so a missing file is reported before any parsing.
  struct Files {
    std::ifstream index, data, exc;
  };
  std::array<Files, 4> files;
  for (PosTag pos : kAllPos) {
    const std::string suffix(pos_file_name(pos));
    auto& f = files[idx(pos)];
    f.index = detail::open_wordnet_file(dir, "index." + suffix);
    f.data = detail::open_wordnet_file(dir, "data." + suffix);
    f.exc = detail::open_wordnet_file(dir, suffix + ".exc");
  }

  LexicalDb db;
  for (PosTag pos : kAllPos) {
    const std::string suffix(pos_file_name(pos));
    auto& part = db.parts_[idx(pos)];
    auto& f = files[idx(pos)];

    // data.<pos>: offset lex_filenum ss_type w_cnt word lex_id [word lex_id]... p_cnt ...
    const std::string data_name = "data." + suffix;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(f.data, line)) {
      ++lineno;
      if (line.empty() || line[0] == ' ') continue;
      std::string_view body = line;
      if (auto bar = body.find(" | "); bar != std::string_view::npos) body = body.substr(0, bar);
      const auto fields = split_fields(body);
      Offset offset = 0;
      unsigned w_cnt = 0;
      if (fields.size() < 5 || fields[0].size() != 8 || !parse_int(fields[0], offset)) {
        throw ParseError(data_name, lineno, "malformed synset offset");
      }
      const char ss_type = fields[2].size() == 1 ? fields[2][0] : '?';
      const bool type_ok = ss_type == pos_letter(pos) || (pos == PosTag::adjective && ss_type == 's');
      if (!type_ok) throw ParseError(data_name, lineno, "unexpected synset type '" + std::string(fields[2]) + "'");
      if (!parse_int(fields[3], w_cnt, 16) || w_cnt == 0) {
        throw ParseError(data_name, lineno, "malformed word count");
      }
      if (fields.size() < 4 + 2 * static_cast<std::size_t>(w_cnt) + 1) {
        throw ParseError(data_name, lineno, "truncated word list");
      }
      std::vector<std::string> members;
      members.reserve(w_cnt);
      for (unsigned k = 0; k < w_cnt; ++k) {
        members.push_back(detail::strip_adj_marker(fields[4 + 2 * k]));
      }
      if (!part.synsets.emplace(offset, std::move(members)).second) {
        throw ParseError(data_name, lineno, "duplicate synset offset");
      }
    }

    // index.<pos>: lemma pos synset_cnt p_cnt [ptr_symbol]... sense_cnt tagsense_cnt offset...
    const std::string index_name = "index." + suffix;
    lineno = 0;
    while (std::getline(f.index, line)) {
      ++lineno;
      if (line.empty() || line[0] == ' ') continue;
      const auto fields = split_fields(line);
      std::size_t synset_cnt = 0, p_cnt = 0;
      if (fields.size() < 6 || !parse_int(fields[2], synset_cnt) || !parse_int(fields[3], p_cnt)) {
        throw ParseError(index_name, lineno, "malformed index entry");
      }
      if (fields[1].size() != 1 || fields[1][0] != pos_letter(pos)) {
        throw ParseError(index_name, lineno, "part of speech does not match file");
      }
      const std::size_t first = 4 + p_cnt + 2;
      if (fields.size() < first + synset_cnt) throw ParseError(index_name, lineno, "truncated offset list");
      std::vector<Offset> offsets;
      offsets.reserve(synset_cnt);
      for (std::size_t k = 0; k < synset_cnt; ++k) {
        Offset off = 0;
        if (fields[first + k].size() != 8 || !parse_int(fields[first + k], off)) {
          throw ParseError(index_name, lineno, "malformed synset offset");
        }
        if (!part.synsets.count(off)) {
          throw ParseError(index_name, lineno,
                           "offset " + std::string(fields[first + k]) + " not found in " + data_name);
        }
        offsets.push_back(off);
      }
      part.index[to_lower_ascii(fields[0])] = std::move(offsets);
    }

    // <pos>.exc: inflected base [base...]
    const std::string exc_name = suffix + ".exc";
    lineno = 0;
    while (std::getline(f.exc, line)) {
      ++lineno;
      const auto fields = split_fields(line);
      if (fields.empty()) continue;
      if (fields.size() < 2) throw ParseError(exc_name, lineno, "exception entry without base form");
      auto& bases = part.exceptions[std::string(fields[0])];
      for (std::size_t k = 1; k < fields.size(); ++k) bases.emplace_back(fields[k]);
    }
  }
  return db;
}

}  // namespace advtext

#endif  // ADVTEXT_WORDNET_HPP
