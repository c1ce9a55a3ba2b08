#ifndef ADVTEXT_EMBEDDING_HPP
#define ADVTEXT_EMBEDDING_HPP

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "advtext/error.hpp"
#include "advtext/text.hpp"

namespace advtext {

using Vector = std::vector<double>;

/// Parameters of the static contextual approximation.
struct ContextParams {
  std::size_t window = 3;  // tokens on each side
  double gamma = 0.5;      // weight of the context mean

  void validate() const {
    if (!(gamma >= 0.0 && gamma <= 1.0)) throw UsageError("context gamma must lie in [0, 1]");
  }
};

/// Lowercase token -> fixed-dimension vector. Immutable after loading.
class EmbeddingStore {
 public:
  explicit EmbeddingStore(std::size_t dim = 0) : dim_(dim) {}

  /// Reads a GloVe / word2vec-text file. A first line holding exactly two
  /// integers (`count dim`) is treated as a header.
  static EmbeddingStore load(const std::filesystem::path& path);

  /// Inserts a vector; returns false (and keeps the existing entry) when the
  /// token is already present.
  bool add(std::string_view token, Vector v) {
    if (dim_ == 0) dim_ = v.size();
    if (v.size() != dim_ || dim_ == 0) {
      throw UsageError("vector for '" + std::string(token) + "' has " + std::to_string(v.size()) +
                       " components, expected " + std::to_string(dim_));
    }
    for (double x : v) {
      if (!std::isfinite(x)) throw UsageError("non-finite component in vector for '" + std::string(token) + "'");
    }
    return table_.emplace(to_lower_ascii(token), std::move(v)).second;
  }

  const Vector* find(std::string_view token) const {
    auto it = table_.find(std::string(token));
    return it == table_.end() ? nullptr : &it->second;
  }

  bool contains(std::string_view token) const { return find(token) != nullptr; }
  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return table_.size(); }

 private:
  std::size_t dim_;
  std::unordered_map<std::string, Vector> table_;
};

inline EmbeddingStore EmbeddingStore::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open embedding file: " + path.string());
  const std::string name = path.filename().string();

  EmbeddingStore store;
  std::string line;
  std::size_t lineno = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string_view> fields;
    {
      std::string_view rest = line;
      while (!rest.empty()) {
        auto b = rest.find_first_not_of(" \t");
        if (b == std::string_view::npos) break;
        rest.remove_prefix(b);
        auto e = rest.find_first_of(" \t");
        fields.push_back(rest.substr(0, e));
        rest.remove_prefix(e == std::string_view::npos ? rest.size() : e);
      }
    }
    if (fields.empty()) continue;

    if (first) {
      first = false;
      std::size_t count = 0, dim = 0;
      auto is_uint = [](std::string_view s, std::size_t& v) {
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        return ec == std::errc() && p == s.data() + s.size();
      };
      if (fields.size() == 2 && is_uint(fields[0], count) && is_uint(fields[1], dim)) {
        if (dim == 0) throw ParseError(name, lineno, "header declares zero dimensions");
        store.dim_ = dim;
        continue;
      }
    }

    if (fields.size() < 2) throw ParseError(name, lineno, "line has no vector components");
    const std::size_t components = fields.size() - 1;
    if (store.dim_ != 0 && components != store.dim_) {
      throw ParseError(name, lineno,
                       "expected " + std::to_string(store.dim_) + " components, found " + std::to_string(components));
    }
    Vector v(components);
    for (std::size_t k = 0; k < components; ++k) {
      const auto f = fields[k + 1];
      auto [p, ec] = std::from_chars(f.data(), f.data() + f.size(), v[k]);
      if (ec != std::errc() || p != f.data() + f.size() || !std::isfinite(v[k])) {
        throw ParseError(name, lineno, "non-numeric component '" + std::string(f) + "'");
      }
    }
    store.add(fields[0], std::move(v));
  }
  if (store.size() == 0) throw LoadError("embedding file holds no vectors: " + path.string());
  return store;
}

/// dot(u, v) / (|u| |v|), or 0 when either norm is zero.
inline double cosine(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) {
    throw UsageError("cosine of vectors with " + std::to_string(u.size()) + " and " + std::to_string(v.size()) +
                     " components");
  }
  double dot = 0.0, nu = 0.0, nv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    nu += u[i] * u[i];
    nv += v[i] * v[i];
  }
  if (nu == 0.0 || nv == 0.0) return 0.0;
  return std::clamp(dot / std::sqrt(nu * nv), -1.0, 1.0);
}

/// Mean vector of the in-vocabulary alphabetic tokens; zero when none match.
inline Vector sentence_vector(const EmbeddingStore& store, std::span<const Token> tokens) {
  Vector sum(store.dim(), 0.0);
  std::size_t n = 0;
  for (const auto& t : tokens) {
    if (!t.alphabetic()) continue;
    if (const Vector* v = store.find(t.normalized)) {
      for (std::size_t k = 0; k < sum.size(); ++k) sum[k] += (*v)[k];
      ++n;
    }
  }
  if (n > 0) {
    for (double& x : sum) x /= static_cast<double>(n);
  }
  return sum;
}

inline double sentence_similarity(const EmbeddingStore& store, std::span<const Token> a, std::span<const Token> b) {
  return cosine(sentence_vector(store, a), sentence_vector(store, b));
}

/// (1 - gamma) * w + gamma * c, where w is the vector of the word at `index`
/// (or `candidate` in its place) and c the mean of in-vocabulary alphabetic
/// tokens within `window` positions on either side. Zero when w is OOV.
inline Vector contextual_vector(const EmbeddingStore& store, const Document& doc, std::size_t index,
                                std::optional<std::string_view> candidate, const ContextParams& params) {
  if (index >= doc.tokens.size()) {
    throw UsageError("token index " + std::to_string(index) + " out of range (" +
                     std::to_string(doc.tokens.size()) + " tokens)");
  }
  Vector out(store.dim(), 0.0);
  const Vector* word =
      candidate ? store.find(to_lower_ascii(*candidate)) : store.find(doc.tokens[index].normalized);
  if (!word) return out;

  Vector context(store.dim(), 0.0);
  std::size_t n = 0;
  const std::size_t lo = index >= params.window ? index - params.window : 0;
  const std::size_t hi = std::min(doc.tokens.size() - 1, index + params.window);
  for (std::size_t j = lo; j <= hi; ++j) {
    if (j == index || !doc.tokens[j].alphabetic()) continue;
    if (const Vector* v = store.find(doc.tokens[j].normalized)) {
      for (std::size_t k = 0; k < context.size(); ++k) context[k] += (*v)[k];
      ++n;
    }
  }
  const double g = params.gamma;
  for (std::size_t k = 0; k < out.size(); ++k) {
    const double c = n > 0 ? context[k] / static_cast<double>(n) : 0.0;
    out[k] = (1.0 - g) * (*word)[k] + g * c;
  }
  return out;
}

/// Source of context-aware vectors used to judge how well a candidate fits
/// at a position.
class ContextEncoder {
 public:
  virtual ~ContextEncoder() = default;
  virtual Vector encode(const Document& doc, std::size_t index, std::optional<std::string_view> candidate) const = 0;
};

/// Static word vectors mixed with a window mean.
class StaticContextEncoder final : public ContextEncoder {
 public:
  StaticContextEncoder(const EmbeddingStore& store, ContextParams params) : store_(store), params_(params) {
    params_.validate();
  }

  Vector encode(const Document& doc, std::size_t index, std::optional<std::string_view> candidate) const override {
    return contextual_vector(store_, doc, index, candidate, params_);
  }

 private:
  const EmbeddingStore& store_;
  ContextParams params_;
};

}  // namespace advtext

#endif  // ADVTEXT_EMBEDDING_HPP
