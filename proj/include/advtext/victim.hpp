#ifndef ADVTEXT_VICTIM_HPP
#define ADVTEXT_VICTIM_HPP

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "advtext/error.hpp"
#include "advtext/text.hpp"

namespace advtext {

/// Probabilities over a victim's fixed label order.
struct ProbDist {
  std::vector<std::string> labels;
  std::vector<double> probs;

  /// Index of the most probable label; the lowest index wins ties.
  std::size_t argmax() const {
    return static_cast<std::size_t>(std::max_element(probs.begin(), probs.end()) - probs.begin());
  }
  const std::string& top_label() const { return labels.at(argmax()); }

  double prob(std::string_view label) const {
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == label) return probs[i];
    }
    throw UsageError("unknown label '" + std::string(label) + "'");
  }

  /// Checks shape, range, and normalization (sum within `tol` of 1).
  bool valid(double tol = 1e-6) const {
    if (labels.empty() || labels.size() != probs.size()) return false;
    double sum = 0.0;
    for (double p : probs) {
      if (!(p >= 0.0 && p <= 1.0)) return false;
      sum += p;
    }
    return std::abs(sum - 1.0) <= tol;
  }

  friend bool operator==(const ProbDist&, const ProbDist&) = default;
};

/// Black-box classifier. Implementations must allow concurrent calls.
class Victim {
 public:
  virtual ~Victim() = default;
  virtual const std::vector<std::string>& labels() const = 0;
  virtual ProbDist predict_proba(std::string_view text) const = 0;

  virtual std::vector<ProbDist> predict_batch(std::span<const std::string> texts) const {
    std::vector<ProbDist> out;
    out.reserve(texts.size());
    for (const auto& t : texts) out.push_back(predict_proba(t));
    return out;
  }
};

/// Transparent wrapper counting one query per text, failed calls included.
class CountedVictim final : public Victim {
 public:
  explicit CountedVictim(const Victim& inner) : inner_(inner) {}

  const std::vector<std::string>& labels() const override { return inner_.labels(); }

  ProbDist predict_proba(std::string_view text) const override {
    count_.fetch_add(1, std::memory_order_relaxed);
    return inner_.predict_proba(text);
  }

  std::vector<ProbDist> predict_batch(std::span<const std::string> texts) const override {
    count_.fetch_add(texts.size(), std::memory_order_relaxed);
    return inner_.predict_batch(texts);
  }

  std::size_t count() const noexcept { return count_.load(std::memory_order_relaxed); }
  void reset() noexcept { count_.store(0, std::memory_order_relaxed); }

 private:
  const Victim& inner_;
  mutable std::atomic<std::size_t> count_{0};
};

/// Multinomial naive Bayes over lowercased token counts with additive
/// smoothing. The vocabulary always contains `<unk>` with zero counts; any
/// token unseen in training is scored as `<unk>`.
class NaiveBayes final : public Victim {
 public:
  static constexpr std::string_view kUnk = "<unk>";

  struct Example {
    std::string text;
    std::string label;
  };

  static NaiveBayes train(std::span<const Example> corpus, double smoothing = 1.0) {
    if (!(smoothing > 0.0) || !std::isfinite(smoothing)) throw TrainingError("smoothing must be positive");
    std::set<std::string> label_set;
    for (const auto& ex : corpus) label_set.insert(ex.label);
    if (label_set.size() < 2) {
      throw TrainingError("naive Bayes needs at least two distinct labels, corpus has " +
                          std::to_string(label_set.size()));
    }
    NaiveBayes nb;
    nb.smoothing_ = smoothing;
    nb.labels_.assign(label_set.begin(), label_set.end());
    nb.doc_counts_.assign(nb.labels_.size(), 0);
    nb.counts_[std::string(kUnk)].assign(nb.labels_.size(), 0);
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      const auto feats = features(corpus[i].text);
      if (feats.empty()) throw TrainingError("training document " + std::to_string(i) + " has no tokens");
      const std::size_t c = nb.label_index(corpus[i].label);
      ++nb.doc_counts_[c];
      for (const auto& f : feats) {
        if (f == kUnk) continue;
        auto& row = nb.counts_[f];
        if (row.empty()) row.assign(nb.labels_.size(), 0);
        ++row[c];
      }
    }
    nb.finalize();
    return nb;
  }

  const std::vector<std::string>& labels() const override { return labels_; }

  ProbDist predict_proba(std::string_view text) const override {
    std::vector<double> logp = log_prior_;
    for (const auto& f : features(text)) {
      auto it = counts_.find(f);
      const auto& row = it == counts_.end() ? counts_.at(std::string(kUnk)) : it->second;
      for (std::size_t c = 0; c < labels_.size(); ++c) {
        logp[c] += std::log(static_cast<double>(row[c]) + smoothing_) - log_denominator_[c];
      }
    }
    const double mx = *std::max_element(logp.begin(), logp.end());
    double z = 0.0;
    for (double& v : logp) {
      v = std::exp(v - mx);
      z += v;
    }
    for (double& v : logp) v /= z;
    return ProbDist{labels_, std::move(logp)};
  }

  /// Lowercased tokens; the literal `<unk>` becomes a single feature.
  static std::vector<std::string> features(std::string_view text) {
    const Document doc = tokenize(text, StopwordSet{});
    std::vector<std::string> out;
    out.reserve(doc.tokens.size());
    const auto& t = doc.tokens;
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (i + 2 < t.size() && t[i].surface == "<" && t[i + 1].normalized == "unk" && t[i + 2].surface == ">" &&
          t[i].span.end == t[i + 1].span.begin && t[i + 1].span.end == t[i + 2].span.begin) {
        out.emplace_back(kUnk);
        i += 2;
        continue;
      }
      out.push_back(t[i].normalized);
    }
    return out;
  }

  double smoothing() const noexcept { return smoothing_; }
  std::size_t vocabulary_size() const noexcept { return counts_.size(); }

  /// Count of `token` under `label` (0 when unseen).
  std::uint64_t count(std::string_view token, std::string_view label) const {
    auto it = counts_.find(std::string(token));
    return it == counts_.end() ? 0 : it->second[label_index(label)];
  }

  /// Flat text model: header, label priors as document counts, then one
  /// tab-separated row of per-label counts per token in sorted order.
  std::string serialize() const {
    std::ostringstream out;
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, smoothing_);
    out << "advtext-naive-bayes 1\n";
    out << "smoothing " << std::string_view(buf, static_cast<std::size_t>(end - buf)) << "\n";
    out << "labels " << labels_.size() << "\n";
    for (std::size_t c = 0; c < labels_.size(); ++c) out << labels_[c] << '\t' << doc_counts_[c] << '\n';
    std::map<std::string_view, const std::vector<std::uint64_t>*> sorted;
    for (const auto& [tok, row] : counts_) sorted.emplace(tok, &row);
    out << "vocab " << sorted.size() << "\n";
    for (const auto& [tok, row] : sorted) {
      out << tok;
      for (auto n : *row) out << '\t' << n;
      out << '\n';
    }
    return out.str();
  }

  static NaiveBayes deserialize(std::string_view text, const std::string& name = "<model>");

  void save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw LoadError("cannot write model file: " + path.string());
    out << serialize();
    if (!out) throw LoadError("failed writing model file: " + path.string());
  }

  static NaiveBayes load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw LoadError("cannot open model file: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return deserialize(buf.str(), path.filename().string());
  }

 private:
  NaiveBayes() = default;

  std::size_t label_index(std::string_view label) const {
    auto it = std::lower_bound(labels_.begin(), labels_.end(), label);
    if (it == labels_.end() || *it != label) throw UsageError("unknown label '" + std::string(label) + "'");
    return static_cast<std::size_t>(it - labels_.begin());
  }

  void finalize() {
    const std::size_t k = labels_.size();
    std::vector<std::uint64_t> totals(k, 0);
    for (const auto& [tok, row] : counts_) {
      for (std::size_t c = 0; c < k; ++c) totals[c] += row[c];
    }
    std::uint64_t docs = 0;
    for (auto d : doc_counts_) docs += d;
    const double vocab = static_cast<double>(counts_.size());
    log_prior_.assign(k, 0.0);
    log_denominator_.assign(k, 0.0);
    for (std::size_t c = 0; c < k; ++c) {
      log_prior_[c] = std::log(static_cast<double>(doc_counts_[c])) - std::log(static_cast<double>(docs));
      log_denominator_[c] = std::log(static_cast<double>(totals[c]) + smoothing_ * vocab);
    }
  }

  std::vector<std::string> labels_;
  std::vector<std::uint64_t> doc_counts_;
  std::unordered_map<std::string, std::vector<std::uint64_t>> counts_;
  double smoothing_ = 1.0;
  std::vector<double> log_prior_;
  std::vector<double> log_denominator_;
};

inline NaiveBayes NaiveBayes::deserialize(std::string_view text, const std::string& name) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  auto next = [&]() -> std::string& {
    if (!std::getline(in, line)) throw ParseError(name, lineno + 1, "unexpected end of model");
    ++lineno;
    return line;
  };
  auto split = [](const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : s) {
      if (ch == sep) {
        out.push_back(std::move(cur));
        cur.clear();
      } else {
        cur.push_back(ch);
      }
    }
    out.push_back(std::move(cur));
    return out;
  };
  auto to_u64 = [&](const std::string& s) {
    std::uint64_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) throw ParseError(name, lineno, "bad integer '" + s + "'");
    return v;
  };

  if (next() != "advtext-naive-bayes 1") throw ParseError(name, lineno, "not a naive Bayes model file");
  NaiveBayes nb;
  {
    auto f = split(next(), ' ');
    if (f.size() != 2 || f[0] != "smoothing") throw ParseError(name, lineno, "expected smoothing");
    auto [p, ec] = std::from_chars(f[1].data(), f[1].data() + f[1].size(), nb.smoothing_);
    if (ec != std::errc() || p != f[1].data() + f[1].size() || !(nb.smoothing_ > 0.0) ||
        !std::isfinite(nb.smoothing_)) {
      throw ParseError(name, lineno, "bad smoothing value");
    }
  }
  auto f = split(next(), ' ');
  if (f.size() != 2 || f[0] != "labels") throw ParseError(name, lineno, "expected label count");
  const auto k = to_u64(f[1]);
  if (k < 2) throw ParseError(name, lineno, "model needs at least two labels");
  for (std::uint64_t c = 0; c < k; ++c) {
    auto row = split(next(), '\t');
    if (row.size() != 2) throw ParseError(name, lineno, "expected label and document count");
    if (!nb.labels_.empty() && !(nb.labels_.back() < row[0])) throw ParseError(name, lineno, "labels not sorted");
    nb.labels_.push_back(row[0]);
    nb.doc_counts_.push_back(to_u64(row[1]));
    if (nb.doc_counts_.back() == 0) throw ParseError(name, lineno, "label without training documents");
  }
  f = split(next(), ' ');
  if (f.size() != 2 || f[0] != "vocab") throw ParseError(name, lineno, "expected vocabulary size");
  const auto v = to_u64(f[1]);
  for (std::uint64_t i = 0; i < v; ++i) {
    auto row = split(next(), '\t');
    if (row.size() != k + 1) throw ParseError(name, lineno, "expected token and " + std::to_string(k) + " counts");
    std::vector<std::uint64_t> counts;
    for (std::size_t c = 0; c < k; ++c) counts.push_back(to_u64(row[c + 1]));
    if (!nb.counts_.emplace(row[0], std::move(counts)).second) {
      throw ParseError(name, lineno, "duplicate token '" + row[0] + "'");
    }
  }
  if (!nb.counts_.count(std::string(kUnk))) throw ParseError(name, lineno, "vocabulary lacks <unk>");
  nb.finalize();
  return nb;
}

}  // namespace advtext

#endif  // ADVTEXT_VICTIM_HPP
