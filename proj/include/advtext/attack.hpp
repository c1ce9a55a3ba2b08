#ifndef ADVTEXT_ATTACK_HPP
#define ADVTEXT_ATTACK_HPP

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "advtext/embedding.hpp"
#include "advtext/error.hpp"
#include "advtext/text.hpp"
#include "advtext/victim.hpp"
#include "advtext/wordnet.hpp"

namespace advtext {

enum class Method { pwws, mwsaa };
enum class Selection { deterministic, randomized };

/// How MWSAA picks among candidates that clear the similarity threshold.
enum class MwsaaStrategy {
  similarity_argmax,  // highest sentence similarity
  max_drop,           // highest probability drop
};

enum class AttackStatus { success, failed_exhausted, budget_exhausted, skipped_nothing_attackable, query_error };

constexpr std::string_view to_string(Method m) { return m == Method::pwws ? "pwws" : "mwsaa"; }
constexpr std::string_view to_string(Selection s) {
  return s == Selection::deterministic ? "deterministic" : "randomized";
}
constexpr std::string_view to_string(MwsaaStrategy s) {
  return s == MwsaaStrategy::similarity_argmax ? "similarity_argmax" : "max_drop";
}
constexpr std::string_view to_string(AttackStatus s) {
  switch (s) {
    case AttackStatus::success: return "success";
    case AttackStatus::failed_exhausted: return "failed_exhausted";
    case AttackStatus::budget_exhausted: return "budget_exhausted";
    case AttackStatus::skipped_nothing_attackable: return "skipped_nothing_attackable";
    case AttackStatus::query_error: return "query_error";
  }
  return "";
}

inline Method parse_method(std::string_view s) {
  if (s == "pwws") return Method::pwws;
  if (s == "mwsaa") return Method::mwsaa;
  throw UsageError("unknown method '" + std::string(s) + "'");
}
inline Selection parse_selection(std::string_view s) {
  if (s == "deterministic") return Selection::deterministic;
  if (s == "randomized") return Selection::randomized;
  throw UsageError("unknown selection '" + std::string(s) + "'");
}
inline MwsaaStrategy parse_mwsaa_strategy(std::string_view s) {
  if (s == "similarity_argmax") return MwsaaStrategy::similarity_argmax;
  if (s == "max_drop") return MwsaaStrategy::max_drop;
  throw UsageError("unknown MWSAA strategy '" + std::string(s) + "'");
}
inline AttackStatus parse_status(std::string_view s) {
  for (auto st : {AttackStatus::success, AttackStatus::failed_exhausted, AttackStatus::budget_exhausted,
                  AttackStatus::skipped_nothing_attackable, AttackStatus::query_error}) {
    if (to_string(st) == s) return st;
  }
  throw UsageError("unknown attack status '" + std::string(s) + "'");
}

struct AttackConfig {
  Method method = Method::pwws;
  Selection selection = Selection::deterministic;  // pwws only
  MwsaaStrategy mwsaa_strategy = MwsaaStrategy::similarity_argmax;
  std::size_t top_k = 5;
  double sim_threshold = 0.80;
  double alpha = 1.0;
  double beta = 1.0;
  double feedback_lambda = 1.0;
  ContextParams context;
  std::uint64_t seed = 42;
  std::size_t query_budget = 1000;
  std::string unk_token = "<unk>";

  void validate() const {
    if (top_k < 1) throw UsageError("top_k must be at least 1");
    if (!(sim_threshold >= 0.0 && sim_threshold <= 1.0)) throw UsageError("sim_threshold must lie in [0, 1]");
    if (!(alpha >= 0.0) || !(beta >= 0.0)) throw UsageError("alpha and beta must be non-negative");
    if (!(feedback_lambda >= 0.0)) throw UsageError("feedback_lambda must be non-negative");
    if (query_budget < 1) throw UsageError("query_budget must be positive");
    if (unk_token.empty()) throw UsageError("unk_token must be non-empty");
    context.validate();
  }
};

/// Raw saliency per attackable position and its softmax weight.
struct SaliencyVector {
  std::vector<std::size_t> positions;
  std::vector<double> raw;
  std::vector<double> weights;

  double weight_at(std::size_t position) const {
    auto it = std::lower_bound(positions.begin(), positions.end(), position);
    if (it == positions.end() || *it != position) throw UsageError("no saliency for position " + std::to_string(position));
    return weights[static_cast<std::size_t>(it - positions.begin())];
  }
};

struct Candidate {
  std::string lemma;
  double lex_sim = 0.0;
  double contextual_fit = 0.0;
  double sentence_sim = 0.0;
  double prob_drop = 0.0;

  friend bool operator==(const Candidate&, const Candidate&) = default;
};

struct CandidateSet {
  std::size_t position = 0;
  Token original;
  std::vector<Candidate> candidates;
};

/// Metrics recorded for one applied substitution.
struct StepTrace {
  double saliency_weight = 0.0;
  double prob_drop = 0.0;
  double sentence_sim = 0.0;  // similarity with only this substitution applied
  double order_score = 0.0;
  double true_prob_after = 0.0;  // P(original label) after cumulative application
  std::string label_after;
  std::size_t queries_after = 0;

  friend bool operator==(const StepTrace&, const StepTrace&) = default;
};

/// Victim queries spent per phase; sums to AttackResult::queries.
struct QueryTimeline {
  std::size_t initial = 0;
  std::size_t saliency = 0;
  std::size_t scoring = 0;
  std::size_t application = 0;

  std::size_t total() const noexcept { return initial + saliency + scoring + application; }
  friend bool operator==(const QueryTimeline&, const QueryTimeline&) = default;
};

struct AttackResult {
  AttackStatus status = AttackStatus::failed_exhausted;
  std::string original_label;
  std::string final_label;
  double original_confidence = 0.0;
  double final_confidence = 0.0;
  std::string original_text;
  std::string adversarial_text;
  std::vector<Substitution> substitutions;
  std::vector<StepTrace> trace;  // parallel to substitutions
  std::size_t queries = 0;
  QueryTimeline timeline;
  double elapsed_seconds = 0.0;
  double final_similarity = 0.0;
  std::string error;

  friend bool operator==(const AttackResult&, const AttackResult&) = default;
};

/// Thrown by BudgetedVictim instead of issuing an over-budget query.
class BudgetExhausted : public std::runtime_error {
 public:
  BudgetExhausted() : std::runtime_error("query budget exhausted") {}
};

/// Refuses any call that would push the wrapped counter past `budget`.
class BudgetedVictim final : public Victim {
 public:
  BudgetedVictim(const CountedVictim& counted, std::size_t budget) : counted_(counted), budget_(budget) {}

  const std::vector<std::string>& labels() const override { return counted_.labels(); }

  ProbDist predict_proba(std::string_view text) const override {
    if (counted_.count() + 1 > budget_) throw BudgetExhausted();
    return counted_.predict_proba(text);
  }

  std::vector<ProbDist> predict_batch(std::span<const std::string> texts) const override {
    if (counted_.count() + texts.size() > budget_) throw BudgetExhausted();
    return counted_.predict_batch(texts);
  }

 private:
  const CountedVictim& counted_;
  std::size_t budget_;
};

/// exp(v_i - max v) normalized.
inline std::vector<double> softmax(std::span<const double> values) {
  if (values.empty()) throw UsageError("softmax of an empty list");
  const double mx = *std::max_element(values.begin(), values.end());
  std::vector<double> out(values.size());
  double z = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    out[i] = std::exp(values[i] - mx);
    z += out[i];
  }
  for (double& v : out) v /= z;
  return out;
}

namespace detail {

inline std::string with_substitution(const Document& doc, std::size_t position, std::string_view lemma) {
  const Substitution sub{position, doc.tokens[position].surface, transfer_case(doc.tokens[position].surface, lemma),
                         std::string(lemma)};
  return splice(doc, std::span<const Substitution>(&sub, 1));
}

inline std::vector<std::size_t> attackable_positions(const Document& doc) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < doc.tokens.size(); ++i) {
    if (doc.tokens[i].attackable) out.push_back(i);
  }
  return out;
}

// Uniform double in [0, 1) from the top 53 bits; identical on every platform.
inline double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace detail

/// Saliency given the original prediction: S_i = P(y*|x) - P(y*|x with
/// token i replaced by `unk_token`), one query per attackable position.
inline SaliencyVector saliency(const Victim& victim, const Document& doc, std::size_t y_star, double p_star,
                               std::string_view unk_token) {
  SaliencyVector sal;
  sal.positions = detail::attackable_positions(doc);
  if (sal.positions.empty()) return sal;
  std::vector<std::string> probes;
  probes.reserve(sal.positions.size());
  for (std::size_t pos : sal.positions) {
    const Substitution sub{pos, doc.tokens[pos].surface, std::string(unk_token), std::string(unk_token)};
    probes.push_back(splice(doc, std::span<const Substitution>(&sub, 1)));
  }
  const auto dists = victim.predict_batch(probes);
  sal.raw.reserve(dists.size());
  for (const auto& d : dists) sal.raw.push_back(p_star - d.probs.at(y_star));
  sal.weights = softmax(sal.raw);
  return sal;
}

/// Saliency including the initial prediction (1 + #attackable queries).
/// An empty result means nothing in the document is attackable.
inline SaliencyVector saliency(const Victim& victim, const Document& doc, std::string_view unk_token) {
  if (detail::attackable_positions(doc).empty()) return {};
  const auto base = victim.predict_proba(doc.source);
  const auto y = base.argmax();
  return saliency(victim, doc, y, base.probs[y], unk_token);
}

/// WordNet synonyms of every lemma of the token at `position`, restricted to
/// single alphabetic words, in lexicographic order. MWSAA additionally drops
/// candidates without an embedding.
inline CandidateSet generate_candidates(const LexicalDb& db, const EmbeddingStore& store, const Document& doc,
                                        std::size_t position, const AttackConfig& cfg) {
  if (position >= doc.tokens.size()) throw UsageError("candidate position out of range");
  CandidateSet set;
  set.position = position;
  set.original = doc.tokens[position];
  const std::string& word = set.original.normalized;

  std::set<std::string> own_lemmas;
  for (PosTag pos : kAllPos) own_lemmas.merge(db.lemmatize(word, pos));
  std::set<std::string> lemmas;
  for (const auto& l : own_lemmas) lemmas.merge(db.synonyms(l));

  const Vector* original_vec = store.find(word);
  for (const auto& lemma : lemmas) {
    if (lemma == word || own_lemmas.count(lemma)) continue;
    const bool alpha = std::all_of(lemma.begin(), lemma.end(), [](char c) { return c >= 'a' && c <= 'z'; });
    if (!alpha) continue;
    const Vector* vec = store.find(lemma);
    if (cfg.method == Method::mwsaa && !vec) continue;
    Candidate c;
    c.lemma = lemma;
    c.lex_sim = (original_vec && vec) ? cosine(*original_vec, *vec) : 0.0;
    set.candidates.push_back(std::move(c));
  }
  return set;
}

/// Fills prob_drop for each candidate: P(y*|x) - P(y*|x with that single
/// substitution), scored against the original document. One query each.
inline void score_prob_drops(const Victim& victim, const Document& doc, std::size_t position,
                             std::span<Candidate> candidates, std::size_t y_star, double p_star) {
  if (candidates.empty()) return;
  std::vector<std::string> texts;
  texts.reserve(candidates.size());
  for (const auto& c : candidates) texts.push_back(detail::with_substitution(doc, position, c.lemma));
  const auto dists = victim.predict_batch(texts);
  for (std::size_t i = 0; i < candidates.size(); ++i) candidates[i].prob_drop = p_star - dists[i].probs.at(y_star);
}

inline double prob_drop(const Victim& victim, const Document& doc, std::size_t position, std::string_view lemma,
                        std::size_t y_star, double p_star) {
  if (lemma == doc.tokens.at(position).normalized) throw UsageError("replacement equals the original word");
  Candidate c{std::string(lemma)};
  score_prob_drops(victim, doc, position, std::span<Candidate>(&c, 1), y_star, p_star);
  return c.prob_drop;
}

/// Keeps the `top_k` candidates whose contextual vector is closest to the
/// original word's; ties keep the lexicographically smaller lemma.
inline CandidateSet contextual_filter(const ContextEncoder& encoder, const Document& doc, const CandidateSet& in,
                                      std::size_t top_k) {
  CandidateSet out{in.position, in.original, in.candidates};
  if (out.candidates.empty()) return out;
  const Vector base = encoder.encode(doc, in.position, std::nullopt);
  for (auto& c : out.candidates) c.contextual_fit = cosine(base, encoder.encode(doc, in.position, c.lemma));
  std::stable_sort(out.candidates.begin(), out.candidates.end(), [](const Candidate& a, const Candidate& b) {
    if (a.contextual_fit != b.contextual_fit) return a.contextual_fit > b.contextual_fit;
    return a.lemma < b.lemma;
  });
  if (out.candidates.size() > top_k) out.candidates.resize(top_k);
  return out;
}

/// Sentence similarity between `doc` and `doc` with one substitution.
inline double single_substitution_similarity(const EmbeddingStore& store, const Document& doc, std::size_t position,
                                             std::string_view lemma) {
  std::vector<Token> swapped = doc.tokens;
  swapped[position].surface = transfer_case(doc.tokens[position].surface, lemma);
  swapped[position].normalized = to_lower_ascii(lemma);
  return sentence_similarity(store, doc.tokens, swapped);
}

/// Drops candidates below the similarity threshold, then picks by the
/// configured strategy. Fills sentence_sim on every candidate.
inline std::optional<Candidate> semantic_select(const EmbeddingStore& store, const Document& doc, std::size_t position,
                                                std::span<Candidate> candidates, const AttackConfig& cfg) {
  std::optional<Candidate> best;
  for (auto& c : candidates) {
    c.sentence_sim = single_substitution_similarity(store, doc, position, c.lemma);
    if (c.sentence_sim < cfg.sim_threshold) continue;
    if (!best) {
      best = c;
      continue;
    }
    const bool by_sim = cfg.mwsaa_strategy == MwsaaStrategy::similarity_argmax;
    const double primary = by_sim ? c.sentence_sim : c.prob_drop;
    const double best_primary = by_sim ? best->sentence_sim : best->prob_drop;
    const double secondary = by_sim ? c.prob_drop : c.sentence_sim;
    const double best_secondary = by_sim ? best->prob_drop : best->sentence_sim;
    if (primary > best_primary || (primary == best_primary && secondary > best_secondary) ||
        (primary == best_primary && secondary == best_secondary && c.lemma < best->lemma)) {
      best = c;
    }
  }
  return best;
}

/// PWWS choice among candidates with prob_drop already scored.
/// Deterministic: argmax prob_drop. Randomized: one draw with weights
/// softmax(alpha * prob_drop + beta * lex_sim).
inline std::optional<Candidate> choose_pwws(std::span<const Candidate> candidates, const AttackConfig& cfg,
                                            std::mt19937_64& rng) {
  if (candidates.empty()) return std::nullopt;
  if (cfg.selection == Selection::deterministic) {
    const Candidate* best = &candidates[0];
    for (const auto& c : candidates) {
      if (c.prob_drop > best->prob_drop || (c.prob_drop == best->prob_drop && c.lemma < best->lemma)) best = &c;
    }
    return *best;
  }
  std::vector<double> logits;
  logits.reserve(candidates.size());
  for (const auto& c : candidates) logits.push_back(cfg.alpha * c.prob_drop + cfg.beta * c.lex_sim);
  const auto w = softmax(logits);
  const double u = detail::unit_uniform(rng);
  double acc = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    acc += w[i];
    if (u < acc) return candidates[i];
  }
  return candidates.back();
}

inline std::optional<Candidate> select_substitute_pwws(const Victim& victim, const Document& doc, std::size_t position,
                                                       std::span<Candidate> candidates, const AttackConfig& cfg,
                                                       std::mt19937_64& rng, std::size_t y_star, double p_star) {
  score_prob_drops(victim, doc, position, candidates, y_star, p_star);
  return choose_pwws(candidates, cfg, rng);
}

/// phi * prob_drop, times sentence_sim^lambda (negative similarity clamped
/// to zero) for MWSAA.
inline double order_score(double phi, const Candidate& c, const AttackConfig& cfg) {
  double h = phi * c.prob_drop;
  if (cfg.method == Method::mwsaa) h *= std::pow(std::max(0.0, c.sentence_sim), cfg.feedback_lambda);
  return h;
}

/// Positions by descending order score; ties by ascending position.
inline std::vector<std::size_t> replacement_order(const SaliencyVector& sal,
                                                  const std::map<std::size_t, Candidate>& chosen,
                                                  const AttackConfig& cfg) {
  std::vector<std::pair<double, std::size_t>> scored;
  scored.reserve(chosen.size());
  for (const auto& [pos, cand] : chosen) scored.emplace_back(order_score(sal.weight_at(pos), cand, cfg), pos);
  std::stable_sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  std::vector<std::size_t> out;
  out.reserve(scored.size());
  for (const auto& s : scored) out.push_back(s.second);
  return out;
}

/// Per-sample generator derived from (seed, sample index).
inline std::mt19937_64 sample_rng(std::uint64_t seed, std::uint64_t sample_index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(sample_index), static_cast<std::uint32_t>(sample_index >> 32)};
  return std::mt19937_64(seq);
}

/// Everything an attack reads besides the victim. All members are shared
/// read-only between concurrent attacks.
struct AttackResources {
  const LexicalDb& db;
  const EmbeddingStore& store;
  const StopwordSet& stopwords = default_stopwords();
  const ContextEncoder* encoder = nullptr;  // static encoder over `store` when null
};

/// Greedy word-substitution attack. Every victim call goes through a
/// per-run counter and never exceeds `cfg.query_budget`.
inline AttackResult attack(const Victim& victim, const AttackResources& res, std::string_view text,
                           const AttackConfig& cfg, std::uint64_t sample_index = 0) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  const StaticContextEncoder static_encoder(res.store, cfg.context);
  const ContextEncoder& encoder = res.encoder ? *res.encoder : static_encoder;
  CountedVictim counted(victim);
  BudgetedVictim gate(counted, cfg.query_budget);
  auto rng = sample_rng(cfg.seed, sample_index);

  AttackResult out;
  out.original_text = std::string(text);
  const Document doc = tokenize(text, res.stopwords);
  std::vector<Substitution> applied;
  // Queries are attributed to whichever phase is open when they are issued.
  std::size_t phase_start = 0;
  std::size_t* phase = &out.timeline.initial;
  auto enter = [&](std::size_t& next) {
    *phase += counted.count() - phase_start;
    phase_start = counted.count();
    phase = &next;
  };

  try {
    const auto base = gate.predict_proba(doc.source);
    const std::size_t y_star = base.argmax();
    const double p_star = base.probs[y_star];
    out.original_label = out.final_label = base.labels[y_star];
    out.original_confidence = out.final_confidence = p_star;
    out.status = AttackStatus::failed_exhausted;

    if (detail::attackable_positions(doc).empty()) {
      out.status = AttackStatus::skipped_nothing_attackable;
    } else {
      enter(out.timeline.saliency);
      const auto sal = saliency(gate, doc, y_star, p_star, cfg.unk_token);
      enter(out.timeline.scoring);

      std::map<std::size_t, Candidate> chosen;
      for (std::size_t pos : sal.positions) {
        auto set = generate_candidates(res.db, res.store, doc, pos, cfg);
        if (set.candidates.empty()) continue;
        std::optional<Candidate> pick;
        if (cfg.method == Method::pwws) {
          pick = select_substitute_pwws(gate, doc, pos, set.candidates, cfg, rng, y_star, p_star);
          if (pick) pick->sentence_sim = single_substitution_similarity(res.store, doc, pos, pick->lemma);
        } else {
          auto filtered = contextual_filter(encoder, doc, set, cfg.top_k);
          score_prob_drops(gate, doc, pos, filtered.candidates, y_star, p_star);
          pick = semantic_select(res.store, doc, pos, filtered.candidates, cfg);
        }
        if (pick) chosen.emplace(pos, std::move(*pick));
      }
      enter(out.timeline.application);

      for (std::size_t pos : replacement_order(sal, chosen, cfg)) {
        const Candidate& cand = chosen.at(pos);
        const Token& tok = doc.tokens[pos];
        Substitution sub{pos, tok.surface, transfer_case(tok.surface, cand.lemma), cand.lemma};
        applied.push_back(sub);
        const std::string candidate_text = splice(doc, applied);
        ProbDist d;
        try {
          d = gate.predict_proba(candidate_text);
        } catch (...) {
          applied.pop_back();
          throw;
        }
        const double phi = sal.weight_at(pos);
        out.trace.push_back(StepTrace{phi, cand.prob_drop, cand.sentence_sim, order_score(phi, cand, cfg),
                                      d.probs[y_star], d.top_label(), counted.count()});
        out.final_label = d.top_label();
        out.final_confidence = d.probs[d.argmax()];
        if (d.argmax() != y_star) {
          out.status = AttackStatus::success;
          break;
        }
      }
    }
  } catch (const BudgetExhausted&) {
    out.status = AttackStatus::budget_exhausted;
  } catch (const QueryError& e) {
    out.status = AttackStatus::query_error;
    out.error = e.what();
  }
  *phase += counted.count() - phase_start;

  out.substitutions = applied;
  out.adversarial_text = splice(doc, applied);
  out.queries = counted.count();
  const Document final_doc = tokenize(out.adversarial_text, res.stopwords);
  out.final_similarity = sentence_similarity(res.store, doc.tokens, final_doc.tokens);
  out.elapsed_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

inline AttackResult attack(const Victim& victim, const LexicalDb& db, const EmbeddingStore& store,
                           std::string_view text, const AttackConfig& cfg, std::uint64_t sample_index = 0) {
  return attack(victim, AttackResources{db, store}, text, cfg, sample_index);
}

}  // namespace advtext

#endif  // ADVTEXT_ATTACK_HPP
