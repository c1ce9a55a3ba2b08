#ifndef ADVTEXT_EVAL_HPP
#define ADVTEXT_EVAL_HPP

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "json.hpp"

#include "advtext/attack.hpp"
#include "advtext/error.hpp"
#include "advtext/text.hpp"
#include "advtext/victim.hpp"

namespace advtext {

enum class DatasetFormat { csv, jsonl };

struct LabeledSample {
  std::string text;
  std::string label;
};

struct LabeledCorpus {
  std::vector<LabeledSample> samples;
  std::set<std::string> labels;
};

namespace detail {

inline void add_sample(LabeledCorpus& corpus, const std::string& file, std::size_t line, std::string text,
                       std::string label) {
  if (text.empty()) throw ParseError(file, line, "empty text");
  if (label.empty()) throw ParseError(file, line, "empty label");
  corpus.labels.insert(label);
  corpus.samples.push_back({std::move(text), std::move(label)});
}

// RFC 4180 records; `line` counts the physical lines consumed so far.
inline bool read_csv_record(std::istream& in, std::vector<std::string>& fields, std::size_t& line,
                            const std::string& file) {
  fields.clear();
  int ch = in.peek();
  if (ch == EOF) return false;
  ++line;
  const std::size_t start = line;
  std::string cur;
  bool quoted = false, field_started = false;
  while ((ch = in.get()) != EOF) {
    const char c = static_cast<char>(ch);
    if (quoted) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get();
          cur.push_back('"');
        } else {
          quoted = false;
        }
      } else {
        if (c == '\n') ++line;
        cur.push_back(c);
      }
      continue;
    }
    if (c == '"' && !field_started) {
      quoted = field_started = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
      field_started = false;
    } else if (c == '\n') {
      break;
    } else if (c == '\r') {
      if (in.peek() == '\n') continue;
      break;
    } else {
      cur.push_back(c);
      field_started = true;
    }
  }
  if (quoted) throw ParseError(file, start, "unterminated quoted field");
  fields.push_back(std::move(cur));
  return true;
}

}  // namespace detail

inline LabeledCorpus load_dataset(const std::filesystem::path& path, DatasetFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open dataset: " + path.string());
  const std::string file = path.filename().string();
  LabeledCorpus corpus;

  if (format == DatasetFormat::csv) {
    std::vector<std::string> fields;
    std::size_t line = 0;
    if (!detail::read_csv_record(in, fields, line, file)) throw LoadError("empty dataset: " + path.string());
    if (!fields.empty() && fields[0].starts_with("\xEF\xBB\xBF")) fields[0].erase(0, 3);
    std::optional<std::size_t> text_col, label_col;
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (fields[i] == "text") text_col = i;
      if (fields[i] == "label") label_col = i;
    }
    if (!text_col) throw ParseError(file, 1, "header lacks a 'text' column");
    if (!label_col) throw ParseError(file, 1, "header lacks a 'label' column");
    while (true) {
      const std::size_t before = line;
      if (!detail::read_csv_record(in, fields, line, file)) break;
      if (fields.size() == 1 && fields[0].empty()) continue;
      const std::size_t need = std::max(*text_col, *label_col) + 1;
      if (fields.size() < need) {
        throw ParseError(file, before + 1,
                         "expected " + std::to_string(need) + " fields, found " + std::to_string(fields.size()));
      }
      detail::add_sample(corpus, file, before + 1, std::move(fields[*text_col]), std::move(fields[*label_col]));
    }
  } else {
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      nlohmann::json obj;
      try {
        obj = nlohmann::json::parse(line);
      } catch (const nlohmann::json::exception& e) {
        throw ParseError(file, lineno, std::string("invalid JSON: ") + e.what());
      }
      if (!obj.is_object()) throw ParseError(file, lineno, "expected a JSON object");
      for (const char* key : {"text", "label"}) {
        if (!obj.contains(key) || !obj[key].is_string()) {
          throw ParseError(file, lineno, std::string("missing string field '") + key + "'");
        }
      }
      detail::add_sample(corpus, file, lineno, obj["text"].get<std::string>(), obj["label"].get<std::string>());
    }
  }
  if (corpus.samples.empty()) throw LoadError("empty dataset: " + path.string());
  return corpus;
}

inline DatasetFormat infer_dataset_format(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  return (ext == ".jsonl" || ext == ".json") ? DatasetFormat::jsonl : DatasetFormat::csv;
}

inline LabeledCorpus load_dataset(const std::filesystem::path& path) {
  return load_dataset(path, infer_dataset_format(path));
}

// ---------------------------------------------------------------------------
// metrics (percentages; std::nullopt where the denominator is empty)

inline std::optional<double> success_rate(std::size_t successes, std::size_t total) {
  if (total == 0) return std::nullopt;
  if (successes > total) throw UsageError("successes exceed total");
  return 100.0 * static_cast<double>(successes) / static_cast<double>(total);
}

/// Substituted words over alphabetic words of the original document.
inline std::optional<double> replacement_rate(const AttackResult& result, const Document& doc) {
  const std::size_t words = count_alphabetic(doc);
  if (words == 0) return std::nullopt;
  return 100.0 * static_cast<double>(result.substitutions.size()) / static_cast<double>(words);
}

/// "65.00%" or "n/a".
inline std::string format_percent(std::optional<double> value) {
  if (!value) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f%%", *value);
  return buf;
}

struct SampleRecord {
  std::size_t id = 0;
  std::string text;
  std::string gold_label;
  std::string clean_label;
  bool originally_correct = false;
  bool attacked = false;
  std::optional<AttackResult> result;
  std::string final_label;  // label of the final text
  std::size_t word_count = 0;        // attackable tokens
  std::size_t alphabetic_count = 0;  // replacement-rate denominator
  std::optional<double> replacement_rate;
  std::string error;

  bool succeeded() const { return result && result->status == AttackStatus::success; }
  friend bool operator==(const SampleRecord&, const SampleRecord&) = default;
};

struct EvalAggregates {
  std::size_t sample_count = 0;  // records without errors
  std::size_t error_count = 0;
  std::size_t attacked_count = 0;
  std::size_t success_count = 0;
  std::size_t skipped_count = 0;
  std::size_t budget_exhausted_count = 0;
  std::optional<double> attack_success_rate;
  std::optional<double> avg_queries;
  std::optional<double> avg_elapsed_seconds;
  std::optional<double> mean_replacement_rate;  // over successful attacks
  std::optional<double> clean_accuracy;
  std::optional<double> accuracy_under_attack;
  std::optional<double> mean_final_similarity;  // over successful attacks

  friend bool operator==(const EvalAggregates&, const EvalAggregates&) = default;
};

struct EvalReport {
  int report_version = 1;
  std::string method;
  std::string victim;
  std::string dataset;
  nlohmann::ordered_json config;
  std::vector<SampleRecord> records;
  EvalAggregates aggregates;

  friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

/// Gold-label accuracy on final texts (adversarial when the attack
/// succeeded, original otherwise), over records without errors.
inline std::optional<double> accuracy_under_attack(std::span<const SampleRecord> records) {
  std::size_t n = 0, correct = 0;
  for (const auto& r : records) {
    if (!r.error.empty()) continue;
    ++n;
    if (r.final_label == r.gold_label) ++correct;
  }
  return success_rate(correct, n);
}

/// Deterministic fold over the records in id order.
inline EvalAggregates aggregate(std::span<const SampleRecord> records) {
  EvalAggregates a;
  std::size_t correct = 0;
  double queries = 0, elapsed = 0, repl = 0, sim = 0;
  for (const auto& r : records) {
    if (!r.error.empty()) {
      ++a.error_count;
      continue;
    }
    ++a.sample_count;
    if (r.originally_correct) ++correct;
    if (!r.attacked || !r.result) continue;
    ++a.attacked_count;
    queries += static_cast<double>(r.result->queries);
    elapsed += r.result->elapsed_seconds;
    if (r.result->status == AttackStatus::skipped_nothing_attackable) ++a.skipped_count;
    if (r.result->status == AttackStatus::budget_exhausted) ++a.budget_exhausted_count;
    if (r.succeeded()) {
      ++a.success_count;
      repl += r.replacement_rate.value_or(0.0);
      sim += r.result->final_similarity;
    }
  }
  a.attack_success_rate = success_rate(a.success_count, a.attacked_count);
  a.clean_accuracy = success_rate(correct, a.sample_count);
  a.accuracy_under_attack = accuracy_under_attack(records);
  if (a.attacked_count > 0) {
    a.avg_queries = queries / static_cast<double>(a.attacked_count);
    a.avg_elapsed_seconds = elapsed / static_cast<double>(a.attacked_count);
  }
  if (a.success_count > 0) {
    a.mean_replacement_rate = repl / static_cast<double>(a.success_count);
    a.mean_final_similarity = sim / static_cast<double>(a.success_count);
  }
  return a;
}

struct EvalOptions {
  std::size_t sample_limit = 200;
  std::size_t workers = 1;
  bool attack_all = false;  // also attack samples the victim gets wrong
};

inline nlohmann::ordered_json config_to_json(const AttackConfig& cfg) {
  nlohmann::ordered_json j;
  j["method"] = to_string(cfg.method);
  j["selection"] = to_string(cfg.selection);
  j["mwsaa_strategy"] = to_string(cfg.mwsaa_strategy);
  j["top_k"] = cfg.top_k;
  j["sim_threshold"] = cfg.sim_threshold;
  j["alpha"] = cfg.alpha;
  j["beta"] = cfg.beta;
  j["feedback_lambda"] = cfg.feedback_lambda;
  j["window"] = cfg.context.window;
  j["gamma"] = cfg.context.gamma;
  j["seed"] = cfg.seed;
  j["query_budget"] = cfg.query_budget;
  j["unk_token"] = cfg.unk_token;
  return j;
}

/// Attacks the first `sample_limit` samples. By default only samples the
/// victim classifies correctly are attacked. Each sample gets its own query
/// counter and a generator seeded by (cfg.seed, sample id), so results do
/// not depend on the number of workers.
inline EvalReport run_evaluation(const Victim& victim, const AttackResources& res, const LabeledCorpus& corpus,
                                 const AttackConfig& cfg, const EvalOptions& opt) {
  if (opt.sample_limit < 1) throw UsageError("sample_limit must be at least 1");
  cfg.validate();
  const std::size_t n = std::min(opt.sample_limit, corpus.samples.size());
  std::vector<SampleRecord> records(n);

  auto run_one = [&](std::size_t i) {
    SampleRecord& rec = records[i];
    rec.id = i;
    rec.text = corpus.samples[i].text;
    rec.gold_label = corpus.samples[i].label;
    const Document doc = tokenize(rec.text, res.stopwords);
    rec.word_count = count_attackable(doc);
    rec.alphabetic_count = count_alphabetic(doc);
    try {
      rec.clean_label = victim.predict_proba(rec.text).top_label();
    } catch (const std::exception& e) {
      rec.error = e.what();
      return;
    }
    rec.originally_correct = rec.clean_label == rec.gold_label;
    rec.final_label = rec.clean_label;
    if (!rec.originally_correct && !opt.attack_all) return;
    AttackResult result;
    try {
      result = attack(victim, res, rec.text, cfg, i);
    } catch (const std::exception& e) {
      rec.error = e.what();
      return;
    }
    rec.attacked = true;
    if (result.status == AttackStatus::query_error) rec.error = result.error;
    if (result.status == AttackStatus::success) rec.final_label = result.final_label;
    rec.replacement_rate = replacement_rate(result, doc);
    rec.result = std::move(result);
  };

  const std::size_t workers = std::max<std::size_t>(1, std::min(opt.workers, n));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) run_one(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) run_one(i);
      });
    }
  }

  EvalReport report;
  report.method = std::string(to_string(cfg.method));
  report.config = config_to_json(cfg);
  report.config["sample_limit"] = opt.sample_limit;
  report.config["attack_all"] = opt.attack_all;
  report.records = std::move(records);
  report.aggregates = aggregate(report.records);
  return report;
}

}  // namespace advtext

#endif  // ADVTEXT_EVAL_HPP
