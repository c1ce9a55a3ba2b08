#ifndef ADVTEXT_REPORT_HPP
#define ADVTEXT_REPORT_HPP

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "advtext/attack.hpp"
#include "advtext/error.hpp"
#include "advtext/eval.hpp"

namespace advtext {

using ojson = nlohmann::ordered_json;

namespace detail {

template <typename T>
ojson optional_json(const std::optional<T>& v) {
  return v ? ojson(*v) : ojson(nullptr);
}

template <typename T>
std::optional<T> json_optional(const ojson& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<T>();
}

}  // namespace detail

inline ojson to_json(const Substitution& s) {
  return ojson{{"position", s.position},
               {"original", s.original_surface},
               {"replacement", s.replacement_surface},
               {"lemma", s.replacement_lemma}};
}

inline Substitution substitution_from_json(const ojson& j) {
  return Substitution{j.at("position").get<std::size_t>(), j.at("original").get<std::string>(),
                      j.at("replacement").get<std::string>(), j.at("lemma").get<std::string>()};
}

inline ojson to_json(const AttackResult& r) {
  ojson subs = ojson::array();
  for (std::size_t i = 0; i < r.substitutions.size(); ++i) {
    ojson s = to_json(r.substitutions[i]);
    if (i < r.trace.size()) {
      const auto& t = r.trace[i];
      s["saliency_weight"] = t.saliency_weight;
      s["prob_drop"] = t.prob_drop;
      s["sentence_sim"] = t.sentence_sim;
      s["order_score"] = t.order_score;
      s["true_prob_after"] = t.true_prob_after;
      s["label_after"] = t.label_after;
      s["queries_after"] = t.queries_after;
    }
    subs.push_back(std::move(s));
  }
  ojson j;
  j["status"] = to_string(r.status);
  j["original_label"] = r.original_label;
  j["final_label"] = r.final_label;
  j["original_confidence"] = r.original_confidence;
  j["final_confidence"] = r.final_confidence;
  j["original_text"] = r.original_text;
  j["adversarial_text"] = r.adversarial_text;
  j["substitutions"] = std::move(subs);
  j["queries"] = r.queries;
  j["query_timeline"] = {{"initial", r.timeline.initial},
                         {"saliency", r.timeline.saliency},
                         {"scoring", r.timeline.scoring},
                         {"application", r.timeline.application}};
  j["elapsed_seconds"] = r.elapsed_seconds;
  j["final_similarity"] = r.final_similarity;
  j["error"] = r.error;
  return j;
}

inline AttackResult attack_result_from_json(const ojson& j) {
  AttackResult r;
  r.status = parse_status(j.at("status").get<std::string>());
  r.original_label = j.at("original_label").get<std::string>();
  r.final_label = j.at("final_label").get<std::string>();
  r.original_confidence = j.at("original_confidence").get<double>();
  r.final_confidence = j.at("final_confidence").get<double>();
  r.original_text = j.at("original_text").get<std::string>();
  r.adversarial_text = j.at("adversarial_text").get<std::string>();
  for (const auto& s : j.at("substitutions")) {
    r.substitutions.push_back(substitution_from_json(s));
    if (s.contains("prob_drop")) {
      r.trace.push_back(StepTrace{s.at("saliency_weight").get<double>(), s.at("prob_drop").get<double>(),
                                  s.at("sentence_sim").get<double>(), s.at("order_score").get<double>(),
                                  s.at("true_prob_after").get<double>(), s.at("label_after").get<std::string>(),
                                  s.at("queries_after").get<std::size_t>()});
    }
  }
  r.queries = j.at("queries").get<std::size_t>();
  const auto& t = j.at("query_timeline");
  r.timeline = {t.at("initial").get<std::size_t>(), t.at("saliency").get<std::size_t>(),
                t.at("scoring").get<std::size_t>(), t.at("application").get<std::size_t>()};
  r.elapsed_seconds = j.at("elapsed_seconds").get<double>();
  r.final_similarity = j.at("final_similarity").get<double>();
  r.error = j.at("error").get<std::string>();
  return r;
}

inline ojson to_json(const SampleRecord& r) {
  ojson j;
  j["id"] = r.id;
  j["text"] = r.text;
  j["gold_label"] = r.gold_label;
  j["clean_label"] = r.clean_label;
  j["originally_correct"] = r.originally_correct;
  j["attacked"] = r.attacked;
  j["final_label"] = r.final_label;
  j["word_count"] = r.word_count;
  j["alphabetic_count"] = r.alphabetic_count;
  j["replacement_rate"] = detail::optional_json(r.replacement_rate);
  j["error"] = r.error;
  j["result"] = r.result ? to_json(*r.result) : ojson(nullptr);
  return j;
}

inline SampleRecord sample_record_from_json(const ojson& j) {
  SampleRecord r;
  r.id = j.at("id").get<std::size_t>();
  r.text = j.at("text").get<std::string>();
  r.gold_label = j.at("gold_label").get<std::string>();
  r.clean_label = j.at("clean_label").get<std::string>();
  r.originally_correct = j.at("originally_correct").get<bool>();
  r.attacked = j.at("attacked").get<bool>();
  r.final_label = j.at("final_label").get<std::string>();
  r.word_count = j.at("word_count").get<std::size_t>();
  r.alphabetic_count = j.at("alphabetic_count").get<std::size_t>();
  r.replacement_rate = detail::json_optional<double>(j.at("replacement_rate"));
  r.error = j.at("error").get<std::string>();
  if (!j.at("result").is_null()) r.result = attack_result_from_json(j.at("result"));
  return r;
}

inline ojson to_json(const EvalAggregates& a) {
  using detail::optional_json;
  ojson j;
  j["sample_count"] = a.sample_count;
  j["error_count"] = a.error_count;
  j["attacked_count"] = a.attacked_count;
  j["success_count"] = a.success_count;
  j["skipped_count"] = a.skipped_count;
  j["budget_exhausted_count"] = a.budget_exhausted_count;
  j["attack_success_rate"] = optional_json(a.attack_success_rate);
  j["avg_queries"] = optional_json(a.avg_queries);
  j["avg_elapsed_seconds"] = optional_json(a.avg_elapsed_seconds);
  j["mean_replacement_rate"] = optional_json(a.mean_replacement_rate);
  j["clean_accuracy"] = optional_json(a.clean_accuracy);
  j["accuracy_under_attack"] = optional_json(a.accuracy_under_attack);
  j["mean_final_similarity"] = optional_json(a.mean_final_similarity);
  return j;
}

inline EvalAggregates aggregates_from_json(const ojson& j) {
  using detail::json_optional;
  EvalAggregates a;
  a.sample_count = j.at("sample_count").get<std::size_t>();
  a.error_count = j.at("error_count").get<std::size_t>();
  a.attacked_count = j.at("attacked_count").get<std::size_t>();
  a.success_count = j.at("success_count").get<std::size_t>();
  a.skipped_count = j.at("skipped_count").get<std::size_t>();
  a.budget_exhausted_count = j.at("budget_exhausted_count").get<std::size_t>();
  a.attack_success_rate = json_optional<double>(j.at("attack_success_rate"));
  a.avg_queries = json_optional<double>(j.at("avg_queries"));
  a.avg_elapsed_seconds = json_optional<double>(j.at("avg_elapsed_seconds"));
  a.mean_replacement_rate = json_optional<double>(j.at("mean_replacement_rate"));
  a.clean_accuracy = json_optional<double>(j.at("clean_accuracy"));
  a.accuracy_under_attack = json_optional<double>(j.at("accuracy_under_attack"));
  a.mean_final_similarity = json_optional<double>(j.at("mean_final_similarity"));
  return a;
}

inline ojson to_json(const EvalReport& r) {
  ojson j;
  j["report_version"] = r.report_version;
  j["method"] = r.method;
  j["victim"] = r.victim;
  j["dataset"] = r.dataset;
  j["config"] = r.config;
  j["aggregates"] = to_json(r.aggregates);
  ojson recs = ojson::array();
  for (const auto& rec : r.records) recs.push_back(to_json(rec));
  j["records"] = std::move(recs);
  return j;
}

inline EvalReport report_from_json(const ojson& j) {
  EvalReport r;
  r.report_version = j.at("report_version").get<int>();
  if (r.report_version != 1) throw LoadError("unsupported report_version " + std::to_string(r.report_version));
  r.method = j.at("method").get<std::string>();
  r.victim = j.at("victim").get<std::string>();
  r.dataset = j.at("dataset").get<std::string>();
  r.config = j.at("config");
  r.aggregates = aggregates_from_json(j.at("aggregates"));
  for (const auto& rec : j.at("records")) r.records.push_back(sample_record_from_json(rec));
  return r;
}

inline EvalReport load_report(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open report: " + path.string());
  try {
    return report_from_json(ojson::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw LoadError("malformed report " + path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// markdown

namespace detail {

inline std::string upper(std::string s) {
  for (char& c : s) c = ascii_upper(c);
  return s;
}

inline std::string fixed(std::optional<double> v, int digits) {
  if (!v) return "n/a";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, *v);
  return buf;
}

}  // namespace detail

/// Success rate, efficiency, accuracy, and replacement-rate tables for one report.
inline std::string to_markdown(const EvalReport& r) {
  const auto& a = r.aggregates;
  const std::string method = detail::upper(r.method);
  std::ostringstream md;
  md << "# " << method << " attack report\n\n";
  md << "Victim: `" << r.victim << "`; dataset: `" << r.dataset << "`; samples: " << a.sample_count
     << "; errors: " << a.error_count << "\n\n";
  md << "## Attack success\n\n";
  md << "| Victim Language Model | Total Attacked Instances | Successful Attacked Instances | Attack Success Rate |\n";
  md << "|---|---|---|---|\n";
  md << "| " << r.victim << " | " << a.attacked_count << " | " << a.success_count << " | "
     << format_percent(a.attack_success_rate) << " |\n\n";
  md << "## Attack efficiency\n\n";
  md << "| Victim Language Model | Average Running Time (in second) | Total No of Queries Exceeded | Avg Victim Model "
        "Queries |\n";
  md << "|---|---|---|---|\n";
  md << "| " << r.victim << " | " << detail::fixed(a.avg_elapsed_seconds, 7) << " | " << a.budget_exhausted_count
     << " | " << detail::fixed(a.avg_queries, 2) << " |\n\n";
  md << "## Classification accuracy\n\n";
  md << "| Dataset | Model | Original | " << method << " |\n|---|---|---|---|\n";
  md << "| " << r.dataset << " | " << r.victim << " | " << format_percent(a.clean_accuracy) << " | "
     << format_percent(a.accuracy_under_attack) << " |\n\n";
  md << "## Word replacement rate\n\n";
  md << "| Dataset | Model | " << method << " |\n|---|---|---|\n";
  md << "| " << r.dataset << " | " << r.victim << " | " << format_percent(a.mean_replacement_rate) << " |\n\n";
  md << "Mean final similarity of successful adversarial texts: " << detail::fixed(a.mean_final_similarity, 4)
     << "\n";
  return md.str();
}

/// Side-by-side tables with one column per method.
inline std::string comparison_markdown(std::span<const EvalReport> reports) {
  if (reports.empty()) throw UsageError("no reports to compare");
  const auto& first = reports.front();
  std::ostringstream md;
  auto header = [&](std::string_view lead) {
    md << "| Dataset | Model" << lead;
    for (const auto& r : reports) md << " | " << detail::upper(r.method);
    md << " |\n|---|---" << (lead.empty() ? "" : "|---");
    for (std::size_t i = 0; i < reports.size(); ++i) md << "|---";
    md << "|\n";
  };
  md << "# Method comparison\n\n";
  md << "## Classification accuracy\n\n";
  header(" | Original");
  md << "| " << first.dataset << " | " << first.victim << " | " << format_percent(first.aggregates.clean_accuracy);
  for (const auto& r : reports) md << " | " << format_percent(r.aggregates.accuracy_under_attack);
  md << " |\n\n## Word replacement rate\n\n";
  header("");
  md << "| " << first.dataset << " | " << first.victim;
  for (const auto& r : reports) md << " | " << format_percent(r.aggregates.mean_replacement_rate);
  md << " |\n\n## Attack Success Rate\n\n";
  header("");
  md << "| " << first.dataset << " | " << first.victim;
  for (const auto& r : reports) md << " | " << format_percent(r.aggregates.attack_success_rate);
  md << " |\n\n## Avg Victim Model Queries\n\n";
  header("");
  md << "| " << first.dataset << " | " << first.victim;
  for (const auto& r : reports) md << " | " << detail::fixed(r.aggregates.avg_queries, 2);
  md << " |\n";
  return md.str();
}

enum class ReportFormat { json, markdown };

inline std::string render_report(const EvalReport& r, ReportFormat format) {
  return format == ReportFormat::json ? to_json(r).dump(2) + "\n" : to_markdown(r);
}

inline void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw LoadError("cannot write " + path.string());
  out << content;
  out.flush();
  if (!out) throw LoadError("failed writing " + path.string());
}

inline void emit_report(const EvalReport& r, ReportFormat format, const std::filesystem::path& path) {
  write_text_file(path, render_report(r, format));
}

// ---------------------------------------------------------------------------
// human-readable renderings

/// Perturbed text with each substituted word shown as `replacement (original)`.
inline std::string render_perturbed(const AttackResult& r, const StopwordSet& stopwords = default_stopwords()) {
  const Document doc = tokenize(r.original_text, stopwords);
  std::vector<Substitution> shown = r.substitutions;
  for (auto& s : shown) s.replacement_surface += " (" + s.original_surface + ")";
  return splice(doc, shown);
}

inline std::string render_attack(const AttackResult& r) {
  char buf[128];
  std::ostringstream out;
  out << "status: " << to_string(r.status) << "\n";
  std::snprintf(buf, sizeof buf, "original prediction: %s (conf %.2f%%)\n", r.original_label.c_str(),
                100.0 * r.original_confidence);
  out << buf;
  std::snprintf(buf, sizeof buf, "final prediction:    %s (conf %.2f%%)\n", r.final_label.c_str(),
                100.0 * r.final_confidence);
  out << buf;
  out << "queries: " << r.queries << "\n";
  std::snprintf(buf, sizeof buf, "similarity: %.4f\n", r.final_similarity);
  out << buf;
  if (!r.error.empty()) out << "error: " << r.error << "\n";
  out << "perturbed text: " << (r.substitutions.empty() ? r.original_text : render_perturbed(r)) << "\n";
  return out.str();
}

/// Step-by-step trace of one sample: substitutions in applied order with
/// their scores, then the query timeline.
inline std::string render_trace(const SampleRecord& rec) {
  std::ostringstream out;
  char buf[256];
  out << "sample " << rec.id << "  gold=" << rec.gold_label << "  clean=" << rec.clean_label
      << "  final=" << rec.final_label << "\n";
  out << "text: " << rec.text << "\n";
  if (!rec.error.empty()) out << "error: " << rec.error << "\n";
  if (!rec.result) {
    out << "not attacked" << (rec.originally_correct ? "" : " (victim already wrong)") << "\n";
    out << "no substitutions\n";
    return out.str();
  }
  const auto& r = *rec.result;
  out << "status: " << to_string(r.status) << "\n";
  if (r.substitutions.empty()) {
    out << "no substitutions\n";
  } else {
    out << "step  position  original -> replacement   dP        sim      phi      score    P(y*)    queries\n";
    for (std::size_t i = 0; i < r.substitutions.size(); ++i) {
      const auto& s = r.substitutions[i];
      const StepTrace t = i < r.trace.size() ? r.trace[i] : StepTrace{};
      std::snprintf(buf, sizeof buf, "%-5zu %-9zu %s -> %s   %+.6f %.6f %.6f %+.6f %.6f %zu\n", i + 1, s.position,
                    s.original_surface.c_str(), s.replacement_surface.c_str(), t.prob_drop, t.sentence_sim,
                    t.saliency_weight, t.order_score, t.true_prob_after, t.queries_after);
      out << buf;
    }
    out << "perturbed: " << render_perturbed(r) << "\n";
  }
  out << "query timeline: initial=" << r.timeline.initial << " saliency=" << r.timeline.saliency
      << " scoring=" << r.timeline.scoring << " application=" << r.timeline.application << " total=" << r.queries
      << "\n";
  std::snprintf(buf, sizeof buf, "final similarity: %.6f\n", r.final_similarity);
  out << buf;
  return out.str();
}

}  // namespace advtext

#endif  // ADVTEXT_REPORT_HPP
