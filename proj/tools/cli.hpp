#ifndef ADVTEXT_TOOLS_CLI_HPP
#define ADVTEXT_TOOLS_CLI_HPP

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "advtext/advtext.hpp"

#ifndef ADVTEXT_DEFAULT_DATA_DIR
#define ADVTEXT_DEFAULT_DATA_DIR "data"
#endif

namespace advtext::cli {

enum ExitCode : int { kOk = 0, kDataError = 2, kVictimError = 3, kLookupError = 4 };

/// Raised for a failed lookup (unknown sample id).
class LookupError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ResourcePaths {
  std::string wordnet = std::string(ADVTEXT_DEFAULT_DATA_DIR) + "/wordnet";
  std::string embeddings = std::string(ADVTEXT_DEFAULT_DATA_DIR) + "/embeddings/toy-vectors.txt";
  std::string stopwords;  // built-in list when empty
};

struct VictimSpec {
  std::string victim;
  long timeout_ms = 10000;
  unsigned retries = 0;
  std::size_t max_batch = 32;
};

struct LoadedResources {
  LexicalDb db;
  EmbeddingStore store{1};
  std::optional<StopwordSet> stopwords;

  AttackResources view() const {
    return AttackResources{db, store, stopwords ? *stopwords : default_stopwords()};
  }
};

inline std::unique_ptr<LoadedResources> load_resources(const ResourcePaths& p) {
  auto r = std::make_unique<LoadedResources>();
  r->db = LexicalDb::load(p.wordnet);
  r->store = EmbeddingStore::load(p.embeddings);
  if (!p.stopwords.empty()) r->stopwords = StopwordSet::load(p.stopwords);
  return r;
}

/// `nb:<path>` loads a trained naive Bayes file; `http:<url>` (or a bare
/// `http://` / `https://` URL) talks to a victim server.
inline std::unique_ptr<Victim> open_victim(const VictimSpec& spec) {
  const std::string& s = spec.victim;
  if (s.starts_with("nb:")) return std::make_unique<NaiveBayes>(NaiveBayes::load(s.substr(3)));
  std::string url;
  if (s.starts_with("http://") || s.starts_with("https://")) {
    url = s;
  } else if (s.starts_with("http:")) {
    url = s.substr(5);
  } else {
    throw UsageError("victim spec must be nb:<path> or http:<url>, got '" + s + "'");
  }
  RemoteVictim::Options opt;
  opt.timeout = std::chrono::milliseconds(spec.timeout_ms);
  opt.retries = spec.retries;
  opt.max_batch = spec.max_batch;
  return std::make_unique<RemoteVictim>(url, opt);
}

inline void add_attack_options(CLI::App& app, AttackConfig& cfg, std::string& method, std::string& selection,
                               std::string& strategy) {
  app.add_option("--method", method, "pwws or mwsaa (evaluate takes a comma-separated list)")->capture_default_str();
  app.add_option("--selection", selection, "deterministic or randomized (pwws only)")->capture_default_str();
  app.add_option("--mwsaa-strategy", strategy, "similarity_argmax or max_drop")->capture_default_str();
  app.add_option("--top-k", cfg.top_k, "contextual filter size")->capture_default_str();
  app.add_option("--sim-threshold", cfg.sim_threshold, "semantic threshold tau")->capture_default_str();
  app.add_option("--alpha", cfg.alpha, "randomized selection weight on probability drop")->capture_default_str();
  app.add_option("--beta", cfg.beta, "randomized selection weight on lexical similarity")->capture_default_str();
  app.add_option("--feedback-lambda", cfg.feedback_lambda, "similarity exponent in the MWSAA order score")
      ->capture_default_str();
  app.add_option("--window", cfg.context.window, "context window for contextual vectors")->capture_default_str();
  app.add_option("--gamma", cfg.context.gamma, "context mixing weight")->capture_default_str();
  app.add_option("--seed", cfg.seed, "random seed")->capture_default_str();
  app.add_option("--query-budget", cfg.query_budget, "maximum victim queries per sample")->capture_default_str();
  app.add_option("--unk-token", cfg.unk_token, "token used to mask words for saliency")->capture_default_str();
}

inline void add_resource_options(CLI::App& app, ResourcePaths& paths) {
  app.add_option("--wordnet", paths.wordnet, "WordNet database directory")->capture_default_str();
  app.add_option("--embeddings", paths.embeddings, "word vectors in text format")->capture_default_str();
  app.add_option("--stopwords", paths.stopwords, "stopword list (one per line)");
}

inline void add_victim_options(CLI::App& app, VictimSpec& spec) {
  app.add_option("--victim", spec.victim, "nb:<path> or http:<url>")->required();
  app.add_option("--timeout-ms", spec.timeout_ms, "per-request timeout for http victims")->capture_default_str();
  app.add_option("--retries", spec.retries, "retries per request for http victims")->capture_default_str();
  app.add_option("--max-batch", spec.max_batch, "texts per /predict request")->capture_default_str();
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

inline nlohmann::ordered_json effective_config(const AttackConfig& cfg, const ResourcePaths& paths,
                                               const VictimSpec& victim) {
  auto j = config_to_json(cfg);
  j["victim"] = victim.victim;
  j["wordnet"] = paths.wordnet;
  j["embeddings"] = paths.embeddings;
  j["stopwords"] = paths.stopwords.empty() ? "builtin" : paths.stopwords;
  return j;
}

inline void banner(std::ostream& err, std::string_view command, const nlohmann::ordered_json& config) {
  err << "advtext " << command << " config: " << config.dump() << "\n";
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Splices the entries of a `--config` file in as `--key=value` arguments
/// right after the subcommand name. Options keep their last value, so
/// flags given on the command line win. Blank lines, `#`/`;` comments and
/// `[section]` headers are ignored; keys may use `_` or `-`.
inline std::vector<std::string> expand_config(std::vector<std::string> args) {
  std::optional<std::string> path;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
    } else if (args[i].starts_with("--config=")) {
      path = args[i].substr(9);
    }
  }
  if (!path) return args;
  std::istringstream in(read_file(*path));
  std::vector<std::string> extra;
  std::string line;
  std::size_t lineno = 0;
  auto trim = [](std::string v) {
    const auto b = v.find_first_not_of(" \t\r");
    if (b == std::string::npos) return std::string();
    return v.substr(b, v.find_last_not_of(" \t\r") - b + 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#' || line[0] == ';' || line[0] == '[') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(*path, lineno, "expected key = value");
    std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    if (key.empty()) throw ParseError(*path, lineno, "empty key");
    if (value.size() >= 2 && (value.front() == '"' || value.front() == '\'') && value.back() == value.front()) {
      value = value.substr(1, value.size() - 2);
    }
    std::replace(key.begin(), key.end(), '_', '-');
    if (key == "config") throw ParseError(*path, lineno, "config files cannot include other config files");
    extra.push_back("--" + key + "=" + value);
  }
  args.insert(args.begin() + 1, extra.begin(), extra.end());
  return args;
}

/// Runs the command line in-process. `args` excludes the program name.
inline int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Word-substitution adversarial attacks on text classifiers"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  // train-victim
  std::string train_dataset, train_out;
  double smoothing = 1.0;
  auto* train = app.add_subcommand("train-victim", "train a naive Bayes victim");
  train->add_option("--dataset", train_dataset, "csv or jsonl with text,label")->required();
  train->add_option("--smoothing", smoothing, "additive smoothing")->capture_default_str();
  train->add_option("--out", train_out, "victim file to write")->required();

  // attack / evaluate share the attack flags
  AttackConfig cfg;
  std::string method = "pwws", selection = "deterministic", strategy = "similarity_argmax";
  ResourcePaths paths;
  VictimSpec victim_spec;

  std::string attack_text, attack_file, format;
  bool as_json = false;
  auto* atk = app.add_subcommand("attack", "attack one text");
  atk->add_option("--text", attack_text, "text to attack");
  atk->add_option("--file", attack_file, "file holding the text to attack");
  atk->add_flag("--json", as_json, "print the result as JSON");
  atk->add_option("--format", format, "json or markdown (human rendering)");
  add_attack_options(*atk, cfg, method, selection, strategy);
  add_resource_options(*atk, paths);
  add_victim_options(*atk, victim_spec);
  atk->add_option("--config", "flat key = value file; command-line flags take precedence");

  std::string eval_dataset, out_dir = "reports", eval_format = "json,markdown";
  EvalOptions eval_opt;
  auto* ev = app.add_subcommand("evaluate", "evaluate attacks over a labelled dataset");
  ev->add_option("--dataset", eval_dataset, "csv or jsonl with text,label")->required();
  ev->add_option("--samples", eval_opt.sample_limit, "number of samples to attack")->capture_default_str();
  ev->add_option("--workers", eval_opt.workers, "parallel attack workers")->capture_default_str();
  ev->add_flag("--attack-all", eval_opt.attack_all, "also attack samples the victim misclassifies");
  ev->add_option("--out", out_dir, "output directory")->capture_default_str();
  ev->add_option("--format", eval_format, "json, markdown, or both (comma-separated)")->capture_default_str();
  add_attack_options(*ev, cfg, method, selection, strategy);
  add_resource_options(*ev, paths);
  add_victim_options(*ev, victim_spec);
  ev->add_option("--config", "flat key = value file; command-line flags take precedence");

  std::string report_path;
  std::size_t sample_id = 0;
  auto* insp = app.add_subcommand("inspect", "show the trace of one sample from a report");
  insp->add_option("report", report_path, "report json")->required();
  insp->add_option("id", sample_id, "sample id")->required();

  try {
    args = expand_config(std::move(args));
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kDataError;
  }
  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    std::ostringstream help_out;
    const int code = app.exit(e, help_out, err);
    out << help_out.str();
    return code == 0 ? kOk : kDataError;
  }

  try {
    if (*train) {
      const auto corpus = load_dataset(train_dataset);
      std::vector<NaiveBayes::Example> examples;
      examples.reserve(corpus.samples.size());
      for (const auto& s : corpus.samples) examples.push_back({s.text, s.label});
      const auto nb = NaiveBayes::train(examples, smoothing);
      nb.save(train_out);
      out << "trained naive Bayes on " << examples.size() << " examples, " << nb.labels().size() << " labels, "
          << nb.vocabulary_size() << " vocabulary entries -> " << train_out << "\n";
      return kOk;
    }

    if (*insp) {
      const auto report = load_report(report_path);
      const auto it = std::find_if(report.records.begin(), report.records.end(),
                                   [&](const SampleRecord& r) { return r.id == sample_id; });
      if (it == report.records.end()) {
        throw LookupError("no sample with id " + std::to_string(sample_id) + " in " + report_path);
      }
      out << render_trace(*it);
      return kOk;
    }

    cfg.selection = parse_selection(selection);
    cfg.mwsaa_strategy = parse_mwsaa_strategy(strategy);

    if (*atk) {
      cfg.method = parse_method(method);
      if (!format.empty() && format != "json" && format != "markdown") {
        throw UsageError("--format must be json or markdown");
      }
      if (format == "json") as_json = true;
      const bool has_text = atk->count("--text") > 0;
      const bool has_file = atk->count("--file") > 0;
      if (has_text == has_file) throw UsageError("give exactly one of --text or --file");
      const std::string text = has_text ? attack_text : read_file(attack_file);
      cfg.validate();
      banner(err, "attack", effective_config(cfg, paths, victim_spec));
      const auto res = load_resources(paths);
      const auto victim = open_victim(victim_spec);
      const auto result = attack(*victim, res->view(), text, cfg, 0);
      if (as_json) {
        out << to_json(result).dump(2) << "\n";
      } else {
        out << render_attack(result);
      }
      if (result.status == AttackStatus::query_error) {
        err << "victim error: " << result.error << "\n";
        return kVictimError;
      }
      return kOk;
    }

    // evaluate
    const auto methods = split_list(method);
    if (methods.empty()) throw UsageError("--method needs at least one method");
    std::vector<Method> parsed;
    for (const auto& m : methods) parsed.push_back(parse_method(m));
    bool want_json = false, want_md = false;
    for (const auto& f : split_list(eval_format)) {
      if (f == "json") {
        want_json = true;
      } else if (f == "markdown") {
        want_md = true;
      } else {
        throw UsageError("--format entries must be json or markdown, got '" + f + "'");
      }
    }
    cfg.validate();
    auto echo = effective_config(cfg, paths, victim_spec);
    echo["method"] = method;
    echo["dataset"] = eval_dataset;
    echo["samples"] = eval_opt.sample_limit;
    echo["workers"] = eval_opt.workers;
    echo["attack_all"] = eval_opt.attack_all;
    banner(err, "evaluate", echo);

    const auto corpus = load_dataset(eval_dataset);
    const auto res = load_resources(paths);
    const auto victim = open_victim(victim_spec);
    std::filesystem::create_directories(out_dir);

    std::vector<EvalReport> reports;
    std::size_t errors = 0;
    for (Method m : parsed) {
      AttackConfig run_cfg = cfg;
      run_cfg.method = m;
      EvalReport report = run_evaluation(*victim, res->view(), corpus, run_cfg, eval_opt);
      report.victim = victim_spec.victim;
      report.dataset = std::filesystem::path(eval_dataset).filename().string();
      report.config["victim"] = victim_spec.victim;
      report.config["wordnet"] = paths.wordnet;
      report.config["embeddings"] = paths.embeddings;
      report.config["stopwords"] = paths.stopwords.empty() ? "builtin" : paths.stopwords;
      const auto stem = std::filesystem::path(out_dir) / ("report_" + report.method);
      if (want_json) emit_report(report, ReportFormat::json, stem.string() + ".json");
      if (want_md) emit_report(report, ReportFormat::markdown, stem.string() + ".md");
      const auto& a = report.aggregates;
      out << report.method << ": attacked " << a.attacked_count << ", succeeded " << a.success_count
          << ", success rate " << format_percent(a.attack_success_rate) << ", clean accuracy "
          << format_percent(a.clean_accuracy) << ", accuracy under attack " << format_percent(a.accuracy_under_attack)
          << "\n";
      errors += a.error_count;
      reports.push_back(std::move(report));
    }
    if (reports.size() > 1) {
      write_text_file(std::filesystem::path(out_dir) / "comparison.md", comparison_markdown(reports));
    }
    out << "reports written to " << out_dir << "\n";
    if (errors > 0) {
      err << errors << " sample(s) failed with victim errors\n";
      return kVictimError;
    }
    return kOk;
  } catch (const LookupError& e) {
    err << "error: " << e.what() << "\n";
    return kLookupError;
  } catch (const QueryError& e) {
    err << "victim error: " << e.what() << "\n";
    return kVictimError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kDataError;
  }
}

}  // namespace advtext::cli

#endif  // ADVTEXT_TOOLS_CLI_HPP
