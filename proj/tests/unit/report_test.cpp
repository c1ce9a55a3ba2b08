#include <gtest/gtest.h>

#include "advtext/report.hpp"
#include "support.hpp"

using namespace advtext;
using testing_support::TempDir;

namespace {

EvalReport small_report(Method m) {
  static const auto db = LexicalDb::load(testing_support::data_dir() / "wordnet");
  static const auto store = EmbeddingStore::load(testing_support::data_dir() / "embeddings" / "toy-vectors.txt");
  static const auto train = load_dataset(testing_support::data_dir() / "toy" / "train.csv");
  static const auto test = load_dataset(testing_support::data_dir() / "toy" / "test.csv");
  static const auto nb = [] {
    std::vector<NaiveBayes::Example> ex;
    for (const auto& s : train.samples) ex.push_back({s.text, s.label});
    return NaiveBayes::train(ex);
  }();
  AttackConfig cfg;
  cfg.method = m;
  auto rep = run_evaluation(nb, AttackResources{db, store}, test, cfg, EvalOptions{40, 1, false});
  rep.victim = "nb:toy.model";
  rep.dataset = "test.csv";
  return rep;
}

AttackResult hand_result() {
  AttackResult r;
  r.status = AttackStatus::success;
  r.original_text = "A good, good movie";
  r.adversarial_text = "A good, Sound movie";
  r.original_label = "pos";
  r.final_label = "neg";
  r.original_confidence = 0.8125;
  r.final_confidence = 0.5625;
  r.substitutions = {{3, "good", "Sound", "sound"}};
  StepTrace t;
  t.saliency_weight = 0.5;
  t.prob_drop = 0.25;
  t.sentence_sim = 0.96;
  t.order_score = 0.125;
  t.true_prob_after = 0.4375;
  t.label_after = "neg";
  t.queries_after = 9;
  r.trace = {t};
  r.queries = 9;
  r.timeline = {1, 4, 3, 1};
  r.final_similarity = 0.96;
  return r;
}

}  // namespace

TEST(ReportJson, AttackResultRoundTrip) {
  const auto r = hand_result();
  const auto j = to_json(r);
  EXPECT_EQ(j["status"], "success");
  EXPECT_EQ(j["substitutions"][0]["position"], 3);
  EXPECT_EQ(j["substitutions"][0]["prob_drop"], 0.25);
  EXPECT_EQ(j["query_timeline"]["saliency"], 4);
  EXPECT_EQ(attack_result_from_json(j), r);
}

TEST(ReportJson, EvalReportRoundTripIsByteIdentical) {
  TempDir dir;
  for (Method m : {Method::pwws, Method::mwsaa}) {
    const auto rep = small_report(m);
    const auto path = dir / "r.json";
    emit_report(rep, ReportFormat::json, path);
    const auto loaded = load_report(path);
    EXPECT_EQ(loaded, rep);
    EXPECT_EQ(render_report(loaded, ReportFormat::json), testing_support::slurp(path));
  }
}

TEST(ReportJson, NullsForEmptyDenominators) {
  EvalReport rep;
  rep.method = "pwws";
  const auto j = to_json(rep);
  EXPECT_TRUE(j["aggregates"]["attack_success_rate"].is_null());
  EXPECT_TRUE(j["aggregates"]["avg_queries"].is_null());
  EXPECT_EQ(report_from_json(j), rep);
}

TEST(ReportJson, UnattackedRecordHasNullResult) {
  SampleRecord rec;
  rec.text = "x";
  rec.gold_label = "pos";
  rec.clean_label = rec.final_label = "neg";
  const auto j = to_json(rec);
  EXPECT_TRUE(j["result"].is_null());
  EXPECT_EQ(sample_record_from_json(j), rec);
}

TEST(ReportJson, LoadErrors) {
  TempDir dir;
  EXPECT_THROW(load_report(dir / "none.json"), LoadError);
  EXPECT_THROW(load_report(dir.write("bad.json", "{not json")), LoadError);
  auto j = to_json(EvalReport{});
  j["report_version"] = 2;
  EXPECT_THROW(load_report(dir.write("v2.json", j.dump())), LoadError);
}

TEST(ReportMarkdown, SingleMethodTables) {
  const auto rep = small_report(Method::pwws);
  const auto md = to_markdown(rep);
  EXPECT_NE(md.find("| Victim Language Model | Total Attacked Instances | Successful Attacked Instances | "
                    "Attack Success Rate |"),
            std::string::npos);
  EXPECT_NE(md.find("Avg Victim Model Queries"), std::string::npos);
  EXPECT_NE(md.find("| Dataset | Model | Original | PWWS |"), std::string::npos);
  const std::string row = "| nb:toy.model | " + std::to_string(rep.aggregates.attacked_count) + " | " +
                          std::to_string(rep.aggregates.success_count) + " | " +
                          format_percent(rep.aggregates.attack_success_rate) + " |";
  EXPECT_NE(md.find(row), std::string::npos) << md;
}

TEST(ReportMarkdown, NaRendering) {
  EvalReport rep;
  rep.method = "mwsaa";
  const auto md = to_markdown(rep);
  EXPECT_NE(md.find("| 0 | 0 | n/a |"), std::string::npos) << md;
}

TEST(ReportMarkdown, ComparisonHasOneColumnPerMethod) {
  const std::vector<EvalReport> reps{small_report(Method::pwws), small_report(Method::mwsaa)};
  const auto md = comparison_markdown(reps);
  EXPECT_NE(md.find("| Dataset | Model | Original | PWWS | MWSAA |"), std::string::npos) << md;
  EXPECT_NE(md.find("## Attack Success Rate"), std::string::npos);
  const std::string asr = "| test.csv | nb:toy.model | " + format_percent(reps[0].aggregates.attack_success_rate) +
                          " | " + format_percent(reps[1].aggregates.attack_success_rate) + " |";
  EXPECT_NE(md.find(asr), std::string::npos) << md;
  EXPECT_THROW(comparison_markdown(std::span<const EvalReport>{}), UsageError);
}

TEST(Rendering, PerturbedTextMarksOriginals) {
  const auto r = hand_result();
  EXPECT_EQ(render_perturbed(r), "A good, Sound (good) movie");
  const auto text = render_attack(r);
  EXPECT_NE(text.find("status: success"), std::string::npos);
  EXPECT_NE(text.find("original prediction: pos (conf 81.25%)"), std::string::npos) << text;
  EXPECT_NE(text.find("final prediction:    neg (conf 56.25%)"), std::string::npos) << text;
  EXPECT_NE(text.find("queries: 9"), std::string::npos);
  EXPECT_NE(text.find("perturbed text: A good, Sound (good) movie"), std::string::npos);
}

TEST(Rendering, Trace) {
  SampleRecord rec;
  rec.id = 4;
  rec.text = "A good, good movie";
  rec.gold_label = rec.clean_label = "pos";
  rec.final_label = "neg";
  rec.originally_correct = rec.attacked = true;
  rec.result = hand_result();
  const auto t = render_trace(rec);
  EXPECT_NE(t.find("sample 4  gold=pos  clean=pos  final=neg"), std::string::npos) << t;
  EXPECT_NE(t.find("good -> Sound"), std::string::npos) << t;
  EXPECT_NE(t.find("+0.250000"), std::string::npos) << t;
  EXPECT_NE(t.find("initial=1 saliency=4 scoring=3 application=1 total=9"), std::string::npos) << t;

  SampleRecord wrong;
  wrong.gold_label = "pos";
  wrong.clean_label = wrong.final_label = "neg";
  const auto w = render_trace(wrong);
  EXPECT_NE(w.find("not attacked (victim already wrong)"), std::string::npos) << w;
  EXPECT_NE(w.find("no substitutions"), std::string::npos);

  SampleRecord skipped = rec;
  skipped.result = AttackResult{};
  skipped.result->status = AttackStatus::skipped_nothing_attackable;
  EXPECT_NE(render_trace(skipped).find("no substitutions"), std::string::npos);
}
