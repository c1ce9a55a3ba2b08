#include <gtest/gtest.h>

#include <sstream>

#include "cli.hpp"
#include "support.hpp"

using namespace advtext;
using testing_support::TempDir;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run_cli(std::move(args), out, err);
  return {code, out.str(), err.str()};
}

std::string toy(const std::string& name) { return (testing_support::data_dir() / "toy" / name).string(); }

// A trained toy victim shared by the tests in this file.
const std::string& victim_path() {
  static TempDir dir;
  static const std::string path = [] {
    const auto p = (dir / "nb.model").string();
    const auto r = run({"train-victim", "--dataset", toy("train.csv"), "--out", p});
    if (r.code != 0) throw std::runtime_error(r.err);
    return p;
  }();
  return path;
}

}  // namespace

TEST(CliTrain, WritesLoadableModelAndIsReproducible) {
  TempDir dir;
  const auto a = (dir / "a.model").string(), b = (dir / "b.model").string();
  const auto r = run({"train-victim", "--dataset", toy("train.csv"), "--out", a});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("trained naive Bayes on 800 examples"), std::string::npos) << r.out;
  ASSERT_EQ(run({"train-victim", "--dataset", toy("train.csv"), "--out", b}).code, 0);
  EXPECT_EQ(testing_support::slurp(a), testing_support::slurp(b));
  EXPECT_EQ(NaiveBayes::load(a).labels(), (std::vector<std::string>{"neg", "pos"}));
}

TEST(CliTrain, DataErrorsExitTwo) {
  TempDir dir;
  const auto one = dir.write("one.csv", "text,label\ngood,pos\nfine,pos\n");
  EXPECT_EQ(run({"train-victim", "--dataset", one.string(), "--out", (dir / "m").string()}).code, 2);
  const auto bad = dir.write("bad.csv", "text,label\n\"open,pos\n");
  const auto r = run({"train-victim", "--dataset", bad.string(), "--out", (dir / "m").string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("bad.csv:2"), std::string::npos) << r.err;
  EXPECT_EQ(run({"train-victim", "--dataset", (dir / "none.csv").string(), "--out", "x"}).code, 2);
}

TEST(CliParse, UsageErrorsAndHelp) {
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"frobnicate"}).code, 2);
  EXPECT_EQ(run({"attack", "--text", "x"}).code, 2);  // --victim missing
  EXPECT_EQ(run({"attack", "--victim", "nb:" + victim_path()}).code, 2);  // neither --text nor --file
  EXPECT_EQ(run({"attack", "--victim", "nb:" + victim_path(), "--text", "x", "--method", "bogus"}).code, 2);
  EXPECT_EQ(run({"attack", "--victim", "nb:" + victim_path(), "--text", "x", "--top-k", "0"}).code, 2);
  const auto help = run({"--help"});
  EXPECT_EQ(help.code, 0);
  EXPECT_NE(help.out.find("evaluate"), std::string::npos);
}

TEST(CliAttack, HumanAndJsonOutputAgree) {
  const std::vector<std::string> base{"attack", "--victim", "nb:" + victim_path(), "--text",
                                      "A truly wonderful and moving film"};
  const auto human = run(base);
  ASSERT_EQ(human.code, 0) << human.err;
  EXPECT_NE(human.err.find("advtext attack config: {"), std::string::npos);
  EXPECT_NE(human.out.find("status: success"), std::string::npos) << human.out;
  EXPECT_NE(human.out.find(" (wonderful)"), std::string::npos) << human.out;

  auto args = base;
  args.push_back("--json");
  const auto js = run(args);
  ASSERT_EQ(js.code, 0);
  const auto result = attack_result_from_json(nlohmann::ordered_json::parse(js.out));
  EXPECT_EQ(render_attack(result), human.out);
}

TEST(CliAttack, FileInputAndEmptyText) {
  TempDir dir;
  const auto f = dir.write("t.txt", "A truly wonderful and moving film");
  const auto r = run({"attack", "--victim", "nb:" + victim_path(), "--file", f.string(), "--format", "json"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(nlohmann::json::parse(r.out)["status"], "success");

  const auto empty = run({"attack", "--victim", "nb:" + victim_path(), "--text", "", "--json"});
  EXPECT_EQ(empty.code, 0) << empty.err;
  EXPECT_EQ(nlohmann::json::parse(empty.out)["status"], "skipped_nothing_attackable");
  EXPECT_EQ(run({"attack", "--victim", "nb:" + victim_path(), "--text", "x", "--file", f.string()}).code, 2);
}

TEST(CliAttack, UnreachableHttpVictimExitsThree) {
  const auto r = run({"attack", "--victim", "http://127.0.0.1:9", "--timeout-ms", "300", "--text", "good film"});
  EXPECT_EQ(r.code, 3) << r.err;
  EXPECT_NE(r.err.find("victim error"), std::string::npos);
}

TEST(CliAttack, ConfigFileWithFlagPrecedence) {
  TempDir dir;
  const auto cfg = dir.write("run.cfg", "# shared settings\n[attack]\ntop_k = 3\nsim-threshold = 0.9\nseed = 7\n");
  const auto r = run({"attack", "--config", cfg.string(), "--victim", "nb:" + victim_path(), "--text", "good film",
                      "--seed", "9"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto line = r.err.substr(0, r.err.find('\n'));
  const auto echo = nlohmann::json::parse(line.substr(line.find('{')));
  EXPECT_EQ(echo["top_k"], 3);
  EXPECT_EQ(echo["sim_threshold"], 0.9);
  EXPECT_EQ(echo["seed"], 9);

  const auto bad = dir.write("bad.cfg", "top_k\n");
  EXPECT_EQ(run({"attack", "--config", bad.string(), "--victim", "nb:" + victim_path(), "--text", "x"}).code, 2);
  const auto unknown = dir.write("unknown.cfg", "colour = red\n");
  EXPECT_EQ(run({"attack", "--config", unknown.string(), "--victim", "nb:" + victim_path(), "--text", "x"}).code, 2);
}

TEST(CliEvaluate, WritesReportsAndComparison) {
  TempDir dir;
  const auto out = (dir / "reports").string();
  const auto r = run({"evaluate", "--victim", "nb:" + victim_path(), "--dataset", toy("test.csv"), "--samples", "10",
                      "--method", "pwws,mwsaa", "--out", out});
  ASSERT_EQ(r.code, 0) << r.err;
  for (const char* f : {"report_pwws.json", "report_pwws.md", "report_mwsaa.json", "report_mwsaa.md", "comparison.md"}) {
    EXPECT_TRUE(std::filesystem::exists(dir / "reports" / f)) << f;
  }
  const auto rep = load_report(dir / "reports" / "report_mwsaa.json");
  EXPECT_LE(rep.records.size(), 10u);
  EXPECT_EQ(rep.method, "mwsaa");
  EXPECT_EQ(rep.config["victim"], "nb:" + victim_path());
  EXPECT_EQ(rep.config["stopwords"], "builtin");
  EXPECT_NE(testing_support::slurp(dir / "reports" / "comparison.md").find("| PWWS | MWSAA |"), std::string::npos);

  const auto json_only = (dir / "j").string();
  ASSERT_EQ(run({"evaluate", "--victim", "nb:" + victim_path(), "--dataset", toy("test.csv"), "--samples", "2",
                 "--format", "json", "--out", json_only})
                .code,
            0);
  EXPECT_TRUE(std::filesystem::exists(dir / "j" / "report_pwws.json"));
  EXPECT_FALSE(std::filesystem::exists(dir / "j" / "report_pwws.md"));
  EXPECT_FALSE(std::filesystem::exists(dir / "j" / "comparison.md"));
}

TEST(CliEvaluate, DeterministicApartFromElapsed) {
  TempDir dir;
  std::vector<nlohmann::json> runs;
  for (const char* sub : {"a", "b"}) {
    const auto out = (dir / sub).string();
    ASSERT_EQ(run({"evaluate", "--victim", "nb:" + victim_path(), "--dataset", toy("test.csv"), "--samples", "25",
                   "--selection", "randomized", "--workers", sub == std::string("a") ? "1" : "3", "--out", out})
                  .code,
              0);
    auto j = nlohmann::json::parse(testing_support::slurp(dir / sub / "report_pwws.json"));
    testing_support::strip_elapsed(j);
    j["config"].erase("workers");
    runs.push_back(std::move(j));
  }
  EXPECT_EQ(runs[0], runs[1]);
}

TEST(CliInspect, TraceAndUnknownId) {
  TempDir dir;
  const auto out = (dir / "r").string();
  ASSERT_EQ(run({"evaluate", "--victim", "nb:" + victim_path(), "--dataset", toy("test.csv"), "--samples", "5",
                 "--out", out})
                .code,
            0);
  const auto report = (dir / "r" / "report_pwws.json").string();
  const auto ok = run({"inspect", report, "2"});
  EXPECT_EQ(ok.code, 0) << ok.err;
  EXPECT_NE(ok.out.find("sample 2"), std::string::npos);
  EXPECT_TRUE(ok.out.find("query timeline") != std::string::npos || ok.out.find("not attacked") != std::string::npos);
  const auto missing = run({"inspect", report, "999"});
  EXPECT_EQ(missing.code, 4);
  EXPECT_NE(missing.err.find("no sample with id 999"), std::string::npos);
  EXPECT_EQ(run({"inspect", (dir / "none.json").string(), "0"}).code, 2);
}
