#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <random>

#include "advtext/wordnet.hpp"
#include "support.hpp"

using namespace advtext;
using testing_support::TempDir;

namespace {

const char* kLicense = "  1 This software and database is being provided to you, the LICENSEE, by\n"
                       "  2 Princeton University under the following license.\n";

// Hand-written database in WordNet format. Offsets only need to be
// consistent between index and data files.
void write_mini_db(const TempDir& dir) {
  dir.write("data.noun", std::string(kLicense) +
                             "00000100 05 n 03 dog 0 domestic_dog 0 Canis_familiaris 0 001 @ 00000200 n 0000 | a pet\n"
                             "00000200 05 n 02 canine 0 canid 0 000 | a carnivore\n"
                             "00000300 04 n 02 labour 0 toil 0 000 | work\n"
                             "00000400 04 n 01 goose 0 000 | a bird\n");
  dir.write("index.noun", std::string(kLicense) +
                              "canid n 1 0 1 0 00000200\n"
                              "canine n 1 0 1 0 00000200\n"
                              "canis_familiaris n 1 0 1 0 00000100\n"
                              "dog n 1 1 @ 1 0 00000100\n"
                              "domestic_dog n 1 0 1 0 00000100\n"
                              "goose n 1 0 1 0 00000400\n"
                              "labour n 1 0 1 0 00000300\n"
                              "toil n 1 0 1 0 00000300\n");
  dir.write("noun.exc", "geese goose\n");
  dir.write("data.verb", std::string(kLicense) + "00000500 30 v 02 toil 0 labour 0 000 00 | work hard\n"
                                                 "00000600 30 v 01 race 0 000 00 | run fast\n");
  dir.write("index.verb", "labour v 1 0 1 0 00000500\nrace v 1 0 1 0 00000600\ntoil v 1 0 1 0 00000500\n");
  dir.write("verb.exc", "ran run\n");
  dir.write("data.adj", std::string(kLicense) + "00000700 00 a 02 big(a) 0 large 0 000 | of size\n"
                                                "00000800 00 s 01 Huge 0 000 | very big\n");
  dir.write("index.adj", "big a 1 0 1 0 00000700\nhuge a 1 0 1 0 00000800\nlarge a 1 0 1 0 00000700\n");
  dir.write("adj.exc", "bigger big\n");
  dir.write("data.adv", "");
  dir.write("index.adv", "");
  dir.write("adv.exc", "");
}

LexicalDb bundled() {
  static const LexicalDb db = LexicalDb::load(testing_support::data_dir() / "wordnet");
  return db;
}

}  // namespace

TEST(WordNetLoad, MiniDatabase) {
  TempDir dir;
  write_mini_db(dir);
  const auto db = LexicalDb::load(dir.path());
  EXPECT_EQ(db.synset_count(PosTag::noun), 4u);
  EXPECT_EQ(db.synset_count(PosTag::verb), 2u);
  EXPECT_EQ(db.synset_count(PosTag::adjective), 2u);
  EXPECT_EQ(db.synset_count(PosTag::adverb), 0u);
  ASSERT_NE(db.synset(PosTag::noun, 100), nullptr);
  EXPECT_EQ(*db.synset(PosTag::noun, 100), (std::vector<std::string>{"dog", "domestic_dog", "canis_familiaris"}));
  // the pointer count shifts where the offsets start
  EXPECT_EQ(std::vector<LexicalDb::Offset>(db.synset_offsets("dog", PosTag::noun).begin(),
                                           db.synset_offsets("dog", PosTag::noun).end()),
            std::vector<LexicalDb::Offset>{100});
  // adjective markers are stripped and members lowercased
  EXPECT_EQ(*db.synset(PosTag::adjective, 700), (std::vector<std::string>{"big", "large"}));
  EXPECT_EQ(*db.synset(PosTag::adjective, 800), (std::vector<std::string>{"huge"}));
}

TEST(WordNetLoad, MissingFileIsNamed) {
  TempDir dir;
  write_mini_db(dir);
  std::filesystem::remove(dir / "data.verb");
  try {
    LexicalDb::load(dir.path());
    FAIL() << "expected LoadError";
  } catch (const LoadError& e) {
    EXPECT_NE(std::string(e.what()).find("data.verb"), std::string::npos) << e.what();
  }
}

TEST(WordNetLoad, MalformedLinesReportLineNumbers) {
  struct Case {
    std::string file, content;
    std::size_t line;
  };
  const std::vector<Case> cases{
      {"data.noun", std::string(kLicense) + "00000100 05 n 03 dog 0 domestic_dog 0 Canis_familiaris 0 000 | x\nxyz\n",
       4},
      {"data.noun", "0000010 05 n 01 dog 0 000 | short offset\n", 1},
      {"data.noun", "00000100 05 v 01 dog 0 000 | wrong type\n", 1},
      {"data.noun", "00000100 05 n zz dog 0 000 | bad count\n", 1},
      {"data.noun", "00000100 05 n 05 dog 0 000 | truncated\n", 1},
      {"index.noun", "dog n 1 0 1 0 00000999\n", 1},  // unresolved offset
      {"index.noun", "canid n 1 0 1 0 00000200\ndog v 1 0 1 0 00000100\n", 2},
      {"index.noun", "dog n 3 0 3 0 00000100\n", 1},
      {"noun.exc", "geese goose\nlonely\n", 2},
  };
  for (const auto& c : cases) {
    TempDir dir;
    write_mini_db(dir);
    dir.write(c.file, c.content);
    try {
      LexicalDb::load(dir.path());
      ADD_FAILURE() << "expected ParseError for " << c.file << ": " << c.content;
    } catch (const ParseError& e) {
      EXPECT_EQ(e.file(), c.file);
      EXPECT_EQ(e.line(), c.line) << e.what();
    }
  }
}

TEST(WordNetLoad, Deterministic) {
  TempDir dir;
  write_mini_db(dir);
  EXPECT_TRUE(LexicalDb::load(dir.path()) == LexicalDb::load(dir.path()));
  EXPECT_TRUE(LexicalDb::load(testing_support::data_dir() / "wordnet") == bundled());
}

TEST(Lemmatize, MiniDatabaseRules) {
  TempDir dir;
  write_mini_db(dir);
  const auto db = LexicalDb::load(dir.path());
  using S = std::set<std::string>;
  EXPECT_EQ(db.lemmatize("dogs", PosTag::noun), S{"dog"});
  EXPECT_EQ(db.lemmatize("dog", PosTag::noun), S{"dog"});
  EXPECT_EQ(db.lemmatize("geese", PosTag::noun), S{"goose"});   // exception list
  EXPECT_EQ(db.lemmatize("gooses", PosTag::noun), S{"goose"});  // s -> ""
  EXPECT_TRUE(db.lemmatize("ran", PosTag::verb).empty());      // "run" is not indexed
  EXPECT_EQ(db.lemmatize("raced", PosTag::verb), S{"race"});    // ed -> e
  EXPECT_EQ(db.lemmatize("racing", PosTag::verb), S{"race"});   // ing -> e
  EXPECT_EQ(db.lemmatize("toils", PosTag::verb), S{"toil"});
  EXPECT_EQ(db.lemmatize("toiled", PosTag::verb), S{"toil"});   // ed -> ""
  EXPECT_EQ(db.lemmatize("bigger", PosTag::adjective), S{"big"});
  EXPECT_EQ(db.lemmatize("larger", PosTag::adjective), S{"large"});  // er -> e
  EXPECT_EQ(db.lemmatize("hugest", PosTag::adjective), S{"huge"});   // est -> e
  EXPECT_EQ(db.lemmatize("qqqq", PosTag::noun), S{});
}

TEST(Lemmatize, BundledExamples) {
  const auto db = bundled();
  using S = std::set<std::string>;
  EXPECT_EQ(db.lemmatize("dogs", PosTag::noun), S{"dog"});
  EXPECT_EQ(db.lemmatize("dog", PosTag::noun), S{"dog"});
  EXPECT_EQ(db.lemmatize("qqqq", PosTag::noun), S{});
  EXPECT_EQ(db.lemmatize("better", PosTag::adjective).count("good"), 1u);
}

TEST(Synonyms, MiniDatabase) {
  TempDir dir;
  write_mini_db(dir);
  const auto db = LexicalDb::load(dir.path());
  using S = std::set<std::string>;
  EXPECT_EQ(db.synonyms("dog"), S{});  // both other members are multiword
  EXPECT_EQ(db.synonyms("dog", true), (S{"canis_familiaris", "domestic_dog"}));
  EXPECT_EQ(db.synonyms("labour"), S{"toil"});  // noun and verb synsets unioned
  EXPECT_EQ(db.synonyms("big"), S{"large"});
  EXPECT_EQ(db.synonyms("nothing"), S{});
}

TEST(Synonyms, BundledExamples) {
  const auto db = bundled();
  EXPECT_TRUE(db.synonyms("qqqq").empty());
  EXPECT_EQ(db.synonyms("dog").count("dog"), 0u);
  EXPECT_FALSE(db.synonyms("dog").empty());
  EXPECT_EQ(db.synonyms("labour").count("toil"), 1u);
  EXPECT_EQ(db.synonyms("dog", true).count("domestic_dog"), 1u);
  for (const auto& s : db.synonyms("dog")) EXPECT_FALSE(is_multiword(s)) << s;
}

TEST(WordNetBundled, EveryPosPopulatedAndIndexResolves) {
  const auto db = bundled();
  for (PosTag pos : kAllPos) {
    EXPECT_GT(db.synset_count(pos), 0u) << pos_file_name(pos);
    for (const auto& lemma : db.lemmas(pos)) {
      for (auto off : db.synset_offsets(lemma, pos)) ASSERT_NE(db.synset(pos, off), nullptr) << lemma;
    }
  }
}

// Property: lemmatize output is a subset of the indexed lemmas for that pos.
TEST(WordNetProperties, LemmatizeOutputIsIndexed) {
  const auto db = bundled();
  const std::vector<std::string> suffixes{"", "s", "es", "ies", "ed", "ing", "er", "est", "ches", "xes"};
  for (PosTag pos : kAllPos) {
    for (const auto& lemma : db.lemmas(pos)) {
      for (const auto& suf : suffixes) {
        for (const auto& l : db.lemmatize(lemma + suf, pos)) ASSERT_TRUE(db.indexed(l, pos)) << l;
      }
    }
  }
}

// Property: shared-synset synonymy is symmetric between single-word indexed lemmas.
TEST(WordNetProperties, SynonymSymmetryOnBundledSlice) {
  const auto db = bundled();
  std::set<std::string> all;
  for (PosTag pos : kAllPos) {
    for (auto& l : db.lemmas(pos)) {
      if (l.find_first_of("_ -") == std::string::npos) all.insert(l);
    }
  }
  for (const auto& a : all) {
    for (const auto& b : db.synonyms(a)) {
      ASSERT_EQ(db.synonyms(b).count(a), 1u) << a << " -> " << b;
    }
  }
}

// Checks against a full WordNet 3.x installation when ADVTEXT_WORDNET_DIR is set.
class FullWordNet : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    const char* dir = std::getenv("ADVTEXT_WORDNET_DIR");
    if (dir && *dir) db_ = std::make_unique<LexicalDb>(LexicalDb::load(dir));
  }
  void SetUp() override {
    if (!db_) GTEST_SKIP() << "ADVTEXT_WORDNET_DIR not set";
  }
  static std::unique_ptr<LexicalDb> db_;
};
std::unique_ptr<LexicalDb> FullWordNet::db_;

TEST_F(FullWordNet, SynsetCountsMatchDataLineCounts) {
  const std::filesystem::path dir = std::getenv("ADVTEXT_WORDNET_DIR");
  for (PosTag pos : kAllPos) {
    std::ifstream in(dir / ("data." + std::string(pos_file_name(pos))));
    std::size_t expected = 0;
    std::string line;
    while (std::getline(in, line)) expected += !line.empty() && line[0] != ' ';
    EXPECT_GT(expected, 0u);
    EXPECT_EQ(db_->synset_count(pos), expected) << pos_file_name(pos);
  }
}

TEST_F(FullWordNet, KnownEntries) {
  EXPECT_EQ(db_->synonyms("dog", true).count("domestic_dog"), 1u);
  EXPECT_EQ(db_->synonyms("labour").count("toil"), 1u);
  EXPECT_EQ(db_->lemmatize("dogs", PosTag::noun), std::set<std::string>{"dog"});
  EXPECT_EQ(db_->lemmatize("geese", PosTag::noun), std::set<std::string>{"goose"});
}

TEST_F(FullWordNet, SynonymSymmetryOnSampledLemmas) {
  std::vector<std::string> pool;
  for (PosTag pos : kAllPos) {
    for (auto& l : db_->lemmas(pos)) {
      if (!is_multiword(l)) pool.push_back(l);
    }
  }
  std::mt19937_64 rng(5);
  std::shuffle(pool.begin(), pool.end(), rng);
  pool.resize(std::min<std::size_t>(pool.size(), 500));
  for (const auto& a : pool) {
    for (const auto& b : db_->synonyms(a)) ASSERT_EQ(db_->synonyms(b).count(a), 1u) << a << " -> " << b;
  }
}
