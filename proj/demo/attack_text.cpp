// Trains the toy victim in memory and attacks one sentence with both methods.
//   advtext_demo_attack [text]

#include <iostream>

#include "advtext/advtext.hpp"

int main(int argc, char** argv) {
  using namespace advtext;
  const std::filesystem::path data = ADVTEXT_DEMO_DATA_DIR;
  const std::string text = argc > 1 ? argv[1] : "A truly wonderful film with a moving story.";

  const auto train = load_dataset(data / "toy" / "train.csv");
  std::vector<NaiveBayes::Example> examples;
  for (const auto& s : train.samples) examples.push_back({s.text, s.label});
  const auto victim = NaiveBayes::train(examples);

  const auto db = LexicalDb::load(data / "wordnet");
  const auto store = EmbeddingStore::load(data / "embeddings" / "toy-vectors.txt");

  for (Method m : {Method::pwws, Method::mwsaa}) {
    AttackConfig cfg;
    cfg.method = m;
    const auto result = attack(victim, AttackResources{db, store}, text, cfg);
    std::cout << "== " << to_string(m) << "\n" << render_attack(result);
  }
}
