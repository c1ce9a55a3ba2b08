// Serves a naive Bayes model over the victim HTTP protocol, then attacks
// through it with RemoteVictim, as a stand-in for a hosted model.
//   advtext_demo_http [text]

#include <iostream>
#include <thread>

#include "advtext/advtext.hpp"

int main(int argc, char** argv) {
  using namespace advtext;
  using nlohmann::json;
  const std::filesystem::path data = ADVTEXT_DEMO_DATA_DIR;
  const std::string text = argc > 1 ? argv[1] : "An excellent cast and a clever plot.";

  const auto train = load_dataset(data / "toy" / "train.csv");
  std::vector<NaiveBayes::Example> examples;
  for (const auto& s : train.samples) examples.push_back({s.text, s.label});
  const auto nb = NaiveBayes::train(examples);

  httplib::Server svr;
  svr.Get("/meta", [&](const httplib::Request&, httplib::Response& res) {
    res.set_content(json{{"name", "toy-nb"}, {"labels", nb.labels()}}.dump(), "application/json");
  });
  svr.Post("/predict", [&](const httplib::Request& req, httplib::Response& res) {
    json rows = json::array();
    for (const auto& t : json::parse(req.body).at("texts").get<std::vector<std::string>>()) {
      rows.push_back(nb.predict_proba(t).probs);
    }
    res.set_content(json{{"probs", rows}}.dump(), "application/json");
  });
  const int port = svr.bind_to_any_port("127.0.0.1");
  std::thread server([&] { svr.listen_after_bind(); });
  svr.wait_until_ready();

  {
    const RemoteVictim remote("http://127.0.0.1:" + std::to_string(port));
    const auto db = LexicalDb::load(data / "wordnet");
    const auto store = EmbeddingStore::load(data / "embeddings" / "toy-vectors.txt");
    const auto result = attack(remote, AttackResources{db, store}, text, AttackConfig{});
    std::cout << "victim: " << remote.name() << "\n" << render_attack(result);
  }
  svr.stop();
  server.join();
}
