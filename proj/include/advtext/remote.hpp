#ifndef ADVTEXT_REMOTE_HPP
#define ADVTEXT_REMOTE_HPP

#include <chrono>
#include <cstddef>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "httplib.h"
#include "json.hpp"

#include "advtext/embedding.hpp"
#include "advtext/error.hpp"
#include "advtext/text.hpp"
#include "advtext/victim.hpp"

namespace advtext {

/// `scheme://host[:port]` plus an optional path prefix.
struct Endpoint {
  std::string origin;
  std::string prefix;

  static Endpoint parse(std::string_view url) {
    auto scheme = url.find("://");
    if (scheme == std::string_view::npos) throw UsageError("endpoint URL needs a scheme: " + std::string(url));
    auto slash = url.find('/', scheme + 3);
    Endpoint ep;
    ep.origin = std::string(url.substr(0, slash));
    if (slash != std::string_view::npos) ep.prefix = std::string(url.substr(slash));
    while (!ep.prefix.empty() && ep.prefix.back() == '/') ep.prefix.pop_back();
    return ep;
  }

  std::string path(std::string_view route) const { return prefix + std::string(route); }
};

namespace detail {

struct HttpOptions {
  std::chrono::milliseconds timeout{10000};
  unsigned retries = 0;
};

inline nlohmann::json http_json(const Endpoint& ep, const HttpOptions& opt, const std::string& method,
                                std::string_view route, const nlohmann::json* body) {
  const auto path = ep.path(route);
  std::string last_error;
  for (unsigned attempt = 0; attempt <= opt.retries; ++attempt) {
    httplib::Client cli(ep.origin);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(opt.timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(opt.timeout - secs);
    cli.set_connection_timeout(secs.count(), usecs.count());
    cli.set_read_timeout(secs.count(), usecs.count());
    cli.set_write_timeout(secs.count(), usecs.count());

    const auto start = std::chrono::steady_clock::now();
    auto res = method == "GET" ? cli.Get(path) : cli.Post(path, body->dump(), "application/json");
    const auto elapsed = std::chrono::steady_clock::now() - start;
    if (!res) {
      const auto err = res.error();
      const bool timed_out = err == httplib::Error::ConnectionTimeout ||
                             ((err == httplib::Error::Read || err == httplib::Error::Write) && elapsed >= opt.timeout);
      last_error = timed_out ? "timeout after " + std::to_string(opt.timeout.count()) + " ms"
                             : "transport error: " + httplib::to_string(err);
      continue;
    }
    if (res->status != 200) {
      last_error = "HTTP " + std::to_string(res->status);
      if (!res->body.empty()) last_error += ": " + res->body;
      continue;
    }
    try {
      return nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::exception& e) {
      throw QueryError(method + " " + path + ": malformed JSON response: " + e.what());
    }
  }
  throw QueryError(method + " " + ep.origin + path + ": " + last_error);
}

}  // namespace detail

/// Victim reached over HTTP: `GET /meta` for labels, `POST /predict` for
/// probabilities. Batches internally; the caller still counts one query per
/// text.
class RemoteVictim final : public Victim {
 public:
  struct Options {
    std::chrono::milliseconds timeout{10000};
    unsigned retries = 0;
    std::size_t max_batch = 32;
  };

  RemoteVictim(std::string_view url, Options opt) : endpoint_(Endpoint::parse(url)), opt_(opt) {
    if (opt_.max_batch == 0) throw UsageError("max_batch must be positive");
    const auto meta = detail::http_json(endpoint_, http_options(), "GET", "/meta", nullptr);
    try {
      name_ = meta.at("name").get<std::string>();
      labels_ = meta.at("labels").get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception& e) {
      throw QueryError("malformed /meta response: " + std::string(e.what()));
    }
    std::set<std::string> unique(labels_.begin(), labels_.end());
    if (labels_.empty() || unique.size() != labels_.size()) {
      throw QueryError("/meta labels must be non-empty and unique");
    }
  }

  explicit RemoteVictim(std::string_view url) : RemoteVictim(url, Options{}) {}

  const std::string& name() const noexcept { return name_; }
  const std::vector<std::string>& labels() const override { return labels_; }

  ProbDist predict_proba(std::string_view text) const override {
    const std::string t(text);
    return predict_batch(std::span<const std::string>(&t, 1)).front();
  }

  std::vector<ProbDist> predict_batch(std::span<const std::string> texts) const override {
    std::vector<ProbDist> out;
    out.reserve(texts.size());
    for (std::size_t at = 0; at < texts.size(); at += opt_.max_batch) {
      const auto chunk = texts.subspan(at, std::min(opt_.max_batch, texts.size() - at));
      nlohmann::json body = {{"texts", std::vector<std::string>(chunk.begin(), chunk.end())}};
      const auto res = detail::http_json(endpoint_, http_options(), "POST", "/predict", &body);
      std::vector<std::vector<double>> rows;
      try {
        rows = res.at("probs").get<std::vector<std::vector<double>>>();
      } catch (const nlohmann::json::exception& e) {
        throw QueryError("malformed /predict response: " + std::string(e.what()));
      }
      if (rows.size() != chunk.size()) {
        throw QueryError("/predict returned " + std::to_string(rows.size()) + " rows for " +
                         std::to_string(chunk.size()) + " texts");
      }
      for (auto& row : rows) {
        ProbDist d{labels_, std::move(row)};
        if (!d.valid(1e-6)) throw QueryError("/predict row is not a distribution over /meta labels");
        out.push_back(std::move(d));
      }
    }
    return out;
  }

 private:
  detail::HttpOptions http_options() const { return {opt_.timeout, opt_.retries}; }

  Endpoint endpoint_;
  Options opt_;
  std::string name_;
  std::vector<std::string> labels_;
};

/// Context encoder backed by `POST /embed`, which returns one pooled vector
/// per text. The vector for a position is the pooled encoding of the whole
/// document with the candidate spliced in.
class RemoteContextEncoder final : public ContextEncoder {
 public:
  RemoteContextEncoder(std::string_view url, std::chrono::milliseconds timeout = std::chrono::milliseconds{10000})
      : endpoint_(Endpoint::parse(url)), opt_{timeout, 0} {}

  Vector encode(const Document& doc, std::size_t index, std::optional<std::string_view> candidate) const override {
    if (index >= doc.tokens.size()) throw UsageError("token index out of range");
    std::string text = doc.source;
    if (candidate) {
      const Substitution sub{index, doc.tokens[index].surface,
                             transfer_case(doc.tokens[index].surface, *candidate), std::string(*candidate)};
      text = splice(doc, std::span<const Substitution>(&sub, 1));
    }
    {
      std::lock_guard lock(mu_);
      if (auto it = cache_.find(text); it != cache_.end()) return it->second;
    }
    nlohmann::json body = {{"texts", {text}}};
    const auto res = detail::http_json(endpoint_, opt_, "POST", "/embed", &body);
    std::vector<Vector> vectors;
    try {
      vectors = res.at("vectors").get<std::vector<Vector>>();
    } catch (const nlohmann::json::exception& e) {
      throw QueryError("malformed /embed response: " + std::string(e.what()));
    }
    if (vectors.size() != 1) throw QueryError("/embed must return one vector per text");
    std::lock_guard lock(mu_);
    return cache_.emplace(std::move(text), std::move(vectors.front())).first->second;
  }

 private:
  Endpoint endpoint_;
  detail::HttpOptions opt_;
  mutable std::mutex mu_;
  mutable std::map<std::string, Vector> cache_;
};

}  // namespace advtext

#endif  // ADVTEXT_REMOTE_HPP
