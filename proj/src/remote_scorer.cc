#include "ctparse/remote_scorer.h"

#include <cmath>
#include <thread>

#include <fmt/format.h>
#include <httplib.h>
#include <spdlog/spdlog.h>

namespace ctparse {

using nlohmann::json;

namespace protocol {

json ScoreRequest(std::span<const Sentence> batch) {
  json sentences = json::array();
  for (const auto &s : batch) sentences.push_back(s.tokens());
  return {{"sentences", std::move(sentences)}};
}

std::vector<double> ParseScoreResponse(const json &body, std::size_t expected) {
  if (!body.is_object() || !body.contains("probabilities") ||
      !body["probabilities"].is_array()) {
    throw ProtocolError("score response lacks a 'probabilities' array");
  }
  const auto &arr = body["probabilities"];
  if (arr.size() != expected) {
    throw ProtocolError(fmt::format("score response has {} probabilities for {} sentences",
                                    arr.size(), expected));
  }
  std::vector<double> out;
  out.reserve(arr.size());
  for (const auto &v : arr) {
    if (!v.is_number()) throw ProtocolError("non-numeric probability in score response");
    double p = v.get<double>();
    if (!std::isfinite(p) || p < 0.0 || p > 1.0) {
      throw ProtocolError(fmt::format("probability {} outside [0,1]", p));
    }
    out.push_back(p);
  }
  return out;
}

json TrainRequest(std::span<const LabeledExample> examples,
                  std::optional<double> learning_rate) {
  json arr = json::array();
  for (const auto &ex : examples) {
    arr.push_back({{"tokens", ex.tokens.tokens()}, {"label", ex.label}});
  }
  json body = {{"examples", std::move(arr)}};
  if (learning_rate) body["learning_rate"] = *learning_rate;
  return body;
}

TrainResponse ParseTrainResponse(const json &body) {
  if (!body.is_object() || !body.contains("loss") || !body["loss"].is_number() ||
      !body.contains("steps") || !body["steps"].is_number_integer()) {
    throw ProtocolError("train response needs numeric 'loss' and integer 'steps'");
  }
  TrainResponse r{body["loss"].get<double>(), body["steps"].get<long>()};
  if (!std::isfinite(r.loss)) throw ProtocolError("train response loss is not finite");
  return r;
}

Info ParseInfo(const json &body) {
  if (!body.is_object() || !body.contains("max_batch") ||
      !body["max_batch"].is_number_unsigned()) {
    throw ProtocolError("info response needs an unsigned 'max_batch'");
  }
  Info info;
  info.model = body.value("model", "");
  info.max_batch = body["max_batch"].get<std::size_t>();
  info.version = body.contains("version") ? body["version"].dump() : "";
  return info;
}

namespace {

Sentence TokensFromJson(const json &toks) {
  if (!toks.is_array()) throw ProtocolError("sentence is not a token array");
  std::vector<std::string> out;
  for (const auto &t : toks) {
    if (!t.is_string()) throw ProtocolError("token is not a string");
    out.push_back(t.get<std::string>());
  }
  try {
    return Sentence(std::move(out));
  } catch (const InputError &e) {
    throw ProtocolError(e.what());
  }
}

}  // namespace

std::vector<Sentence> ParseScoreRequest(const json &body) {
  if (!body.is_object() || !body.contains("sentences") || !body["sentences"].is_array()) {
    throw ProtocolError("score request lacks a 'sentences' array");
  }
  std::vector<Sentence> out;
  for (const auto &s : body["sentences"]) out.push_back(TokensFromJson(s));
  return out;
}

std::vector<LabeledExample> ParseTrainRequest(const json &body,
                                              std::optional<double> *learning_rate) {
  if (!body.is_object() || !body.contains("examples") || !body["examples"].is_array()) {
    throw ProtocolError("train request lacks an 'examples' array");
  }
  std::vector<LabeledExample> out;
  for (const auto &e : body["examples"]) {
    if (!e.is_object() || !e.contains("tokens") || !e.contains("label") ||
        !e["label"].is_number_integer()) {
      throw ProtocolError("train example needs 'tokens' and integer 'label'");
    }
    int label = e["label"].get<int>();
    if (label != 0 && label != 1) throw ProtocolError("label must be 0 or 1");
    out.push_back({TokensFromJson(e["tokens"]), label, "remote", std::nullopt, std::nullopt});
  }
  if (learning_rate) {
    if (body.contains("learning_rate") && body["learning_rate"].is_number()) {
      *learning_rate = body["learning_rate"].get<double>();
    } else {
      *learning_rate = std::nullopt;
    }
  }
  return out;
}

}  // namespace protocol

RemoteScorer::RemoteScorer(std::string url, RemoteScorerOptions options)
    : url_(std::move(url)), options_(options) {
  auto scheme_end = url_.find("://");
  if (scheme_end == std::string::npos) {
    throw InputError(fmt::format("scorer url '{}' lacks a scheme", url_));
  }
  auto path_start = url_.find('/', scheme_end + 3);
  host_ = url_.substr(0, path_start);
  if (path_start != std::string::npos) {
    prefix_ = url_.substr(path_start);
    while (!prefix_.empty() && prefix_.back() == '/') prefix_.pop_back();
  }
  if (options_.batch_size == 0) throw InputError("score batch size must be positive");
}

json RemoteScorer::Post(const std::string &path, const json &body,
                        std::span<const Sentence> for_error) const {
  const std::string payload = body.dump();
  std::string last_error;
  for (int attempt = 0; attempt <= options_.retries; ++attempt) {
    if (attempt > 0) std::this_thread::sleep_for(options_.backoff * attempt);
    httplib::Client cli(host_);
    cli.set_connection_timeout(options_.timeout);
    cli.set_read_timeout(options_.timeout);
    cli.set_write_timeout(options_.timeout);
    auto res = cli.Post(prefix_ + path, payload, "application/json");
    if (!res) {
      last_error = httplib::to_string(res.error());
      spdlog::warn("POST {}{} failed (attempt {}): {}", url_, path, attempt + 1, last_error);
      continue;
    }
    if (res->status == 200) {
      try {
        return json::parse(res->body);
      } catch (const json::exception &e) {
        throw ProtocolError(fmt::format("invalid JSON from {}{}: {}", url_, path, e.what()));
      }
    }
    last_error = fmt::format("HTTP {}: {}", res->status, res->body);
    // 4xx other than 409 (busy) will not succeed on retry.
    if (res->status >= 400 && res->status < 500 && res->status != 409) break;
    spdlog::warn("POST {}{} returned {} (attempt {})", url_, path, res->status, attempt + 1);
  }
  throw RemoteScorerError(fmt::format("remote scorer {}{} failed: {}", url_, path, last_error),
                          std::vector<Sentence>(for_error.begin(), for_error.end()));
}

protocol::Info RemoteScorer::Info() const {
  httplib::Client cli(host_);
  cli.set_connection_timeout(options_.timeout);
  cli.set_read_timeout(options_.timeout);
  auto res = cli.Get(prefix_ + "/v1/info");
  if (!res || res->status != 200) {
    throw RemoteScorerError(fmt::format("remote scorer {}/v1/info unavailable", url_), {});
  }
  try {
    return protocol::ParseInfo(json::parse(res->body));
  } catch (const json::exception &e) {
    throw ProtocolError(fmt::format("invalid JSON from /v1/info: {}", e.what()));
  }
}

std::size_t RemoteScorer::EffectiveBatch() const {
  std::call_once(info_once_, [&] {
    try {
      server_max_batch_ = Info().max_batch;
    } catch (const std::exception &e) {
      spdlog::warn("could not read /v1/info ({}); using batch size {}", e.what(),
                   options_.batch_size);
      server_max_batch_ = 0;
    }
  });
  if (server_max_batch_ > 0) return std::min(options_.batch_size, server_max_batch_);
  return options_.batch_size;
}

std::vector<double> RemoteScorer::ScoreSentences(std::span<const Sentence> batch) const {
  std::vector<double> out;
  out.reserve(batch.size());
  const std::size_t chunk = EffectiveBatch();
  for (std::size_t i = 0; i < batch.size(); i += chunk) {
    auto part = batch.subspan(i, std::min(chunk, batch.size() - i));
    json res = Post("/v1/score", protocol::ScoreRequest(part), part);
    auto probs = protocol::ParseScoreResponse(res, part.size());
    out.insert(out.end(), probs.begin(), probs.end());
  }
  return out;
}

double RemoteScorer::Train(std::span<const LabeledExample> batch, double lr) {
  if (batch.empty()) throw std::invalid_argument("empty training batch");
  std::vector<Sentence> sents;
  for (const auto &ex : batch) sents.push_back(ex.tokens);
  json res = Post("/v1/train", protocol::TrainRequest(batch, lr), sents);
  return protocol::ParseTrainResponse(res).loss;
}

}  // namespace ctparse
