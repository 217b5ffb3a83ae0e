// HTTP client for a remote grammaticality service.
//
// Wire protocol (JSON over HTTP POST):
//   /v1/score  {"sentences": [[tok, ...], ...]}  ->  {"probabilities": [p, ...]}
//   /v1/train  {"examples": [{"tokens": [...], "label": 0|1}, ...],
//               "learning_rate": lr}             ->  {"loss": x, "steps": k}
//   /v1/info   (GET)  ->  {"model": name, "max_batch": n, "version": v}

#ifndef CTPARSE_REMOTE_SCORER_H_
#define CTPARSE_REMOTE_SCORER_H_

#include <chrono>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ctparse/scorer.h"

namespace ctparse {

// Response did not match the protocol schema.
class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Transport failed after all retries. Carries the batch so callers can
// re-queue it.
class RemoteScorerError : public std::runtime_error {
 public:
  RemoteScorerError(const std::string &what, std::vector<Sentence> batch)
      : std::runtime_error(what), batch_(std::move(batch)) {}
  const std::vector<Sentence> &failed_batch() const { return batch_; }

 private:
  std::vector<Sentence> batch_;
};

namespace protocol {

nlohmann::json ScoreRequest(std::span<const Sentence> batch);
// Validates shape, length, finiteness and range.
std::vector<double> ParseScoreResponse(const nlohmann::json &body,
                                       std::size_t expected);
nlohmann::json TrainRequest(std::span<const LabeledExample> examples,
                            std::optional<double> learning_rate);
struct TrainResponse {
  double loss = 0;
  long steps = 0;
};
TrainResponse ParseTrainResponse(const nlohmann::json &body);
struct Info {
  std::string model;
  std::size_t max_batch = 0;
  std::string version;
};
Info ParseInfo(const nlohmann::json &body);
// Decodes a score request body (the server side of the protocol).
std::vector<Sentence> ParseScoreRequest(const nlohmann::json &body);
std::vector<LabeledExample> ParseTrainRequest(const nlohmann::json &body,
                                              std::optional<double> *learning_rate);

}  // namespace protocol

struct RemoteScorerOptions {
  std::size_t batch_size = 256;
  int retries = 3;
  std::chrono::milliseconds backoff{100};
  std::chrono::seconds timeout{60};
};

class RemoteScorer : public GrammaticalityScorer {
 public:
  explicit RemoteScorer(std::string url, RemoteScorerOptions options = {});

  std::vector<double> ScoreSentences(
      std::span<const Sentence> batch) const override;
  // Training goes through /v1/train; the service owns the optimizer.
  bool trainable() const override { return true; }
  std::string name() const override { return "remote"; }
  double Train(std::span<const LabeledExample> batch, double lr) override;

  protocol::Info Info() const;
  const std::string &url() const { return url_; }

 private:
  nlohmann::json Post(const std::string &path, const nlohmann::json &body,
                      std::span<const Sentence> for_error) const;
  std::size_t EffectiveBatch() const;

  std::string url_;
  std::string host_;    // scheme://host:port
  std::string prefix_;  // optional path prefix
  RemoteScorerOptions options_;
  mutable std::once_flag info_once_;
  mutable std::size_t server_max_batch_ = 0;
};

}  // namespace ctparse

#endif  // CTPARSE_REMOTE_SCORER_H_
