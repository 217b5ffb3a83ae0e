// In-process HTTP service speaking the remote scorer wire protocol, backed by
// a NativeScorer. Failure modes can be switched on to exercise the client.

#ifndef CTPARSE_TESTS_STUB_SERVER_H_
#define CTPARSE_TESTS_STUB_SERVER_H_

#include <atomic>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "ctparse/native_scorer.h"
#include "ctparse/remote_scorer.h"

namespace ctparse::testing {

class StubServer {
 public:
  enum class Fault { kNone, kWrongLength, kOutOfRange, kBadJson, kReversed };

  explicit StubServer(std::size_t max_batch = 8, int dim_log2 = 12)
      : model_(dim_log2), max_batch_(max_batch) {
    server_.Get("/v1/info", [this](const httplib::Request &, httplib::Response &res) {
      nlohmann::json j = {{"model", "stub"}, {"max_batch", max_batch_}, {"version", "test"}};
      res.set_content(j.dump(), "application/json");
    });
    server_.Post("/v1/score", [this](const httplib::Request &req, httplib::Response &res) {
      ++score_calls;
      if (fail_next > 0) {
        --fail_next;
        res.status = fail_status;
        return;
      }
      std::vector<Sentence> batch;
      try {
        batch = protocol::ParseScoreRequest(nlohmann::json::parse(req.body));
      } catch (const std::exception &e) {
        res.status = 400;
        res.set_content(e.what(), "text/plain");
        return;
      }
      if (batch.empty()) {
        res.status = 400;
        return;
      }
      if (batch.size() > max_batch_) {
        res.status = 413;
        return;
      }
      {
        std::lock_guard lock(mu_);
        batch_sizes.push_back(batch.size());
      }
      std::vector<double> probs;
      {
        std::lock_guard lock(mu_);
        probs = model_.ScoreSentences(batch);
      }
      switch (fault) {
        case Fault::kNone: break;
        case Fault::kWrongLength: probs.pop_back(); break;
        case Fault::kOutOfRange: probs[0] = 1.5; break;
        case Fault::kReversed: std::reverse(probs.begin(), probs.end()); break;
        case Fault::kBadJson:
          res.set_content("{not json", "application/json");
          return;
      }
      res.set_content(nlohmann::json({{"probabilities", probs}}).dump(), "application/json");
    });
    server_.Post("/v1/train", [this](const httplib::Request &req, httplib::Response &res) {
      std::optional<double> lr;
      std::vector<LabeledExample> examples;
      try {
        examples = protocol::ParseTrainRequest(nlohmann::json::parse(req.body), &lr);
      } catch (const std::exception &e) {
        res.status = 400;
        res.set_content(e.what(), "text/plain");
        return;
      }
      if (examples.empty()) {
        res.status = 400;
        return;
      }
      double loss;
      long steps = 0;
      {
        std::lock_guard lock(mu_);
        const double rate = lr.value_or(3e-5);
        loss = model_.MeanLoss(examples);
        for (std::size_t i = 0; i < examples.size(); i += 64) {
          std::span<const LabeledExample> part(examples.data() + i, std::min<std::size_t>(64, examples.size() - i));
          model_.GradStep(part, rate);
          ++steps;
        }
      }
      res.set_content(nlohmann::json({{"loss", loss}, {"steps", steps}}).dump(), "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  ~StubServer() {
    server_.stop();
    if (thread_.joinable()) thread_.join();
  }

  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }

  NativeScorer &model() { return model_; }

  std::atomic<int> score_calls{0};
  std::atomic<int> fail_next{0};
  int fail_status = 503;
  Fault fault = Fault::kNone;
  std::vector<std::size_t> batch_sizes;

 private:
  NativeScorer model_;
  std::size_t max_batch_;
  std::mutex mu_;
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

}  // namespace ctparse::testing

#endif  // CTPARSE_TESTS_STUB_SERVER_H_
