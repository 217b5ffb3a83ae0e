// The grammaticality model abstraction: sentence -> probability that it is
// grammatical. Backends: NativeScorer (trainable, in-process), RemoteScorer
// (HTTP client) and GrammarOracleScorer (exact CFG membership, see synth.h).

#ifndef CTPARSE_SCORER_H_
#define CTPARSE_SCORER_H_

#include <cstddef>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "ctparse/labeled_example.h"
#include "ctparse/treebank.h"

namespace ctparse {

class NotTrainableError : public std::runtime_error {
 public:
  NotTrainableError()
      : std::runtime_error("backend not trainable; use export mode") {}
};

class DivergedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class GrammaticalityScorer {
 public:
  virtual ~GrammaticalityScorer() = default;

  // One probability in [0, 1] per sentence, in order.
  virtual std::vector<double> ScoreSentences(
      std::span<const Sentence> batch) const = 0;

  virtual bool trainable() const { return false; }
  virtual bool deterministic() const { return true; }
  virtual std::string name() const = 0;

  // One optimizer update minimizing mean binary cross-entropy on `batch`.
  // Returns the pre-update mean loss.
  virtual double Train(std::span<const LabeledExample> batch, double lr);
};

// Checked entry point: rejects empty batches and validates the backend's
// output length and range.
std::vector<double> ScoreSentences(const GrammaticalityScorer &scorer,
                                   std::span<const Sentence> batch);

// Memo of judgments keyed by the joined transformed sentence. Safe for
// concurrent use; values are only ever recomputed identically, so racing
// inserts are harmless.
class JudgmentCache {
 public:
  explicit JudgmentCache(std::size_t capacity = 1 << 22) : capacity_(capacity) {}

  std::optional<double> Lookup(const std::string &key) const;
  // Ignored once the cache holds `capacity` entries.
  void Insert(const std::string &key, double value);
  void Clear();
  std::size_t size() const;
  std::size_t capacity() const { return capacity_; }

 private:
  std::size_t capacity_;
  mutable std::shared_mutex mu_;
  std::unordered_map<std::string, double> map_;
};

}  // namespace ctparse

#endif  // CTPARSE_SCORER_H_
