#include "ctparse/scorer.h"

#include <cmath>
#include <mutex>

#include <fmt/format.h>

namespace ctparse {

double GrammaticalityScorer::Train(std::span<const LabeledExample>, double) {
  throw NotTrainableError();
}

std::vector<double> ScoreSentences(const GrammaticalityScorer &scorer,
                                   std::span<const Sentence> batch) {
  if (batch.empty()) throw std::invalid_argument("empty scoring batch");
  std::vector<double> out = scorer.ScoreSentences(batch);
  if (out.size() != batch.size()) {
    throw std::runtime_error(fmt::format("{} scorer returned {} scores for {} sentences",
                                         scorer.name(), out.size(), batch.size()));
  }
  for (double p : out) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw std::runtime_error(
          fmt::format("{} scorer returned out-of-range probability {}", scorer.name(), p));
    }
  }
  return out;
}

std::optional<double> JudgmentCache::Lookup(const std::string &key) const {
  std::shared_lock lock(mu_);
  auto it = map_.find(key);
  if (it == map_.end()) return std::nullopt;
  return it->second;
}

void JudgmentCache::Insert(const std::string &key, double value) {
  std::unique_lock lock(mu_);
  if (map_.size() >= capacity_) return;
  map_[key] = value;
}

void JudgmentCache::Clear() {
  std::unique_lock lock(mu_);
  map_.clear();
}

std::size_t JudgmentCache::size() const {
  std::shared_lock lock(mu_);
  return map_.size();
}

}  // namespace ctparse
