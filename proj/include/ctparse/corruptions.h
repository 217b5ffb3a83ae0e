// Corruption generators for the real/fake grammaticality task, and the
// bigram language model behind the Bigram corruption.

#ifndef CTPARSE_CORRUPTIONS_H_
#define CTPARSE_CORRUPTIONS_H_

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ctparse/labeled_example.h"
#include "ctparse/random.h"
#include "ctparse/treebank.h"

namespace ctparse {

enum class CorruptionKind { kShuffle, kSwap, kDrop, kSpanDrop, kSpanMovement, kBigram };

inline constexpr std::array<CorruptionKind, 6> kAllCorruptions = {
    CorruptionKind::kShuffle,  CorruptionKind::kSwap,
    CorruptionKind::kDrop,     CorruptionKind::kSpanDrop,
    CorruptionKind::kSpanMovement, CorruptionKind::kBigram,
};

std::string_view CorruptionName(CorruptionKind kind);
std::optional<CorruptionKind> CorruptionFromName(std::string_view name);

class CorruptionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bigram model with begin/end boundary symbols and add-alpha smoothing over
// the vocabulary plus the end symbol. Immutable once trained.
class BigramLM {
 public:
  static constexpr std::string_view kBegin = "<s>";
  static constexpr std::string_view kEnd = "</s>";

  static BigramLM Train(std::span<const Sentence> corpus, double alpha = 0.1);

  // P(token | context); context may be kBegin, token may be kEnd. Contexts
  // never seen in training fall back to the uniform distribution.
  double Probability(std::string_view context, std::string_view token) const;

  // Draws a non-end token following `context`.
  const std::string &SampleNext(std::string_view context, RandomSource &rng) const;

  // Vocabulary in first-seen order.
  const std::vector<std::string> &vocab() const { return vocab_; }
  double alpha() const { return alpha_; }

 private:
  struct Context {
    std::vector<std::pair<int, double>> next;  // (outcome id, count)
    double total = 0;
  };

  int Id(std::string_view token) const;  // -1 if unknown

  double alpha_ = 0;
  std::vector<std::string> vocab_;  // outcome ids [0, V); V is the end id
  std::unordered_map<std::string, int> ids_;
  std::unordered_map<int, Context> contexts_;  // context id V = begin
};

// Applies one corruption; retries until the output differs from the input.
Sentence Corrupt(CorruptionKind kind, const Sentence &sent, RandomSource &rng,
                 const BigramLM *lm = nullptr);

// One real (label 1) and one fake (label 0) example per sentence, the fake's
// kind drawn uniformly from `kinds`. Sentences whose corruption fails are
// skipped and logged.
std::vector<LabeledExample> MakeRealFakeDataset(std::span<const Sentence> corpus,
                                                std::span<const CorruptionKind> kinds,
                                                RandomSource &rng,
                                                const BigramLM *lm = nullptr);

}  // namespace ctparse

#endif  // CTPARSE_CORRUPTIONS_H_
