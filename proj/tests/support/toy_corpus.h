// A real/fake corpus that a bigram feature separates perfectly.
//
// Real sentences are runs of consecutive vocabulary items "t00 t01 t02 ...".
// A run of distinct tokens has exactly one arrangement in which every
// adjacent pair is a successor pair, so every corruption that reorders it
// contains a bigram that no real sentence has. Runs are split by start
// position into training and held-out sets, so held-out sentences are unseen
// but share their bigrams with the training reals.

#ifndef CTPARSE_TESTS_TOY_CORPUS_H_
#define CTPARSE_TESTS_TOY_CORPUS_H_

#include <string>
#include <vector>

#include "ctparse/corruptions.h"
#include "ctparse/random.h"
#include "ctparse/treebank.h"

namespace ctparse::testing {

struct ToyCorpus {
  std::vector<Sentence> train_runs;
  std::vector<Sentence> heldout_runs;
};

inline ToyCorpus MakeToyCorpus(int vocab = 40, int min_len = 3, int max_len = 8) {
  ToyCorpus out;
  for (int len = min_len; len <= max_len; ++len) {
    for (int start = 0; start + len <= vocab; ++start) {
      std::vector<std::string> toks;
      for (int k = start; k < start + len; ++k) {
        toks.push_back((k < 10 ? "t0" : "t") + std::to_string(k));
      }
      (start % 5 == 2 ? out.heldout_runs : out.train_runs).emplace_back(std::move(toks));
    }
  }
  return out;
}

// `n` training reals drawn with replacement, each followed by a Shuffle fake.
inline std::vector<LabeledExample> ToyTrainingSet(const ToyCorpus &toy, std::size_t n,
                                                  RandomSource &rng) {
  std::vector<Sentence> reals;
  for (std::size_t i = 0; i < n; ++i) reals.push_back(toy.train_runs[rng.Uniform(toy.train_runs.size())]);
  const std::vector<CorruptionKind> kinds = {CorruptionKind::kShuffle};
  return MakeRealFakeDataset(reals, kinds, rng);
}

// Every held-out run and one Shuffle corruption of it.
inline std::vector<LabeledExample> ToyHeldOut(const ToyCorpus &toy, RandomSource &rng) {
  const std::vector<CorruptionKind> kinds = {CorruptionKind::kShuffle};
  return MakeRealFakeDataset(toy.heldout_runs, kinds, rng);
}

template <typename Scorer>
double Accuracy(const Scorer &scorer, const std::vector<LabeledExample> &examples) {
  std::vector<Sentence> sents;
  for (const auto &e : examples) sents.push_back(e.tokens);
  auto p = scorer.ScoreSentences(sents);
  std::size_t right = 0;
  for (std::size_t i = 0; i < p.size(); ++i) right += (p[i] > 0.5) == (examples[i].label == 1);
  return static_cast<double>(right) / static_cast<double>(p.size());
}

}  // namespace ctparse::testing

#endif  // CTPARSE_TESTS_TOY_CORPUS_H_
