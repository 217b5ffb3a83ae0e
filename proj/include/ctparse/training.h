// Scorer initialization on the real/fake task and alternating refinement:
// parse a batch with the current scorer, then train the scorer so that tests
// of predicted constituents look grammatical and tests of other spans do not.

#ifndef CTPARSE_TRAINING_H_
#define CTPARSE_TRAINING_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ctparse/decoder.h"
#include "ctparse/labeled_example.h"
#include "ctparse/random.h"
#include "ctparse/scorer.h"
#include "ctparse/treebank.h"

namespace ctparse {

struct TrainConfig {
  std::size_t batch_real = 32;
  std::size_t batch_fake = 32;
  double lr = 1e-2;
  double warmup_fraction = 0.10;
  std::size_t refine_batch = 32;
  std::size_t tests_per_sentence = 16;
  int epochs = 1;
  std::uint64_t seed = 0;

  // Throws std::invalid_argument on a zero count or a warmup fraction
  // outside [0, 1].
  void Validate() const;
};

struct TrainStats {
  std::size_t steps = 0;
  std::size_t examples = 0;
  // Pre-update loss of every step.
  std::vector<double> losses;
  std::size_t failed_batches = 0;
};

// Learning rate for a 0-based step under linear warmup over the first
// warmup_fraction of `total_steps`, constant afterwards.
double WarmupLearningRate(const TrainConfig &cfg, std::size_t step,
                          std::size_t total_steps);

// One pass over `dataset` in mixed batches of batch_real positives and
// batch_fake negatives, in a seeded order. Throws InputError("degenerate
// dataset") unless both labels occur, and DivergedError naming the step on a
// non-finite loss.
TrainStats TrainInitial(GrammaticalityScorer &model,
                        std::span<const LabeledExample> dataset,
                        const TrainConfig &cfg);

// Labeled (span, test) samples for one decoded sentence: up to
// `tests_per_sentence` pairs drawn uniformly without replacement from all
// nontrivial-span x test pairs, label 1 iff the span is in `tree`.
std::vector<LabeledExample> SampleRefinementExamples(const Sentence &sent,
                                                     const Tree &tree,
                                                     std::size_t tests_per_sentence,
                                                     RandomSource &rng,
                                                     std::size_t source = 0,
                                                     const TransformOptions &transforms = {});

// cfg.epochs passes over `sentences` in batches of cfg.refine_batch: decode,
// sample, one gradient step on the pooled examples. A batch whose decode or
// step fails is logged and skipped.
TrainStats RefineEpochs(GrammaticalityScorer &model, std::span<const Sentence> sentences,
                        const TrainConfig &cfg, RandomSource &rng,
                        const DecoderOptions &decoder = {});

// Refinement examples for already-decoded trees, for backends that train
// out of process.
std::vector<LabeledExample> ExportRefinementBatch(std::span<const Tree> trees,
                                                  const TrainConfig &cfg, RandomSource &rng,
                                                  const TransformOptions &transforms = {});

// One JSON object per line: {"tokens":[...],"label":0|1,"test":name,
// "span":[lo,hi],"source":i}.
std::string ExamplesToJsonl(std::span<const LabeledExample> examples);
std::vector<LabeledExample> ExamplesFromJsonl(std::string_view text);

}  // namespace ctparse

#endif  // CTPARSE_TRAINING_H_
