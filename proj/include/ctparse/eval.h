// Unlabeled bracketing evaluation, baselines and error analysis.
//
// Scores are sentence-level: F1 is computed per sentence over nontrivial
// spans after punctuation stripping, then averaged.

#ifndef CTPARSE_EVAL_H_
#define CTPARSE_EVAL_H_

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ctparse/decoder.h"
#include "ctparse/scorer.h"
#include "ctparse/transforms.h"
#include "ctparse/treebank.h"

namespace ctparse {

struct Prf {
  double precision = 0;
  double recall = 0;
  double f1 = 0;
};

// Empty gold and empty prediction score (1, 1, 1). An empty side gets the
// vacuous value 1 for the measure that divides by its size.
Prf SentenceF1(const SpanSet &gold, const SpanSet &pred);

struct EvalOptions {
  PunctuationConfig gold_punct = PunctuationConfig::Default();
  PunctuationConfig pred_punct = [] {
    auto p = PunctuationConfig::Default();
    p.tokens_only = true;
    return p;
  }();
};

struct EvalReport {
  // One entry per input pair; nullopt for skipped sentences.
  std::vector<std::optional<Prf>> per_sentence;
  double corpus_f1 = 0;  // x100
  double corpus_precision = 0;
  double corpus_recall = 0;
  std::size_t evaluated = 0;
  std::size_t skipped = 0;
};

// Throws InputError on a count mismatch, or on a token mismatch naming the
// 1-based line. Sentences that are empty after stripping are skipped.
EvalReport CorpusF1(std::span<const Tree> gold, std::span<const Tree> pred,
                    const EvalOptions &options = {});

enum class Baseline { kLeft, kRight, kBalanced };
std::optional<Baseline> BaselineFromName(std::string_view name);
std::string_view BaselineName(Baseline b);

// Binary tree of the named shape over `words`. Balanced splits every span at
// the ceiling of its midpoint.
Tree BaselineTree(Baseline strategy, std::span<const std::string> words);

// Binarized gold tree without punctuation or unary chains: the best any
// binary parser can do.
std::optional<Tree> OracleBinaryTree(const Tree &gold, const PunctuationConfig &punct);

inline const std::vector<std::string> &DefaultAnalysisLabels() {
  static const std::vector<std::string> labels = {"SBAR", "NP", "VP", "PP", "ADJP", "ADVP"};
  return labels;
}

struct LabelRecall {
  std::size_t matched = 0;
  std::size_t total = 0;
  double recall = 0;
};
using LabelRecallTable = std::map<std::string, LabelRecall>;

// For each label, the share of nontrivial gold constituents with that base
// category whose span the prediction contains. A (span, label) pair repeated
// in a unary chain counts once.
LabelRecallTable RecallByLabel(std::span<const Tree> gold, std::span<const Tree> pred,
                               std::span<const std::string> labels = DefaultAnalysisLabels(),
                               const EvalOptions &options = {});

struct PassRateRow {
  std::size_t spans = 0;
  std::array<double, kNumTests> rate{};
};

struct PassRateTable {
  std::vector<std::string> labels;
  std::map<std::string, PassRateRow> by_label;
  PassRateRow distituents;
  // F1 of "test passes" as a constituency prediction, over every gold
  // nontrivial span and the distituent sample.
  std::array<double, kNumTests> test_f1{};
};

struct PassRateOptions {
  double threshold = 0.5;
  std::size_t distituents_per_sentence = 50;
  std::uint64_t seed = 0;
  std::vector<std::string> labels = DefaultAnalysisLabels();
  DecoderOptions decoder;
};

// Gold trees are prepared the way sentences are for parsing (quotes and the
// final . ! ? removed, lowercased) before the tests are applied.
PassRateTable PerTestPassRates(const GrammaticalityScorer &scorer, std::span<const Tree> gold,
                               const PassRateOptions &options = {});

// The analysis view of a gold tree: quote leaves and a final . ! ? leaf
// removed, words lowercased. nullopt if nothing remains.
std::optional<Tree> PrepareAnalysisTree(const Tree &gold);

enum class BracketClass { kCorrect, kConsistent, kCrossing };
BracketClass ClassifyBracket(const Span &pred, const SpanSet &gold);

struct BracketCounts {
  std::size_t correct = 0;
  std::size_t consistent = 0;
  std::size_t crossing = 0;
};

struct PatternCount {
  std::string pattern;
  std::size_t count = 0;
  double share = 0;
};

struct PatternReport {
  std::vector<PatternCount> patterns;  // by count, then pattern
  std::size_t total_crossing = 0;
  BracketCounts brackets;
};

// Tag grouping used for pattern mining: VBD/VBP/VBZ and NN/NNS merge.
std::string GroupTag(std::string_view tag);

PatternReport CrossingPatterns(std::span<const Tree> gold, std::span<const Tree> pred,
                               const EvalOptions &options = {});

}  // namespace ctparse

#endif  // CTPARSE_EVAL_H_
