// Span scoring by averaged constituency-test judgments, and minimum-risk CKY
// decoding of the binary tree with the largest total span score.

#ifndef CTPARSE_DECODER_H_
#define CTPARSE_DECODER_H_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ctparse/scorer.h"
#include "ctparse/transforms.h"
#include "ctparse/treebank.h"

namespace ctparse {

// Dense table of span scores for a sentence of length n. Length-1 spans and
// the full span are fixed at 1.
class Chart {
 public:
  explicit Chart(int n);

  int n() const { return n_; }
  double score(int lo, int hi) const { return cells_[Index(lo, hi)]; }
  double score(Span s) const { return score(s.lo, s.hi); }
  // Only nontrivial spans may be set; values must lie in [0, 1].
  void set_score(int lo, int hi, double value);
  // Unchecked write, used by tests that need scores outside [0, 1].
  void set_raw(int lo, int hi, double value) { cells_[Index(lo, hi)] = value; }

 private:
  std::size_t Index(int lo, int hi) const {
    return static_cast<std::size_t>(lo) * (n_ + 1) + hi;
  }

  int n_;
  std::vector<double> cells_;
};

struct DecoderOptions {
  TransformOptions transforms;
  // Longer sentences are still parsed, but logged.
  int length_cap = 60;
  int workers = 1;
  // Judgment memo; only consulted for deterministic scorers.
  JudgmentCache *cache = nullptr;
};

// Per-test judgments for every nontrivial span; used by analysis and by
// refinement. judgments[k][t] belongs to spans[k] and kAllTests[t]. Tests
// rejected by the length cap are judged 0.
struct SpanJudgments {
  std::vector<Span> spans;
  std::vector<std::array<double, kNumTests>> judgments;
};

SpanJudgments JudgeSpans(const GrammaticalityScorer &scorer, const Sentence &sent,
                         std::span<const Span> spans, const DecoderOptions &options = {});

Chart ScoreSpans(const GrammaticalityScorer &scorer, const Sentence &sent,
                 const DecoderOptions &options = {});

// Highest-scoring binary tree; ties go to the lowest split point. Leaves are
// `words` (or the placeholder "w0".."wn-1" when empty). Nodes are unlabeled.
Tree MbrParse(const Chart &chart, std::span<const std::string> words = {});

// Sum of chart scores over the internal-node spans of `tree`.
double TreeScore(const Chart &chart, const Tree &tree);

struct CorpusParse {
  std::vector<Tree> trees;
  std::vector<std::optional<Chart>> charts;  // filled when requested
  // Indices of sentences that failed; their tree is a flat node.
  std::vector<std::size_t> failures;
};

CorpusParse ParseCorpus(const GrammaticalityScorer &scorer,
                        std::span<const Sentence> sentences,
                        const DecoderOptions &options = {}, bool keep_charts = false);

// Chart dump record: {"tokens": [...], "scores": [[lo, hi, p], ...]}.
std::string ChartToJson(const Sentence &sent, const Chart &chart);

}  // namespace ctparse

#endif  // CTPARSE_DECODER_H_
