// Synthetic context-free grammars with a decidable grammaticality oracle, so
// the whole pipeline can be checked end to end against known trees.
//
// Grammar files hold one rule per line:
//
//   LHS -> RHS1 [RHS2] [# proform]
//
// Symbols that appear on some left-hand side are nonterminals (written
// without lowercase letters); everything else is a terminal. "|" separates alternatives. A trailing "# proform"
// marks the rule's terminal yield as the LHS's proform; any other text after
// "#" is a comment, as are lines starting with "#". The first rule's LHS is
// the start symbol. "X -> X and X" declares coordination of X: it is
// accepted by the recognizer but never used when sampling, so sampled trees
// stay coordination-free. Proform rules are likewise recognition-only, so
// sampled sentences contain no proforms. Terminals inside two-symbol rules
// get their own preterminal. Unary rules between nonterminals are not
// allowed.

#ifndef CTPARSE_SYNTH_H_
#define CTPARSE_SYNTH_H_

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ctparse/random.h"
#include "ctparse/scorer.h"
#include "ctparse/treebank.h"

namespace ctparse {

class GrammarError : public InputError {
 public:
  using InputError::InputError;
};

class Grammar {
 public:
  static constexpr std::size_t kMaxNonterminals = 64;

  // Throws GrammarError with the offending line number.
  static Grammar Parse(std::string_view text);
  static Grammar Load(const std::string &path);

  struct BinaryRule {
    int lhs, left, right;
  };
  struct LexicalRule {
    int lhs;
    std::string word;
  };

  const std::vector<std::string> &nonterminals() const { return names_; }
  int start() const { return start_; }
  const std::vector<BinaryRule> &binary_rules() const { return binary_; }
  const std::vector<LexicalRule> &lexical_rules() const { return lexical_; }
  // Nonterminals with an "X -> X and X" rule.
  const std::vector<int> &coordinated() const { return coordinated_; }
  // Nonterminal name -> proform tokens, e.g. "VP" -> "did so".
  const std::map<std::string, std::string> &proforms() const { return proforms_; }
  const std::vector<std::string> &terminals() const { return terminals_; }
  bool IsTerminal(std::string_view word) const;
  int Id(std::string_view name) const;  // -1 if absent

  // CYK membership test.
  bool Recognizes(std::span<const std::string> words) const;

  // Leaves are tagged with their preterminal; internal nodes with their
  // nonterminal. Returns nullopt if the derivation outgrows max_len.
  std::optional<Tree> Sample(RandomSource &rng, std::size_t max_len) const;

 private:
  int Intern(const std::string &name);
  void Validate() const;
  std::optional<Tree> Expand(int nt, RandomSource &rng, std::size_t max_len,
                             std::size_t &emitted, int depth) const;

  std::vector<std::string> names_;
  std::map<std::string, int, std::less<>> ids_;
  int start_ = -1;
  std::vector<BinaryRule> binary_;
  std::vector<LexicalRule> lexical_;
  std::vector<int> coordinated_;
  std::map<std::string, std::string> proforms_;
  std::vector<std::string> terminals_;
  std::map<std::string, std::uint64_t, std::less<>> lexicon_;  // word -> NT mask
  // Per-LHS sampling alternatives: index into binary_ (>= 0) or
  // ~index into lexical_.
  std::vector<std::vector<int>> expansions_;
};

struct DerivedCorpus {
  std::vector<Sentence> sentences;
  std::vector<Tree> gold_trees;
};

// Throws GrammarError("grammar generates nothing under max_len") after 1e5
// consecutive rejections.
DerivedCorpus SampleCorpus(const Grammar &grammar, std::size_t n, std::size_t max_len,
                           RandomSource &rng);

// 1.0 iff the sentence is in the language.
double OracleJudge(const Grammar &grammar, const Sentence &sent);

class GrammarOracleScorer : public GrammaticalityScorer {
 public:
  explicit GrammarOracleScorer(Grammar grammar) : grammar_(std::move(grammar)) {}
  std::vector<double> ScoreSentences(std::span<const Sentence> batch) const override;
  std::string name() const override { return "oracle"; }
  const Grammar &grammar() const { return grammar_; }

 private:
  Grammar grammar_;
};

}  // namespace ctparse

#endif  // CTPARSE_SYNTH_H_
