// Sentences, spans and constituency trees, plus bracketed-tree I/O and the
// normalization applied before unlabeled evaluation.

#ifndef CTPARSE_TREEBANK_H_
#define CTPARSE_TREEBANK_H_

#include <compare>
#include <cstddef>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ctparse {

// Raised for malformed user input (bad bracketing, bad token sequences).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public InputError {
 public:
  // `offset` is the 1-based character position of the error.
  ParseError(const std::string &what, std::size_t offset);
  // Wraps `inner` with context; the message keeps a single offset.
  ParseError(const std::string &context, const ParseError &inner, std::size_t offset);
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

// A token sequence. Tokens are non-empty and contain no whitespace.
class Sentence {
 public:
  Sentence() = default;
  explicit Sentence(std::vector<std::string> tokens);

  // Splits on runs of ASCII whitespace.
  static Sentence FromLine(std::string_view line);

  const std::vector<std::string> &tokens() const { return tokens_; }
  std::size_t size() const { return tokens_.size(); }
  bool empty() const { return tokens_.empty(); }
  const std::string &operator[](std::size_t i) const { return tokens_[i]; }
  auto begin() const { return tokens_.begin(); }
  auto end() const { return tokens_.end(); }

  // Tokens joined by single spaces; the corpus-file line format.
  std::string Join() const;

  friend bool operator==(const Sentence &, const Sentence &) = default;

 private:
  std::vector<std::string> tokens_;
};

// Half-open token interval [lo, hi).
struct Span {
  int lo = 0;
  int hi = 0;

  int length() const { return hi - lo; }
  bool Contains(const Span &other) const {
    return lo <= other.lo && other.hi <= hi;
  }
  // True when the spans overlap and neither contains the other.
  bool Crosses(const Span &other) const {
    return lo < other.hi && other.lo < hi && !Contains(other) &&
           !other.Contains(*this);
  }

  friend auto operator<=>(const Span &, const Span &) = default;
};

// Length >= 2 and not the whole sentence.
inline bool IsNontrivial(const Span &span, int sentence_length) {
  return span.length() >= 2 && span.length() < sentence_length;
}

// Throws InputError unless 0 <= lo < hi <= n.
void CheckSpan(const Span &span, std::size_t n);

// All spans with length >= 2 and < n, ordered by (lo, hi).
std::vector<Span> NontrivialSpans(int n);

using SpanSet = std::set<Span>;

// A constituency tree. Leaves carry a word and optionally a POS tag in
// `label`; internal nodes carry an optional category and their children.
class Tree {
 public:
  static Tree Leaf(std::string word, std::optional<std::string> tag = {});
  static Tree Node(std::optional<std::string> label, std::vector<Tree> children);

  bool is_leaf() const { return children_.empty(); }
  const std::optional<std::string> &label() const { return label_; }
  const std::string &word() const { return word_; }
  const std::vector<Tree> &children() const { return children_; }
  // Number of leaves below this node.
  int size() const { return size_; }

  std::vector<std::string> Words() const;
  // POS tags of the leaves, empty optional for untagged leaves.
  std::vector<std::optional<std::string>> Tags() const;
  // True if every leaf carries a tag.
  bool HasTags() const;

  friend bool operator==(const Tree &, const Tree &) = default;

 private:
  Tree() = default;

  std::optional<std::string> label_;
  std::string word_;
  std::vector<Tree> children_;
  int size_ = 1;
};

struct LabeledSpan {
  Span span;
  std::optional<std::string> label;
};

// Spans of internal nodes in pre-order, with their categories. When
// `include_leaves` is set, leaf spans (with their tags) are emitted too.
std::vector<LabeledSpan> CollectSpans(const Tree &tree,
                                      bool include_leaves = false);

// Distinct internal-node spans.
SpanSet TreeSpans(const Tree &tree);

// True if every internal node has exactly two children.
bool IsBinary(const Tree &tree);

bool IsQuoteToken(std::string_view tok);
std::string Lowercase(std::string_view s);

// Lowercases, drops quotation-mark tokens and one sentence-final . ! or ?.
Sentence Preprocess(std::span<const std::string> raw_tokens);

// Reads one PTB-style bracketed tree. A surrounding unlabeled root wrapper
// "( ... )" holding a single constituent is stripped. Categories are told
// apart from words by case: a tree is labeled only if no list starts with an
// atom containing a lowercase letter.
Tree ParseBracketed(std::string_view text);

struct RenderOptions {
  // When set, unlabeled nodes and untagged leaves are written with this
  // category, e.g. "(X (X a) (X b))".
  std::optional<std::string> placeholder;
};

std::string RenderBracketed(const Tree &tree, const RenderOptions &options = {});

// Right-branching expansion of every node with more than two children.
Tree BinarizeRight(const Tree &tree);

// Category with PTB function tags and indices removed: "NP-SBJ-1" -> "NP".
std::string BaseCategory(std::string_view label);

struct PunctuationConfig {
  std::set<std::string> tags;
  std::set<std::string> tokens;
  // Ignore leaf tags and match on surface tokens only. Predicted trees carry
  // at most placeholder tags.
  bool tokens_only = false;

  static PunctuationConfig Default();
};

// Removes punctuation leaves (by tag when the leaf is tagged, by token
// otherwise) and nodes left without leaves. Empty result -> nullopt.
std::optional<Tree> StripPunctuation(const Tree &tree,
                                     const PunctuationConfig &punct);

// Nontrivial spans of the punctuation-stripped tree. Unary chains collapse
// through set semantics.
SpanSet NormalizeForEval(const Tree &tree, const PunctuationConfig &punct);

// Corpus and tree files.
std::vector<Sentence> ReadCorpus(const std::string &path);
void WriteCorpus(const std::string &path, std::span<const Sentence> corpus);

// Reads bracketed trees; a tree may span several lines (as in .mrg files).
std::vector<Tree> ReadTrees(const std::string &path);
std::vector<Tree> ParseTreeText(std::string_view text);
void WriteTrees(const std::string &path, std::span<const Tree> trees,
                const RenderOptions &options = {});

}  // namespace ctparse

#endif  // CTPARSE_TREEBANK_H_
