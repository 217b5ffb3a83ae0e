#include "ctparse/treebank.h"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

namespace ctparse {

namespace {

bool IsSpace(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

}  // namespace

bool IsQuoteToken(std::string_view tok) {
  return tok == "``" || tok == "''" || tok == "\"" || tok == "`" ||
         tok == "'";
}

std::string Lowercase(std::string_view s) {
  std::string out(s);
  for (char &c : out) {
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

ParseError::ParseError(const std::string &what, std::size_t offset)
    : InputError(fmt::format("{} at offset {}", what, offset)),
      offset_(offset) {}

ParseError::ParseError(const std::string &context, const ParseError &inner,
                       std::size_t offset)
    : InputError(fmt::format("{}: {}", context, inner.what())), offset_(offset) {}

Sentence::Sentence(std::vector<std::string> tokens)
    : tokens_(std::move(tokens)) {
  for (const auto &tok : tokens_) {
    if (tok.empty()) throw InputError("empty token in sentence");
    if (std::any_of(tok.begin(), tok.end(), IsSpace)) {
      throw InputError(fmt::format("token '{}' contains whitespace", tok));
    }
  }
}

Sentence Sentence::FromLine(std::string_view line) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && IsSpace(line[i])) ++i;
    std::size_t j = i;
    while (j < line.size() && !IsSpace(line[j])) ++j;
    if (j > i) tokens.emplace_back(line.substr(i, j - i));
    i = j;
  }
  return Sentence(std::move(tokens));
}

std::string Sentence::Join() const {
  std::string out;
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (i > 0) out += ' ';
    out += tokens_[i];
  }
  return out;
}

void CheckSpan(const Span &span, std::size_t n) {
  if (span.lo < 0 || span.lo >= span.hi || span.hi > static_cast<int>(n)) {
    throw InputError(
        fmt::format("invalid span ({},{}) for length {}", span.lo, span.hi, n));
  }
}

std::vector<Span> NontrivialSpans(int n) {
  std::vector<Span> spans;
  for (int lo = 0; lo < n; ++lo) {
    for (int hi = lo + 2; hi <= n; ++hi) {
      if (hi - lo < n) spans.push_back({lo, hi});
    }
  }
  return spans;
}

// ---------------------------------------------------------------------------
// Tree

Tree Tree::Leaf(std::string word, std::optional<std::string> tag) {
  Tree t;
  t.word_ = std::move(word);
  t.label_ = std::move(tag);
  t.size_ = 1;
  return t;
}

Tree Tree::Node(std::optional<std::string> label, std::vector<Tree> children) {
  if (children.empty()) throw InputError("tree node without children");
  Tree t;
  t.label_ = std::move(label);
  t.size_ = 0;
  for (const auto &c : children) t.size_ += c.size_;
  t.children_ = std::move(children);
  return t;
}

namespace {

template <typename Fn>
void VisitLeaves(const Tree &t, Fn &&fn) {
  if (t.is_leaf()) {
    fn(t);
    return;
  }
  for (const auto &c : t.children()) VisitLeaves(c, fn);
}

void CollectSpansRec(const Tree &t, int offset, bool include_leaves,
                     std::vector<LabeledSpan> &out) {
  if (t.is_leaf()) {
    if (include_leaves) out.push_back({{offset, offset + 1}, t.label()});
    return;
  }
  out.push_back({{offset, offset + t.size()}, t.label()});
  int pos = offset;
  for (const auto &c : t.children()) {
    CollectSpansRec(c, pos, include_leaves, out);
    pos += c.size();
  }
}

}  // namespace

std::vector<std::string> Tree::Words() const {
  std::vector<std::string> out;
  out.reserve(size_);
  VisitLeaves(*this, [&](const Tree &leaf) { out.push_back(leaf.word()); });
  return out;
}

std::vector<std::optional<std::string>> Tree::Tags() const {
  std::vector<std::optional<std::string>> out;
  out.reserve(size_);
  VisitLeaves(*this, [&](const Tree &leaf) { out.push_back(leaf.label()); });
  return out;
}

bool Tree::HasTags() const {
  bool all = true;
  VisitLeaves(*this, [&](const Tree &leaf) {
    if (!leaf.label()) all = false;
  });
  return all;
}

std::vector<LabeledSpan> CollectSpans(const Tree &tree, bool include_leaves) {
  std::vector<LabeledSpan> out;
  CollectSpansRec(tree, 0, include_leaves, out);
  return out;
}

SpanSet TreeSpans(const Tree &tree) {
  SpanSet out;
  for (const auto &ls : CollectSpans(tree)) out.insert(ls.span);
  return out;
}

bool IsBinary(const Tree &tree) {
  if (tree.is_leaf()) return true;
  if (tree.children().size() != 2) return false;
  return IsBinary(tree.children()[0]) && IsBinary(tree.children()[1]);
}

// ---------------------------------------------------------------------------
// Preprocessing

Sentence Preprocess(std::span<const std::string> raw_tokens) {
  if (raw_tokens.empty()) {
    throw InputError("sentence vanished under preprocessing");
  }
  std::vector<std::string> out;
  out.reserve(raw_tokens.size());
  for (const auto &tok : raw_tokens) {
    if (!IsQuoteToken(tok)) out.push_back(Lowercase(tok));
  }
  if (!out.empty() &&
      (out.back() == "." || out.back() == "!" || out.back() == "?")) {
    out.pop_back();
  }
  if (out.empty()) throw InputError("sentence vanished under preprocessing");
  return Sentence(std::move(out));
}

// ---------------------------------------------------------------------------
// Bracketed I/O

namespace {

// S-expression skeleton: either an atom or a list of elements.
struct SExpr {
  bool is_atom = false;
  std::string atom;
  std::vector<SExpr> items;
  std::size_t offset = 0;
};

class SExprReader {
 public:
  explicit SExprReader(std::string_view text) : text_(text) {}

  SExpr ReadTop() {
    SkipSpace();
    if (pos_ >= text_.size()) throw ParseError("empty tree", pos_ + 1);
    SExpr e = Read();
    SkipSpace();
    if (pos_ != text_.size()) {
      throw ParseError("trailing input after tree", pos_ + 1);
    }
    return e;
  }

 private:
  void SkipSpace() {
    while (pos_ < text_.size() && IsSpace(text_[pos_])) ++pos_;
  }

  SExpr Read() {
    SkipSpace();
    if (pos_ >= text_.size()) throw ParseError("unexpected end of input", pos_ + 1);
    SExpr e;
    e.offset = pos_;
    if (text_[pos_] == ')') throw ParseError("unexpected ')'", pos_ + 1);
    if (text_[pos_] != '(') {
      std::size_t start = pos_;
      while (pos_ < text_.size() && !IsSpace(text_[pos_]) &&
             text_[pos_] != '(' && text_[pos_] != ')') {
        ++pos_;
      }
      e.is_atom = true;
      e.atom = std::string(text_.substr(start, pos_ - start));
      return e;
    }
    ++pos_;
    for (;;) {
      SkipSpace();
      if (pos_ >= text_.size()) {
        throw ParseError("unbalanced parentheses", pos_ + 1);
      }
      if (text_[pos_] == ')') {
        ++pos_;
        break;
      }
      e.items.push_back(Read());
    }
    if (e.items.empty()) throw ParseError("empty constituent", e.offset + 1);
    return e;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

// A tree is read in labeled mode if some list starts with an atom followed by
// a list, i.e. contains "(LABEL (", and no list starts with an atom holding a
// lowercase letter. The second condition keeps unlabeled trees such as
// "(a (b (c d)))" from being read as a unary chain over one tagged word.
bool HasLabeledNode(const SExpr &e) {
  if (e.is_atom) return false;
  if (e.items.size() >= 2 && e.items[0].is_atom) {
    for (std::size_t i = 1; i < e.items.size(); ++i) {
      if (!e.items[i].is_atom) return true;
    }
  }
  for (const auto &c : e.items) {
    if (HasLabeledNode(c)) return true;
  }
  return false;
}

bool HeadsLookLikeCategories(const SExpr &e) {
  if (e.is_atom) return true;
  if (e.items[0].is_atom) {
    for (char c : e.items[0].atom) {
      if (std::islower(static_cast<unsigned char>(c))) return false;
    }
  }
  for (const auto &c : e.items) {
    if (!HeadsLookLikeCategories(c)) return false;
  }
  return true;
}

Tree Build(const SExpr &e, bool labeled) {
  if (e.is_atom) return Tree::Leaf(e.atom);
  if (labeled && e.items[0].is_atom) {
    if (e.items.size() == 1) return Tree::Leaf(e.items[0].atom);
    if (e.items.size() == 2 && e.items[1].is_atom) {
      return Tree::Leaf(e.items[1].atom, e.items[0].atom);
    }
    std::vector<Tree> children;
    for (std::size_t i = 1; i < e.items.size(); ++i) {
      children.push_back(Build(e.items[i], labeled));
    }
    return Tree::Node(e.items[0].atom, std::move(children));
  }
  std::vector<Tree> children;
  for (const auto &c : e.items) children.push_back(Build(c, labeled));
  return Tree::Node(std::nullopt, std::move(children));
}

void Render(const Tree &t, const RenderOptions &opt, std::string &out) {
  const auto &label = t.label() ? t.label() : opt.placeholder;
  if (t.is_leaf()) {
    if (label) {
      out += '(';
      out += *label;
      out += ' ';
      out += t.word();
      out += ')';
    } else {
      out += t.word();
    }
    return;
  }
  out += '(';
  if (label) {
    out += *label;
    out += ' ';
  }
  for (std::size_t i = 0; i < t.children().size(); ++i) {
    if (i > 0) out += ' ';
    Render(t.children()[i], opt, out);
  }
  out += ')';
}

bool HasAnyLabel(const Tree &t) {
  if (t.label()) return true;
  for (const auto &c : t.children()) {
    if (HasAnyLabel(c)) return true;
  }
  return false;
}

}  // namespace

Tree ParseBracketed(std::string_view text) {
  SExpr top = SExprReader(text).ReadTop();
  bool labeled = HasLabeledNode(top) && HeadsLookLikeCategories(top);
  // Root wrapper: "( (S ...) )" or the unlabeled "((a b))" / "(a)".
  if (!top.is_atom && top.items.size() == 1) return Build(top.items[0], labeled);
  return Build(top, labeled);
}

std::string RenderBracketed(const Tree &tree, const RenderOptions &options) {
  std::string out;
  bool labeled = options.placeholder.has_value() || HasAnyLabel(tree);
  // Wrap whenever ParseBracketed's root-wrapper rule would otherwise strip a
  // level from the rendered tree.
  bool wrap = !labeled || (!tree.is_leaf() && !tree.label() &&
                           tree.children().size() == 1);
  if (wrap) out += '(';
  Render(tree, options, out);
  if (wrap) out += ')';
  return out;
}

// ---------------------------------------------------------------------------
// Binarization

Tree BinarizeRight(const Tree &tree) {
  if (tree.is_leaf()) return tree;
  std::vector<Tree> kids;
  kids.reserve(tree.children().size());
  for (const auto &c : tree.children()) kids.push_back(BinarizeRight(c));
  if (kids.size() == 1) {
    // Unary chains stay unary; the span set is what matters downstream.
    return Tree::Node(tree.label(), std::move(kids));
  }
  while (kids.size() > 2) {
    std::vector<Tree> pair;
    pair.push_back(std::move(kids[kids.size() - 2]));
    pair.push_back(std::move(kids[kids.size() - 1]));
    Tree right = Tree::Node(std::nullopt, std::move(pair));
    kids.pop_back();
    kids.back() = std::move(right);
  }
  return Tree::Node(tree.label(), std::move(kids));
}

std::string BaseCategory(std::string_view label) {
  if (label.empty() || label[0] == '-') return std::string(label);
  std::size_t cut = label.find_first_of("-=");
  return std::string(label.substr(0, cut));
}

// ---------------------------------------------------------------------------
// Punctuation stripping and normalization

PunctuationConfig PunctuationConfig::Default() {
  PunctuationConfig cfg;
  cfg.tags = {"#", "$", "''", "(", ")", ",", ".", ":", "``", "-LRB-", "-RRB-",
              "-NONE-"};
  cfg.tokens = {",",  ".",     ":",     ";",     "--",    "-",  "...",
                "``", "''",    "`",     "'",     "\"",    "?",  "!",
                "(",  ")",     "{",     "}",     "#",     "$",  "-lrb-",
                "-rrb-", "-lcb-", "-rcb-", "-LRB-", "-RRB-", "-LCB-",
                "-RCB-"};
  return cfg;
}

namespace {

bool IsPunctLeaf(const Tree &leaf, const PunctuationConfig &punct) {
  // Quotation marks are dropped on both sides because preprocessing drops
  // them from parser input whatever their tag.
  if (IsQuoteToken(leaf.word())) return true;
  if (!punct.tokens_only && leaf.label()) {
    return punct.tags.count(*leaf.label()) > 0;
  }
  return punct.tokens.count(leaf.word()) > 0;
}

}  // namespace

std::optional<Tree> StripPunctuation(const Tree &tree,
                                     const PunctuationConfig &punct) {
  if (tree.is_leaf()) {
    if (IsPunctLeaf(tree, punct)) return std::nullopt;
    return tree;
  }
  std::vector<Tree> kids;
  for (const auto &c : tree.children()) {
    if (auto s = StripPunctuation(c, punct)) kids.push_back(std::move(*s));
  }
  if (kids.empty()) return std::nullopt;
  return Tree::Node(tree.label(), std::move(kids));
}

SpanSet NormalizeForEval(const Tree &tree, const PunctuationConfig &punct) {
  SpanSet out;
  auto stripped = StripPunctuation(tree, punct);
  if (!stripped) return out;
  int n = stripped->size();
  for (const auto &ls : CollectSpans(*stripped)) {
    if (IsNontrivial(ls.span, n)) out.insert(ls.span);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Files

std::vector<Sentence> ReadCorpus(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw InputError(fmt::format("cannot open corpus '{}'", path));
  std::vector<Sentence> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    try {
      out.push_back(Sentence::FromLine(line));
    } catch (const InputError &e) {
      throw InputError(fmt::format("{}:{}: {}", path, lineno, e.what()));
    }
  }
  return out;
}

void WriteCorpus(const std::string &path, std::span<const Sentence> corpus) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", path));
  for (const auto &s : corpus) out << s.Join() << '\n';
}

std::vector<Tree> ParseTreeText(std::string_view text) {
  std::vector<Tree> out;
  std::size_t pos = 0;
  int lineno = 1;
  while (pos < text.size()) {
    while (pos < text.size() && IsSpace(text[pos])) {
      if (text[pos] == '\n') ++lineno;
      ++pos;
    }
    if (pos >= text.size()) break;
    std::size_t start = pos;
    int start_line = lineno;
    int depth = 0;
    bool in_tree = false;
    while (pos < text.size()) {
      char c = text[pos];
      if (c == '(') {
        ++depth;
        in_tree = true;
      } else if (c == ')') {
        --depth;
      } else if (c == '\n') {
        ++lineno;
        if (!in_tree) break;
      }
      ++pos;
      if (in_tree && depth == 0) break;
      if (depth < 0) break;
    }
    std::string_view chunk = text.substr(start, pos - start);
    try {
      out.push_back(ParseBracketed(chunk));
    } catch (const ParseError &e) {
      throw ParseError(fmt::format("tree starting on line {}", start_line), e,
                       start + e.offset());
    }
  }
  return out;
}

std::vector<Tree> ReadTrees(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(fmt::format("cannot open tree file '{}'", path));
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return ParseTreeText(buf.str());
  } catch (const ParseError &e) {
    throw ParseError(path, e, e.offset());
  }
}

void WriteTrees(const std::string &path, std::span<const Tree> trees,
                const RenderOptions &options) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", path));
  for (const auto &t : trees) out << RenderBracketed(t, options) << '\n';
}

}  // namespace ctparse
