#include <doctest.h>

#include <algorithm>
#include <cctype>
#include <functional>
#include <string>
#include <vector>

#include "ctparse/random.h"
#include "ctparse/synth.h"
#include "ctparse/treebank.h"
#include "test_util.h"

using namespace ctparse;
using ctparse::testing::S;

namespace {

// Reference preprocessing that works on the joined character string rather
// than on tokens: lowercase every byte, then cut quote tokens and one final
// sentence mark out of the space-separated text.
std::string ReferencePreprocess(const std::vector<std::string> &raw) {
  std::string text;
  for (const auto &t : raw) {
    if (!text.empty()) text += ' ';
    text += t;
  }
  for (char &c : text) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  std::string kept;
  std::size_t i = 0;
  while (i < text.size()) {
    std::size_t j = text.find(' ', i);
    if (j == std::string::npos) j = text.size();
    std::string tok = text.substr(i, j - i);
    bool quote = tok == "``" || tok == "''" || tok == "\"" || tok == "`" || tok == "'";
    if (!quote) kept += (kept.empty() ? "" : " ") + tok;
    i = j + 1;
  }
  for (const char *mark : {" .", " !", " ?"}) {
    std::string m(mark);
    if (kept.size() >= m.size() && kept.compare(kept.size() - m.size(), m.size(), m) == 0) {
      kept.erase(kept.size() - m.size());
      return kept;
    }
  }
  if (kept == "." || kept == "!" || kept == "?") kept.clear();
  return kept;
}

// Reference normalization: walk the tree, number the surviving leaves, and
// emit each internal node's surviving extent.
SpanSet ReferenceNormalize(const Tree &tree, const PunctuationConfig &punct) {
  std::vector<std::pair<int, int>> raw;  // surviving [first, last+1) per node
  int next = 0;
  std::function<std::pair<int, int>(const Tree &)> walk = [&](const Tree &t) -> std::pair<int, int> {
    if (t.is_leaf()) {
      bool drop = IsQuoteToken(t.word()) ||
                  (t.label() && !punct.tokens_only ? punct.tags.count(*t.label()) > 0
                                                   : punct.tokens.count(t.word()) > 0);
      if (drop) return {next, next};
      ++next;
      return {next - 1, next};
    }
    int lo = -1, hi = -1;
    for (const auto &c : t.children()) {
      auto [clo, chi] = walk(c);
      if (chi > clo) {
        if (lo < 0) lo = clo;
        hi = chi;
      }
    }
    if (lo >= 0) raw.emplace_back(lo, hi);
    return lo < 0 ? std::pair{next, next} : std::pair{lo, hi};
  };
  walk(tree);
  SpanSet out;
  for (auto [lo, hi] : raw) {
    if (hi - lo >= 2 && hi - lo < next) out.insert({lo, hi});
  }
  return out;
}

Tree RandomLabeledTree(RandomSource &rng, int depth) {
  static const std::vector<std::string> cats = {"S", "NP", "VP", "PP", "SBAR", "NP-SBJ-1", "ADJP"};
  static const std::vector<std::string> tags = {"DT", "NN", "VBD", ",", ".", "-NONE-", "PRP$"};
  static const std::vector<std::string> words = {"the", "cat", "Sat", "on", "mat", "'s", "3.5", "*T*-1"};
  if (depth == 0 || rng.Bernoulli(0.3)) {
    return Tree::Leaf(words[rng.Uniform(words.size())], tags[rng.Uniform(tags.size())]);
  }
  int k = rng.UniformInt(1, 3);
  std::vector<Tree> kids;
  for (int i = 0; i < k; ++i) kids.push_back(RandomLabeledTree(rng, depth - 1));
  return Tree::Node(cats[rng.Uniform(cats.size())], std::move(kids));
}

Tree RandomUnlabeledTree(RandomSource &rng, int depth) {
  static const std::vector<std::string> words = {"a", "b", "c", "it", "did", "so", "and", "x1"};
  if (depth == 0 || rng.Bernoulli(0.3)) return Tree::Leaf(words[rng.Uniform(words.size())]);
  int k = rng.UniformInt(2, 3);
  std::vector<Tree> kids;
  for (int i = 0; i < k; ++i) kids.push_back(RandomUnlabeledTree(rng, depth - 1));
  return Tree::Node(std::nullopt, std::move(kids));
}

}  // namespace

TEST_CASE("preprocess examples") {
  CHECK(Preprocess(std::vector<std::string>{"Both", "funds", "are", "expected", "."}) ==
        S("both funds are expected"));
  CHECK(Preprocess(std::vector<std::string>{"hello"}) == S("hello"));
  std::vector<std::string> quoted = {"``", "By", "midday", ",", "it", "fell", "''", "."};
  CHECK(Preprocess(quoted) == S("by midday , it fell"));
  CHECK(Preprocess(quoted).Join() == ReferencePreprocess(quoted));
  CHECK_THROWS_WITH_AS(Preprocess(std::vector<std::string>{"``", "."}),
                       "sentence vanished under preprocessing", InputError);
}

TEST_CASE("preprocess matches the character-level reference") {
  RandomSource rng(11);
  const std::vector<std::string> pool = {"The", "``", "''", ".", "!", "?", ",", "it", "WAS", "'", "\"", "Fine"};
  for (int trial = 0; trial < 2000; ++trial) {
    std::vector<std::string> raw;
    int n = rng.UniformInt(1, 8);
    for (int i = 0; i < n; ++i) raw.push_back(pool[rng.Uniform(pool.size())]);
    std::string want = ReferencePreprocess(raw);
    if (want.empty()) {
      CHECK_THROWS_AS(Preprocess(raw), InputError);
    } else {
      CHECK(Preprocess(raw).Join() == want);
    }
  }
}

TEST_CASE("parse_bracketed examples") {
  Tree t = ParseBracketed("(S (NP (DT both) (NNS funds)) (VP (VBP are)))");
  CHECK(TreeSpans(t) == SpanSet{{0, 2}, {2, 3}, {0, 3}});
  CHECK(t.Words() == std::vector<std::string>{"both", "funds", "are"});
  CHECK(t.label() == "S");

  Tree u = ParseBracketed("((a b))");
  CHECK(u.Words() == std::vector<std::string>{"a", "b"});
  CHECK(TreeSpans(u) == SpanSet{{0, 2}});
  CHECK_FALSE(u.label().has_value());

  try {
    ParseBracketed("(S (NP x)");
    FAIL("expected a parse error");
  } catch (const ParseError &e) {
    CHECK(e.offset() == 10);
  }
  CHECK_THROWS_AS(ParseBracketed(""), ParseError);
  CHECK_THROWS_AS(ParseBracketed("()"), ParseError);
  CHECK_THROWS_AS(ParseBracketed("(a b))"), ParseError);
}

TEST_CASE("right-branching unlabeled trees are not mistaken for labeled ones") {
  Tree t = ParseBracketed("(a (b (c d)))");
  CHECK(t.Words() == std::vector<std::string>{"a", "b", "c", "d"});
  CHECK(TreeSpans(t) == SpanSet{{0, 4}, {1, 4}, {2, 4}});
}

TEST_CASE("render_bracketed examples") {
  Tree t = Tree::Node(std::nullopt, {Tree::Leaf("a"), Tree::Leaf("b")});
  CHECK(RenderBracketed(t) == "((a b))");
  CHECK(RenderBracketed(t, {.placeholder = "X"}) == "(X (X a) (X b))");
  const std::string gold = "(S (NP (DT both) (NNS funds)) (VP (VBP are)))";
  CHECK(RenderBracketed(ParseBracketed(gold)) == gold);
  CHECK(RenderBracketed(ParseBracketed("(S\n  (NP (DT both)   (NNS funds))\n (VP (VBP are)))")) == gold);
}

TEST_CASE("render/parse round trip over 1000 random trees") {
  RandomSource rng(5);
  for (int i = 0; i < 500; ++i) {
    Tree t = RandomLabeledTree(rng, 4);
    if (t.is_leaf()) continue;
    std::string text = RenderBracketed(t);
    REQUIRE_MESSAGE(ParseBracketed(text) == t, text);
  }
  for (int i = 0; i < 500; ++i) {
    Tree t = RandomUnlabeledTree(rng, 4);
    if (t.is_leaf()) continue;
    std::string text = RenderBracketed(t);
    REQUIRE_MESSAGE(ParseBracketed(text) == t, text);
  }
}

TEST_CASE("sampled synthetic trees round trip") {
  Grammar g = Grammar::Load(ctparse::testing::SourcePath("data/grammars/default.cfg"));
  RandomSource rng(3);
  DerivedCorpus c = SampleCorpus(g, 1000, 12, rng);
  for (const auto &t : c.gold_trees) {
    std::string text = RenderBracketed(t);
    REQUIRE_MESSAGE(ParseBracketed(text) == t, text);
  }
}

TEST_CASE("normalize_for_eval examples") {
  auto punct = PunctuationConfig::Default();
  CHECK(NormalizeForEval(ParseBracketed("(S (NP (DT the) (NN cat)) (. .))"), punct).empty());
  Tree dog = ParseBracketed("(S (NP (NP (DT a) (NN dog)) (, ,)) (VP (VBD ran) (ADVP (RB fast))))");
  CHECK(NormalizeForEval(dog, punct) == SpanSet{{0, 2}, {2, 4}});
  CHECK(ReferenceNormalize(dog, punct) == SpanSet{{0, 2}, {2, 4}});

  Tree clean = ParseBracketed("(S (NP (DT the) (NN cat)) (VP (VBD sat) (PP (IN on) (NP (DT a) (NN mat)))))");
  SpanSet own;
  for (const auto &s : TreeSpans(clean)) {
    if (IsNontrivial(s, clean.size())) own.insert(s);
  }
  CHECK(NormalizeForEval(clean, punct) == own);
}

TEST_CASE("normalize_for_eval agrees with the naive reference") {
  RandomSource rng(19);
  auto punct = PunctuationConfig::Default();
  auto tokens_only = punct;
  tokens_only.tokens_only = true;
  for (int i = 0; i < 1000; ++i) {
    Tree t = RandomLabeledTree(rng, 5);
    CHECK(NormalizeForEval(t, punct) == ReferenceNormalize(t, punct));
    Tree u = RandomUnlabeledTree(rng, 5);
    CHECK(NormalizeForEval(u, tokens_only) == ReferenceNormalize(u, tokens_only));
  }
}

TEST_CASE("punctuation is matched by tag for tagged leaves") {
  auto punct = PunctuationConfig::Default();
  // A comma tagged as a word survives; a word tagged "," is removed.
  Tree t = ParseBracketed("(S (NP (NN x) (NN ,)) (VP (, y) (VBD z)))");
  CHECK(NormalizeForEval(t, punct) == SpanSet{{0, 2}});
  auto tok = punct;
  tok.tokens_only = true;
  CHECK(NormalizeForEval(t, tok) == SpanSet{{1, 3}});
}

TEST_CASE("binarize_right") {
  Tree flat = Tree::Node(std::nullopt, {Tree::Leaf("a"), Tree::Leaf("b"), Tree::Leaf("c")});
  Tree b = BinarizeRight(flat);
  CHECK(IsBinary(b));
  CHECK(TreeSpans(b) == SpanSet{{0, 3}, {1, 3}});
  Tree bin = ParseBracketed("((a (b c)))");
  CHECK(BinarizeRight(bin) == bin);

  RandomSource rng(23);
  for (int i = 0; i < 300; ++i) {
    Tree t = RandomUnlabeledTree(rng, 4);
    Tree r = BinarizeRight(t);
    SpanSet before = TreeSpans(t), after = TreeSpans(r);
    CHECK(std::includes(after.begin(), after.end(), before.begin(), before.end()));
    CHECK(r.Words() == t.Words());
    if (!t.is_leaf()) CHECK(IsBinary(r));
  }
}

TEST_CASE("span counts") {
  for (int n = 1; n <= 40; ++n) {
    int with_full = 0;
    for (int lo = 0; lo < n; ++lo) {
      for (int hi = lo + 2; hi <= n; ++hi) ++with_full;
    }
    CHECK(with_full == n * (n - 1) / 2);
    CHECK(static_cast<int>(NontrivialSpans(n).size()) == std::max(0, n * (n - 1) / 2 - 1));
  }
  CHECK(NontrivialSpans(30).size() + 1 == 435);
}

TEST_CASE("spans and categories") {
  CHECK(BaseCategory("NP-SBJ-1") == "NP");
  CHECK(BaseCategory("PP-LOC=2") == "PP");
  CHECK(BaseCategory("-NONE-") == "-NONE-");
  CHECK(Span{0, 2}.Crosses(Span{1, 3}));
  CHECK_FALSE(Span{0, 4}.Crosses(Span{1, 3}));
  CHECK_THROWS_AS(CheckSpan({2, 2}, 4), InputError);
  CHECK_THROWS_AS(CheckSpan({0, 5}, 4), InputError);
  CHECK_NOTHROW(CheckSpan({0, 4}, 4));
}

TEST_CASE("multi-line tree files") {
  ctparse::testing::TempDir dir;
  std::string path = dir.File("t.mrg");
  ctparse::testing::WriteFile(path,
                              "(S (NP (DT a)\n   (NN dog))\n  (VP (VBD ran)))\n\n((a (b c)))\n");
  auto trees = ReadTrees(path);
  REQUIRE(trees.size() == 2);
  CHECK(trees[0].Words() == std::vector<std::string>{"a", "dog", "ran"});
  CHECK(TreeSpans(trees[1]) == SpanSet{{0, 3}, {1, 3}});

  ctparse::testing::WriteFile(path, "((a b))\n(S (NP x)\n");
  try {
    ReadTrees(path);
    FAIL("expected a parse error");
  } catch (const ParseError &e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
}
