#include <doctest.h>

#include <atomic>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ctparse/decoder.h"
#include "ctparse/random.h"
#include "oracles.h"
#include "test_util.h"

using namespace ctparse;
using ctparse::testing::FunctionScorer;
using ctparse::testing::S;
using namespace ctparse::testing;

TEST_CASE("catalan counts of the brute-force enumerator") {
  const std::vector<std::size_t> catalan = {1, 1, 2, 5, 14, 42, 132};
  for (int n = 1; n <= 7; ++n) CHECK(AllBinaryTrees(0, n).size() == catalan[n - 1]);
}

TEST_CASE("trivial chart entries are fixed") {
  Chart c(4);
  for (int i = 0; i < 4; ++i) CHECK(c.score(i, i + 1) == 1.0);
  CHECK(c.score(0, 4) == 1.0);
  CHECK_THROWS(c.set_score(0, 4, 0.5));
  CHECK_THROWS(c.set_score(1, 2, 0.5));
  CHECK_THROWS(c.set_score(0, 2, 1.5));
  c.set_score(0, 2, 0.25);
  CHECK(c.score(0, 2) == 0.25);
}

TEST_CASE("score_spans examples") {
  Sentence s = S("a b c d");
  FunctionScorer ones([](const Sentence &) { return 1.0; });
  Chart c1 = ScoreSpans(ones, s);
  for (int lo = 0; lo < 4; ++lo)
    for (int hi = lo + 1; hi <= 4; ++hi) CHECK(c1.score(lo, hi) == 1.0);

  FunctionScorer zeros([](const Sentence &) { return 0.0; });
  Chart c0 = ScoreSpans(zeros, s);
  for (int lo = 0; lo < 4; ++lo)
    for (int hi = lo + 1; hi <= 4; ++hi)
      CHECK(c0.score(lo, hi) == (IsNontrivial({lo, hi}, 4) ? 0.0 : 1.0));

  // Passes exactly the two clefts, coordination and "it" substitution of (1,3).
  FunctionScorer half([](const Sentence &t) {
    std::string j = t.Join();
    return (j.rfind("it ", 0) == 0 || j.find(" and ") != std::string::npos || j == "a it d") ? 1.0
                                                                                            : 0.0;
  });
  CHECK(ScoreSpans(half, s).score(1, 3) == 0.5);
}

TEST_CASE("mbr_parse small cases") {
  Chart c2(2);
  Tree t2 = MbrParse(c2, std::vector<std::string>{"a", "b"});
  CHECK(TreeSpans(t2) == SpanSet{{0, 2}});
  CHECK(RenderBracketed(t2) == "((a b))");

  Chart c3(3);
  c3.set_score(0, 2, 0.9);
  c3.set_score(1, 3, 0.1);
  CHECK(TreeSpans(MbrParse(c3)) == SpanSet{{0, 3}, {0, 2}});

  Chart tie(3);
  tie.set_score(0, 2, 0.5);
  tie.set_score(1, 3, 0.5);
  CHECK(TreeSpans(MbrParse(tie)) == SpanSet{{0, 3}, {1, 3}});

  Chart one(1);
  Tree leaf = MbrParse(one, std::vector<std::string>{"x"});
  CHECK(leaf.is_leaf());
  CHECK(MbrParse(Chart(3)).Words() == std::vector<std::string>{"w0", "w1", "w2"});
}

TEST_CASE("mbr_parse matches brute force on 200 random charts of length 6") {
  RandomSource rng(6);
  for (int trial = 0; trial < 200; ++trial) {
    Chart c(6);
    for (const auto &s : NontrivialSpans(6)) c.set_score(s.lo, s.hi, rng.Uniform01());
    Tree t = MbrParse(c);
    CHECK(IsBinary(t));
    CHECK(t.size() == 6);
    CHECK(InternalScore(c, t) == doctest::Approx(BruteForceBest(c)).epsilon(1e-12));
  }
}

TEST_CASE("mbr_parse is exact on integer charts up to length 8") {
  RandomSource rng(8);
  for (int n = 2; n <= 8; ++n) {
    for (int trial = 0; trial < 50; ++trial) {
      Chart c = RandomIntegerChart(n, rng);
      Tree t = MbrParse(c);
      CHECK(InternalScore(c, t) == BruteForceBest(c));
      CHECK(TreeScore(c, t) == InternalScore(c, t) + n);
    }
  }
}

TEST_CASE("decoding is invariant under monotone rescaling") {
  RandomSource rng(12);
  for (int trial = 0; trial < 100; ++trial) {
    Chart c = RandomIntegerChart(7, rng);
    Chart d(7);
    for (const auto &s : NontrivialSpans(7)) d.set_raw(s.lo, s.hi, 3.0 * c.score(s) + 2.0);
    // Affine maps with positive slope shift every tree score by the same amount.
    CHECK(TreeSpans(MbrParse(c)) == TreeSpans(MbrParse(d)));
  }
}

TEST_CASE("parse_corpus basics") {
  FunctionScorer len([](const Sentence &t) { return 1.0 / static_cast<double>(t.size()); });
  CHECK(ParseCorpus(len, std::vector<Sentence>{}).trees.empty());

  std::vector<Sentence> one = {S("solo")};
  auto r1 = ParseCorpus(len, one);
  REQUIRE(r1.trees.size() == 1);
  CHECK(r1.trees[0].is_leaf());
  CHECK(r1.trees[0].word() == "solo");

  std::vector<Sentence> corpus = {S("a b c d e"), S("the cat sat on the mat"), S("x y")};
  DecoderOptions serial;
  DecoderOptions parallel;
  parallel.workers = 4;
  auto a = ParseCorpus(len, corpus, serial, true);
  auto b = ParseCorpus(len, corpus, parallel, true);
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    CHECK(RenderBracketed(a.trees[i]) == RenderBracketed(b.trees[i]));
    CHECK(a.trees[i].Words() == corpus[i].tokens());
    REQUIRE(a.charts[i].has_value());
    CHECK(ChartToJson(corpus[i], *a.charts[i]) == ChartToJson(corpus[i], *b.charts[i]));
  }
}

TEST_CASE("a failing sentence gets a flat tree and the run continues") {
  FunctionScorer picky([](const Sentence &t) -> double {
    for (const auto &w : t) {
      if (w == "boom") throw std::runtime_error("scorer exploded");
    }
    return 0.5;
  });
  std::vector<Sentence> corpus = {S("a b c"), S("x boom z"), S("d e f")};
  auto r = ParseCorpus(picky, corpus);
  CHECK(r.failures == std::vector<std::size_t>{1});
  CHECK(r.trees[1].children().size() == 3);
  CHECK(IsBinary(r.trees[0]));
  CHECK(IsBinary(r.trees[2]));
}

TEST_CASE("scorer errors name the span") {
  FunctionScorer bad([](const Sentence &) -> double { throw std::runtime_error("nope"); });
  CHECK_THROWS_WITH(ScoreSpans(bad, S("a b c")), doctest::Contains("nope"));
}

TEST_CASE("length-capped tests are judged zero") {
  FunctionScorer ones([](const Sentence &) { return 1.0; });
  Sentence s = S("a b c d");
  DecoderOptions opt;
  opt.transforms.max_length = 5;
  std::vector<Span> spans = {{0, 3}};
  auto j = JudgeSpans(ones, s, spans, opt);
  REQUIRE(j.judgments.size() == 1);
  // Clefts (7 tokens) and coordination (8 tokens) exceed the cap.
  CHECK(j.judgments[0][TestIndex(ConstituencyTest::kCleftIs)] == 0.0);
  CHECK(j.judgments[0][TestIndex(ConstituencyTest::kCoordination)] == 0.0);
  CHECK(j.judgments[0][TestIndex(ConstituencyTest::kSubIt)] == 1.0);
  CHECK(j.judgments[0][TestIndex(ConstituencyTest::kEndMovement)] == 1.0);
}

TEST_CASE("the judgment cache avoids rescoring") {
  std::atomic<int> calls{0};
  FunctionScorer counting([&](const Sentence &) {
    ++calls;
    return 0.5;
  });
  JudgmentCache cache;
  DecoderOptions opt;
  opt.cache = &cache;
  std::vector<Sentence> corpus = {S("a b c d e")};
  ParseCorpus(counting, corpus, opt);
  int first = calls.load();
  CHECK(first > 0);
  CHECK(cache.size() == static_cast<std::size_t>(first));
  ParseCorpus(counting, corpus, opt);
  CHECK(calls.load() == first);
}

TEST_CASE("chart json") {
  Chart c(3);
  c.set_score(0, 2, 0.25);
  c.set_score(1, 3, 0.75);
  auto j = nlohmann::json::parse(ChartToJson(S("a b c"), c));
  CHECK(j["tokens"] == nlohmann::json({"a", "b", "c"}));
  // Every span, trivial ones included, ordered by (lo, hi).
  REQUIRE(j["scores"].size() == 6);
  CHECK(j["scores"][0] == nlohmann::json({0, 1, 1.0}));
  CHECK(j["scores"][1] == nlohmann::json({0, 2, 0.25}));
  CHECK(j["scores"][2] == nlohmann::json({0, 3, 1.0}));
  CHECK(j["scores"][4] == nlohmann::json({1, 3, 0.75}));
}
