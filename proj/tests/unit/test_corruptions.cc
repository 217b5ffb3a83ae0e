#include <doctest.h>

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "ctparse/corruptions.h"
#include "test_util.h"

using namespace ctparse;
using ctparse::testing::S;

namespace {

std::multiset<std::string> Bag(const Sentence &s) { return {s.begin(), s.end()}; }

bool IsProperSubsequence(const Sentence &sub, const Sentence &full) {
  if (sub.size() >= full.size() || sub.empty()) return false;
  std::size_t j = 0;
  for (const auto &tok : full) {
    if (j < sub.size() && sub[j] == tok) ++j;
  }
  return j == sub.size();
}

// Every result of moving one proper span to the front or the back.
std::set<std::vector<std::string>> AllSpanMovements(const Sentence &s) {
  std::set<std::vector<std::string>> out;
  const auto &t = s.tokens();
  int n = static_cast<int>(t.size());
  for (int lo = 0; lo < n; ++lo) {
    for (int hi = lo + 1; hi <= n; ++hi) {
      if (hi - lo == n) continue;
      std::vector<std::string> span(t.begin() + lo, t.begin() + hi);
      std::vector<std::string> rest(t.begin(), t.begin() + lo);
      rest.insert(rest.end(), t.begin() + hi, t.end());
      std::vector<std::string> front = span, back = rest;
      front.insert(front.end(), rest.begin(), rest.end());
      back.insert(back.end(), span.begin(), span.end());
      out.insert(front);
      out.insert(back);
    }
  }
  return out;
}

}  // namespace

TEST_CASE("bigram probabilities") {
  std::vector<Sentence> corpus = {S("a b"), S("a b")};
  CHECK(BigramLM::Train(corpus, 0.0).Probability("a", "b") == doctest::Approx(1.0));
  auto lm = BigramLM::Train(corpus, 0.1);
  CHECK(lm.Probability("a", "b") == doctest::Approx(2.1 / 2.3).epsilon(1e-12));
  CHECK(lm.Probability("a", "b") == doctest::Approx(0.913).epsilon(1e-3));
  CHECK_THROWS_AS(BigramLM::Train(std::vector<Sentence>{}, 0.1), InputError);
}

TEST_CASE("bigram distributions normalize and are positive under smoothing") {
  std::vector<Sentence> corpus = {S("the cat sat"), S("the dog sat on the mat"), S("a cat")};
  auto lm = BigramLM::Train(corpus, 0.5);
  std::vector<std::string> contexts(lm.vocab().begin(), lm.vocab().end());
  contexts.emplace_back(BigramLM::kBegin);
  contexts.emplace_back("unseen");
  for (const auto &ctx : contexts) {
    double total = lm.Probability(ctx, BigramLM::kEnd);
    CHECK(lm.Probability(ctx, BigramLM::kEnd) > 0);
    for (const auto &w : lm.vocab()) {
      CHECK(lm.Probability(ctx, w) > 0);
      total += lm.Probability(ctx, w);
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("swap on two tokens") {
  RandomSource rng(1);
  for (int i = 0; i < 20; ++i) CHECK(Corrupt(CorruptionKind::kSwap, S("a b"), rng) == S("b a"));
}

TEST_CASE("span movement lands in the enumerated outcome set") {
  RandomSource rng(4);
  Sentence xyz = S("x y z");
  auto allowed = AllSpanMovements(xyz);
  CHECK(allowed.count({"y", "z", "x"}) == 1);
  std::set<std::vector<std::string>> seen;
  for (int i = 0; i < 500; ++i) {
    Sentence out = Corrupt(CorruptionKind::kSpanMovement, xyz, rng);
    CHECK(allowed.count(out.tokens()) == 1);
    CHECK(out != xyz);
    seen.insert(out.tokens());
  }
  CHECK(seen.count({"y", "z", "x"}) == 1);
  Sentence longer = S("a b c d e f");
  auto allowed6 = AllSpanMovements(longer);
  for (int i = 0; i < 500; ++i) {
    CHECK(allowed6.count(Corrupt(CorruptionKind::kSpanMovement, longer, rng).tokens()) == 1);
  }
}

TEST_CASE("corruption output contracts") {
  RandomSource rng(9);
  std::vector<Sentence> corpus = {S("the cat sat on the mat"), S("a dog ran"), S("the dog sat")};
  auto lm = BigramLM::Train(corpus, 0.1);
  Sentence s = S("one two three four five");
  for (int i = 0; i < 300; ++i) {
    for (auto kind : kAllCorruptions) {
      Sentence out = Corrupt(kind, s, rng, &lm);
      CHECK(out != s);
      switch (kind) {
        case CorruptionKind::kShuffle:
        case CorruptionKind::kSwap:
        case CorruptionKind::kSpanMovement:
          CHECK(Bag(out) == Bag(s));
          break;
        case CorruptionKind::kDrop:
        case CorruptionKind::kSpanDrop:
          CHECK(IsProperSubsequence(out, s));
          break;
        case CorruptionKind::kBigram: {
          REQUIRE(out.size() == 5);
          CHECK(lm.Probability(BigramLM::kBegin, out[0]) > 0);
          for (std::size_t k = 1; k < out.size(); ++k) CHECK(lm.Probability(out[k - 1], out[k]) > 0);
          break;
        }
      }
    }
  }
}

TEST_CASE("corruption errors") {
  RandomSource rng(0);
  CHECK_THROWS_WITH_AS(Corrupt(CorruptionKind::kSwap, S("a"), rng),
                       doctest::Contains("corruption inapplicable"), CorruptionError);
  CHECK_THROWS_WITH_AS(Corrupt(CorruptionKind::kSpanDrop, S("a b"), rng),
                       doctest::Contains("corruption inapplicable"), CorruptionError);
  CHECK_THROWS_WITH_AS(Corrupt(CorruptionKind::kBigram, S("a b"), rng),
                       doctest::Contains("corruption inapplicable"), CorruptionError);
  CHECK_THROWS_WITH_AS(Corrupt(CorruptionKind::kShuffle, S("a a a"), rng),
                       doctest::Contains("degenerate input"), CorruptionError);
}

TEST_CASE("real/fake dataset") {
  std::vector<Sentence> corpus;
  RandomSource gen(3);
  for (int i = 0; i < 100; ++i) {
    std::vector<std::string> toks;
    for (int k = 0; k < 6; ++k) toks.push_back("w" + std::to_string(gen.Uniform(50)));
    toks[0] = "s" + std::to_string(i);  // distinct tokens: no corruption degenerates
    corpus.emplace_back(toks);
  }
  auto lm = BigramLM::Train(corpus, 0.1);
  RandomSource rng(7);
  auto data = MakeRealFakeDataset(corpus, kAllCorruptions, rng, &lm);
  CHECK(data.size() == 200);
  CHECK(std::count_if(data.begin(), data.end(), [](const auto &e) { return e.label == 1; }) == 100);
  for (const auto &e : data) {
    if (e.label == 1) {
      CHECK(e.provenance == "real");
    } else {
      CHECK(CorruptionFromName(e.provenance).has_value());
    }
  }

  RandomSource again(7);
  auto data2 = MakeRealFakeDataset(corpus, kAllCorruptions, again, &lm);
  REQUIRE(data2.size() == data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    CHECK(data[i].tokens == data2[i].tokens);
    CHECK(data[i].provenance == data2[i].provenance);
  }

  std::vector<Sentence> pairs = {S("a b"), S("c d"), S("e f")};
  std::vector<CorruptionKind> shuffle = {CorruptionKind::kShuffle};
  auto fakes = MakeRealFakeDataset(pairs, shuffle, rng);
  for (std::size_t i = 0; i < fakes.size(); i += 2) {
    Sentence real = fakes[i].tokens;
    CHECK(fakes[i + 1].tokens == Sentence({real[1], real[0]}));
  }
}

TEST_CASE("sentences that cannot be corrupted are skipped") {
  RandomSource rng(1);
  std::vector<Sentence> corpus = {S("a"), S("b c")};
  std::vector<CorruptionKind> swap = {CorruptionKind::kSwap};
  auto data = MakeRealFakeDataset(corpus, swap, rng);
  CHECK(data.size() == 2);
}

TEST_CASE("corruption names") {
  for (auto k : kAllCorruptions) CHECK(CorruptionFromName(CorruptionName(k)) == k);
  CHECK_FALSE(CorruptionFromName("rotate").has_value());
}
