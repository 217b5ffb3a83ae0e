#include "ctparse/decoder.h"

#include <unordered_map>

#include <fmt/format.h>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include "ctparse/parallel.h"

namespace ctparse {

Chart::Chart(int n) : n_(n), cells_(static_cast<std::size_t>(n + 1) * (n + 1), 0.0) {
  if (n < 1) throw std::invalid_argument("chart needs at least one token");
  for (int i = 0; i < n; ++i) cells_[Index(i, i + 1)] = 1.0;
  cells_[Index(0, n)] = 1.0;
}

void Chart::set_score(int lo, int hi, double value) {
  if (!IsNontrivial({lo, hi}, n_) || lo < 0 || hi > n_) {
    throw std::invalid_argument(fmt::format("span ({},{}) is fixed or out of range", lo, hi));
  }
  if (!(value >= 0.0 && value <= 1.0)) {
    throw std::invalid_argument(fmt::format("chart score {} outside [0,1]", value));
  }
  cells_[Index(lo, hi)] = value;
}

SpanJudgments JudgeSpans(const GrammaticalityScorer &scorer, const Sentence &sent,
                         std::span<const Span> spans, const DecoderOptions &options) {
  SpanJudgments out;
  out.spans.assign(spans.begin(), spans.end());
  out.judgments.assign(spans.size(), {});

  JudgmentCache *cache = scorer.deterministic() ? options.cache : nullptr;

  // Distinct transformed strings awaiting a judgment, and which
  // (span, test) slots each one fills.
  std::vector<Sentence> pending;
  std::vector<std::string> pending_keys;
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> slots;
  std::unordered_map<std::string, std::size_t> index;

  for (std::size_t k = 0; k < spans.size(); ++k) {
    for (std::size_t t = 0; t < kNumTests; ++t) {
      std::optional<TransformedSentence> ts;
      try {
        ts = ApplyTest(kAllTests[t], sent, spans[k], options.transforms);
      } catch (const LengthCapError &) {
        out.judgments[k][t] = 0.0;
        continue;
      }
      std::string key = ts->sentence.Join();
      if (cache) {
        if (auto hit = cache->Lookup(key)) {
          out.judgments[k][t] = *hit;
          continue;
        }
      }
      auto [it, inserted] = index.emplace(key, pending.size());
      if (inserted) {
        pending.push_back(std::move(ts->sentence));
        pending_keys.push_back(std::move(key));
        slots.emplace_back();
      }
      slots[it->second].emplace_back(k, t);
    }
  }
  if (pending.empty()) return out;

  std::vector<double> probs;
  try {
    probs = ScoreSentences(scorer, pending);
  } catch (const std::exception &e) {
    const auto &first = slots.front().front();
    const auto &last = slots.back().back();
    spdlog::error("scoring spans ({},{})..({},{}) of '{}' failed: {}",
                  spans[first.first].lo, spans[first.first].hi, spans[last.first].lo,
                  spans[last.first].hi, sent.Join(), e.what());
    throw;
  }
  for (std::size_t i = 0; i < pending.size(); ++i) {
    for (auto [k, t] : slots[i]) out.judgments[k][t] = probs[i];
    if (cache) cache->Insert(pending_keys[i], probs[i]);
  }
  return out;
}

Chart ScoreSpans(const GrammaticalityScorer &scorer, const Sentence &sent,
                 const DecoderOptions &options) {
  if (sent.empty()) throw std::invalid_argument("cannot score an empty sentence");
  const int n = static_cast<int>(sent.size());
  Chart chart(n);
  auto spans = NontrivialSpans(n);
  if (spans.empty()) return chart;
  SpanJudgments j = JudgeSpans(scorer, sent, spans, options);
  for (std::size_t k = 0; k < spans.size(); ++k) {
    double sum = 0;
    for (double p : j.judgments[k]) sum += p;
    chart.set_score(spans[k].lo, spans[k].hi, sum / static_cast<double>(kNumTests));
  }
  return chart;
}

namespace {

Tree Build(const std::vector<int> &split, int n, int lo, int hi,
           std::span<const std::string> words) {
  if (hi - lo == 1) {
    return Tree::Leaf(words.empty() ? fmt::format("w{}", lo) : words[lo]);
  }
  int k = split[static_cast<std::size_t>(lo) * (n + 1) + hi];
  std::vector<Tree> kids;
  kids.push_back(Build(split, n, lo, k, words));
  kids.push_back(Build(split, n, k, hi, words));
  return Tree::Node(std::nullopt, std::move(kids));
}

}  // namespace

Tree MbrParse(const Chart &chart, std::span<const std::string> words) {
  const int n = chart.n();
  if (!words.empty() && static_cast<int>(words.size()) != n) {
    throw std::invalid_argument("word count does not match chart size");
  }
  const auto idx = [n](int lo, int hi) { return static_cast<std::size_t>(lo) * (n + 1) + hi; };
  std::vector<double> best(static_cast<std::size_t>(n + 1) * (n + 1), 0.0);
  std::vector<int> split(best.size(), -1);
  for (int i = 0; i < n; ++i) best[idx(i, i + 1)] = chart.score(i, i + 1);
  for (int len = 2; len <= n; ++len) {
    for (int lo = 0; lo + len <= n; ++lo) {
      const int hi = lo + len;
      double top = 0;
      int arg = -1;
      for (int k = lo + 1; k < hi; ++k) {
        double v = best[idx(lo, k)] + best[idx(k, hi)];
        if (arg < 0 || v > top) {
          top = v;
          arg = k;
        }
      }
      best[idx(lo, hi)] = top + chart.score(lo, hi);
      split[idx(lo, hi)] = arg;
    }
  }
  return Build(split, n, 0, n, words);
}

double TreeScore(const Chart &chart, const Tree &tree) {
  double total = 0;
  for (const auto &ls : CollectSpans(tree, /*include_leaves=*/true)) {
    total += chart.score(ls.span);
  }
  return total;
}

CorpusParse ParseCorpus(const GrammaticalityScorer &scorer,
                        std::span<const Sentence> sentences,
                        const DecoderOptions &options, bool keep_charts) {
  CorpusParse out;
  const std::size_t n = sentences.size();
  std::vector<std::optional<Tree>> trees(n);
  out.charts.resize(keep_charts ? n : 0);
  std::vector<char> failed(n, 0);
  ParallelFor(n, options.workers, [&](std::size_t i) {
    const Sentence &s = sentences[i];
    if (static_cast<int>(s.size()) > options.length_cap) {
      spdlog::info("sentence {} has {} tokens (cap {})", i, s.size(), options.length_cap);
    }
    try {
      Chart chart = ScoreSpans(scorer, s, options);
      trees[i] = MbrParse(chart, s.tokens());
      if (keep_charts) out.charts[i] = std::move(chart);
    } catch (const std::exception &e) {
      spdlog::error("sentence {} failed: {}", i, e.what());
      failed[i] = 1;
    }
  });
  out.trees.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (failed[i] || !trees[i]) {
      out.failures.push_back(i);
      std::vector<Tree> leaves;
      for (const auto &w : sentences[i]) leaves.push_back(Tree::Leaf(w));
      if (leaves.empty()) leaves.push_back(Tree::Leaf("<empty>"));
      out.trees.push_back(leaves.size() == 1 ? leaves[0]
                                             : Tree::Node(std::nullopt, std::move(leaves)));
    } else {
      out.trees.push_back(std::move(*trees[i]));
    }
  }
  return out;
}

std::string ChartToJson(const Sentence &sent, const Chart &chart) {
  nlohmann::json scores = nlohmann::json::array();
  for (int lo = 0; lo < chart.n(); ++lo) {
    for (int hi = lo + 1; hi <= chart.n(); ++hi) {
      scores.push_back({lo, hi, chart.score(lo, hi)});
    }
  }
  nlohmann::json rec = {{"tokens", sent.tokens()}, {"scores", std::move(scores)}};
  return rec.dump();
}

}  // namespace ctparse
