#include "ctparse/eval.h"

#include <algorithm>
#include <set>

#include <fmt/format.h>

#include "ctparse/random.h"

namespace ctparse {

Prf SentenceF1(const SpanSet &gold, const SpanSet &pred) {
  if (gold.empty() && pred.empty()) return {1.0, 1.0, 1.0};
  std::size_t hit = 0;
  for (const auto &s : pred) hit += gold.count(s);
  Prf r;
  r.precision = pred.empty() ? 1.0 : static_cast<double>(hit) / static_cast<double>(pred.size());
  r.recall = gold.empty() ? 1.0 : static_cast<double>(hit) / static_cast<double>(gold.size());
  const double denom = r.precision + r.recall;
  r.f1 = denom > 0 ? 2 * r.precision * r.recall / denom : 0.0;
  return r;
}

namespace {

SpanSet NontrivialTreeSpans(const Tree &t) {
  SpanSet out;
  const int n = t.size();
  for (const auto &ls : CollectSpans(t)) {
    if (IsNontrivial(ls.span, n)) out.insert(ls.span);
  }
  return out;
}

struct Aligned {
  Tree gold;
  Tree pred;
};

// Punctuation-stripped pair, or nullopt when both sides are empty. Throws on
// any token disagreement.
std::optional<Aligned> Align(const Tree &gold, const Tree &pred, std::size_t index,
                             const EvalOptions &options) {
  auto g = StripPunctuation(gold, options.gold_punct);
  auto p = StripPunctuation(pred, options.pred_punct);
  if (!g && !p) return std::nullopt;
  const auto gw = g ? g->Words() : std::vector<std::string>{};
  const auto pw = p ? p->Words() : std::vector<std::string>{};
  bool same = gw.size() == pw.size();
  for (std::size_t k = 0; same && k < gw.size(); ++k) {
    same = Lowercase(gw[k]) == Lowercase(pw[k]);
  }
  if (!same) {
    Sentence gs(gw), ps(pw);
    throw InputError(fmt::format("token mismatch at line {}: gold '{}' vs predicted '{}'",
                                 index + 1, gs.Join(), ps.Join()));
  }
  return Aligned{std::move(*g), std::move(*p)};
}

void CheckCounts(std::size_t gold, std::size_t pred) {
  if (gold != pred) {
    throw InputError(
        fmt::format("gold has {} trees but prediction has {}", gold, pred));
  }
}

}  // namespace

EvalReport CorpusF1(std::span<const Tree> gold, std::span<const Tree> pred,
                    const EvalOptions &options) {
  CheckCounts(gold.size(), pred.size());
  EvalReport report;
  double sum_f1 = 0, sum_p = 0, sum_r = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    auto pair = Align(gold[i], pred[i], i, options);
    if (!pair) {
      report.per_sentence.emplace_back();
      ++report.skipped;
      continue;
    }
    Prf r = SentenceF1(NontrivialTreeSpans(pair->gold), NontrivialTreeSpans(pair->pred));
    report.per_sentence.emplace_back(r);
    sum_f1 += r.f1;
    sum_p += r.precision;
    sum_r += r.recall;
    ++report.evaluated;
  }
  if (report.evaluated > 0) {
    const double n = static_cast<double>(report.evaluated);
    report.corpus_f1 = 100.0 * sum_f1 / n;
    report.corpus_precision = 100.0 * sum_p / n;
    report.corpus_recall = 100.0 * sum_r / n;
  }
  return report;
}

std::optional<Baseline> BaselineFromName(std::string_view name) {
  if (name == "left") return Baseline::kLeft;
  if (name == "right") return Baseline::kRight;
  if (name == "balanced") return Baseline::kBalanced;
  return std::nullopt;
}

std::string_view BaselineName(Baseline b) {
  switch (b) {
    case Baseline::kLeft: return "left";
    case Baseline::kRight: return "right";
    case Baseline::kBalanced: return "balanced";
  }
  return "?";
}

namespace {

Tree BuildBaseline(Baseline strategy, std::span<const std::string> words, int lo, int hi) {
  if (hi - lo == 1) return Tree::Leaf(words[lo]);
  int k = 0;
  switch (strategy) {
    case Baseline::kLeft: k = hi - 1; break;
    case Baseline::kRight: k = lo + 1; break;
    case Baseline::kBalanced: k = lo + (hi - lo + 1) / 2; break;
  }
  std::vector<Tree> kids;
  kids.push_back(BuildBaseline(strategy, words, lo, k));
  kids.push_back(BuildBaseline(strategy, words, k, hi));
  return Tree::Node(std::nullopt, std::move(kids));
}

}  // namespace

Tree BaselineTree(Baseline strategy, std::span<const std::string> words) {
  if (words.empty()) throw InputError("baseline needs at least one token");
  return BuildBaseline(strategy, words, 0, static_cast<int>(words.size()));
}

namespace {

// Replaces every single-child node by its child.
Tree CollapseUnary(const Tree &t) {
  if (t.is_leaf()) return t;
  if (t.children().size() == 1) return CollapseUnary(t.children()[0]);
  std::vector<Tree> kids;
  kids.reserve(t.children().size());
  for (const auto &c : t.children()) kids.push_back(CollapseUnary(c));
  return Tree::Node(t.label(), std::move(kids));
}

}  // namespace

std::optional<Tree> OracleBinaryTree(const Tree &gold, const PunctuationConfig &punct) {
  auto stripped = StripPunctuation(gold, punct);
  if (!stripped) return std::nullopt;
  return BinarizeRight(CollapseUnary(*stripped));
}

LabelRecallTable RecallByLabel(std::span<const Tree> gold, std::span<const Tree> pred,
                               std::span<const std::string> labels,
                               const EvalOptions &options) {
  CheckCounts(gold.size(), pred.size());
  LabelRecallTable table;
  const std::set<std::string> wanted(labels.begin(), labels.end());
  for (const auto &l : wanted) table[l];
  for (std::size_t i = 0; i < gold.size(); ++i) {
    auto pair = Align(gold[i], pred[i], i, options);
    if (!pair) continue;
    const int n = pair->gold.size();
    const SpanSet predicted = NontrivialTreeSpans(pair->pred);
    std::set<std::pair<Span, std::string>> seen;
    for (const auto &ls : CollectSpans(pair->gold)) {
      if (!ls.label || !IsNontrivial(ls.span, n)) continue;
      std::string cat = BaseCategory(*ls.label);
      if (!wanted.contains(cat) || !seen.emplace(ls.span, cat).second) continue;
      auto &row = table[cat];
      ++row.total;
      row.matched += predicted.count(ls.span);
    }
  }
  for (auto &[label, row] : table) {
    row.recall = row.total ? static_cast<double>(row.matched) / static_cast<double>(row.total) : 0.0;
  }
  return table;
}

namespace {

std::optional<Tree> Rebuild(const Tree &t, const std::vector<char> &keep, int &next) {
  if (t.is_leaf()) {
    const int i = next++;
    if (!keep[i]) return std::nullopt;
    return Tree::Leaf(Lowercase(t.word()), t.label());
  }
  std::vector<Tree> kids;
  for (const auto &c : t.children()) {
    if (auto k = Rebuild(c, keep, next)) kids.push_back(std::move(*k));
  }
  if (kids.empty()) return std::nullopt;
  return Tree::Node(t.label(), std::move(kids));
}

}  // namespace

std::optional<Tree> PrepareAnalysisTree(const Tree &gold) {
  const auto words = gold.Words();
  std::vector<char> keep(words.size(), 1);
  int last = -1;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (IsQuoteToken(words[i])) {
      keep[i] = 0;
    } else {
      last = static_cast<int>(i);
    }
  }
  if (last >= 0 && (words[last] == "." || words[last] == "!" || words[last] == "?")) {
    keep[last] = 0;
  }
  int next = 0;
  return Rebuild(gold, keep, next);
}

PassRateTable PerTestPassRates(const GrammaticalityScorer &scorer, std::span<const Tree> gold,
                               const PassRateOptions &options) {
  PassRateTable table;
  table.labels = options.labels;
  const std::set<std::string> wanted(options.labels.begin(), options.labels.end());
  std::map<std::string, std::array<std::size_t, kNumTests>> label_pass;
  std::array<std::size_t, kNumTests> dist_pass{}, tp{}, fp{}, fn{};
  for (const auto &l : options.labels) {
    table.by_label[l];
    label_pass[l] = {};
  }

  RandomSource rng(options.seed);
  for (const auto &raw : gold) {
    auto tree = PrepareAnalysisTree(raw);
    if (!tree) continue;
    const int n = tree->size();
    const Sentence sent(tree->Words());
    const SpanSet constituents = NontrivialTreeSpans(*tree);

    std::vector<Span> distituents;
    for (const auto &s : NontrivialSpans(n)) {
      if (!constituents.contains(s)) distituents.push_back(s);
    }
    if (distituents.size() > options.distituents_per_sentence) {
      std::vector<Span> sample;
      for (auto k : rng.SampleWithoutReplacement(distituents.size(),
                                                 options.distituents_per_sentence)) {
        sample.push_back(distituents[k]);
      }
      distituents = std::move(sample);
    }

    std::vector<Span> spans(constituents.begin(), constituents.end());
    const std::size_t num_gold = spans.size();
    spans.insert(spans.end(), distituents.begin(), distituents.end());
    if (spans.empty()) continue;
    SpanJudgments j = JudgeSpans(scorer, sent, spans, options.decoder);

    std::map<Span, std::array<bool, kNumTests>> passed;
    for (std::size_t k = 0; k < spans.size(); ++k) {
      std::array<bool, kNumTests> p{};
      for (std::size_t t = 0; t < kNumTests; ++t) p[t] = j.judgments[k][t] >= options.threshold;
      passed[spans[k]] = p;
      for (std::size_t t = 0; t < kNumTests; ++t) {
        if (k < num_gold) {
          (p[t] ? tp[t] : fn[t]) += 1;
        } else {
          fp[t] += p[t];
          dist_pass[t] += p[t];
        }
      }
    }
    table.distituents.spans += distituents.size();

    std::set<std::pair<Span, std::string>> seen;
    for (const auto &ls : CollectSpans(*tree)) {
      if (!ls.label || !IsNontrivial(ls.span, n)) continue;
      std::string cat = BaseCategory(*ls.label);
      if (!wanted.contains(cat) || !seen.emplace(ls.span, cat).second) continue;
      ++table.by_label[cat].spans;
      const auto &p = passed.at(ls.span);
      for (std::size_t t = 0; t < kNumTests; ++t) label_pass[cat][t] += p[t];
    }
  }

  const auto rate = [](std::size_t num, std::size_t den) {
    return den ? static_cast<double>(num) / static_cast<double>(den) : 0.0;
  };
  for (auto &[label, row] : table.by_label) {
    for (std::size_t t = 0; t < kNumTests; ++t) row.rate[t] = rate(label_pass[label][t], row.spans);
  }
  for (std::size_t t = 0; t < kNumTests; ++t) {
    table.distituents.rate[t] = rate(dist_pass[t], table.distituents.spans);
    table.test_f1[t] = rate(2 * tp[t], 2 * tp[t] + fp[t] + fn[t]);
  }
  return table;
}

BracketClass ClassifyBracket(const Span &pred, const SpanSet &gold) {
  if (gold.contains(pred)) return BracketClass::kCorrect;
  for (const auto &g : gold) {
    if (pred.Crosses(g)) return BracketClass::kCrossing;
  }
  return BracketClass::kConsistent;
}

std::string GroupTag(std::string_view tag) {
  if (tag == "VBD" || tag == "VBP" || tag == "VBZ") return "VBD/P/Z";
  if (tag == "NN" || tag == "NNS") return "NN(S)";
  return std::string(tag);
}

PatternReport CrossingPatterns(std::span<const Tree> gold, std::span<const Tree> pred,
                               const EvalOptions &options) {
  CheckCounts(gold.size(), pred.size());
  PatternReport report;
  std::map<std::string, std::size_t> counts;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    auto pair = Align(gold[i], pred[i], i, options);
    if (!pair) continue;
    const auto tags = pair->gold.Tags();
    const SpanSet g = NontrivialTreeSpans(pair->gold);
    for (const auto &s : NontrivialTreeSpans(pair->pred)) {
      switch (ClassifyBracket(s, g)) {
        case BracketClass::kCorrect: ++report.brackets.correct; break;
        case BracketClass::kConsistent: ++report.brackets.consistent; break;
        case BracketClass::kCrossing: {
          ++report.brackets.crossing;
          std::string pattern;
          for (int k = s.lo; k < s.hi; ++k) {
            if (!pattern.empty()) pattern += ' ';
            pattern += tags[k] ? GroupTag(*tags[k]) : std::string("?");
          }
          ++counts[pattern];
          break;
        }
      }
    }
  }
  report.total_crossing = report.brackets.crossing;
  for (const auto &[pattern, count] : counts) {
    report.patterns.push_back(
        {pattern, count, static_cast<double>(count) / static_cast<double>(report.total_crossing)});
  }
  std::stable_sort(report.patterns.begin(), report.patterns.end(),
                   [](const PatternCount &a, const PatternCount &b) { return a.count > b.count; });
  return report;
}

}  // namespace ctparse
