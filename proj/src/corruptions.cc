#include "ctparse/corruptions.h"

#include <algorithm>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

namespace ctparse {

namespace {

constexpr std::array<std::string_view, 6> kNames = {
    "shuffle", "swap", "drop", "span_drop", "span_movement", "bigram",
};

constexpr int kMaxAttempts = 16;
constexpr double kShuffleSelect = 0.5;
constexpr double kDropSelect = 0.3;

using Tokens = std::vector<std::string>;

Tokens ShuffleOnce(const Tokens &in, RandomSource &rng) {
  std::vector<std::size_t> picked;
  do {
    picked.clear();
    for (std::size_t i = 0; i < in.size(); ++i) {
      if (rng.Bernoulli(kShuffleSelect)) picked.push_back(i);
    }
  } while (picked.size() < 2);
  std::vector<std::size_t> perm = picked;
  rng.Shuffle(perm);
  Tokens out = in;
  for (std::size_t i = 0; i < picked.size(); ++i) out[picked[i]] = in[perm[i]];
  return out;
}

Tokens SwapOnce(const Tokens &in, RandomSource &rng) {
  std::size_t i = rng.Uniform(in.size());
  std::size_t j = rng.Uniform(in.size() - 1);
  if (j >= i) ++j;
  Tokens out = in;
  std::swap(out[i], out[j]);
  return out;
}

Tokens DropOnce(const Tokens &in, RandomSource &rng) {
  for (;;) {
    Tokens out;
    for (const auto &tok : in) {
      if (!rng.Bernoulli(kDropSelect)) out.push_back(tok);
    }
    if (!out.empty() && out.size() < in.size()) return out;
  }
}

// Span of length uniform in [1, n-1] at a uniform start.
Span RandomSpan(std::size_t n, RandomSource &rng) {
  int len = rng.UniformInt(1, static_cast<int>(n) - 1);
  int lo = rng.UniformInt(0, static_cast<int>(n) - len);
  return {lo, lo + len};
}

Tokens SpanDropOnce(const Tokens &in, RandomSource &rng) {
  Span s = RandomSpan(in.size(), rng);
  Tokens out(in.begin(), in.begin() + s.lo);
  out.insert(out.end(), in.begin() + s.hi, in.end());
  return out;
}

Tokens SpanMovementOnce(const Tokens &in, RandomSource &rng) {
  Span s = RandomSpan(in.size(), rng);
  bool to_front = rng.Bernoulli(0.5);
  Tokens span(in.begin() + s.lo, in.begin() + s.hi);
  Tokens rest(in.begin(), in.begin() + s.lo);
  rest.insert(rest.end(), in.begin() + s.hi, in.end());
  Tokens out;
  if (to_front) {
    out = span;
    out.insert(out.end(), rest.begin(), rest.end());
  } else {
    out = rest;
    out.insert(out.end(), span.begin(), span.end());
  }
  return out;
}

Tokens BigramOnce(const Tokens &in, const BigramLM &lm, RandomSource &rng) {
  Tokens out;
  out.reserve(in.size());
  std::string_view context = BigramLM::kBegin;
  for (std::size_t i = 0; i < in.size(); ++i) {
    out.push_back(lm.SampleNext(context, rng));
    context = out.back();
  }
  return out;
}

}  // namespace

std::string_view CorruptionName(CorruptionKind kind) {
  return kNames[static_cast<std::size_t>(kind)];
}

std::optional<CorruptionKind> CorruptionFromName(std::string_view name) {
  for (auto k : kAllCorruptions) {
    if (CorruptionName(k) == name) return k;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// BigramLM

BigramLM BigramLM::Train(std::span<const Sentence> corpus, double alpha) {
  if (corpus.empty()) throw InputError("bigram model needs a non-empty corpus");
  if (alpha < 0) throw InputError("smoothing alpha must be nonnegative");
  BigramLM lm;
  lm.alpha_ = alpha;
  for (const auto &sent : corpus) {
    for (const auto &tok : sent) {
      if (lm.ids_.emplace(tok, static_cast<int>(lm.vocab_.size())).second) {
        lm.vocab_.push_back(tok);
      }
    }
  }
  const int v = static_cast<int>(lm.vocab_.size());
  auto add = [&](int ctx, int next) {
    Context &c = lm.contexts_[ctx];
    auto it = std::find_if(c.next.begin(), c.next.end(),
                           [&](const auto &p) { return p.first == next; });
    if (it == c.next.end()) {
      c.next.emplace_back(next, 1.0);
    } else {
      it->second += 1.0;
    }
    c.total += 1.0;
  };
  for (const auto &sent : corpus) {
    int prev = v;  // begin
    for (const auto &tok : sent) {
      int id = lm.ids_.at(tok);
      add(prev, id);
      prev = id;
    }
    add(prev, v);  // end
  }
  return lm;
}

int BigramLM::Id(std::string_view token) const {
  auto it = ids_.find(std::string(token));
  return it == ids_.end() ? -1 : it->second;
}

double BigramLM::Probability(std::string_view context,
                             std::string_view token) const {
  const int v = static_cast<int>(vocab_.size());
  const double outcomes = v + 1;
  int ctx = context == kBegin ? v : Id(context);
  int next = token == kEnd ? v : Id(token);
  if (next < 0) return 0.0;
  auto it = ctx < 0 ? contexts_.end() : contexts_.find(ctx);
  if (it == contexts_.end()) return 1.0 / outcomes;
  const Context &c = it->second;
  double count = 0;
  for (const auto &[id, n] : c.next) {
    if (id == next) count = n;
  }
  double denom = c.total + alpha_ * outcomes;
  if (denom <= 0) return 1.0 / outcomes;
  return (count + alpha_) / denom;
}

const std::string &BigramLM::SampleNext(std::string_view context,
                                        RandomSource &rng) const {
  const int v = static_cast<int>(vocab_.size());
  int ctx = context == kBegin ? v : Id(context);
  auto it = ctx < 0 ? contexts_.end() : contexts_.find(ctx);
  if (it != contexts_.end()) {
    const Context &c = it->second;
    double observed = 0;
    for (const auto &[id, n] : c.next) {
      if (id != v) observed += n;
    }
    // Mass over non-end outcomes: observed counts plus alpha per word.
    double mass = observed + alpha_ * v;
    if (mass > 0) {
      double u = rng.Uniform01() * mass;
      if (u < observed) {
        for (const auto &[id, n] : c.next) {
          if (id == v) continue;
          if (u < n) return vocab_[id];
          u -= n;
        }
        // Rounding fell through: take the last observed word.
        for (auto r = c.next.rbegin(); r != c.next.rend(); ++r) {
          if (r->first != v) return vocab_[r->first];
        }
      }
      return vocab_[rng.Uniform(v)];
    }
  }
  return vocab_[rng.Uniform(v)];
}

// ---------------------------------------------------------------------------
// Corrupt

Sentence Corrupt(CorruptionKind kind, const Sentence &sent, RandomSource &rng,
                 const BigramLM *lm) {
  const std::size_t n = sent.size();
  std::size_t min_len = kind == CorruptionKind::kSpanDrop ? 3 : 2;
  if (n < min_len) {
    throw CorruptionError(fmt::format("corruption inapplicable: {} needs {} tokens, got {}",
                                      CorruptionName(kind), min_len, n));
  }
  if (kind == CorruptionKind::kBigram && lm == nullptr) {
    throw CorruptionError("corruption inapplicable: bigram needs a language model");
  }
  const Tokens &in = sent.tokens();
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    Tokens out;
    switch (kind) {
      case CorruptionKind::kShuffle: out = ShuffleOnce(in, rng); break;
      case CorruptionKind::kSwap: out = SwapOnce(in, rng); break;
      case CorruptionKind::kDrop: out = DropOnce(in, rng); break;
      case CorruptionKind::kSpanDrop: out = SpanDropOnce(in, rng); break;
      case CorruptionKind::kSpanMovement: out = SpanMovementOnce(in, rng); break;
      case CorruptionKind::kBigram: out = BigramOnce(in, *lm, rng); break;
    }
    if (out != in) return Sentence(std::move(out));
  }
  throw CorruptionError(fmt::format("degenerate input: {} left '{}' unchanged {} times",
                                    CorruptionName(kind), sent.Join(), kMaxAttempts));
}

std::vector<LabeledExample> MakeRealFakeDataset(std::span<const Sentence> corpus,
                                                std::span<const CorruptionKind> kinds,
                                                RandomSource &rng,
                                                const BigramLM *lm) {
  if (corpus.empty()) throw InputError("real/fake dataset needs a non-empty corpus");
  if (kinds.empty()) throw InputError("real/fake dataset needs at least one corruption kind");
  std::vector<LabeledExample> out;
  out.reserve(corpus.size() * 2);
  std::size_t skipped = 0;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    CorruptionKind kind = kinds[rng.Uniform(kinds.size())];
    try {
      Sentence fake = Corrupt(kind, corpus[i], rng, lm);
      out.push_back({corpus[i], 1, "real", std::nullopt, std::nullopt});
      out.push_back({std::move(fake), 0, std::string(CorruptionName(kind)),
                     std::nullopt, std::nullopt});
    } catch (const CorruptionError &e) {
      ++skipped;
      spdlog::debug("skipping sentence {}: {}", i, e.what());
    }
  }
  if (skipped > 0) {
    spdlog::warn("real/fake dataset: skipped {} of {} sentences", skipped,
                 corpus.size());
  }
  return out;
}

}  // namespace ctparse
