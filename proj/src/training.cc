#include "ctparse/training.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include "ctparse/transforms.h"

namespace ctparse {

using nlohmann::json;

void TrainConfig::Validate() const {
  if (batch_real == 0 || batch_fake == 0 || refine_batch == 0 || tests_per_sentence == 0 ||
      epochs <= 0) {
    throw std::invalid_argument("training counts must be positive");
  }
  if (!(warmup_fraction >= 0.0 && warmup_fraction <= 1.0)) {
    throw std::invalid_argument("warmup fraction must lie in [0, 1]");
  }
  if (!(lr >= 0.0) || !std::isfinite(lr)) {
    throw std::invalid_argument("learning rate must be finite and non-negative");
  }
}

double WarmupLearningRate(const TrainConfig &cfg, std::size_t step, std::size_t total_steps) {
  const auto warm = static_cast<std::size_t>(
      std::ceil(cfg.warmup_fraction * static_cast<double>(total_steps)));
  if (warm == 0 || step >= warm) return cfg.lr;
  return cfg.lr * static_cast<double>(step + 1) / static_cast<double>(warm);
}

namespace {

std::size_t CeilDiv(std::size_t a, std::size_t b) { return (a + b - 1) / b; }

}  // namespace

TrainStats TrainInitial(GrammaticalityScorer &model, std::span<const LabeledExample> dataset,
                        const TrainConfig &cfg) {
  cfg.Validate();
  if (!model.trainable()) throw NotTrainableError();
  std::vector<const LabeledExample *> reals, fakes;
  for (const auto &ex : dataset) {
    if (ex.label == 1) {
      reals.push_back(&ex);
    } else if (ex.label == 0) {
      fakes.push_back(&ex);
    } else {
      throw InputError(fmt::format("label {} is not 0 or 1", ex.label));
    }
  }
  if (reals.empty() || fakes.empty()) throw InputError("degenerate dataset");

  RandomSource rng(cfg.seed);
  rng.Shuffle(reals);
  rng.Shuffle(fakes);

  const std::size_t total =
      std::max(CeilDiv(reals.size(), cfg.batch_real), CeilDiv(fakes.size(), cfg.batch_fake));
  TrainStats stats;
  std::vector<LabeledExample> batch;
  for (std::size_t step = 0; step < total; ++step) {
    batch.clear();
    for (std::size_t i = step * cfg.batch_real;
         i < std::min(reals.size(), (step + 1) * cfg.batch_real); ++i) {
      batch.push_back(*reals[i]);
    }
    for (std::size_t i = step * cfg.batch_fake;
         i < std::min(fakes.size(), (step + 1) * cfg.batch_fake); ++i) {
      batch.push_back(*fakes[i]);
    }
    const double lr = WarmupLearningRate(cfg, step, total);
    double loss;
    try {
      loss = model.Train(batch, lr);
    } catch (const DivergedError &e) {
      throw DivergedError(fmt::format("training diverged at step {}: {}", step, e.what()));
    }
    if (!std::isfinite(loss)) {
      throw DivergedError(fmt::format("training diverged at step {}", step));
    }
    stats.losses.push_back(loss);
    stats.examples += batch.size();
    ++stats.steps;
    if ((step + 1) % 100 == 0 || step + 1 == total) {
      spdlog::info("real/fake step {}/{} loss {:.4f} lr {:.3g}", step + 1, total, loss, lr);
    }
  }
  return stats;
}

std::vector<LabeledExample> SampleRefinementExamples(const Sentence &sent, const Tree &tree,
                                                     std::size_t tests_per_sentence,
                                                     RandomSource &rng, std::size_t source,
                                                     const TransformOptions &transforms) {
  const int n = static_cast<int>(sent.size());
  if (tree.size() != n) {
    throw InputError(fmt::format("tree has {} leaves but sentence has {} tokens", tree.size(), n));
  }
  const auto spans = NontrivialSpans(n);
  const SpanSet constituents = TreeSpans(tree);
  const auto picks = rng.SampleWithoutReplacement(spans.size() * kNumTests, tests_per_sentence);
  std::vector<LabeledExample> out;
  out.reserve(picks.size());
  for (std::size_t p : picks) {
    const Span span = spans[p / kNumTests];
    const ConstituencyTest test = kAllTests[p % kNumTests];
    try {
      auto ts = ApplyTest(test, sent, span, transforms);
      out.push_back({std::move(ts.sentence), constituents.contains(span) ? 1 : 0,
                     std::string(TestName(test)), span, source});
    } catch (const LengthCapError &) {
      spdlog::debug("skipping {} on ({},{}): length cap", TestName(test), span.lo, span.hi);
    }
  }
  return out;
}

TrainStats RefineEpochs(GrammaticalityScorer &model, std::span<const Sentence> sentences,
                        const TrainConfig &cfg, RandomSource &rng,
                        const DecoderOptions &decoder) {
  cfg.Validate();
  if (!model.trainable()) throw NotTrainableError();
  if (sentences.empty()) throw InputError("no sentences to refine on");

  // The model changes after every step, so judgments must not be memoized
  // across batches.
  DecoderOptions opts = decoder;
  opts.cache = nullptr;

  TrainStats stats;
  std::vector<std::size_t> order(sentences.size());
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng.Shuffle(order);
    const std::size_t batches = CeilDiv(order.size(), cfg.refine_batch);
    for (std::size_t b = 0; b < batches; ++b) {
      std::vector<Sentence> batch;
      for (std::size_t i = b * cfg.refine_batch;
           i < std::min(order.size(), (b + 1) * cfg.refine_batch); ++i) {
        batch.push_back(sentences[order[i]]);
      }
      try {
        CorpusParse parsed = ParseCorpus(model, batch, opts);
        if (!parsed.failures.empty()) {
          throw std::runtime_error(
              fmt::format("{} sentences failed to decode", parsed.failures.size()));
        }
        std::vector<LabeledExample> examples;
        for (std::size_t s = 0; s < batch.size(); ++s) {
          auto ex = SampleRefinementExamples(batch[s], parsed.trees[s], cfg.tests_per_sentence,
                                             rng, s, opts.transforms);
          examples.insert(examples.end(), std::make_move_iterator(ex.begin()),
                          std::make_move_iterator(ex.end()));
        }
        if (examples.empty()) continue;
        const double loss = model.Train(examples, cfg.lr);
        stats.losses.push_back(loss);
        stats.examples += examples.size();
        ++stats.steps;
        spdlog::info("refine epoch {} batch {}/{} examples {} loss {:.4f}", epoch + 1, b + 1,
                     batches, examples.size(), loss);
      } catch (const NotTrainableError &) {
        throw;
      } catch (const std::exception &e) {
        spdlog::error("refine epoch {} batch {} failed: {}", epoch + 1, b + 1, e.what());
        ++stats.failed_batches;
      }
    }
  }
  return stats;
}

std::vector<LabeledExample> ExportRefinementBatch(std::span<const Tree> trees,
                                                  const TrainConfig &cfg, RandomSource &rng,
                                                  const TransformOptions &transforms) {
  cfg.Validate();
  std::vector<LabeledExample> out;
  for (std::size_t i = 0; i < trees.size(); ++i) {
    Sentence sent(trees[i].Words());
    auto ex = SampleRefinementExamples(sent, trees[i], cfg.tests_per_sentence, rng, i, transforms);
    out.insert(out.end(), std::make_move_iterator(ex.begin()), std::make_move_iterator(ex.end()));
  }
  return out;
}

std::string ExamplesToJsonl(std::span<const LabeledExample> examples) {
  std::string out;
  for (const auto &ex : examples) {
    json rec = {{"tokens", ex.tokens.tokens()}, {"label", ex.label}};
    if (!ex.provenance.empty()) rec["test"] = ex.provenance;
    if (ex.span) rec["span"] = {ex.span->lo, ex.span->hi};
    if (ex.source) rec["source"] = *ex.source;
    out += rec.dump();
    out += '\n';
  }
  return out;
}

std::vector<LabeledExample> ExamplesFromJsonl(std::string_view text) {
  std::vector<LabeledExample> out;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      json rec = json::parse(line);
      LabeledExample ex;
      ex.tokens = Sentence(rec.at("tokens").get<std::vector<std::string>>());
      ex.label = rec.at("label").get<int>();
      if (ex.label != 0 && ex.label != 1) throw InputError("label must be 0 or 1");
      ex.provenance = rec.value("test", "");
      if (rec.contains("span")) {
        ex.span = Span{rec["span"].at(0).get<int>(), rec["span"].at(1).get<int>()};
      }
      if (rec.contains("source")) ex.source = rec["source"].get<std::size_t>();
      out.push_back(std::move(ex));
    } catch (const json::exception &e) {
      throw InputError(fmt::format("bad example on line {}: {}", lineno, e.what()));
    } catch (const InputError &e) {
      throw InputError(fmt::format("bad example on line {}: {}", lineno, e.what()));
    }
  }
  return out;
}

}  // namespace ctparse
