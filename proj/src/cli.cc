#include "ctparse/cli.h"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "ctparse/corruptions.h"
#include "ctparse/decoder.h"
#include "ctparse/eval.h"
#include "ctparse/manifest.h"
#include "ctparse/native_scorer.h"
#include "ctparse/parallel.h"
#include "ctparse/plot.h"
#include "ctparse/remote_scorer.h"
#include "ctparse/synth.h"
#include "ctparse/training.h"
#include "ctparse/transforms.h"

namespace ctparse::cli {

namespace {

using nlohmann::json;

struct Globals {
  std::uint64_t seed = 0;
  int workers = DefaultWorkers();
  std::string manifest;
  std::string log_level = "warn";
};

// State shared by every subcommand run: the manifest being built and the
// file it defaults to.
struct Run {
  Globals *globals;
  RunManifest manifest;
  std::string primary_output;

  void Input(const std::string &path) { manifest.AddInput(path); }
  void Output(const std::string &path) {
    manifest.AddOutput(path);
    if (primary_output.empty()) primary_output = path;
  }
};

std::string ReadFile(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(fmt::format("cannot read '{}'", path));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteJsonFile(const std::string &path, const json &j) { WriteText(path, j.dump(2) + "\n"); }

// Corpus lines as parser input, optionally preprocessed. Blank lines are
// malformed input.
std::vector<Sentence> LoadSentences(const std::string &path, bool preprocess) {
  std::vector<Sentence> out;
  std::istringstream in(ReadFile(path));
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    try {
      Sentence s = Sentence::FromLine(line);
      if (s.empty()) throw InputError("empty line");
      out.push_back(preprocess ? Preprocess(s.tokens()) : std::move(s));
    } catch (const InputError &e) {
      throw InputError(fmt::format("{}:{}: {}", path, lineno, e.what()));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Scorer selection

struct ScorerFlags {
  std::string model;
  std::string url;
  std::string grammar;
  std::size_t score_batch = 256;

  bool any() const { return !model.empty() || !url.empty() || !grammar.empty(); }
};

void AddScorerFlags(CLI::App *sub, ScorerFlags &f) {
  auto *m = sub->add_option("--model", f.model, "Native scorer model file")
                ->check(CLI::ExistingFile);
  auto *u = sub->add_option("--scorer-url", f.url, "Remote scorer base URL");
  auto *g = sub->add_option("--grammar", f.grammar, "Grammar file; judge with its recognizer")
                ->check(CLI::ExistingFile);
  m->excludes(u)->excludes(g);
  u->excludes(g);
  sub->add_option("--score-batch", f.score_batch, "Sentences per remote score request")
      ->check(CLI::PositiveNumber);
}

std::unique_ptr<GrammaticalityScorer> MakeScorer(const ScorerFlags &f, Run &run) {
  if (!f.model.empty()) {
    run.Input(f.model);
    return std::make_unique<NativeScorer>(NativeScorer::LoadFile(f.model));
  }
  if (!f.grammar.empty()) {
    run.Input(f.grammar);
    return std::make_unique<GrammarOracleScorer>(Grammar::Load(f.grammar));
  }
  if (!f.url.empty()) {
    RemoteScorerOptions opts;
    opts.batch_size = f.score_batch;
    run.manifest.flags["scorer_url"] = f.url;
    return std::make_unique<RemoteScorer>(f.url, opts);
  }
  throw UsageError("one of --model, --scorer-url or --grammar is required");
}

std::vector<CorruptionKind> ParseKinds(const std::string &list) {
  std::vector<CorruptionKind> out;
  std::stringstream ss(list);
  for (std::string name; std::getline(ss, name, ',');) {
    auto k = CorruptionFromName(name);
    if (!k) throw UsageError(fmt::format("unknown corruption '{}'", name));
    out.push_back(*k);
  }
  if (out.empty()) throw UsageError("no corruption kinds given");
  return out;
}

// ---------------------------------------------------------------------------
// gen-corruptions

struct GenCorruptionsFlags {
  std::string input, out, kinds = "shuffle,swap,drop,span_drop,span_movement,bigram";
  bool with_real = false;
  double alpha = 0.1;
};

int RunGenCorruptions(const GenCorruptionsFlags &f, Run &run) {
  const auto kinds = ParseKinds(f.kinds);
  run.Input(f.input);
  const auto corpus = ReadCorpus(f.input);
  std::optional<BigramLM> lm;
  if (std::find(kinds.begin(), kinds.end(), CorruptionKind::kBigram) != kinds.end()) {
    lm = BigramLM::Train(corpus, f.alpha);
  }
  RandomSource rng(run.globals->seed);
  auto dataset = MakeRealFakeDataset(corpus, kinds, rng, lm ? &*lm : nullptr);
  std::vector<Sentence> lines;
  std::string labels;
  for (const auto &ex : dataset) {
    if (ex.label == 1 && !f.with_real) continue;
    lines.push_back(ex.tokens);
    labels += json{{"label", ex.label}, {"kind", ex.provenance}}.dump() + "\n";
  }
  WriteCorpus(f.out, lines);
  WriteText(f.out + ".labels.jsonl", labels);
  run.Output(f.out);
  run.Output(f.out + ".labels.jsonl");
  std::cout << fmt::format("wrote {} examples to {}\n", lines.size(), f.out);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// train-realfake

struct TrainFlags {
  std::string real, fake, fake_labels, out, init, url;
  std::optional<double> lr;
  std::size_t batch_real = 32, batch_fake = 32;
  double warmup = 0.10;
  int dim_log2 = kDefaultDimLog2;
  bool json_format = false;
};

std::vector<LabeledExample> LoadLabeledCorpus(const std::string &corpus_path,
                                              const std::string &labels_path, Run &run) {
  run.Input(corpus_path);
  auto sentences = ReadCorpus(corpus_path);
  std::vector<LabeledExample> out;
  if (!std::filesystem::exists(labels_path)) {
    spdlog::warn("no labels at {}; treating every line of {} as fake", labels_path, corpus_path);
    for (auto &s : sentences) out.push_back({std::move(s), 0, "fake", {}, {}});
    return out;
  }
  run.Input(labels_path);
  std::istringstream in(ReadFile(labels_path));
  std::string line;
  std::size_t i = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (i >= sentences.size()) {
      throw InputError(fmt::format("{} has more labels than {} has lines", labels_path,
                                   corpus_path));
    }
    try {
      json rec = json::parse(line);
      int label = rec.at("label").get<int>();
      if (label != 0 && label != 1) throw InputError("label must be 0 or 1");
      out.push_back({sentences[i], label, rec.value("kind", ""), {}, {}});
    } catch (const json::exception &e) {
      throw InputError(fmt::format("{}:{}: {}", labels_path, i + 1, e.what()));
    }
    ++i;
  }
  if (i != sentences.size()) {
    throw InputError(fmt::format("{} has {} labels for {} lines", labels_path, i,
                                 sentences.size()));
  }
  return out;
}

int RunTrainRealFake(const TrainFlags &f, Run &run) {
  if (f.url.empty() && f.out.empty()) throw UsageError("--out is required for a native model");
  std::vector<LabeledExample> dataset;
  run.Input(f.real);
  for (auto &s : ReadCorpus(f.real)) dataset.push_back({std::move(s), 1, "real", {}, {}});
  auto fakes = LoadLabeledCorpus(f.fake, f.fake_labels.empty() ? f.fake + ".labels.jsonl"
                                                               : f.fake_labels, run);
  dataset.insert(dataset.end(), fakes.begin(), fakes.end());

  TrainConfig cfg;
  cfg.batch_real = f.batch_real;
  cfg.batch_fake = f.batch_fake;
  cfg.warmup_fraction = f.warmup;
  cfg.seed = run.globals->seed;
  if (!f.url.empty()) {
    cfg.lr = f.lr.value_or(3e-5);
    RemoteScorer remote(f.url);
    run.manifest.flags["scorer_url"] = f.url;
    auto stats = TrainInitial(remote, dataset, cfg);
    std::cout << fmt::format("remote training: {} steps, final loss {:.4f}\n", stats.steps,
                             stats.losses.empty() ? 0.0 : stats.losses.back());
    return kExitOk;
  }
  cfg.lr = f.lr.value_or(1e-2);
  NativeScorer model = f.init.empty() ? NativeScorer(f.dim_log2) : NativeScorer::LoadFile(f.init);
  if (!f.init.empty()) run.Input(f.init);
  auto stats = TrainInitial(model, dataset, cfg);
  model.SaveFile(f.out, f.json_format);
  run.Output(f.out);
  std::cout << fmt::format("trained {} steps on {} examples, final loss {:.4f}\n", stats.steps,
                           stats.examples, stats.losses.empty() ? 0.0 : stats.losses.back());
  return kExitOk;
}

// ---------------------------------------------------------------------------
// parse

struct ParseFlags {
  ScorerFlags scorer;
  std::string input, out, charts, placeholder;
  bool no_preprocess = false;
  int length_cap = 60;
};

int RunParse(const ParseFlags &f, Run &run) {
  auto scorer = MakeScorer(f.scorer, run);
  run.Input(f.input);
  const auto sentences = LoadSentences(f.input, !f.no_preprocess);
  JudgmentCache cache;
  DecoderOptions opts;
  opts.workers = run.globals->workers;
  opts.length_cap = f.length_cap;
  opts.cache = &cache;
  auto parsed = ParseCorpus(*scorer, sentences, opts, !f.charts.empty());
  RenderOptions render;
  if (!f.placeholder.empty()) render.placeholder = f.placeholder;
  WriteTrees(f.out, parsed.trees, render);
  run.Output(f.out);
  if (!f.charts.empty()) {
    std::string text;
    for (std::size_t i = 0; i < sentences.size(); ++i) {
      if (parsed.charts[i]) {
        text += ChartToJson(sentences[i], *parsed.charts[i]);
      } else {
        text += json{{"tokens", sentences[i].tokens()}, {"scores", json::array()},
                     {"failed", true}}
                    .dump();
      }
      text += '\n';
    }
    WriteText(f.charts, text);
    run.Output(f.charts);
  }
  run.manifest.flags["failures"] = parsed.failures;
  if (!parsed.failures.empty()) {
    std::cerr << fmt::format("{} of {} sentences failed and were given flat trees\n",
                             parsed.failures.size(), sentences.size());
  }
  std::cout << fmt::format("parsed {} sentences\n", sentences.size());
  return kExitOk;
}

// ---------------------------------------------------------------------------
// refine

struct RefineFlags {
  ScorerFlags scorer;
  std::string input, out, export_only, include_eval;
  int epochs = 1;
  std::size_t tests_per_sentence = 16, batch = 32;
  std::optional<double> lr;
  bool no_preprocess = false, json_format = false;
};

int RunRefine(const RefineFlags &f, Run &run) {
  auto scorer = MakeScorer(f.scorer, run);
  run.Input(f.input);
  auto sentences = LoadSentences(f.input, !f.no_preprocess);
  if (!f.include_eval.empty()) {
    run.Input(f.include_eval);
    auto extra = LoadSentences(f.include_eval, !f.no_preprocess);
    sentences.insert(sentences.end(), extra.begin(), extra.end());
  }
  TrainConfig cfg;
  cfg.epochs = f.epochs;
  cfg.tests_per_sentence = f.tests_per_sentence;
  cfg.refine_batch = f.batch;
  cfg.seed = run.globals->seed;
  cfg.lr = f.lr.value_or(f.scorer.url.empty() ? 1e-2 : 3e-5);
  RandomSource rng(cfg.seed);
  DecoderOptions opts;
  opts.workers = run.globals->workers;

  if (!f.export_only.empty()) {
    JudgmentCache cache;
    opts.cache = &cache;
    auto parsed = ParseCorpus(*scorer, sentences, opts);
    auto examples = ExportRefinementBatch(parsed.trees, cfg, rng, opts.transforms);
    WriteText(f.export_only, ExamplesToJsonl(examples));
    run.Output(f.export_only);
    std::cout << fmt::format("exported {} examples for {} sentences\n", examples.size(),
                             sentences.size());
    return kExitOk;
  }
  if (!scorer->trainable()) throw NotTrainableError();
  auto *native = dynamic_cast<NativeScorer *>(scorer.get());
  if (native && f.out.empty()) throw UsageError("--out is required to save the refined model");
  auto stats = RefineEpochs(*scorer, sentences, cfg, rng, opts);
  if (native) {
    native->SaveFile(f.out, f.json_format);
    run.Output(f.out);
  }
  run.manifest.flags["failed_batches"] = stats.failed_batches;
  std::cout << fmt::format("refined for {} steps on {} examples ({} failed batches)\n",
                           stats.steps, stats.examples, stats.failed_batches);
  return stats.steps == 0 && stats.failed_batches > 0 ? kExitRuntime : kExitOk;
}

// ---------------------------------------------------------------------------
// eval

struct EvalFlags {
  std::string gold, pred, report, plot;
};

json ReportJson(const EvalReport &r) {
  json per = json::array();
  for (const auto &p : r.per_sentence) {
    if (p) {
      per.push_back({{"precision", p->precision}, {"recall", p->recall}, {"f1", p->f1}});
    } else {
      per.push_back(nullptr);
    }
  }
  return {{"corpus_f1", r.corpus_f1},
          {"precision", r.corpus_precision},
          {"recall", r.corpus_recall},
          {"evaluated", r.evaluated},
          {"skipped", r.skipped},
          {"per_sentence", std::move(per)}};
}

int RunEval(const EvalFlags &f, Run &run) {
  run.Input(f.gold);
  run.Input(f.pred);
  const auto gold = ReadTrees(f.gold);
  const auto pred = ReadTrees(f.pred);
  auto report = CorpusF1(gold, pred);
  json j = ReportJson(report);
  j["metadata"] = {{"averaging", "sentence"}, {"trivial_spans", "excluded"},
                   {"punctuation", "stripped by tag (gold) and token (prediction)"}};
  if (!f.report.empty()) {
    WriteJsonFile(f.report, j);
    run.Output(f.report);
  }
  if (!f.plot.empty()) {
    WriteText(f.plot, BarChartSvg("Unlabeled bracketing", {"precision", "recall", "F1"},
                                  {{"corpus", {report.corpus_precision, report.corpus_recall,
                                               report.corpus_f1}}},
                                  100.0));
    run.Output(f.plot);
  }
  std::cout << fmt::format("corpus_f1 {:.2f} ({} evaluated, {} skipped)\n", report.corpus_f1,
                           report.evaluated, report.skipped);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// analyze

struct AnalyzeFlags {
  ScorerFlags scorer;
  std::string gold, pred, report, plot;
  bool per_label = false, per_test = false, crossing = false;
  double threshold = 0.5;
  std::size_t distituents = 50;
  std::size_t top = 20;
  std::vector<std::string> labels = DefaultAnalysisLabels();
};

int RunAnalyze(const AnalyzeFlags &f, Run &run) {
  bool per_label = f.per_label, per_test = f.per_test, crossing = f.crossing;
  if (!per_label && !per_test && !crossing) {
    per_label = crossing = !f.pred.empty();
    per_test = f.scorer.any();
  }
  if ((per_label || crossing) && f.pred.empty()) {
    throw UsageError("--per-label and --crossing need --pred");
  }
  if (per_test && !f.scorer.any()) {
    throw UsageError("--per-test needs --model, --scorer-url or --grammar");
  }
  if (!per_label && !per_test && !crossing) throw UsageError("nothing to analyze");

  run.Input(f.gold);
  const auto gold = ReadTrees(f.gold);
  std::vector<Tree> pred;
  if (!f.pred.empty()) {
    run.Input(f.pred);
    pred = ReadTrees(f.pred);
  }
  json j = json::object();
  const std::vector<std::string> &labels = f.labels;

  if (per_label) {
    auto table = RecallByLabel(gold, pred, labels);
    json t = json::object();
    std::vector<double> recalls;
    for (const auto &l : labels) {
      const auto &row = table.at(l);
      t[l] = {{"matched", row.matched}, {"total", row.total}, {"recall", row.recall}};
      recalls.push_back(row.recall);
      std::cout << fmt::format("recall {:<5} {:.3f} ({}/{})\n", l, row.recall, row.matched,
                               row.total);
    }
    j["recall_by_label"] = std::move(t);
    if (!f.plot.empty()) {
      WriteText(f.plot + ".recall.svg",
                BarChartSvg("Recall by label", labels, {{"recall", recalls}}));
      run.Output(f.plot + ".recall.svg");
    }
  }
  if (per_test) {
    auto scorer = MakeScorer(f.scorer, run);
    PassRateOptions opts;
    opts.threshold = f.threshold;
    opts.distituents_per_sentence = f.distituents;
    opts.seed = run.globals->seed;
    opts.labels = labels;
    JudgmentCache cache;
    opts.decoder.cache = &cache;
    auto table = PerTestPassRates(*scorer, gold, opts);
    json t = json::object();
    std::vector<std::string> tests;
    for (auto test : kAllTests) tests.emplace_back(TestName(test));
    const auto row_json = [&](const PassRateRow &row) {
      json rates = json::object();
      for (std::size_t k = 0; k < kNumTests; ++k) rates[tests[k]] = row.rate[k];
      return json{{"spans", row.spans}, {"pass_rate", rates}};
    };
    std::vector<BarSeries> series;
    for (const auto &l : labels) {
      t[l] = row_json(table.by_label.at(l));
      series.push_back({l, std::vector<double>(table.by_label.at(l).rate.begin(),
                                               table.by_label.at(l).rate.end())});
    }
    t["distituent"] = row_json(table.distituents);
    series.push_back({"distituent", std::vector<double>(table.distituents.rate.begin(),
                                                        table.distituents.rate.end())});
    json f1 = json::object();
    for (std::size_t k = 0; k < kNumTests; ++k) f1[tests[k]] = table.test_f1[k];
    j["per_test"] = {{"threshold", f.threshold}, {"rows", std::move(t)}, {"span_f1", f1}};
    for (std::size_t k = 0; k < kNumTests; ++k) {
      std::cout << fmt::format("test {:<15} span F1 {:.3f}\n", tests[k], table.test_f1[k]);
    }
    if (!f.plot.empty()) {
      WriteText(f.plot + ".pass_rates.svg", BarChartSvg("Test pass rate", tests, series));
      run.Output(f.plot + ".pass_rates.svg");
    }
  }
  if (crossing) {
    auto report = CrossingPatterns(gold, pred);
    json pats = json::array();
    for (std::size_t i = 0; i < report.patterns.size() && i < f.top; ++i) {
      const auto &p = report.patterns[i];
      pats.push_back({{"pattern", p.pattern}, {"count", p.count}, {"share", p.share}});
      std::cout << fmt::format("crossing {:<30} {:>6} {:.3f}\n", p.pattern, p.count, p.share);
    }
    j["crossing"] = {{"total", report.total_crossing},
                     {"brackets",
                      {{"correct", report.brackets.correct},
                       {"consistent", report.brackets.consistent},
                       {"crossing", report.brackets.crossing}}},
                     {"patterns", std::move(pats)}};
  }
  if (!f.report.empty()) {
    WriteJsonFile(f.report, j);
    run.Output(f.report);
  } else {
    std::cout << j.dump(2) << "\n";
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// baseline

struct BaselineFlags {
  std::string strategy, input, corpus, out, placeholder;
};

int RunBaseline(const BaselineFlags &f, Run &run) {
  const bool oracle = f.strategy == "oracle-binary";
  auto strategy = BaselineFromName(f.strategy);
  if (!oracle && !strategy) throw UsageError(fmt::format("unknown strategy '{}'", f.strategy));
  if (f.input.empty() == f.corpus.empty()) {
    throw UsageError("give exactly one of --input (trees) or --corpus");
  }
  if (oracle && f.input.empty()) throw UsageError("oracle-binary needs gold trees via --input");
  const auto punct = PunctuationConfig::Default();
  std::vector<Tree> out;
  if (!f.input.empty()) {
    run.Input(f.input);
    const auto gold = ReadTrees(f.input);
    for (std::size_t i = 0; i < gold.size(); ++i) {
      auto stripped = StripPunctuation(gold[i], punct);
      if (!stripped) {
        throw InputError(fmt::format("{}: tree {} is empty without punctuation", f.input, i + 1));
      }
      out.push_back(oracle ? *OracleBinaryTree(gold[i], punct)
                           : BaselineTree(*strategy, stripped->Words()));
    }
  } else {
    run.Input(f.corpus);
    for (const auto &s : ReadCorpus(f.corpus)) {
      if (s.empty()) throw InputError(fmt::format("{}: empty line", f.corpus));
      out.push_back(BaselineTree(*strategy, s.tokens()));
    }
  }
  RenderOptions render;
  if (!f.placeholder.empty()) render.placeholder = f.placeholder;
  WriteTrees(f.out, out, render);
  run.Output(f.out);
  std::cout << fmt::format("wrote {} {} trees\n", out.size(), f.strategy);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// synth gen

struct SynthFlags {
  std::string grammar, out_corpus, out_trees;
  std::size_t n = 500, max_len = 12;
};

int RunSynthGen(const SynthFlags &f, Run &run) {
  run.Input(f.grammar);
  const Grammar g = Grammar::Load(f.grammar);
  RandomSource rng(run.globals->seed);
  auto corpus = SampleCorpus(g, f.n, f.max_len, rng);
  WriteCorpus(f.out_corpus, corpus.sentences);
  WriteTrees(f.out_trees, corpus.gold_trees);
  run.Output(f.out_corpus);
  run.Output(f.out_trees);
  std::cout << fmt::format("sampled {} sentences\n", corpus.sentences.size());
  return kExitOk;
}

// ---------------------------------------------------------------------------
// transforms-debug

struct TransformsFlags {
  ScorerFlags scorer;
  std::string sentence, input, test;
  std::vector<int> span;
};

int RunTransformsDebug(const TransformsFlags &f, Run &run) {
  if (f.sentence.empty() == f.input.empty()) {
    throw UsageError("give exactly one of --sentence or --input");
  }
  std::vector<Sentence> sentences;
  if (!f.sentence.empty()) {
    sentences.push_back(Sentence::FromLine(f.sentence));
    if (sentences[0].empty()) throw UsageError("--sentence is empty");
  } else {
    run.Input(f.input);
    sentences = LoadSentences(f.input, false);
  }
  std::vector<ConstituencyTest> tests(kAllTests.begin(), kAllTests.end());
  if (!f.test.empty()) {
    auto t = TestFromName(f.test);
    if (!t) throw UsageError(fmt::format("unknown test '{}'", f.test));
    tests = {*t};
  }
  std::unique_ptr<GrammaticalityScorer> scorer;
  if (f.scorer.any()) scorer = MakeScorer(f.scorer, run);
  for (const auto &sent : sentences) {
    std::vector<Span> spans;
    if (!f.span.empty()) {
      Span s{f.span[0], f.span[1]};
      CheckSpan(s, sent.size());
      spans.push_back(s);
    } else {
      spans = NontrivialSpans(static_cast<int>(sent.size()));
    }
    for (const auto &span : spans) {
      for (auto test : tests) {
        auto ts = ApplyTest(test, sent, span);
        std::string line = fmt::format("{}\t{}\t{}\t{}", TestName(test), span.lo, span.hi,
                                       ts.sentence.Join());
        if (scorer) {
          line += fmt::format("\t{:.4f}", ScoreSentences(*scorer, std::span(&ts.sentence, 1))[0]);
        }
        std::cout << line << "\n";
      }
    }
  }
  return kExitOk;
}

void ConfigureLogging(const std::string &level) {
  static std::shared_ptr<spdlog::logger> logger = [] {
    auto l = spdlog::stderr_color_mt("ctparse");
    l->set_pattern("[%l] %v");
    return l;
  }();
  spdlog::set_default_logger(logger);
  auto lvl = spdlog::level::from_str(level);
  if (lvl == spdlog::level::off && level != "off") {
    throw UsageError(fmt::format("unknown log level '{}'", level));
  }
  spdlog::set_level(lvl);
}

void EmitManifest(const Run &run) {
  const std::string text = run.manifest.ToJson().dump(2) + "\n";
  std::string path = run.globals->manifest;
  if (path.empty() && !run.primary_output.empty()) path = run.primary_output + ".manifest.json";
  if (path.empty() || path == "-") {
    std::cerr << text;
  } else {
    WriteText(path, text);
  }
}

}  // namespace

int Dispatch(const std::vector<std::string> &args) {
  Globals globals;
  CLI::App app{"Unsupervised constituency parsing with constituency tests", "ctparse"};
  app.fallthrough();
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));
  app.add_option("--seed", globals.seed, "Seed for every random choice");
  app.add_option("--workers", globals.workers, "Parallel sentence workers")
      ->check(CLI::PositiveNumber);
  app.add_option("--manifest", globals.manifest,
                 "Run manifest path ('-' for stderr; default <output>.manifest.json)");
  app.add_option("--log-level", globals.log_level, "trace, debug, info, warn, error or off");

  GenCorruptionsFlags gc;
  auto *gen = app.add_subcommand("gen-corruptions", "Write corrupted (fake) sentences");
  gen->add_option("--input", gc.input, "Real corpus")->required()->check(CLI::ExistingFile);
  gen->add_option("--out", gc.out, "Output corpus; labels go to <out>.labels.jsonl")->required();
  gen->add_option("--kinds", gc.kinds, "Comma-separated corruption kinds");
  gen->add_flag("--with-real", gc.with_real, "Also write the real sentences (label 1)");
  gen->add_option("--bigram-alpha", gc.alpha, "Add-alpha smoothing of the bigram model")
      ->check(CLI::PositiveNumber);

  TrainFlags tr;
  auto *train = app.add_subcommand("train-realfake", "Train a scorer on the real/fake task");
  train->add_option("--real", tr.real, "Real corpus")->required()->check(CLI::ExistingFile);
  train->add_option("--fake", tr.fake, "Fake corpus (labels read from <fake>.labels.jsonl)")
      ->required()
      ->check(CLI::ExistingFile);
  train->add_option("--fake-labels", tr.fake_labels, "Labels file for --fake")
      ->check(CLI::ExistingFile);
  train->add_option("--out", tr.out, "Model output file");
  train->add_option("--init", tr.init, "Continue from this model")->check(CLI::ExistingFile);
  train->add_option("--scorer-url", tr.url, "Train a remote scorer instead");
  train->add_option("--lr", tr.lr, "Peak learning rate (native 1e-2, remote 3e-5)");
  train->add_option("--batch-real", tr.batch_real)->check(CLI::PositiveNumber);
  train->add_option("--batch-fake", tr.batch_fake)->check(CLI::PositiveNumber);
  train->add_option("--warmup", tr.warmup, "Warmup fraction")->check(CLI::Range(0.0, 1.0));
  train->add_option("--dim-log2", tr.dim_log2, "Feature hash bits")->check(CLI::Range(4, 28));
  train->add_flag("--json", tr.json_format, "Save the model as JSON");

  ParseFlags pf;
  auto *parse = app.add_subcommand("parse", "Parse a corpus into binary trees");
  AddScorerFlags(parse, pf.scorer);
  parse->add_option("--input", pf.input, "Corpus, one sentence per line")
      ->required()
      ->check(CLI::ExistingFile);
  parse->add_option("--out", pf.out, "Output tree file")->required();
  parse->add_option("--emit-charts", pf.charts, "Write span charts as JSON lines");
  parse->add_option("--placeholder", pf.placeholder, "Category for unlabeled nodes, e.g. X");
  parse->add_option("--length-cap", pf.length_cap, "Log sentences longer than this")
      ->check(CLI::PositiveNumber);
  parse->add_flag("--no-preprocess", pf.no_preprocess, "Use input tokens as they are");

  RefineFlags rf;
  auto *refine = app.add_subcommand("refine", "Refine a scorer against its own parses");
  AddScorerFlags(refine, rf.scorer);
  refine->add_option("--input", rf.input, "Corpus")->required()->check(CLI::ExistingFile);
  refine->add_option("--out", rf.out, "Refined model output (native backend)");
  refine->add_option("--epochs", rf.epochs)->check(CLI::PositiveNumber);
  refine->add_option("--tests-per-sentence", rf.tests_per_sentence)->check(CLI::PositiveNumber);
  refine->add_option("--batch", rf.batch, "Sentences per refinement step")
      ->check(CLI::PositiveNumber);
  refine->add_option("--lr", rf.lr, "Learning rate (native 1e-2, remote 3e-5)");
  refine->add_option("--export-only", rf.export_only,
                     "Write labeled examples as JSON lines instead of training");
  refine->add_option("--include-eval-sents", rf.include_eval,
                     "Also refine on the sentences of this corpus")
      ->check(CLI::ExistingFile);
  refine->add_flag("--no-preprocess", rf.no_preprocess, "Use input tokens as they are");
  refine->add_flag("--json", rf.json_format, "Save the model as JSON");

  EvalFlags ef;
  auto *eval = app.add_subcommand("eval", "Sentence-level unlabeled F1");
  eval->add_option("--gold", ef.gold)->required()->check(CLI::ExistingFile);
  eval->add_option("--pred", ef.pred)->required()->check(CLI::ExistingFile);
  eval->add_option("--report", ef.report, "JSON report path");
  eval->add_option("--plot", ef.plot, "SVG bar chart path");

  AnalyzeFlags af;
  auto *analyze = app.add_subcommand("analyze", "Error analysis against gold trees");
  AddScorerFlags(analyze, af.scorer);
  analyze->add_option("--gold", af.gold)->required()->check(CLI::ExistingFile);
  analyze->add_option("--pred", af.pred)->check(CLI::ExistingFile);
  analyze->add_flag("--per-label", af.per_label, "Recall by gold label");
  analyze->add_flag("--per-test", af.per_test, "Pass rate of every test by label");
  analyze->add_flag("--crossing", af.crossing, "Crossing-bracket POS patterns");
  analyze->add_option("--threshold", af.threshold)->check(CLI::Range(0.0, 1.0));
  analyze->add_option("--distituents", af.distituents, "Distituent sample per sentence");
  analyze->add_option("--top", af.top, "Crossing patterns to report");
  analyze->add_option("--labels", af.labels, "Gold categories to analyze")->delimiter(',');
  analyze->add_option("--report", af.report, "JSON report path");
  analyze->add_option("--plot", af.plot, "SVG path prefix");

  BaselineFlags bf;
  auto *baseline = app.add_subcommand("baseline", "Write baseline trees");
  baseline->add_option("--strategy", bf.strategy, "left, right, balanced or oracle-binary")
      ->required();
  baseline->add_option("--input", bf.input, "Gold trees")->check(CLI::ExistingFile);
  baseline->add_option("--corpus", bf.corpus, "Corpus instead of trees")
      ->check(CLI::ExistingFile);
  baseline->add_option("--out", bf.out)->required();
  baseline->add_option("--placeholder", bf.placeholder, "Category for unlabeled nodes");

  SynthFlags sf;
  auto *synth = app.add_subcommand("synth", "Synthetic grammar tools");
  synth->require_subcommand(1);
  auto *synth_gen = synth->add_subcommand("gen", "Sample a corpus with gold trees");
  synth_gen->add_option("--grammar", sf.grammar)->required()->check(CLI::ExistingFile);
  synth_gen->add_option("--n", sf.n)->check(CLI::PositiveNumber);
  synth_gen->add_option("--max-len", sf.max_len)->check(CLI::PositiveNumber);
  synth_gen->add_option("--out-corpus", sf.out_corpus)->required();
  synth_gen->add_option("--out-trees", sf.out_trees)->required();

  TransformsFlags tf;
  auto *transforms = app.add_subcommand("transforms-debug", "Print constituency-test outputs");
  AddScorerFlags(transforms, tf.scorer);
  transforms->add_option("--sentence", tf.sentence, "Space-separated tokens");
  transforms->add_option("--input", tf.input, "Corpus")->check(CLI::ExistingFile);
  transforms->add_option("--span", tf.span, "lo hi")->expected(2)->delimiter(',');
  transforms->add_option("--test", tf.test, "Only this test");

  std::vector<const char *> argv;
  for (const auto &a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  Run run{&globals, {}, {}};
  run.manifest.argv = args;
  run.manifest.seed = globals.seed;
  run.manifest.started = UtcTimestamp();
  run.manifest.flags["workers"] = globals.workers;

  int code = kExitOk;
  try {
    ConfigureLogging(globals.log_level);
    if (gen->parsed()) {
      run.manifest.subcommand = "gen-corruptions";
      code = RunGenCorruptions(gc, run);
    } else if (train->parsed()) {
      run.manifest.subcommand = "train-realfake";
      code = RunTrainRealFake(tr, run);
    } else if (parse->parsed()) {
      run.manifest.subcommand = "parse";
      code = RunParse(pf, run);
    } else if (refine->parsed()) {
      run.manifest.subcommand = "refine";
      code = RunRefine(rf, run);
    } else if (eval->parsed()) {
      run.manifest.subcommand = "eval";
      code = RunEval(ef, run);
    } else if (analyze->parsed()) {
      run.manifest.subcommand = "analyze";
      code = RunAnalyze(af, run);
    } else if (baseline->parsed()) {
      run.manifest.subcommand = "baseline";
      code = RunBaseline(bf, run);
    } else if (synth_gen->parsed()) {
      run.manifest.subcommand = "synth gen";
      code = RunSynthGen(sf, run);
    } else if (transforms->parsed()) {
      run.manifest.subcommand = "transforms-debug";
      code = RunTransformsDebug(tf, run);
    }
  } catch (const UsageError &e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const InputError &e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    code = kExitRuntime;
  }
  run.manifest.finished = UtcTimestamp();
  run.manifest.exit_code = code;
  if (code == kExitOk) {
    try {
      EmitManifest(run);
    } catch (const std::exception &e) {
      std::cerr << "error: cannot write manifest: " << e.what() << "\n";
      return kExitRuntime;
    }
  }
  return code;
}

}  // namespace ctparse::cli
