#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ctparse/cli.h"
#include "ctparse/decoder.h"
#include "ctparse/eval.h"
#include "ctparse/native_scorer.h"
#include "ctparse/synth.h"
#include "ctparse/training.h"
#include "ctparse/transforms.h"
#include "ctparse/treebank.h"

namespace py = pybind11;
using namespace ctparse;

namespace {

std::vector<Sentence> ToSentences(const std::vector<std::vector<std::string>> &batch) {
  std::vector<Sentence> out;
  out.reserve(batch.size());
  for (const auto &toks : batch) out.emplace_back(toks);
  return out;
}

ConstituencyTest TestByName(const std::string &name) {
  auto t = TestFromName(name);
  if (!t) throw py::value_error("unknown constituency test: " + name);
  return *t;
}

std::vector<std::pair<int, int>> SpanPairs(const SpanSet &spans) {
  std::vector<std::pair<int, int>> out;
  for (const auto &s : spans) out.emplace_back(s.lo, s.hi);
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Constituency-test parsing core";

  py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
  py::register_exception<NotTrainableError>(m, "NotTrainableError", PyExc_RuntimeError);

  m.def("preprocess", [](const std::vector<std::string> &tokens) {
    return Preprocess(tokens).tokens();
  });
  m.def("test_names", [] {
    std::vector<std::string> out;
    for (auto t : kAllTests) out.emplace_back(TestName(t));
    return out;
  });
  m.def(
      "apply_test",
      [](const std::string &test, const std::vector<std::string> &tokens, int lo, int hi) {
        return ApplyTest(TestByName(test), Sentence(tokens), Span{lo, hi}).sentence.tokens();
      },
      py::arg("test"), py::arg("tokens"), py::arg("lo"), py::arg("hi"));

  m.def("normalize_for_eval", [](const std::string &tree) {
    return SpanPairs(NormalizeForEval(ParseBracketed(tree), PunctuationConfig::Default()));
  });
  m.def("tree_spans", [](const std::string &tree) { return SpanPairs(TreeSpans(ParseBracketed(tree))); });
  m.def("tree_words", [](const std::string &tree) { return ParseBracketed(tree).Words(); });
  m.def(
      "render",
      [](const std::string &tree, std::optional<std::string> placeholder) {
        return RenderBracketed(ParseBracketed(tree), {placeholder});
      },
      py::arg("tree"), py::arg("placeholder") = py::none());
  m.def("binarize_right",
        [](const std::string &tree) { return RenderBracketed(BinarizeRight(ParseBracketed(tree))); });

  m.def(
      "baseline",
      [](const std::string &strategy, const std::vector<std::string> &words) {
        auto b = BaselineFromName(strategy);
        if (!b) throw py::value_error("unknown baseline: " + strategy);
        return RenderBracketed(BaselineTree(*b, words));
      },
      py::arg("strategy"), py::arg("words"));

  m.def(
      "corpus_f1",
      [](const std::vector<std::string> &gold, const std::vector<std::string> &pred) {
        std::vector<Tree> g, p;
        for (const auto &t : gold) g.push_back(ParseBracketed(t));
        for (const auto &t : pred) p.push_back(ParseBracketed(t));
        return CorpusF1(g, p).corpus_f1;
      },
      py::arg("gold"), py::arg("pred"));

  // Chart given as {(lo, hi): score} for nontrivial spans.
  m.def(
      "mbr_parse",
      [](const std::vector<std::string> &words, const std::map<std::pair<int, int>, double> &scores) {
        Chart chart(static_cast<int>(words.size()));
        for (const auto &[span, v] : scores) chart.set_score(span.first, span.second, v);
        return RenderBracketed(MbrParse(chart, words));
      },
      py::arg("words"), py::arg("scores"));

  py::class_<GrammaticalityScorer>(m, "Scorer")
      .def("score",
           [](const GrammaticalityScorer &s, const std::vector<std::vector<std::string>> &batch) {
             auto sents = ToSentences(batch);
             py::gil_scoped_release release;
             return ScoreSentences(s, sents);
           })
      .def_property_readonly("trainable", &GrammaticalityScorer::trainable)
      .def_property_readonly("name", &GrammaticalityScorer::name)
      .def(
          "parse",
          [](const GrammaticalityScorer &s, const std::vector<std::vector<std::string>> &batch,
             int workers) {
            auto sents = ToSentences(batch);
            DecoderOptions opts;
            opts.workers = workers;
            CorpusParse parsed;
            {
              py::gil_scoped_release release;
              parsed = ParseCorpus(s, sents, opts);
            }
            std::vector<std::string> out;
            for (const auto &t : parsed.trees) out.push_back(RenderBracketed(t));
            return out;
          },
          py::arg("sentences"), py::arg("workers") = 1)
      .def("span_scores", [](const GrammaticalityScorer &s, const std::vector<std::string> &tokens) {
        Chart chart = ScoreSpans(s, Sentence(tokens));
        std::map<std::pair<int, int>, double> out;
        for (int lo = 0; lo < chart.n(); ++lo) {
          for (int hi = lo + 1; hi <= chart.n(); ++hi) out[{lo, hi}] = chart.score(lo, hi);
        }
        return out;
      });

  py::class_<NativeScorer, GrammaticalityScorer>(m, "NativeScorer")
      .def(py::init<int>(), py::arg("dim_log2") = kDefaultDimLog2)
      .def_static("load", &NativeScorer::LoadFile)
      .def("save", &NativeScorer::SaveFile, py::arg("path"), py::arg("json") = false)
      .def(
          "train_step",
          [](NativeScorer &s, const std::vector<std::vector<std::string>> &batch,
             const std::vector<int> &labels, double lr) {
            if (batch.size() != labels.size()) throw py::value_error("one label per sentence");
            std::vector<LabeledExample> ex;
            for (std::size_t i = 0; i < batch.size(); ++i) {
              ex.push_back({Sentence(batch[i]), labels[i], "", {}, {}});
            }
            return s.GradStep(ex, lr);
          },
          py::arg("sentences"), py::arg("labels"), py::arg("lr"))
      .def_property_readonly("step", &NativeScorer::step);

  py::class_<GrammarOracleScorer, GrammaticalityScorer>(m, "GrammarOracle")
      .def(py::init([](const std::string &path) { return GrammarOracleScorer(Grammar::Load(path)); }))
      .def_static("from_text",
                  [](const std::string &text) { return GrammarOracleScorer(Grammar::Parse(text)); })
      .def(
          "sample",
          [](const GrammarOracleScorer &o, std::size_t n, std::size_t max_len, std::uint64_t seed) {
            RandomSource rng(seed);
            auto corpus = SampleCorpus(o.grammar(), n, max_len, rng);
            std::vector<std::pair<std::vector<std::string>, std::string>> out;
            for (std::size_t i = 0; i < n; ++i) {
              out.emplace_back(corpus.sentences[i].tokens(), RenderBracketed(corpus.gold_trees[i]));
            }
            return out;
          },
          py::arg("n"), py::arg("max_len") = 12, py::arg("seed") = 0);

  m.def("main", [](std::vector<std::string> args) {
    args.insert(args.begin(), "ctparse");
    return cli::Dispatch(args);
  });
}
