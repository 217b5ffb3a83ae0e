#include "ctparse/transforms.h"

#include <initializer_list>

namespace ctparse {

namespace {

constexpr std::array<std::string_view, kNumTests> kNames = {
    "cleft_is",  "cleft_was", "coordination",   "sub_it",
    "sub_ones",  "sub_did_so", "front_movement", "end_movement",
};

using Tokens = std::vector<std::string>;
using Iter = Tokens::const_iterator;

struct Builder {
  Tokens out;

  Builder &Words(std::initializer_list<const char *> words) {
    for (const char *w : words) out.emplace_back(w);
    return *this;
  }
  Builder &Range(Iter first, Iter last) {
    out.insert(out.end(), first, last);
    return *this;
  }
};

}  // namespace

std::string_view TestName(ConstituencyTest test) {
  return kNames[TestIndex(test)];
}

std::optional<ConstituencyTest> TestFromName(std::string_view name) {
  for (auto t : kAllTests) {
    if (TestName(t) == name) return t;
  }
  return std::nullopt;
}

TransformedSentence ApplyTest(ConstituencyTest test, const Sentence &sent,
                              Span span, const TransformOptions &options) {
  CheckSpan(span, sent.size());
  const Tokens &toks = sent.tokens();
  const Iter a0 = toks.begin();
  const Iter b0 = a0 + span.lo;
  const Iter c0 = a0 + span.hi;
  const Iter end = toks.end();

  // Reject before building so an oversized coordination never allocates.
  const std::size_t n = toks.size();
  const std::size_t b = static_cast<std::size_t>(span.length());
  std::size_t out_len = 0;
  switch (test) {
    case ConstituencyTest::kCleftIs:
    case ConstituencyTest::kCleftWas:
      out_len = n + 3;
      break;
    case ConstituencyTest::kCoordination:
      out_len = n + b + 1;
      break;
    case ConstituencyTest::kSubIt:
    case ConstituencyTest::kSubOnes:
      out_len = n - b + 1;
      break;
    case ConstituencyTest::kSubDidSo:
      out_len = n - b + 2;
      break;
    case ConstituencyTest::kFrontMovement:
      out_len = n + 1;
      break;
    case ConstituencyTest::kEndMovement:
      out_len = n;
      break;
  }
  if (out_len > options.max_length) throw LengthCapError();

  Builder o;
  o.out.reserve(out_len);
  switch (test) {
    case ConstituencyTest::kCleftIs:
      o.Words({"it", "is"}).Range(b0, c0).Words({"that"}).Range(a0, b0).Range(c0, end);
      break;
    case ConstituencyTest::kCleftWas:
      o.Words({"it", "was"}).Range(b0, c0).Words({"that"}).Range(a0, b0).Range(c0, end);
      break;
    case ConstituencyTest::kCoordination:
      o.Range(a0, b0).Range(b0, c0).Words({"and"}).Range(b0, c0).Range(c0, end);
      break;
    case ConstituencyTest::kSubIt:
      o.Range(a0, b0).Words({"it"}).Range(c0, end);
      break;
    case ConstituencyTest::kSubOnes:
      o.Range(a0, b0).Words({"ones"}).Range(c0, end);
      break;
    case ConstituencyTest::kSubDidSo:
      o.Range(a0, b0).Words({"did", "so"}).Range(c0, end);
      break;
    case ConstituencyTest::kFrontMovement:
      o.Range(b0, c0).Words({","}).Range(a0, b0).Range(c0, end);
      break;
    case ConstituencyTest::kEndMovement:
      o.Range(a0, b0).Range(c0, end).Range(b0, c0);
      break;
  }
  return {Sentence(std::move(o.out)), span, test};
}

std::vector<TransformedSentence> EnumerateTests(const Sentence &sent, Span span,
                                                const TransformOptions &options) {
  std::vector<TransformedSentence> out;
  out.reserve(kNumTests);
  for (auto t : kAllTests) out.push_back(ApplyTest(t, sent, span, options));
  return out;
}

}  // namespace ctparse
