// Constituency-test transformations. Each maps a sentence "A [B] C" and the
// bracketed span B to a new sentence whose grammaticality is evidence for or
// against B being a constituent.

#ifndef CTPARSE_TRANSFORMS_H_
#define CTPARSE_TRANSFORMS_H_

#include <array>
#include <optional>
#include <string_view>
#include <vector>

#include "ctparse/treebank.h"

namespace ctparse {

enum class ConstituencyTest {
  kCleftIs,
  kCleftWas,
  kCoordination,
  kSubIt,
  kSubOnes,
  kSubDidSo,
  kFrontMovement,
  kEndMovement,
};

inline constexpr std::size_t kNumTests = 8;

inline constexpr std::array<ConstituencyTest, kNumTests> kAllTests = {
    ConstituencyTest::kCleftIs,       ConstituencyTest::kCleftWas,
    ConstituencyTest::kCoordination,  ConstituencyTest::kSubIt,
    ConstituencyTest::kSubOnes,       ConstituencyTest::kSubDidSo,
    ConstituencyTest::kFrontMovement, ConstituencyTest::kEndMovement,
};

// Stable snake_case names used in files and reports ("cleft_is", ...).
std::string_view TestName(ConstituencyTest test);
std::optional<ConstituencyTest> TestFromName(std::string_view name);

inline std::size_t TestIndex(ConstituencyTest test) {
  return static_cast<std::size_t>(test);
}

struct TransformOptions {
  // Outputs longer than this are rejected.
  std::size_t max_length = 250;
};

// Thrown when an output would exceed TransformOptions::max_length.
class LengthCapError : public std::runtime_error {
 public:
  LengthCapError() : std::runtime_error("test skipped: length cap") {}
};

struct TransformedSentence {
  Sentence sentence;
  Span source_span;
  ConstituencyTest test;
};

TransformedSentence ApplyTest(ConstituencyTest test, const Sentence &sent,
                              Span span, const TransformOptions &options = {});

// All eight tests for one span, in kAllTests order.
std::vector<TransformedSentence> EnumerateTests(
    const Sentence &sent, Span span, const TransformOptions &options = {});

}  // namespace ctparse

#endif  // CTPARSE_TRANSFORMS_H_
