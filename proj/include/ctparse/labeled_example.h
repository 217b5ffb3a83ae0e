#ifndef CTPARSE_LABELED_EXAMPLE_H_
#define CTPARSE_LABELED_EXAMPLE_H_

#include <cstddef>
#include <optional>
#include <string>

#include "ctparse/treebank.h"

namespace ctparse {

// A sentence with a 0/1 grammaticality label: the unit of scorer training.
struct LabeledExample {
  Sentence tokens;
  int label = 0;
  // "real", a corruption name, or a constituency-test name for refinement.
  std::string provenance;
  // Refinement examples record the judged span and the index of the source
  // sentence within its batch.
  std::optional<Span> span;
  std::optional<std::size_t> source;
};

}  // namespace ctparse

#endif  // CTPARSE_LABELED_EXAMPLE_H_
