#include "ctparse/random.h"

#include <algorithm>
#include <unordered_set>

namespace ctparse {

std::vector<std::size_t> RandomSource::SampleWithoutReplacement(std::size_t n,
                                                                std::size_t k) {
  std::vector<std::size_t> out;
  if (k >= n) {
    out.resize(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = i;
    return out;
  }
  // Floyd's algorithm: k draws, no O(n) scratch.
  std::unordered_set<std::size_t> chosen;
  for (std::size_t j = n - k; j < n; ++j) {
    std::size_t t = Uniform(j + 1);
    if (!chosen.insert(t).second) chosen.insert(j);
  }
  out.assign(chosen.begin(), chosen.end());
  std::sort(out.begin(), out.end());
  return out;
}

RandomSource RandomSource::Fork(std::uint64_t stream) {
  // splitmix64 of (next word ^ stream) gives a well-separated child seed.
  std::uint64_t z = engine_() ^ (stream * 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  z ^= z >> 31;
  return RandomSource(z);
}

}  // namespace ctparse
