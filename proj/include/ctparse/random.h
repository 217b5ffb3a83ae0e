// Seeded random source with platform-independent sampling helpers. Standard
// distributions are implementation-defined, so everything here draws raw
// 64-bit words from mt19937_64 and maps them itself.

#ifndef CTPARSE_RANDOM_H_
#define CTPARSE_RANDOM_H_

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace ctparse {

class RandomSource {
 public:
  explicit RandomSource(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }

  std::uint64_t Next() { return engine_(); }

  // Uniform in [0, n). n must be positive.
  std::uint64_t Uniform(std::uint64_t n) {
    // Rejection keeps the result exactly uniform.
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

  // Uniform integer in [lo, hi].
  int UniformInt(int lo, int hi) {
    return lo + static_cast<int>(Uniform(static_cast<std::uint64_t>(hi - lo) + 1));
  }

  // Uniform in [0, 1) with 53 bits of precision.
  double Uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  bool Bernoulli(double p) { return Uniform01() < p; }

  template <typename T>
  void Shuffle(std::vector<T> &v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = Uniform(i);
      std::swap(v[i - 1], v[j]);
    }
  }

  // k distinct indices from [0, n) in increasing order (all of them when
  // k >= n).
  std::vector<std::size_t> SampleWithoutReplacement(std::size_t n, std::size_t k);

  // Derives an independent stream, e.g. one per worker or per stage.
  RandomSource Fork(std::uint64_t stream);

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace ctparse

#endif  // CTPARSE_RANDOM_H_
