// Hashed n-gram logistic regression trained with Adam. This is the in-process
// grammaticality backend: small enough to train at desk scale and exactly
// reproducible.

#ifndef CTPARSE_NATIVE_SCORER_H_
#define CTPARSE_NATIVE_SCORER_H_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ctparse/scorer.h"

namespace ctparse {

inline constexpr int kDefaultDimLog2 = 20;
inline constexpr std::uint64_t kFeatureHashSeed = 0x63747061727365ULL;  // "ctparse"

// FNV-1a over the seed bytes followed by `text`.
std::uint64_t FeatureHash(std::string_view text);

// Indicator features of a sentence: token unigrams, bigrams and trigrams with
// <s>/</s> padding, and a length bucket. Indices are hashed into [0, 2^dim_log2),
// sorted and unique (colliding features share one indicator).
std::vector<std::uint32_t> Featurize(const Sentence &sent,
                                     int dim_log2 = kDefaultDimLog2);

// The feature strings before hashing; exposed for tests and debugging.
std::vector<std::string> FeatureNames(const Sentence &sent);

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-6;
};

class NativeScorer : public GrammaticalityScorer {
 public:
  static constexpr std::uint32_t kFormatVersion = 1;

  explicit NativeScorer(int dim_log2 = kDefaultDimLog2, AdamConfig adam = {});

  std::vector<double> ScoreSentences(
      std::span<const Sentence> batch) const override;
  bool trainable() const override { return true; }
  std::string name() const override { return "native"; }
  double Train(std::span<const LabeledExample> batch, double lr) override {
    return GradStep(batch, lr);
  }

  double Probability(const Sentence &sent) const;
  double Logit(const Sentence &sent) const;

  // One Adam step on mean binary cross-entropy; returns the loss before the
  // update. Throws DivergedError on a non-finite loss.
  double GradStep(std::span<const LabeledExample> batch, double lr);

  struct Gradient {
    double loss = 0;
    std::unordered_map<std::uint32_t, double> weights;
    double bias = 0;
  };
  // Mean loss and its gradient, without touching the model.
  Gradient LossAndGradient(std::span<const LabeledExample> batch) const;
  double MeanLoss(std::span<const LabeledExample> batch) const;

  int dim_log2() const { return dim_log2_; }
  std::size_t dim() const { return weights_.size(); }
  std::uint64_t step() const { return step_; }
  double weight(std::uint32_t i) const { return weights_.at(i); }
  void set_weight(std::uint32_t i, double w) { weights_.at(i) = w; }
  double bias() const { return bias_; }
  void set_bias(double b) { bias_ = b; }

  // Serialization keeps the optimizer state so training can resume exactly.
  std::string SaveBinary() const;
  std::string SaveJson() const;
  // Detects the format from the first byte.
  static NativeScorer Load(std::string_view bytes);
  static NativeScorer LoadFile(const std::string &path);
  void SaveFile(const std::string &path, bool json = false) const;

 private:
  int dim_log2_;
  AdamConfig adam_;
  std::vector<double> weights_;
  std::vector<double> m_;
  std::vector<double> v_;
  double bias_ = 0, bias_m_ = 0, bias_v_ = 0;
  std::uint64_t step_ = 0;
};

}  // namespace ctparse

#endif  // CTPARSE_NATIVE_SCORER_H_
