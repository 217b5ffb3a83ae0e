#include "ctparse/native_scorer.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

namespace ctparse {

static_assert(std::endian::native == std::endian::little,
              "model files are written in host byte order");

namespace {

constexpr char kMagic[8] = {'C', 'T', 'P', 'S', 'C', 'O', 'R', 'E'};
constexpr std::string_view kJsonFormat = "ctparse-native-scorer";

std::string LengthBucket(std::size_t n) {
  if (n <= 10) return std::to_string(n);
  if (n <= 15) return "11-15";
  if (n <= 20) return "16-20";
  if (n <= 30) return "21-30";
  if (n <= 40) return "31-40";
  if (n <= 60) return "41-60";
  return "61+";
}

// log(1 + exp(x)) without overflow.
double Softplus(double x) {
  return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double Sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  double e = std::exp(z);
  return e / (1.0 + e);
}

// Binary cross-entropy of sigmoid(z) against y.
double Bce(double z, int y) { return y == 1 ? Softplus(-z) : Softplus(z); }

}  // namespace

std::uint64_t FeatureHash(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&](unsigned char c) {
    h ^= c;
    h *= 0x100000001b3ULL;
  };
  for (int i = 0; i < 8; ++i) mix(static_cast<unsigned char>(kFeatureHashSeed >> (8 * i)));
  for (char c : text) mix(static_cast<unsigned char>(c));
  // Final avalanche so the low bits used for indexing depend on every byte.
  h ^= h >> 33;
  h *= 0xff51afd7ed558ccdULL;
  h ^= h >> 33;
  return h;
}

std::vector<std::string> FeatureNames(const Sentence &sent) {
  std::vector<std::string> names;
  const std::size_t n = sent.size();
  std::vector<std::string_view> padded;
  padded.reserve(n + 2);
  padded.push_back("<s>");
  for (const auto &t : sent) padded.push_back(t);
  padded.push_back("</s>");

  for (const auto &t : sent) names.push_back(fmt::format("u|{}", t));
  for (std::size_t i = 0; i + 1 < padded.size(); ++i) {
    names.push_back(fmt::format("b|{}|{}", padded[i], padded[i + 1]));
  }
  // Trigrams spanning both boundaries carry no token-order information.
  for (std::size_t i = 0; i + 2 < padded.size(); ++i) {
    if (i == 0 && i + 2 == padded.size() - 1) continue;
    names.push_back(fmt::format("t|{}|{}|{}", padded[i], padded[i + 1], padded[i + 2]));
  }
  names.push_back(fmt::format("len|{}", LengthBucket(n)));
  return names;
}

std::vector<std::uint32_t> Featurize(const Sentence &sent, int dim_log2) {
  const std::uint64_t mask = (std::uint64_t{1} << dim_log2) - 1;
  std::vector<std::uint32_t> idx;
  for (const auto &name : FeatureNames(sent)) {
    idx.push_back(static_cast<std::uint32_t>(FeatureHash(name) & mask));
  }
  std::sort(idx.begin(), idx.end());
  idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
  return idx;
}

// ---------------------------------------------------------------------------

NativeScorer::NativeScorer(int dim_log2, AdamConfig adam)
    : dim_log2_(dim_log2), adam_(adam) {
  if (dim_log2 < 1 || dim_log2 > 28) {
    throw std::invalid_argument(fmt::format("feature dimension 2^{} out of range", dim_log2));
  }
  const std::size_t d = std::size_t{1} << dim_log2;
  weights_.assign(d, 0.0);
  m_.assign(d, 0.0);
  v_.assign(d, 0.0);
}

double NativeScorer::Logit(const Sentence &sent) const {
  double z = bias_;
  for (auto i : Featurize(sent, dim_log2_)) z += weights_[i];
  return z;
}

double NativeScorer::Probability(const Sentence &sent) const {
  return Sigmoid(Logit(sent));
}

std::vector<double> NativeScorer::ScoreSentences(
    std::span<const Sentence> batch) const {
  std::vector<double> out;
  out.reserve(batch.size());
  for (const auto &s : batch) out.push_back(Probability(s));
  return out;
}

NativeScorer::Gradient NativeScorer::LossAndGradient(
    std::span<const LabeledExample> batch) const {
  if (batch.empty()) throw std::invalid_argument("empty training batch");
  Gradient g;
  const double scale = 1.0 / static_cast<double>(batch.size());
  for (const auto &ex : batch) {
    auto feats = Featurize(ex.tokens, dim_log2_);
    double z = bias_;
    for (auto i : feats) z += weights_[i];
    g.loss += Bce(z, ex.label) * scale;
    double d = (Sigmoid(z) - ex.label) * scale;
    for (auto i : feats) g.weights[i] += d;
    g.bias += d;
  }
  return g;
}

double NativeScorer::MeanLoss(std::span<const LabeledExample> batch) const {
  if (batch.empty()) throw std::invalid_argument("empty training batch");
  double loss = 0;
  for (const auto &ex : batch) loss += Bce(Logit(ex.tokens), ex.label);
  return loss / static_cast<double>(batch.size());
}

double NativeScorer::GradStep(std::span<const LabeledExample> batch, double lr) {
  if (!(lr >= 0)) throw std::invalid_argument("learning rate must be nonnegative");
  if (batch.empty()) throw std::invalid_argument("empty training batch");
  for (const auto &ex : batch) {
    if (ex.label != 0 && ex.label != 1) {
      throw std::invalid_argument(fmt::format("label {} is not 0 or 1", ex.label));
    }
  }
  // Dense gradient; accumulation order follows the batch, so steps are
  // bit-reproducible.
  std::vector<double> grad(weights_.size(), 0.0);
  double grad_bias = 0;
  double loss = 0;
  const double scale = 1.0 / static_cast<double>(batch.size());
  for (const auto &ex : batch) {
    auto feats = Featurize(ex.tokens, dim_log2_);
    double z = bias_;
    for (auto i : feats) z += weights_[i];
    loss += Bce(z, ex.label) * scale;
    double d = (Sigmoid(z) - ex.label) * scale;
    for (auto i : feats) grad[i] += d;
    grad_bias += d;
  }
  if (!std::isfinite(loss)) throw DivergedError("diverged: non-finite loss");

  ++step_;
  const double b1 = adam_.beta1, b2 = adam_.beta2, eps = adam_.epsilon;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(step_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(step_));
  auto update = [&](double &w, double &m, double &v, double g) {
    m = b1 * m + (1.0 - b1) * g;
    v = b2 * v + (1.0 - b2) * g * g;
    w -= lr * (m / c1) / (std::sqrt(v / c2) + eps);
  };
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    update(weights_[i], m_[i], v_[i], grad[i]);
  }
  update(bias_, bias_m_, bias_v_, grad_bias);
  return loss;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

template <typename T>
void Put(std::string &out, T value) {
  char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  out.append(buf, sizeof(T));
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  template <typename T>
  T Get() {
    if (pos_ + sizeof(T) > bytes_.size()) {
      throw InputError("model file truncated");
    }
    T value;
    std::memcpy(&value, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return value;
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string NativeScorer::SaveBinary() const {
  std::string out(kMagic, sizeof(kMagic));
  Put<std::uint32_t>(out, kFormatVersion);
  Put<std::uint32_t>(out, static_cast<std::uint32_t>(dim_log2_));
  Put<double>(out, adam_.beta1);
  Put<double>(out, adam_.beta2);
  Put<double>(out, adam_.epsilon);
  Put<std::uint64_t>(out, step_);
  Put<double>(out, bias_);
  Put<double>(out, bias_m_);
  Put<double>(out, bias_v_);
  std::uint64_t nonzero = 0;
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    if (weights_[i] != 0 || m_[i] != 0 || v_[i] != 0) ++nonzero;
  }
  Put<std::uint64_t>(out, nonzero);
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    if (weights_[i] != 0 || m_[i] != 0 || v_[i] != 0) {
      Put<std::uint32_t>(out, static_cast<std::uint32_t>(i));
      Put<double>(out, weights_[i]);
      Put<double>(out, m_[i]);
      Put<double>(out, v_[i]);
    }
  }
  return out;
}

std::string NativeScorer::SaveJson() const {
  nlohmann::json j;
  j["format"] = kJsonFormat;
  j["version"] = kFormatVersion;
  j["dim_log2"] = dim_log2_;
  j["adam"] = {adam_.beta1, adam_.beta2, adam_.epsilon};
  j["step"] = step_;
  j["bias"] = {bias_, bias_m_, bias_v_};
  auto entries = nlohmann::json::array();
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    if (weights_[i] != 0 || m_[i] != 0 || v_[i] != 0) {
      entries.push_back({i, weights_[i], m_[i], v_[i]});
    }
  }
  j["weights"] = std::move(entries);
  return j.dump() + "\n";
}

NativeScorer NativeScorer::Load(std::string_view bytes) {
  if (!bytes.empty() && bytes[0] == '{') {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(bytes);
    } catch (const nlohmann::json::exception &e) {
      throw InputError(fmt::format("model file is not valid JSON: {}", e.what()));
    }
    try {
      if (j.at("format") != kJsonFormat) throw InputError("not a native scorer model");
      auto version = j.at("version").get<std::uint32_t>();
      if (version != kFormatVersion) {
        throw InputError(fmt::format("model version mismatch: file has {}, expected {}",
                                     version, kFormatVersion));
      }
      const auto &adam = j.at("adam");
      NativeScorer s(j.at("dim_log2").get<int>(),
                     AdamConfig{adam.at(0).get<double>(), adam.at(1).get<double>(),
                                adam.at(2).get<double>()});
      s.step_ = j.at("step").get<std::uint64_t>();
      const auto &b = j.at("bias");
      s.bias_ = b.at(0).get<double>();
      s.bias_m_ = b.at(1).get<double>();
      s.bias_v_ = b.at(2).get<double>();
      for (const auto &e : j.at("weights")) {
        auto i = e.at(0).get<std::size_t>();
        if (i >= s.weights_.size()) throw InputError("model weight index out of range");
        s.weights_[i] = e.at(1).get<double>();
        s.m_[i] = e.at(2).get<double>();
        s.v_[i] = e.at(3).get<double>();
      }
      return s;
    } catch (const nlohmann::json::exception &e) {
      throw InputError(fmt::format("malformed model file: {}", e.what()));
    }
  }

  if (bytes.size() < sizeof(kMagic) ||
      std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
    throw InputError("not a native scorer model (bad magic)");
  }
  Reader r(bytes.substr(sizeof(kMagic)));
  auto version = r.Get<std::uint32_t>();
  if (version != kFormatVersion) {
    throw InputError(fmt::format("model version mismatch: file has {}, expected {}",
                                 version, kFormatVersion));
  }
  auto dim_log2 = static_cast<int>(r.Get<std::uint32_t>());
  AdamConfig adam;
  adam.beta1 = r.Get<double>();
  adam.beta2 = r.Get<double>();
  adam.epsilon = r.Get<double>();
  NativeScorer s(dim_log2, adam);
  s.step_ = r.Get<std::uint64_t>();
  s.bias_ = r.Get<double>();
  s.bias_m_ = r.Get<double>();
  s.bias_v_ = r.Get<double>();
  auto count = r.Get<std::uint64_t>();
  for (std::uint64_t k = 0; k < count; ++k) {
    auto i = r.Get<std::uint32_t>();
    if (i >= s.weights_.size()) throw InputError("model weight index out of range");
    s.weights_[i] = r.Get<double>();
    s.m_[i] = r.Get<double>();
    s.v_[i] = r.Get<double>();
  }
  if (!r.done()) throw InputError("trailing bytes in model file");
  return s;
}

NativeScorer NativeScorer::LoadFile(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(fmt::format("cannot open model '{}'", path));
  std::stringstream buf;
  buf << in.rdbuf();
  return Load(buf.str());
}

void NativeScorer::SaveFile(const std::string &path, bool json) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", path));
  out << (json ? SaveJson() : SaveBinary());
}

}  // namespace ctparse
