#include "ctparse/manifest.h"

#include <chrono>
#include <ctime>
#include <fstream>
#include <memory>

#include <fmt/format.h>
#include <openssl/evp.h>

#include "ctparse/treebank.h"

namespace ctparse {

namespace {

struct DigestContext {
  DigestContext() : ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free) {
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
      throw std::runtime_error("cannot initialize SHA-256");
    }
  }
  void Update(const void *data, std::size_t n) {
    if (EVP_DigestUpdate(ctx.get(), data, n) != 1) throw std::runtime_error("SHA-256 update failed");
  }
  std::string HexDigest() {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_DigestFinal_ex(ctx.get(), md, &len) != 1) {
      throw std::runtime_error("SHA-256 finalization failed");
    }
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) out += fmt::format("{:02x}", md[i]);
    return out;
  }
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx;
};

}  // namespace

std::string Sha256Hex(std::string_view data) {
  DigestContext d;
  d.Update(data.data(), data.size());
  return d.HexDigest();
}

std::string Sha256File(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(fmt::format("cannot read '{}'", path));
  DigestContext d;
  char buf[1 << 16];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    d.Update(buf, static_cast<std::size_t>(in.gcount()));
  }
  return d.HexDigest();
}

std::string UtcTimestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void RunManifest::AddInput(const std::string &path) { inputs.push_back({path, Sha256File(path)}); }

void RunManifest::AddOutput(const std::string &path) {
  outputs.push_back({path, Sha256File(path)});
}

nlohmann::json RunManifest::ToJson() const {
  const auto files = [](const std::vector<FileDigest> &v) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto &f : v) arr.push_back({{"path", f.path}, {"sha256", f.sha256}});
    return arr;
  };
  return {{"subcommand", subcommand},
          {"argv", argv},
          {"seed", seed},
          {"flags", flags},
          {"inputs", files(inputs)},
          {"outputs", files(outputs)},
          {"started", started},
          {"finished", finished},
          {"version", version},
          {"exit_code", exit_code}};
}

}  // namespace ctparse
