#include "potlab/cli/output.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>

#include <openssl/evp.h>

#include "potlab/core/errors.hpp"

namespace potlab {

namespace fs = std::filesystem;

std::string sha256_hex(const std::string& data) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), data.data(), data.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest, &len) != 1)
    throw Error("sha256 failed");
  static const char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

nlohmann::json make_manifest(const std::vector<Artifact>& artifacts, std::uint64_t seed) {
  std::vector<const Artifact*> sorted;
  for (const Artifact& a : artifacts) sorted.push_back(&a);
  std::sort(sorted.begin(), sorted.end(), [](const Artifact* a, const Artifact* b) { return a->name < b->name; });
  nlohmann::json files = nlohmann::json::array();
  for (const Artifact* a : sorted)
    files.push_back({{"name", a->name}, {"sha256", sha256_hex(a->content)}, {"bytes", a->content.size()}});
  return {{"seed", seed}, {"files", files}};
}

namespace {

void write_atomic(const fs::path& target, const std::string& content) {
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot write " + tmp.string());
    os.write(content.data(), static_cast<std::streamsize>(content.size()));
    os.flush();
    if (!os) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw IoError("short write to " + tmp.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot rename into " + target.string());
  }
}

}  // namespace

nlohmann::json write_outputs(const std::vector<Artifact>& artifacts, const std::string& dir, std::uint64_t seed) {
  for (const Artifact& a : artifacts)
    if (a.name.empty() || a.name.find('/') != std::string::npos || a.name == "manifest.json")
      throw InvalidInput("bad artifact name '" + a.name + "'");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory " + dir);
  const nlohmann::json manifest = make_manifest(artifacts, seed);
  for (const Artifact& a : artifacts) write_atomic(fs::path(dir) / a.name, a.content);
  write_atomic(fs::path(dir) / "manifest.json", manifest.dump(2) + "\n");
  return manifest;
}

}  // namespace potlab
