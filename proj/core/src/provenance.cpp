#include "vfp/provenance.hpp"

#include <algorithm>
#include <fstream>

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include "vfp/common.hpp"

namespace vfp {

namespace {

std::string digest_hex(const unsigned char* md, unsigned len) {
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned i = 0; i < len; ++i) {
    out.push_back(hex[md[i] >> 4]);
    out.push_back(hex[md[i] & 0xf]);
  }
  return out;
}

}  // namespace

std::string sha256_hex(std::string_view data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned len = 0;
  if (!EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr))
    throw NumericError("sha256 failed");
  return digest_hex(md, len);
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open for digest: " + path.string());
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx) throw NumericError("sha256 context allocation failed");
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof(buf));
    std::streamsize got = in.gcount();
    if (got > 0) EVP_DigestUpdate(ctx, buf, std::size_t(got));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned len = 0;
  EVP_DigestFinal_ex(ctx, md, &len);
  EVP_MD_CTX_free(ctx);
  return digest_hex(md, len);
}

void write_provenance(const std::filesystem::path& dir,
                      const nlohmann::json& resolved_config,
                      const std::vector<std::filesystem::path>& inputs) {
  std::filesystem::create_directories(dir);
  nlohmann::json j;
  std::string config_text = resolved_config.dump(2);
  j["config"] = resolved_config;
  j["config_sha256"] = sha256_hex(config_text);
  std::vector<std::filesystem::path> sorted = inputs;
  std::sort(sorted.begin(), sorted.end());
  nlohmann::json files = nlohmann::json::object();
  for (const auto& p : sorted) files[p.string()] = sha256_file(p);
  j["inputs"] = files;
  std::ofstream out(dir / "provenance.json", std::ios::binary);
  if (!out) throw DataError("cannot write provenance.json");
  out << j.dump(2) << '\n';
}

}  // namespace vfp
