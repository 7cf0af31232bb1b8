#include "manifest.hpp"

#include <array>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <memory>

#include <openssl/evp.h>

#include "vcrit/errors.hpp"

namespace vcrit::app {

namespace {

class Sha256 {
 public:
  Sha256() : ctx_(EVP_MD_CTX_new(), &EVP_MD_CTX_free) {
    if (!ctx_ || EVP_DigestInit_ex(ctx_.get(), EVP_sha256(), nullptr) != 1) {
      throw IoError("sha256: digest initialisation failed");
    }
  }
  void update(const char* data, std::size_t n) {
    if (EVP_DigestUpdate(ctx_.get(), data, n) != 1) throw IoError("sha256: update failed");
  }
  std::string hex() {
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    if (EVP_DigestFinal_ex(ctx_.get(), md.data(), &len) != 1) throw IoError("sha256: final failed");
    static constexpr char digits[] = "0123456789abcdef";
    std::string s;
    for (unsigned int i = 0; i < len; ++i) {
      s += digits[md[i] >> 4];
      s += digits[md[i] & 0xf];
    }
    return s;
  }

 private:
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx_;
};

std::string relative_name(const std::filesystem::path& p, const std::filesystem::path& base) {
  std::error_code ec;
  const auto rel = std::filesystem::relative(p, base, ec);
  if (ec || rel.empty() || rel.native().starts_with("..")) return p.string();
  return rel.generic_string();
}

}  // namespace

std::string sha256_bytes(const std::string& bytes) {
  Sha256 h;
  h.update(bytes.data(), bytes.size());
  return h.hex();
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  Sha256 h;
  std::array<char, 1 << 16> buf{};
  while (in) {
    in.read(buf.data(), buf.size());
    if (in.gcount() > 0) h.update(buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  if (in.bad()) throw IoError("read error on " + path.string());
  return h.hex();
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

RunManifest::RunManifest(std::string command, const nlohmann::json& config, std::uint64_t seed,
                         unsigned threads)
    : command_(std::move(command)), started_(utc_timestamp()), config_(config), seed_(seed),
      threads_(threads) {}

void RunManifest::add_input(const std::filesystem::path& path) { inputs_.push_back(path); }
void RunManifest::add_output(const std::filesystem::path& path) { outputs_.push_back(path); }
void RunManifest::note(const std::string& key, nlohmann::json value) { notes_[key] = std::move(value); }

nlohmann::json RunManifest::to_json(const std::filesystem::path& base) const {
  auto digests = [&](const std::vector<std::filesystem::path>& files) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& f : files) {
      arr.push_back({{"path", relative_name(f, base)},
                     {"sha256", sha256_file(f)},
                     {"bytes", std::filesystem::file_size(f)}});
    }
    return arr;
  };
  nlohmann::json j;
  j["command"] = command_;
  j["started"] = started_;
  j["finished"] = utc_timestamp();
  j["tool_version"] = kToolVersion;
  j["config"] = config_;
  j["config_sha256"] = sha256_bytes(config_.dump());
  j["seed"] = seed_;
  j["threads"] = threads_;
  j["inputs"] = digests(inputs_);
  j["outputs"] = digests(outputs_);
  if (!notes_.empty()) j["notes"] = notes_;
  return j;
}

void RunManifest::append_to(const std::filesystem::path& out_dir) const {
  const auto line = to_json(out_dir).dump();
  const auto path = out_dir / "manifest.jsonl";
  std::ofstream out(path, std::ios::app);
  if (!out) throw IoError("cannot append to " + path.string());
  out << line << '\n';
  if (!out) throw IoError("write error on " + path.string());
}

}  // namespace vcrit::app
