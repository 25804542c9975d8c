#include "manifest.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <memory>
#include <stdexcept>

#include "photonshape/photonshape.h"

namespace cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string() + " for checksumming");
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 initialisation failed");
  }
  std::array<char, 1 << 16> buf;
  while (in) {
    in.read(buf.data(), buf.size());
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  std::array<unsigned char, EVP_MAX_MD_SIZE> md;
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), md.data(), &len);
  std::string hex;
  hex.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    char b[3];
    std::snprintf(b, sizeof b, "%02x", md[i]);
    hex += b;
  }
  return hex;
}

RunManifest::RunManifest(fs::path dir, std::string command, json config)
    : dir_(std::move(dir)),
      command_(std::move(command)),
      config_(std::move(config)),
      started_(std::chrono::system_clock::now()),
      clock_(std::chrono::steady_clock::now()) {
  fs::create_directories(dir_);
}

std::string RunManifest::output(const std::string& name) {
  if (std::find(outputs_.begin(), outputs_.end(), name) == outputs_.end()) outputs_.push_back(name);
  return (dir_ / name).string();
}

void RunManifest::write() {
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - clock_).count();
  const std::time_t t = std::chrono::system_clock::to_time_t(started_);
  std::tm utc{};
  gmtime_r(&t, &utc);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", &utc);

  json files = json::array();
  for (const auto& name : outputs_) {
    const fs::path p = dir_ / name;
    if (!fs::exists(p)) throw std::runtime_error("declared output " + name + " was not written");
    files.push_back({{"file", name}, {"bytes", fs::file_size(p)}, {"sha256", sha256_file(p)}});
  }
  json m;
  m["schema"] = "photonshape.run-manifest/1";
  m["toolkit"] = "photonshape";
  m["version"] = ps_version();
  m["command"] = command_;
  m["started_utc"] = stamp;
  m["wall_clock_s"] = wall;
  m["config"] = config_;
  m["parameters"] = parameters_;
  m["outputs"] = files;
  std::ofstream out(dir_ / "manifest.json");
  out << m.dump(2) << '\n';
  if (!out) throw std::runtime_error("failed writing manifest.json");
}

VerifyResult verify_manifest(const fs::path& dir) {
  VerifyResult r;
  std::ifstream in(dir / "manifest.json");
  if (!in) {
    r.problems.push_back("manifest.json missing");
    return r;
  }
  json m;
  try {
    m = json::parse(in);
  } catch (const json::parse_error& e) {
    r.problems.push_back(std::string("manifest.json unreadable: ") + e.what());
    return r;
  }
  for (const auto& f : m.value("outputs", json::array())) {
    const std::string name = f.at("file").get<std::string>();
    const fs::path p = dir / name;
    ++r.checked;
    if (!fs::exists(p)) {
      r.problems.push_back(name + ": missing");
    } else if (sha256_file(p) != f.at("sha256").get<std::string>()) {
      r.problems.push_back(name + ": checksum mismatch");
    }
  }
  return r;
}

}  // namespace cli
