#pragma once

#include <chrono>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

namespace cli {

std::string sha256_file(const std::filesystem::path& path);

// Collects the files a command writes into its output directory and emits
// manifest.json listing each with its SHA-256.
class RunManifest {
 public:
  RunManifest(std::filesystem::path dir, std::string command, nlohmann::ordered_json config);

  const std::filesystem::path& dir() const { return dir_; }
  // Path for a new output file; registers it for checksumming.
  std::string output(const std::string& name);
  void set_parameters(nlohmann::ordered_json p) { parameters_ = std::move(p); }
  void write();

 private:
  std::filesystem::path dir_;
  std::string command_;
  nlohmann::ordered_json config_;
  nlohmann::ordered_json parameters_;
  std::vector<std::string> outputs_;
  std::chrono::system_clock::time_point started_;
  std::chrono::steady_clock::time_point clock_;
};

struct VerifyResult {
  std::size_t checked = 0;
  std::vector<std::string> problems;
};

VerifyResult verify_manifest(const std::filesystem::path& dir);

}  // namespace cli
