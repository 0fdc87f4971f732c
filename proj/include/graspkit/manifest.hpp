#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace grasp::cli {

std::string sha256_hex(std::string_view data);

// Content hash of a run: command, input file hashes, and seed. Embedded in
// JSON outputs so artifacts can be traced back to their exact inputs.
struct RunManifest {
  std::string command;
  std::vector<std::pair<std::string, std::string>> inputs;  // (label, sha256)
  std::uint64_t seed = 0;

  void add_file(const std::string& label, const std::string& path);
  void add_text(const std::string& label, std::string_view content);
  std::string hash() const;
  std::string to_json() const;
};

}  // namespace grasp::cli
