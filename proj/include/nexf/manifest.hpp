#pragma once

#include "nexf/options.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace nexf {

inline constexpr const char* kToolVersion = "0.1.0";

/// FNV-1a 64-bit of a file's bytes, as 16 hex digits.
std::string file_hash(const std::filesystem::path& path);

/// Run provenance: resolved parameters, input hashes, outputs. One per run
/// directory; re-running the recorded command reproduces the outputs
/// bit-exactly.
struct RunManifest {
  std::string command;
  Options options;
  std::vector<std::pair<std::string, std::string>> inputs;  // path, hash
  std::vector<std::string> outputs;

  void add_input(const std::filesystem::path& path);
  void add_output(const std::filesystem::path& path);
  void write(const std::filesystem::path& path) const;
};

} // namespace nexf
