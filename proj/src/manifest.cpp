#include "nexf/manifest.hpp"

#include <chrono>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace nexf {

std::string file_hash(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw std::runtime_error("cannot hash missing file " + path.string());
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  char buffer[1 << 16];
  while (in.read(buffer, sizeof(buffer)) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      hash ^= static_cast<unsigned char>(buffer[i]);
      hash *= 0x100000001b3ULL;
    }
  }
  std::ostringstream out;
  out << std::hex << std::setfill('0') << std::setw(16) << hash;
  return out.str();
}

void RunManifest::add_input(const std::filesystem::path& path) {
  inputs.emplace_back(path.string(), file_hash(path));
}

void RunManifest::add_output(const std::filesystem::path& path) {
  outputs.push_back(path.string());
}

void RunManifest::write(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out)
    throw std::runtime_error("cannot write manifest " + path.string());
  const auto now = std::chrono::system_clock::now();
  const std::time_t stamp = std::chrono::system_clock::to_time_t(now);
  out << "tool: nexf " << kToolVersion << '\n';
  out << "command: " << command << '\n';
  out << "timestamp: " << std::put_time(std::gmtime(&stamp), "%FT%TZ") << '\n';
  for (const auto& [file, hash] : inputs)
    out << "input: " << hash << "  " << file << '\n';
  for (const auto& file : outputs)
    out << "output: " << file << '\n';
  out << '\n';
  for (const auto& [key, value] : options.echo())
    out << key << " = " << value << '\n';
}

} // namespace nexf
