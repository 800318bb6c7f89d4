#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace nexf {

struct ConfigError : std::runtime_error {
  ConfigError(const std::string& message, int line_number)
      : std::runtime_error(message + " (line " + std::to_string(line_number) + ")"),
        line(line_number) {}
  explicit ConfigError(const std::string& message) : std::runtime_error(message), line(0) {}
  int line;
};

/// Flat `key = value` file with [section] headers, no nesting. Keys are
/// addressed as "section.key". '#' starts a comment.
class Config {
public:
  static Config parse_file(const std::filesystem::path& path);
  static Config parse_string(const std::string& text);

  bool has(const std::string& key) const { return values_.count(key) != 0; }

  std::string get_string(const std::string& key, const std::string& fallback);
  long get_int(const std::string& key, long fallback);
  double get_real(const std::string& key, double fallback);
  bool get_bool(const std::string& key, bool fallback);
  std::vector<double> get_reals(const std::string& key, const std::vector<double>& fallback);
  std::vector<int> get_dims(const std::string& key, const std::vector<int>& fallback);

  /// Set (or override) a value programmatically; marks it consumed-on-read
  /// like any file key.
  void set(const std::string& key, const std::string& value);

  /// Throws if any file key was never read: catches typos and stale keys.
  void require_all_consumed() const;

  /// All keys with values, sorted, for manifests.
  std::vector<std::pair<std::string, std::string>> entries() const;

private:
  int line_of(const std::string& key) const;
  const std::string* lookup(const std::string& key);

  std::map<std::string, std::string> values_;
  std::map<std::string, int> lines_;
  std::set<std::string> consumed_;
};

} // namespace nexf
