#include "nexf/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace nexf {
namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos)
    return {};
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

bool valid_token(const std::string& s) {
  if (s.empty())
    return false;
  return std::all_of(s.begin(), s.end(), [](unsigned char c) {
    return std::isalnum(c) || c == '_';
  });
}

} // namespace

Config Config::parse_string(const std::string& text) {
  Config config;
  std::istringstream in(text);
  std::string line, section;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (const auto hash = line.find('#'); hash != std::string::npos)
      line = line.substr(0, hash);
    line = trim(line);
    if (line.empty())
      continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("unterminated section header", line_number);
      section = trim(line.substr(1, line.size() - 2));
      if (!valid_token(section))
        throw ConfigError("invalid section name '" + section + "'", line_number);
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("expected 'key = value'", line_number);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!valid_token(key))
      throw ConfigError("invalid key '" + key + "'", line_number);
    if (section.empty())
      throw ConfigError("key '" + key + "' outside any [section]", line_number);
    const std::string qualified = section + "." + key;
    if (config.values_.count(qualified))
      throw ConfigError("duplicate key '" + qualified + "'", line_number);
    config.values_[qualified] = value;
    config.lines_[qualified] = line_number;
  }
  return config;
}

Config Config::parse_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    throw ConfigError("cannot open config file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_string(text.str());
}

int Config::line_of(const std::string& key) const {
  const auto it = lines_.find(key);
  return it == lines_.end() ? 0 : it->second;
}

const std::string* Config::lookup(const std::string& key) {
  const auto it = values_.find(key);
  if (it == values_.end())
    return nullptr;
  consumed_.insert(key);
  return &it->second;
}

std::string Config::get_string(const std::string& key, const std::string& fallback) {
  const std::string* v = lookup(key);
  return v ? *v : fallback;
}

long Config::get_int(const std::string& key, long fallback) {
  const std::string* v = lookup(key);
  if (!v)
    return fallback;
  std::istringstream in(*v);
  long result;
  char extra;
  if (!(in >> result) || (in >> extra))
    throw ConfigError("key '" + key + "' expects an integer, got '" + *v + "'", line_of(key));
  return result;
}

double Config::get_real(const std::string& key, double fallback) {
  const std::string* v = lookup(key);
  if (!v)
    return fallback;
  std::istringstream in(*v);
  double result;
  char extra;
  if (!(in >> result) || (in >> extra))
    throw ConfigError("key '" + key + "' expects a number, got '" + *v + "'", line_of(key));
  return result;
}

bool Config::get_bool(const std::string& key, bool fallback) {
  const std::string* v = lookup(key);
  if (!v)
    return fallback;
  if (*v == "true" || *v == "1" || *v == "yes" || *v == "on")
    return true;
  if (*v == "false" || *v == "0" || *v == "no" || *v == "off")
    return false;
  throw ConfigError("key '" + key + "' expects a boolean, got '" + *v + "'", line_of(key));
}

std::vector<double> Config::get_reals(const std::string& key,
                                      const std::vector<double>& fallback) {
  const std::string* v = lookup(key);
  if (!v)
    return fallback;
  std::istringstream in(*v);
  std::vector<double> result;
  double x;
  while (in >> x)
    result.push_back(x);
  if (!in.eof() || result.empty())
    throw ConfigError("key '" + key + "' expects numbers, got '" + *v + "'", line_of(key));
  return result;
}

std::vector<int> Config::get_dims(const std::string& key, const std::vector<int>& fallback) {
  const std::string* v = lookup(key);
  if (!v)
    return fallback;
  // "NXxNYxNZ" to match the CLI --dims flag
  std::vector<int> result;
  std::string token;
  std::istringstream in(*v);
  while (std::getline(in, token, 'x')) {
    try {
      result.push_back(std::stoi(token));
    } catch (const std::exception&) {
      throw ConfigError("key '" + key + "' expects dims like 64x64x32, got '" + *v + "'",
                        line_of(key));
    }
  }
  if (result.size() != 3)
    throw ConfigError("key '" + key + "' expects three dims, got '" + *v + "'", line_of(key));
  return result;
}

void Config::set(const std::string& key, const std::string& value) {
  values_[key] = value;
  lines_.emplace(key, 0);
}

void Config::require_all_consumed() const {
  for (const auto& [key, value] : values_)
    if (!consumed_.count(key))
      throw ConfigError("unknown config key '" + key + "'", line_of(key));
}

std::vector<std::pair<std::string, std::string>> Config::entries() const {
  return {values_.begin(), values_.end()};
}

} // namespace nexf
