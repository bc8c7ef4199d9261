#include "beamkit/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "beamkit/common.hpp"

namespace beamkit {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

}  // namespace

KeyValueConfig KeyValueConfig::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_text(ss.str(), path);
}

KeyValueConfig KeyValueConfig::parse_text(const std::string& text, const std::string& origin) {
  KeyValueConfig cfg;
  cfg.origin_ = origin;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[' && line.back() == ']') {
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw InvalidInput(origin + ":" + std::to_string(line_no) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw InvalidInput(origin + ":" + std::to_string(line_no) + ": empty key");
    if (!section.empty()) key = section + "." + key;
    cfg.entries_[key] = value;
  }
  return cfg;
}

bool KeyValueConfig::has(const std::string& key) const {
  return entries_.find(key) != entries_.end();
}

std::optional<std::string> KeyValueConfig::get(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  touched_[key] = true;
  return it->second;
}

std::string KeyValueConfig::get_string(const std::string& key, const std::string& fallback) const {
  const auto v = get(key);
  return v ? *v : fallback;
}

double KeyValueConfig::get_double(const std::string& key, double fallback) const {
  const auto v = get(key);
  if (!v) return fallback;
  char* end = nullptr;
  const double parsed = std::strtod(v->c_str(), &end);
  if (end == v->c_str() || *end != '\0')
    throw InvalidInput(origin_ + ": key '" + key + "' is not a number: " + *v);
  return parsed;
}

long KeyValueConfig::get_long(const std::string& key, long fallback) const {
  const double d = get_double(key, static_cast<double>(fallback));
  const long l = static_cast<long>(d);
  if (static_cast<double>(l) != d)
    throw InvalidInput(origin_ + ": key '" + key + "' is not an integer");
  return l;
}

bool KeyValueConfig::get_bool(const std::string& key, bool fallback) const {
  const auto v = get(key);
  if (!v) return fallback;
  if (*v == "true" || *v == "1" || *v == "yes") return true;
  if (*v == "false" || *v == "0" || *v == "no") return false;
  throw InvalidInput(origin_ + ": key '" + key + "' is not a boolean: " + *v);
}

void KeyValueConfig::set(const std::string& key, const std::string& value) {
  entries_[key] = value;
}

std::vector<std::string> KeyValueConfig::unused_keys() const {
  std::vector<std::string> out;
  for (const auto& [key, _] : entries_)
    if (touched_.find(key) == touched_.end()) out.push_back(key);
  return out;
}

std::vector<std::string> split_list(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace beamkit
