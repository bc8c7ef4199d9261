// config.hpp
// Flat key = value configuration text. Keys may be dotted directly
// (online.alpha_initial = 0.96) or grouped under [section] headers, which
// prefix the keys that follow. '#' starts a comment.

#ifndef BEAMKIT_CONFIG_HPP
#define BEAMKIT_CONFIG_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace beamkit {

class KeyValueConfig {
 public:
  static KeyValueConfig parse_file(const std::string& path);
  static KeyValueConfig parse_text(const std::string& text, const std::string& origin = "<text>");

  bool has(const std::string& key) const;
  std::optional<std::string> get(const std::string& key) const;

  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  long get_long(const std::string& key, long fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;

  void set(const std::string& key, const std::string& value);
  const std::map<std::string, std::string>& entries() const { return entries_; }

  // Keys never read back; lets drivers flag typos instead of ignoring them.
  std::vector<std::string> unused_keys() const;

 private:
  std::map<std::string, std::string> entries_;
  mutable std::map<std::string, bool> touched_;
  std::string origin_;
};

std::vector<std::string> split_list(const std::string& text, char sep = ',');

}  // namespace beamkit

#endif  // BEAMKIT_CONFIG_HPP
