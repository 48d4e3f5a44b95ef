#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace invdes {

// Flat key = value configuration with optional [section] headers. Keys in a
// section are stored as "section.key". Lines starting with '#' are comments.
class ConfigMap {
 public:
  static ConfigMap parse(const std::string& text);
  static ConfigMap parse_file(const std::string& path);

  bool has(const std::string& key) const;
  std::string get(const std::string& key) const;  // throws listing known keys
  std::string get_or(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key) const;
  double get_double_or(const std::string& key, double fallback) const;
  std::int64_t get_int(const std::string& key) const;
  std::int64_t get_int_or(const std::string& key, std::int64_t fallback) const;
  bool get_bool_or(const std::string& key, bool fallback) const;
  std::vector<double> get_doubles(const std::string& key) const;  // whitespace separated

  void set(const std::string& key, const std::string& value);
  const std::map<std::string, std::string>& entries() const { return kv_; }

  // Rejects keys outside `valid`, naming the offender and listing the
  // accepted keys. Prefix matches ("sim.") accept the whole section.
  void require_known_keys(const std::vector<std::string>& valid) const;

  std::string to_text() const;

 private:
  std::map<std::string, std::string> kv_;
};

std::vector<std::string> split_ws(const std::string& s);
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace invdes
