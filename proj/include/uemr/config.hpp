#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace uemr {

// Flat key-value configuration with dotted namespaces:
//   stats.b = 2000
//   site.lat_deg = -26.7039
// '#' starts a comment; blank lines are skipped. Keys are case-sensitive.
class Config {
 public:
  Config() = default;

  static Config from_file(const std::string& path);
  static Config from_string(std::string_view text);

  bool has(const std::string& key) const { return kv_.count(key) != 0; }
  void set(const std::string& key, std::string value) { kv_[key] = std::move(value); }

  std::string get_string(const std::string& key, std::string def = {}) const;
  double get_double(const std::string& key, double def) const;
  std::int64_t get_int(const std::string& key, std::int64_t def) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t def) const;
  bool get_bool(const std::string& key, bool def) const;
  // comma-separated list of doubles
  std::vector<double> get_double_list(const std::string& key,
                                      std::vector<double> def = {}) const;

  const std::map<std::string, std::string>& entries() const { return kv_; }
  std::string dump() const;

 private:
  std::map<std::string, std::string> kv_;
};

}  // namespace uemr
