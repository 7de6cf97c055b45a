#include "uemr/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace uemr {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
    s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

}  // namespace

Config Config::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_string(ss.str());
}

Config Config::from_string(std::string_view text) {
  Config cfg;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const std::size_t nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);

    const std::size_t hash = line.find('#');
    if (hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos)
      throw std::runtime_error("config line " + std::to_string(line_no) +
                               ": expected 'key = value'");
    const std::string key{trim(line.substr(0, eq))};
    const std::string val{trim(line.substr(eq + 1))};
    if (key.empty())
      throw std::runtime_error("config line " + std::to_string(line_no) +
                               ": empty key");
    cfg.kv_[key] = val;
  }
  return cfg;
}

std::string Config::get_string(const std::string& key, std::string def) const {
  const auto it = kv_.find(key);
  return it == kv_.end() ? def : it->second;
}

double Config::get_double(const std::string& key, double def) const {
  const auto it = kv_.find(key);
  if (it == kv_.end()) return def;
  char* end = nullptr;
  const double v = std::strtod(it->second.c_str(), &end);
  if (end == it->second.c_str() || *end != '\0')
    throw std::runtime_error("config key " + key + ": not a number: " + it->second);
  return v;
}

std::int64_t Config::get_int(const std::string& key, std::int64_t def) const {
  const auto it = kv_.find(key);
  if (it == kv_.end()) return def;
  char* end = nullptr;
  const long long v = std::strtoll(it->second.c_str(), &end, 10);
  if (end == it->second.c_str() || *end != '\0')
    throw std::runtime_error("config key " + key + ": not an integer: " + it->second);
  return v;
}

std::uint64_t Config::get_u64(const std::string& key, std::uint64_t def) const {
  const auto it = kv_.find(key);
  if (it == kv_.end()) return def;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(it->second.c_str(), &end, 10);
  if (end == it->second.c_str() || *end != '\0')
    throw std::runtime_error("config key " + key + ": not an integer: " + it->second);
  return v;
}

bool Config::get_bool(const std::string& key, bool def) const {
  const auto it = kv_.find(key);
  if (it == kv_.end()) return def;
  const std::string& v = it->second;
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw std::runtime_error("config key " + key + ": not a boolean: " + v);
}

std::vector<double> Config::get_double_list(const std::string& key,
                                            std::vector<double> def) const {
  const auto it = kv_.find(key);
  if (it == kv_.end()) return def;
  std::vector<double> out;
  std::string_view rest = it->second;
  while (!rest.empty()) {
    const std::size_t comma = rest.find(',');
    const std::string item{trim(rest.substr(0, comma))};
    rest.remove_prefix(comma == std::string_view::npos ? rest.size() : comma + 1);
    if (item.empty()) continue;
    char* end = nullptr;
    const double v = std::strtod(item.c_str(), &end);
    if (end == item.c_str() || *end != '\0')
      throw std::runtime_error("config key " + key + ": bad list item: " + item);
    out.push_back(v);
  }
  return out;
}

std::string Config::dump() const {
  std::ostringstream ss;
  for (const auto& [k, v] : kv_) ss << k << " = " << v << "\n";
  return ss.str();
}

}  // namespace uemr
