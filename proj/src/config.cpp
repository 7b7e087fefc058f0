#include "xmb/config.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "xmb/error.hpp"

namespace xmb {

std::string trim(std::string_view s) {
  const char* ws = " \t\r\n";
  auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(ws);
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    auto end = s.find(',', start);
    if (end == std::string_view::npos) end = s.size();
    auto item = trim(s.substr(start, end - start));
    if (!item.empty()) out.push_back(item);
    start = end + 1;
  }
  return out;
}

double parse_double(std::string_view s, std::string_view what) {
  std::string str(trim(s));
  char* end = nullptr;
  double v = std::strtod(str.c_str(), &end);
  if (str.empty() || end != str.c_str() + str.size())
    throw ConfigError(std::string(what) + ": expected a number, got '" + str + "'");
  return v;
}

std::int64_t parse_int(std::string_view s, std::string_view what) {
  std::string str(trim(s));
  std::int64_t v = 0;
  auto [p, ec] = std::from_chars(str.data(), str.data() + str.size(), v);
  if (str.empty() || ec != std::errc() || p != str.data() + str.size())
    throw ConfigError(std::string(what) + ": expected an integer, got '" + str + "'");
  return v;
}

std::uint64_t parse_u64(std::string_view s, std::string_view what) {
  std::string str(trim(s));
  std::uint64_t v = 0;
  auto [p, ec] = std::from_chars(str.data(), str.data() + str.size(), v);
  if (str.empty() || ec != std::errc() || p != str.data() + str.size())
    throw ConfigError(std::string(what) + ": expected an unsigned integer, got '" + str + "'");
  return v;
}

bool parse_bool(std::string_view s, std::string_view what) {
  std::string str(trim(s));
  if (str == "true" || str == "1" || str == "yes" || str == "on") return true;
  if (str == "false" || str == "0" || str == "no" || str == "off") return false;
  throw ConfigError(std::string(what) + ": expected a boolean, got '" + str + "'");
}

KeyValueConfig KeyValueConfig::parse(std::string_view text, std::string_view source) {
  KeyValueConfig cfg;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError(std::string(source) + ":" + std::to_string(lineno) + ": expected key=value");
    auto key = trim(std::string_view(t).substr(0, eq));
    auto value = trim(std::string_view(t).substr(eq + 1));
    if (key.empty()) throw ConfigError(std::string(source) + ":" + std::to_string(lineno) + ": empty key");
    if (cfg.values_.count(key))
      throw ConfigError(std::string(source) + ":" + std::to_string(lineno) + ": duplicate key '" + key + "'");
    cfg.values_[key] = value;
    cfg.order_.push_back(key);
  }
  return cfg;
}

KeyValueConfig KeyValueConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  auto cfg = parse(ss.str(), path.string());
  cfg.base_dir_ = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
  return cfg;
}

std::optional<std::string> KeyValueConfig::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

std::string KeyValueConfig::get_or(const std::string& key, const std::string& fallback) const {
  return get(key).value_or(fallback);
}

std::string KeyValueConfig::require(const std::string& key) const {
  auto v = get(key);
  if (!v) throw ConfigError("missing required key '" + key + "'");
  return *v;
}

double KeyValueConfig::get_double(const std::string& key, double fallback) const {
  auto v = get(key);
  return v ? parse_double(*v, key) : fallback;
}

std::int64_t KeyValueConfig::get_int(const std::string& key, std::int64_t fallback) const {
  auto v = get(key);
  return v ? parse_int(*v, key) : fallback;
}

std::uint64_t KeyValueConfig::get_u64(const std::string& key, std::uint64_t fallback) const {
  auto v = get(key);
  return v ? parse_u64(*v, key) : fallback;
}

bool KeyValueConfig::get_bool(const std::string& key, bool fallback) const {
  auto v = get(key);
  return v ? parse_bool(*v, key) : fallback;
}

std::vector<std::string> KeyValueConfig::get_list(const std::string& key) const {
  auto v = get(key);
  return v ? split_list(*v) : std::vector<std::string>{};
}

void KeyValueConfig::set(const std::string& key, const std::string& value) {
  if (!values_.count(key)) order_.push_back(key);
  values_[key] = value;
}

std::vector<std::pair<std::string, std::string>> KeyValueConfig::section(const std::string& prefix) const {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& k : order_)
    if (k.rfind(prefix, 0) == 0) out.emplace_back(k.substr(prefix.size()), values_.at(k));
  return out;
}

std::filesystem::path KeyValueConfig::resolve_path(const std::string& value) const {
  std::filesystem::path p(value);
  if (p.is_absolute()) return p;
  return base_dir_ / p;
}

}  // namespace xmb
