#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace xmb {

/// Flat key=value configuration.
///
/// One entry per line: `key = value`. Leading/trailing blanks around key and
/// value are trimmed; lines that are empty or start with '#' are ignored.
/// Keys are dotted section paths (corpus.path, clf.lr.lambda, ...). A repeated
/// key is an error. Lists are comma-separated values.
class KeyValueConfig {
 public:
  KeyValueConfig() = default;

  static KeyValueConfig parse(std::string_view text, std::string_view source = "<config>");
  static KeyValueConfig load(const std::filesystem::path& path);

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  std::optional<std::string> get(const std::string& key) const;
  std::string get_or(const std::string& key, const std::string& fallback) const;
  std::string require(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<std::string> get_list(const std::string& key) const;

  void set(const std::string& key, const std::string& value);

  // Entries whose key starts with prefix, prefix stripped, in file order.
  std::vector<std::pair<std::string, std::string>> section(const std::string& prefix) const;
  const std::vector<std::string>& keys() const { return order_; }

  // Directory used to resolve relative paths (the config file's directory).
  const std::filesystem::path& base_dir() const { return base_dir_; }
  std::filesystem::path resolve_path(const std::string& value) const;

 private:
  std::map<std::string, std::string> values_;
  std::vector<std::string> order_;
  std::filesystem::path base_dir_ = ".";
};

std::vector<std::string> split_list(std::string_view s);
std::string trim(std::string_view s);
double parse_double(std::string_view s, std::string_view what);
std::int64_t parse_int(std::string_view s, std::string_view what);
std::uint64_t parse_u64(std::string_view s, std::string_view what);
bool parse_bool(std::string_view s, std::string_view what);

}  // namespace xmb
