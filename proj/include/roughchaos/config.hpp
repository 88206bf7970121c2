#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

namespace roughchaos {

/// Flat `key = value` configuration, versioned by a mandatory `schema = 1`.
/// `#` starts a comment. Every getter marks its key as used and records the
/// resolved value (defaults included); `finish` rejects keys nobody asked for.
class Config {
 public:
  static Config parse(const std::string& text);
  static Config load(const std::filesystem::path& file);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  void set(const std::string& key, const std::string& value) { values_[key] = value; }

  std::string get_string(const std::string& key, const std::optional<std::string>& fallback = {});
  double get_double(const std::string& key, std::optional<double> fallback = {});
  std::size_t get_size(const std::string& key, std::optional<std::size_t> fallback = {});
  std::uint64_t get_u64(const std::string& key, std::optional<std::uint64_t> fallback = {});
  bool get_bool(const std::string& key, std::optional<bool> fallback = {});
  std::vector<std::size_t> get_size_list(const std::string& key,
                                         const std::optional<std::vector<std::size_t>>& fallback = {});
  std::vector<double> get_double_list(const std::string& key,
                                      const std::optional<std::vector<double>>& fallback = {});

  /// Value of a key handled outside the experiment (such as the output
  /// directory): marked as used but kept out of the resolved set.
  std::optional<std::string> take_unrecorded(const std::string& key);

  /// Throws ConfigError naming every key that no getter read.
  void finish() const;

  /// Resolved values in key order.
  nlohmann::ordered_json resolved() const;

  /// Git blob SHA-1 of the source text.
  const std::string& content_hash() const noexcept { return hash_; }

 private:
  const std::string* raw(const std::string& key);
  void record(const std::string& key, nlohmann::ordered_json value);

  std::map<std::string, std::string> values_;
  std::set<std::string> used_;
  std::map<std::string, nlohmann::ordered_json> resolved_;
  std::string hash_;
};

/// SHA-1 of "blob <size>\0<content>", lower-case hex.
std::string git_blob_sha1(const std::string& content);

}  // namespace roughchaos
