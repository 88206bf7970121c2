#include "roughchaos/config.hpp"

#include <openssl/evp.h>

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "roughchaos/errors.hpp"

namespace roughchaos {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(s);
  while (std::getline(ss, cell, ',')) {
    cell = trim(cell);
    if (!cell.empty()) out.push_back(cell);
  }
  return out;
}

double to_double(const std::string& key, const std::string& text) {
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(text.c_str(), &end);
  if (text.empty() || *end != '\0' || errno == ERANGE)
    throw ConfigError("key '" + key + "': expected a number, got '" + text + "'");
  return v;
}

std::uint64_t to_u64(const std::string& key, const std::string& text) {
  char* end = nullptr;
  errno = 0;
  if (text.empty() || text[0] == '-') throw ConfigError("key '" + key + "': expected an unsigned integer");
  const unsigned long long v = std::strtoull(text.c_str(), &end, 10);
  if (*end != '\0' || errno == ERANGE)
    throw ConfigError("key '" + key + "': expected an unsigned integer, got '" + text + "'");
  return v;
}

}  // namespace

Config Config::parse(const std::string& text) {
  Config cfg;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
    if (cfg.values_.count(key)) throw ConfigError("duplicate key '" + key + "'");
    cfg.values_[key] = value;
  }
  if (!cfg.has("schema")) throw ConfigError("missing 'schema = 1'");
  if (cfg.get_size("schema") != 1) throw ConfigError("unsupported schema version");
  cfg.hash_ = git_blob_sha1(text);
  return cfg;
}

Config Config::load(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ConfigError("cannot read config " + file.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

const std::string* Config::raw(const std::string& key) {
  used_.insert(key);
  const auto it = values_.find(key);
  return it == values_.end() ? nullptr : &it->second;
}

std::optional<std::string> Config::take_unrecorded(const std::string& key) {
  const std::string* v = raw(key);
  return v ? std::optional<std::string>(*v) : std::nullopt;
}

void Config::record(const std::string& key, nlohmann::ordered_json value) {
  resolved_[key] = std::move(value);
}

std::string Config::get_string(const std::string& key, const std::optional<std::string>& fallback) {
  const std::string* v = raw(key);
  if (!v && !fallback) throw ConfigError("missing required key '" + key + "'");
  std::string out = v ? *v : *fallback;
  record(key, out);
  return out;
}

double Config::get_double(const std::string& key, std::optional<double> fallback) {
  const std::string* v = raw(key);
  if (!v && !fallback) throw ConfigError("missing required key '" + key + "'");
  const double out = v ? to_double(key, *v) : *fallback;
  record(key, out);
  return out;
}

std::size_t Config::get_size(const std::string& key, std::optional<std::size_t> fallback) {
  const std::string* v = raw(key);
  if (!v && !fallback) throw ConfigError("missing required key '" + key + "'");
  const std::size_t out = v ? static_cast<std::size_t>(to_u64(key, *v)) : *fallback;
  record(key, out);
  return out;
}

std::uint64_t Config::get_u64(const std::string& key, std::optional<std::uint64_t> fallback) {
  const std::string* v = raw(key);
  if (!v && !fallback) throw ConfigError("missing required key '" + key + "'");
  const std::uint64_t out = v ? to_u64(key, *v) : *fallback;
  record(key, out);
  return out;
}

bool Config::get_bool(const std::string& key, std::optional<bool> fallback) {
  const std::string* v = raw(key);
  if (!v && !fallback) throw ConfigError("missing required key '" + key + "'");
  bool out;
  if (!v)
    out = *fallback;
  else if (*v == "true" || *v == "1")
    out = true;
  else if (*v == "false" || *v == "0")
    out = false;
  else
    throw ConfigError("key '" + key + "': expected true or false");
  record(key, out);
  return out;
}

std::vector<std::size_t> Config::get_size_list(const std::string& key,
                                               const std::optional<std::vector<std::size_t>>& fallback) {
  const std::string* v = raw(key);
  if (!v && !fallback) throw ConfigError("missing required key '" + key + "'");
  std::vector<std::size_t> out;
  if (v)
    for (const auto& cell : split_list(*v)) out.push_back(static_cast<std::size_t>(to_u64(key, cell)));
  else
    out = *fallback;
  if (out.empty()) throw ConfigError("key '" + key + "': empty list");
  record(key, out);
  return out;
}

std::vector<double> Config::get_double_list(const std::string& key,
                                            const std::optional<std::vector<double>>& fallback) {
  const std::string* v = raw(key);
  if (!v && !fallback) throw ConfigError("missing required key '" + key + "'");
  std::vector<double> out;
  if (v)
    for (const auto& cell : split_list(*v)) out.push_back(to_double(key, cell));
  else
    out = *fallback;
  if (out.empty()) throw ConfigError("key '" + key + "': empty list");
  record(key, out);
  return out;
}

void Config::finish() const {
  std::string unknown;
  for (const auto& [key, value] : values_)
    if (!used_.count(key)) unknown += (unknown.empty() ? "" : ", ") + key;
  if (!unknown.empty()) throw ConfigError("unknown config keys: " + unknown);
}

nlohmann::ordered_json Config::resolved() const {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& [key, value] : resolved_) j[key] = value;
  return j;
}

std::string git_blob_sha1(const std::string& content) {
  const std::string blob = "blob " + std::to_string(content.size()) + std::string(1, '\0') + content;
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(blob.data(), blob.size(), digest, &len, EVP_sha1(), nullptr) != 1)
    throw std::runtime_error("SHA-1 digest failed");
  std::string hex;
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", digest[i]);
    hex += buf;
  }
  return hex;
}

}  // namespace roughchaos
