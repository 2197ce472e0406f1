// SPDX-License-Identifier: Apache-2.0
//
// Line-oriented `key = value` run configuration. '#' starts a comment,
// blank lines are ignored, keys must come from the command's known set.
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>

namespace rtlocr {

class RunConfig {
 public:
  explicit RunConfig(std::set<std::string> known_keys) : known_(std::move(known_keys)) {}

  /// Throws InvalidConfig with the offending line number.
  void parse(std::string_view text, std::string_view origin = "config");
  void load(const std::filesystem::path& path);

  void set(const std::string& key, std::string value);  // throws InvalidConfig on unknown keys
  bool has(const std::string& key) const { return values_.count(key) != 0; }
  const std::map<std::string, std::string>& values() const { return values_; }

  std::optional<std::string> get(const std::string& key) const;
  std::string get_or(const std::string& key, const std::string& fallback) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  std::uint64_t get_uint(const std::string& key, std::uint64_t fallback) const;
  double get_double(const std::string& key, double fallback) const;

  /// Sorted, parseable by parse().
  std::string to_string() const;

 private:
  std::set<std::string> known_;
  std::map<std::string, std::string> values_;
};

}  // namespace rtlocr
