// SPDX-License-Identifier: Apache-2.0
#include "rtlocr/run_config.hpp"

#include <charconv>
#include <fstream>
#include <iterator>
#include <sstream>

#include "rtlocr/error.hpp"

namespace rtlocr {

namespace {

std::string_view strip(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const char* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) {
    throw Error(Errc::kInvalidConfig, "'" + key + "' expects a number, got '" + value + "'");
  }
  return out;
}

}  // namespace

void RunConfig::parse(std::string_view text, std::string_view origin) {
  std::istringstream in{std::string(text)};
  std::string raw;
  int number = 0;
  while (std::getline(in, raw)) {
    ++number;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = strip(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = std::string(origin) + ":" + std::to_string(number);
    if (eq == std::string_view::npos) throw Error(Errc::kInvalidConfig, where + ": expected 'key = value'");
    const std::string key(strip(line.substr(0, eq)));
    if (key.empty()) throw Error(Errc::kInvalidConfig, where + ": empty key");
    if (!known_.count(key)) throw Error(Errc::kInvalidConfig, where + ": unknown key '" + key + "'");
    values_[key] = std::string(strip(line.substr(eq + 1)));
  }
}

void RunConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::kIoFailure, "cannot read config " + path.string());
  parse(std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()), path.string());
}

void RunConfig::set(const std::string& key, std::string value) {
  if (!known_.count(key)) throw Error(Errc::kInvalidConfig, "unknown key '" + key + "'");
  values_[key] = std::move(value);
}

std::optional<std::string> RunConfig::get(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

std::string RunConfig::get_or(const std::string& key, const std::string& fallback) const {
  return get(key).value_or(fallback);
}

std::int64_t RunConfig::get_int(const std::string& key, std::int64_t fallback) const {
  const auto v = get(key);
  return v ? parse_number<std::int64_t>(key, *v) : fallback;
}

std::uint64_t RunConfig::get_uint(const std::string& key, std::uint64_t fallback) const {
  const auto v = get(key);
  return v ? parse_number<std::uint64_t>(key, *v) : fallback;
}

double RunConfig::get_double(const std::string& key, double fallback) const {
  const auto v = get(key);
  if (!v) return fallback;
  try {
    size_t used = 0;
    const double d = std::stod(*v, &used);
    if (used != v->size()) throw std::invalid_argument("trailing");
    return d;
  } catch (const std::exception&) {
    throw Error(Errc::kInvalidConfig, "'" + key + "' expects a number, got '" + *v + "'");
  }
}

std::string RunConfig::to_string() const {
  std::string out;
  for (const auto& [k, v] : values_) out += k + " = " + v + "\n";
  return out;
}

}  // namespace rtlocr
