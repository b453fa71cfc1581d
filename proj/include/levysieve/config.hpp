#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace levysieve {

/// Flat `key = value` configuration with dotted keys.
///
///   # comment
///   model.name = constant
///   t.grid = 50, 100, 200
///
/// Values may be wrapped in double quotes; lists may be wrapped in [ ].
/// Every accessor records the key as consumed so that leftover (unknown)
/// keys can be reported.
class FlatConfig {
 public:
  static FlatConfig parse(std::istream& in, const std::string& source = "<config>");
  static FlatConfig load(const std::filesystem::path& path);

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  const std::map<std::string, std::string>& entries() const { return values_; }

  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_list(const std::string& key) const;
  std::vector<double> get_list(const std::string& key, std::vector<double> fallback) const;

  /// Keys sharing `prefix` (e.g. "model."), with the prefix stripped.
  std::vector<std::string> keys_with_prefix(const std::string& prefix) const;

  /// Keys never read through an accessor.
  std::vector<std::string> unused_keys() const;

 private:
  std::map<std::string, std::string> values_;
  mutable std::set<std::string> used_;
};

}  // namespace levysieve
