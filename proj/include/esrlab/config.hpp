#pragma once

#include "esrlab/spin_algebra.hpp"

#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace esrlab {

/// Flat key-value document with [section] headers and '#' comments.
/// Every lookup marks the key as known; reject_unread() then turns any
/// leftover key into a ConfigError naming its line.
class RunConfig {
 public:
  static RunConfig parse(std::string_view text, const std::string& source = "<config>");
  static RunConfig load(const std::filesystem::path& path);

  bool has(const std::string& section, const std::string& key) const;
  bool has_section(const std::string& section) const;

  std::string get_string(const std::string& section, const std::string& key) const;
  std::string get_string(const std::string& section, const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& section, const std::string& key) const;
  double get_double(const std::string& section, const std::string& key, double fallback) const;
  std::optional<double> find_double(const std::string& section, const std::string& key) const;
  long long get_int(const std::string& section, const std::string& key) const;
  long long get_int(const std::string& section, const std::string& key, long long fallback) const;
  bool get_bool(const std::string& section, const std::string& key, bool fallback) const;
  HalfInteger get_half_integer(const std::string& section, const std::string& key) const;
  std::vector<std::string> get_list(const std::string& section, const std::string& key) const;
  std::vector<double> get_double_list(const std::string& section, const std::string& key) const;

  void reject_unread() const;

  /// Normalized echo: sections and keys in file order, "key = value".
  std::string echo() const;
  const std::string& source() const { return source_; }
  std::filesystem::path base_directory() const { return base_; }
  std::filesystem::path resolve_path(const std::string& section, const std::string& key) const;

 private:
  struct Entry {
    std::string section;
    std::string key;
    std::string value;
    std::size_t line;
  };
  const Entry* find(const std::string& section, const std::string& key) const;
  const Entry& require(const std::string& section, const std::string& key) const;
  [[noreturn]] void fail(const Entry& e, const std::string& what) const;

  std::string source_;
  std::filesystem::path base_;
  std::vector<Entry> entries_;
  std::vector<std::string> sections_;
  mutable std::set<std::pair<std::string, std::string>> read_;
};

}  // namespace esrlab
