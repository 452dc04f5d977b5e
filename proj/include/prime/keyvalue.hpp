#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace prime {

/// Ordered `key = value` records. Blank lines and lines starting with '#'
/// are ignored; later duplicates override earlier ones on lookup.
class KeyValueFile {
 public:
  KeyValueFile() = default;

  static KeyValueFile parse(std::istream& in, std::string_view source = "<stream>");
  static KeyValueFile load(const std::string& path);

  /// Replaces every existing entry for `key`, or appends a new one.
  void set(std::string key, std::string value);
  std::optional<std::string> get(std::string_view key) const;
  std::string require(std::string_view key) const;
  bool has(std::string_view key) const { return get(key).has_value(); }

  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }

  /// Keys not present in `allowed`, in file order.
  std::vector<std::string> unknown_keys(const std::vector<std::string>& allowed) const;

  void write(std::ostream& out) const;

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

std::string trim(std::string_view s);
std::vector<std::string> split_list(std::string_view s, char sep = ',');

/// Shortest decimal representation that round-trips exactly.
std::string format_double(double value);
double parse_double(std::string_view s);
std::int64_t parse_int(std::string_view s);
std::uint64_t parse_uint(std::string_view s);

}  // namespace prime
