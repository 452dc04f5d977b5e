#include "prime/keyvalue.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>

#include "prime/errors.hpp"

namespace prime {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_list(std::string_view s, char sep) {
  std::vector<std::string> out;
  if (trim(s).empty()) return out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? s.npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) throw Error(ErrorCode::InvalidConfig, "cannot format double");
  return std::string(buf, ptr);
}

double parse_double(std::string_view s) {
  const std::string t = trim(s);
  double value = 0.0;
  const char* begin = t.data();
  const char* end = t.data() + t.size();
  if (!t.empty() && *begin == '+') ++begin;
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (t.empty() || ec != std::errc() || ptr != end) {
    throw Error(ErrorCode::InvalidConfig, "not a number: '" + t + "'");
  }
  return value;
}

std::int64_t parse_int(std::string_view s) {
  const std::string t = trim(s);
  std::int64_t value = 0;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
    throw Error(ErrorCode::InvalidConfig, "not an integer: '" + t + "'");
  }
  return value;
}

std::uint64_t parse_uint(std::string_view s) {
  const std::string t = trim(s);
  std::uint64_t value = 0;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
    throw Error(ErrorCode::InvalidConfig, "not a non-negative integer: '" + t + "'");
  }
  return value;
}

KeyValueFile KeyValueFile::parse(std::istream& in, std::string_view source) {
  KeyValueFile file;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::InvalidConfig, std::string(source) + ":" + std::to_string(lineno) +
                                                ": expected 'key = value'");
    }
    std::string key = trim(std::string_view(t).substr(0, eq));
    if (key.empty()) {
      throw Error(ErrorCode::InvalidConfig,
                  std::string(source) + ":" + std::to_string(lineno) + ": empty key");
    }
    file.entries_.emplace_back(std::move(key), trim(std::string_view(t).substr(eq + 1)));
  }
  return file;
}

KeyValueFile KeyValueFile::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidConfig, "cannot open '" + path + "'");
  return parse(in, path);
}

void KeyValueFile::set(std::string key, std::string value) {
  bool found = false;
  for (auto& [k, v] : entries_) {
    if (k == key) {
      v = value;
      found = true;
    }
  }
  if (!found) entries_.emplace_back(std::move(key), std::move(value));
}

std::optional<std::string> KeyValueFile::get(std::string_view key) const {
  for (auto it = entries_.rbegin(); it != entries_.rend(); ++it) {
    if (it->first == key) return it->second;
  }
  return std::nullopt;
}

std::string KeyValueFile::require(std::string_view key) const {
  auto v = get(key);
  if (!v) throw Error(ErrorCode::InvalidConfig, "missing key '" + std::string(key) + "'");
  return *v;
}

std::vector<std::string> KeyValueFile::unknown_keys(const std::vector<std::string>& allowed) const {
  std::vector<std::string> out;
  for (const auto& [k, v] : entries_) {
    if (std::find(allowed.begin(), allowed.end(), k) == allowed.end() &&
        std::find(out.begin(), out.end(), k) == out.end()) {
      out.push_back(k);
    }
  }
  return out;
}

void KeyValueFile::write(std::ostream& out) const {
  for (const auto& [k, v] : entries_) out << k << " = " << v << '\n';
}

}  // namespace prime
