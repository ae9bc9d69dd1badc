#include "esrlab/config.hpp"

#include "esrlab/error.hpp"
#include "esrlab/io.hpp"
#include "esrlab/text_format.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace esrlab {

RunConfig RunConfig::parse(std::string_view text_in, const std::string& source) {
  RunConfig cfg;
  cfg.source_ = source;
  std::istringstream in{std::string(text_in)};
  std::string raw, section;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = text::trim(line);
    if (line.empty()) continue;
    const std::string at = source + ":" + std::to_string(line_no) + ": ";
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(at + "unterminated section header");
      section = std::string(text::trim(line.substr(1, line.size() - 2)));
      if (section.empty()) throw ConfigError(at + "empty section name");
      if (std::find(cfg.sections_.begin(), cfg.sections_.end(), section) != cfg.sections_.end())
        throw ConfigError(at + "duplicate section [" + section + "]");
      cfg.sections_.push_back(section);
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError(at + "expected 'key = value'");
    if (section.empty()) throw ConfigError(at + "key outside of any [section]");
    std::string key(text::trim(line.substr(0, eq)));
    std::string value(text::trim(line.substr(eq + 1)));
    if (key.empty()) throw ConfigError(at + "empty key");
    if (cfg.find(section, key)) throw ConfigError(at + "duplicate key '" + key + "' in [" + section + "]");
    cfg.entries_.push_back({section, std::move(key), std::move(value), line_no});
  }
  return cfg;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::string contents;
  try {
    contents = io::read_file(path);
  } catch (const DataError&) {
    throw ConfigError("cannot open config '" + path.string() + "'");
  }
  RunConfig cfg = parse(contents, path.string());
  cfg.base_ = path.parent_path();
  return cfg;
}

const RunConfig::Entry* RunConfig::find(const std::string& section, const std::string& key) const {
  for (const auto& e : entries_)
    if (e.section == section && e.key == key) return &e;
  return nullptr;
}

const RunConfig::Entry& RunConfig::require(const std::string& section, const std::string& key) const {
  read_.insert({section, key});
  const Entry* e = find(section, key);
  if (!e) throw ConfigError(source_ + ": missing required key '" + key + "' in [" + section + "]");
  return *e;
}

void RunConfig::fail(const Entry& e, const std::string& what) const {
  throw ConfigError(source_ + ":" + std::to_string(e.line) + ": key '" + e.key + "': " + what);
}

bool RunConfig::has(const std::string& section, const std::string& key) const {
  read_.insert({section, key});
  return find(section, key) != nullptr;
}

bool RunConfig::has_section(const std::string& section) const {
  return std::find(sections_.begin(), sections_.end(), section) != sections_.end();
}

std::string RunConfig::get_string(const std::string& section, const std::string& key) const {
  return require(section, key).value;
}

std::string RunConfig::get_string(const std::string& section, const std::string& key,
                                  const std::string& fallback) const {
  return has(section, key) ? get_string(section, key) : fallback;
}

double RunConfig::get_double(const std::string& section, const std::string& key) const {
  const Entry& e = require(section, key);
  double v = 0.0;
  try {
    v = text::parse_double(e.value);
  } catch (const std::invalid_argument&) {
    fail(e, "not a number: '" + e.value + "'");
  }
  if (!std::isfinite(v)) fail(e, "must be finite");
  return v;
}

double RunConfig::get_double(const std::string& section, const std::string& key, double fallback) const {
  return has(section, key) ? get_double(section, key) : fallback;
}

std::optional<double> RunConfig::find_double(const std::string& section, const std::string& key) const {
  if (!has(section, key)) return std::nullopt;
  return get_double(section, key);
}

long long RunConfig::get_int(const std::string& section, const std::string& key) const {
  const Entry& e = require(section, key);
  try {
    return text::parse_integer(e.value);
  } catch (const std::invalid_argument&) {
    fail(e, "not an integer: '" + e.value + "'");
  }
}

long long RunConfig::get_int(const std::string& section, const std::string& key, long long fallback) const {
  return has(section, key) ? get_int(section, key) : fallback;
}

bool RunConfig::get_bool(const std::string& section, const std::string& key, bool fallback) const {
  if (!has(section, key)) return fallback;
  const Entry& e = require(section, key);
  if (e.value == "true") return true;
  if (e.value == "false") return false;
  fail(e, "expected true or false, got '" + e.value + "'");
}

HalfInteger RunConfig::get_half_integer(const std::string& section, const std::string& key) const {
  const Entry& e = require(section, key);
  try {
    return HalfInteger::parse(e.value);
  } catch (const std::invalid_argument&) {
    fail(e, "not a non-negative integer or half-integer: '" + e.value + "'");
  }
}

std::vector<std::string> RunConfig::get_list(const std::string& section, const std::string& key) const {
  const Entry& e = require(section, key);
  std::vector<std::string> out;
  for (auto item : text::split(e.value, ',')) {
    item = text::trim(item);
    if (item.empty()) fail(e, "empty list item");
    out.emplace_back(item);
  }
  return out;
}

std::vector<double> RunConfig::get_double_list(const std::string& section, const std::string& key) const {
  const Entry& e = require(section, key);
  std::vector<double> out;
  for (const auto& item : get_list(section, key)) {
    try {
      out.push_back(text::parse_double(item));
    } catch (const std::invalid_argument&) {
      fail(e, "not a number: '" + item + "'");
    }
    if (!std::isfinite(out.back())) fail(e, "list values must be finite");
  }
  return out;
}

void RunConfig::reject_unread() const {
  for (const auto& e : entries_)
    if (!read_.count({e.section, e.key}))
      throw ConfigError(source_ + ":" + std::to_string(e.line) + ": unknown key '" + e.key + "' in [" + e.section +
                        "]");
  for (const auto& s : sections_) {
    const bool used = std::any_of(read_.begin(), read_.end(), [&](const auto& k) { return k.first == s; });
    if (!used) throw ConfigError(source_ + ": unknown section [" + s + "]");
  }
}

std::string RunConfig::echo() const {
  std::string out;
  for (const auto& s : sections_) {
    out += "[" + s + "]\n";
    for (const auto& e : entries_)
      if (e.section == s) out += e.key + " = " + e.value + "\n";
  }
  return out;
}

std::filesystem::path RunConfig::resolve_path(const std::string& section, const std::string& key) const {
  const std::filesystem::path p = get_string(section, key);
  return p.is_absolute() ? p : base_ / p;
}

}  // namespace esrlab
