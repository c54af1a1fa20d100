#include "mcem/cli/config.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace mcem::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

bool valid_name(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '-')) return false;
  }
  return true;
}

/// Removes quotes; validates list brackets.
std::string normalize_value(const std::string& raw, const std::string& origin) {
  const std::string v = trim(raw);
  if (v.empty()) throw ConfigError(origin + ": missing value");
  if (v.front() == '"') {
    if (v.size() < 2 || v.back() != '"') throw ConfigError(origin + ": unterminated string");
    return v.substr(1, v.size() - 2);
  }
  if (v.front() == '[' && v.back() != ']') throw ConfigError(origin + ": unterminated list");
  return v;
}

}  // namespace

std::string format_scalar(Scalar v) {
  // Shortest representation that round-trips.
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::vector<std::string> split_list(const std::string& value) {
  std::string inner = trim(value);
  if (!inner.empty() && inner.front() == '[') inner = inner.substr(1, inner.size() - 2);
  std::vector<std::string> out;
  std::stringstream ss(inner);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.size() >= 2 && item.front() == '"' && item.back() == '"') item = item.substr(1, item.size() - 2);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

ConfigTree ConfigTree::parse(std::istream& in, const std::string& source) {
  ConfigTree tree;
  std::string line;
  int lineno = 0;
  ConfigSection* current = nullptr;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string origin = source + ":" + std::to_string(lineno);
    const std::string body = trim(strip_comment(line));
    if (body.empty()) continue;
    if (body.front() == '[') {
      if (body.back() != ']') throw ConfigError(origin + ": malformed section header");
      const std::string name = trim(body.substr(1, body.size() - 2));
      if (!valid_name(name)) throw ConfigError(origin + ": invalid section name '" + name + "'");
      if (tree.section(name)) throw ConfigError(origin + ": duplicate section [" + name + "]");
      tree.sections_.push_back(ConfigSection{name, origin, {}});
      current = &tree.sections_.back();
      continue;
    }
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw ConfigError(origin + ": expected 'key = value'");
    if (!current) throw ConfigError(origin + ": key outside of any section");
    const std::string key = trim(body.substr(0, eq));
    if (!valid_name(key) || key.find('.') != std::string::npos) {
      throw ConfigError(origin + ": invalid key '" + key + "'");
    }
    for (const auto& e : current->entries) {
      if (e.key == key) throw ConfigError(origin + ": duplicate key '" + key + "' (first at " + e.origin + ")");
    }
    current->entries.push_back(ConfigEntry{key, normalize_value(body.substr(eq + 1), origin), origin});
  }
  return tree;
}

ConfigTree ConfigTree::parse_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  return parse(in, path.string());
}

void ConfigTree::apply_override(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("--set " + assignment + ": expected section.key=value");
  const std::string path = trim(assignment.substr(0, eq));
  const auto dot = path.rfind('.');
  if (dot == std::string::npos || dot == 0 || dot + 1 == path.size()) {
    throw ConfigError("--set " + assignment + ": key must be written as section.key");
  }
  const std::string origin = "--set " + path;
  set(path.substr(0, dot), path.substr(dot + 1), normalize_value(assignment.substr(eq + 1), origin), origin);
}

std::vector<const ConfigSection*> ConfigTree::sections_with_prefix(const std::string& prefix) const {
  std::vector<const ConfigSection*> out;
  for (const auto& s : sections_) {
    if (s.name == prefix || s.name.rfind(prefix + ".", 0) == 0) out.push_back(&s);
  }
  return out;
}

const ConfigSection* ConfigTree::section(const std::string& name) const {
  for (const auto& s : sections_) {
    if (s.name == name) return &s;
  }
  return nullptr;
}

ConfigSection& ConfigTree::section_or_add(const std::string& name, const std::string& origin) {
  for (auto& s : sections_) {
    if (s.name == name) return s;
  }
  sections_.push_back(ConfigSection{name, origin, {}});
  return sections_.back();
}

void ConfigTree::set(const std::string& section, const std::string& key, const std::string& value,
                     const std::string& origin) {
  ConfigSection& s = section_or_add(section, origin);
  for (auto& e : s.entries) {
    if (e.key == key) {
      e.value = value;
      e.origin = origin;
      return;
    }
  }
  s.entries.push_back(ConfigEntry{key, value, origin});
}

std::string ConfigTree::write() const {
  std::ostringstream os;
  bool first = true;
  for (const auto& s : sections_) {
    if (!first) os << "\n";
    first = false;
    os << "[" << s.name << "]\n";
    for (const auto& e : s.entries) {
      const bool list = !e.value.empty() && e.value.front() == '[';
      const bool bare = list || (!e.value.empty() && e.value.find_first_of(" #\"") == std::string::npos);
      os << e.key << " = " << (bare ? e.value : "\"" + e.value + "\"") << "\n";
    }
  }
  return os.str();
}

SectionReader::SectionReader(const ConfigSection* section, std::string name)
    : section_(section), name_(std::move(name)) {}

const ConfigEntry* SectionReader::find(const std::string& key) const {
  if (!section_) return nullptr;
  for (const auto& e : section_->entries) {
    if (e.key == key) return &e;
  }
  return nullptr;
}

void SectionReader::fail(const std::string& key, const std::string& message) const {
  const ConfigEntry* e = find(key);
  const std::string where = e ? e->origin : (section_ ? section_->origin : std::string("config"));
  throw ConfigError(where + ": [" + name_ + "] " + key + ": " + message);
}

std::optional<std::string> SectionReader::text(const std::string& key) {
  used_.insert(key);
  const ConfigEntry* e = find(key);
  if (!e) return std::nullopt;
  return e->value;
}

namespace {

template <typename T>
bool parse_number(const std::string& s, T& out) {
  const char* b = s.data();
  const char* e = s.data() + s.size();
  auto [p, ec] = std::from_chars(b, e, out);
  return ec == std::errc() && p == e;
}

bool parse_real(const std::string& s, Scalar& out) {
  if (s == "inf" || s == "-inf" || s == "nan") return false;
  return parse_number(s, out);
}

}  // namespace

void SectionReader::read(const std::string& key, int& out) {
  if (auto t = text(key)) {
    if (!parse_number(*t, out)) fail(key, "expected an integer, got '" + *t + "'");
  }
}

void SectionReader::read(const std::string& key, std::uint64_t& out) {
  if (auto t = text(key)) {
    if (!parse_number(*t, out)) fail(key, "expected a nonnegative integer, got '" + *t + "'");
  }
}

void SectionReader::read(const std::string& key, Index& out) {
  if (auto t = text(key)) {
    long long v = 0;
    if (!parse_number(*t, v)) fail(key, "expected an integer, got '" + *t + "'");
    out = static_cast<Index>(v);
  }
}

void SectionReader::read(const std::string& key, Scalar& out) {
  if (auto t = text(key)) {
    if (!parse_real(*t, out)) fail(key, "expected a finite number, got '" + *t + "'");
  }
}

void SectionReader::read(const std::string& key, bool& out) {
  if (auto t = text(key)) {
    if (*t == "true") {
      out = true;
    } else if (*t == "false") {
      out = false;
    } else {
      fail(key, "expected true or false, got '" + *t + "'");
    }
  }
}

void SectionReader::read(const std::string& key, std::string& out) {
  if (auto t = text(key)) out = *t;
}

void SectionReader::read(const std::string& key, std::vector<Index>& out) {
  if (auto t = text(key)) {
    out.clear();
    for (const auto& item : split_list(*t)) {
      long long v = 0;
      if (!parse_number(item, v)) fail(key, "expected a list of integers, got '" + *t + "'");
      out.push_back(static_cast<Index>(v));
    }
  }
}

void SectionReader::read(const std::string& key, std::vector<std::uint64_t>& out) {
  if (auto t = text(key)) {
    out.clear();
    for (const auto& item : split_list(*t)) {
      std::uint64_t v = 0;
      if (!parse_number(item, v)) fail(key, "expected a list of nonnegative integers, got '" + *t + "'");
      out.push_back(v);
    }
  }
}

void SectionReader::read(const std::string& key, std::vector<Scalar>& out) {
  if (auto t = text(key)) {
    out.clear();
    for (const auto& item : split_list(*t)) {
      Scalar v = 0;
      if (!parse_real(item, v)) fail(key, "expected a list of numbers, got '" + *t + "'");
      out.push_back(v);
    }
  }
}

void SectionReader::reject_unknown() const {
  if (!section_) return;
  for (const auto& e : section_->entries) {
    if (!used_.count(e.key)) throw ConfigError(e.origin + ": unknown key '" + e.key + "' in [" + name_ + "]");
  }
}

}  // namespace mcem::cli
