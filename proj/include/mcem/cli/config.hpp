#pragma once

#include "mcem/core.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace mcem::cli {

// Grammar, one item per line:
//   # comment                      (also trailing, outside quotes)
//   [section] or [section.sub]
//   key = value
// Values: "quoted string", bare word, number, true/false, or a list [v1, v2, ...].

struct ConfigEntry {
  std::string key;
  std::string value;  // unquoted text; lists keep their brackets
  std::string origin;  // "file:line" or "--set"
};

struct ConfigSection {
  std::string name;
  std::string origin;
  std::vector<ConfigEntry> entries;
};

class ConfigTree {
 public:
  static ConfigTree parse(std::istream& in, const std::string& source);
  static ConfigTree parse_file(const std::filesystem::path& path);

  /// Applies "section.key=value"; the section path is everything before the last dot.
  void apply_override(const std::string& assignment);

  const std::vector<ConfigSection>& sections() const { return sections_; }
  std::vector<const ConfigSection*> sections_with_prefix(const std::string& prefix) const;
  const ConfigSection* section(const std::string& name) const;
  ConfigSection& section_or_add(const std::string& name, const std::string& origin = "");

  void set(const std::string& section, const std::string& key, const std::string& value,
           const std::string& origin = "");

  std::string write() const;

 private:
  std::vector<ConfigSection> sections_;
};

/// Typed access to one section that records which keys were read.
class SectionReader {
 public:
  SectionReader(const ConfigSection* section, std::string name);

  std::optional<std::string> text(const std::string& key);
  void read(const std::string& key, int& out);
  void read(const std::string& key, std::uint64_t& out);
  void read(const std::string& key, Index& out);
  void read(const std::string& key, Scalar& out);
  void read(const std::string& key, bool& out);
  void read(const std::string& key, std::string& out);
  void read(const std::string& key, std::vector<Index>& out);
  void read(const std::string& key, std::vector<std::uint64_t>& out);
  void read(const std::string& key, std::vector<Scalar>& out);

  /// Throws ConfigError for the first key nobody read.
  void reject_unknown() const;

  [[noreturn]] void fail(const std::string& key, const std::string& message) const;

 private:
  const ConfigEntry* find(const std::string& key) const;

  const ConfigSection* section_;
  std::string name_;
  std::set<std::string> used_;
};

std::string format_scalar(Scalar v);
std::vector<std::string> split_list(const std::string& value);

}  // namespace mcem::cli
