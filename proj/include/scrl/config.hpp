#pragma once

// Plain-text configuration documents: one `key = value` per line with the
// value in JSON grammar (the same grammar the JSONL records use), '#' line
// comments, blank lines ignored. One parser for files and records keeps
// provenance reproducible.

#include <fstream>
#include <istream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "scrl/error.hpp"

namespace scrl {

class ConfigDoc {
 public:
  ConfigDoc() = default;

  static ConfigDoc parse(std::istream& in, const std::string& source) {
    ConfigDoc doc;
    doc.source_ = source;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      const std::string_view trimmed = trim(line);
      if (trimmed.empty() || trimmed.front() == '#') continue;
      const std::size_t eq = trimmed.find('=');
      if (eq == std::string_view::npos)
        throw ParseError(source + ": expected `key = value`", line_no);
      const std::string key(trim(trimmed.substr(0, eq)));
      const std::string_view value = trim(trimmed.substr(eq + 1));
      if (key.empty()) throw ParseError(source + ": empty key", line_no);
      if (doc.values_.count(key)) throw ParseError(source + ": duplicate key " + key, line_no);
      try {
        doc.values_[key] = nlohmann::json::parse(value);
      } catch (const nlohmann::json::parse_error&) {
        throw ParseError(source + ": value of " + key + " is not a JSON literal (strings need quotes)",
                         line_no);
      }
    }
    return doc;
  }

  static ConfigDoc load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file " + path);
    return parse(in, path);
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  const nlohmann::json* find(const std::string& key) const {
    auto it = values_.find(key);
    return it == values_.end() ? nullptr : &it->second;
  }

  template <typename T>
  T get(const std::string& key, T fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    try {
      return it->second.get<T>();
    } catch (const nlohmann::json::exception&) {
      throw ValidationError(source_ + ": field " + key + " has the wrong type (" +
                            it->second.dump() + ")");
    }
  }

  // Rejects typo'd fields instead of silently ignoring them.
  void require_known(const std::vector<std::string_view>& known) const {
    for (const auto& [key, value] : values_) {
      bool ok = false;
      for (std::string_view k : known)
        if (key == k) { ok = true; break; }
      if (!ok) throw ValidationError(source_ + ": unknown field " + key);
    }
  }

  const std::string& source() const { return source_; }

 private:
  static std::string_view trim(std::string_view s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string_view::npos) return {};
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
  }

  std::map<std::string, nlohmann::json> values_;
  std::string source_ = "config";
};

}  // namespace scrl
