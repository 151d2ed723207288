// Copyright 2026 The vpeval Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Flat sectioned key-value text: `[kind name]` headers, `key = value` lines
// and `#` comments. Values are kept as strings; typed getters validate them
// and report the source line.

#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vpeval/error.hpp"
#include "vpeval/io.hpp"

namespace vpeval {

struct ConfigEntry {
  std::string key;
  std::string value;
  std::size_t line = 0;  // 0 for entries set programmatically
  mutable bool used = false;
};

struct ConfigSection {
  std::string kind;  // "world", "system", ...
  std::string name;  // empty for unnamed sections
  std::size_t line = 0;
  std::vector<ConfigEntry> entries;

  std::string title() const { return name.empty() ? kind : kind + " " + name; }

  const ConfigEntry* find(std::string_view key) const {
    for (const auto& e : entries) {
      if (e.key == key) return &e;
    }
    return nullptr;
  }

  void set(const std::string& key, const std::string& value) {
    for (auto& e : entries) {
      if (e.key == key) {
        e.value = value;
        e.line = 0;
        return;
      }
    }
    entries.push_back({key, value, 0, false});
  }

  std::string where(const ConfigEntry& e) const {
    return "[" + title() + "] " + e.key + (e.line ? " (line " + std::to_string(e.line) + ")" : "");
  }

  std::optional<std::string> get_string(std::string_view key) const {
    const auto* e = find(key);
    if (!e) return std::nullopt;
    e->used = true;
    return e->value;
  }

  std::optional<double> get_double(std::string_view key) const {
    const auto* e = find(key);
    if (!e) return std::nullopt;
    e->used = true;
    const auto v = parse_double(e->value);
    require(v.has_value(), where(*e) + ": expected a number, got '" + e->value + "'");
    return v;
  }

  std::optional<long long> get_int(std::string_view key) const {
    const auto* e = find(key);
    if (!e) return std::nullopt;
    e->used = true;
    const auto v = parse_int(e->value);
    require(v.has_value(), where(*e) + ": expected an integer, got '" + e->value + "'");
    return v;
  }

  std::optional<std::size_t> get_count(std::string_view key) const {
    const auto v = get_int(key);
    if (!v) return std::nullopt;
    require(*v >= 0, where(*find(key)) + ": must be >= 0");
    return static_cast<std::size_t>(*v);
  }

  std::optional<bool> get_bool(std::string_view key) const {
    const auto* e = find(key);
    if (!e) return std::nullopt;
    e->used = true;
    if (e->value == "true" || e->value == "yes" || e->value == "1") return true;
    if (e->value == "false" || e->value == "no" || e->value == "0") return false;
    throw InputError(where(*e) + ": expected true/false, got '" + e->value + "'");
  }

  /// Rejects keys no getter asked for (typos).
  void check_all_used() const {
    for (const auto& e : entries) {
      require(e.used, where(e) + ": unknown key");
    }
  }
};

struct ConfigDocument {
  std::vector<ConfigSection> sections;

  ConfigSection* find(std::string_view kind, std::string_view name = {}) {
    for (auto& s : sections) {
      if (s.kind == kind && s.name == name) return &s;
    }
    return nullptr;
  }
  const ConfigSection* find(std::string_view kind, std::string_view name = {}) const {
    return const_cast<ConfigDocument*>(this)->find(kind, name);
  }

  /// Applies an override of the form `section.key=value`, where section is
  /// the section title with the space replaced by a dot for named sections
  /// (`world.dim=16`, `system.B3.leak=0.2`). Missing sections are created.
  void apply_override(std::string_view text) {
    const auto eq = text.find('=');
    require(eq != std::string_view::npos, "override '" + std::string(text) + "' needs '='");
    const std::string lhs(io_detail::trim(text.substr(0, eq)));
    const std::string value(io_detail::trim(text.substr(eq + 1)));
    const auto last = lhs.rfind('.');
    require(last != std::string::npos && last > 0 && last + 1 < lhs.size(),
            "override '" + std::string(text) + "' must look like section.key=value");
    const std::string key = lhs.substr(last + 1);
    const std::string path = lhs.substr(0, last);
    const auto dot = path.find('.');
    const std::string kind = path.substr(0, dot);
    const std::string name = dot == std::string::npos ? "" : path.substr(dot + 1);
    ConfigSection* s = find(kind, name);
    if (!s) {
      sections.push_back({kind, name, 0, {}});
      s = &sections.back();
    }
    s->set(key, value);
  }
};

inline ConfigDocument parse_config_text(std::string_view text, const std::string& origin) {
  ConfigDocument doc;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = io_detail::trim(line);
    if (line.empty()) {
      if (end == text.size()) break;
      continue;
    }
    const std::string at = origin + ": line " + std::to_string(line_no) + ": ";
    if (line.front() == '[') {
      require(line.back() == ']', at + "unterminated section header");
      const auto inner = io_detail::trim(line.substr(1, line.size() - 2));
      const auto parts = io_detail::split_ws(inner);
      require(parts.size() == 1 || parts.size() == 2, at + "section header must be [kind] or [kind name]");
      ConfigSection s{std::string(parts[0]), parts.size() == 2 ? std::string(parts[1]) : "",
                      line_no, {}};
      require(doc.find(s.kind, s.name) == nullptr, at + "duplicate section [" + s.title() + "]");
      doc.sections.push_back(std::move(s));
    } else {
      const auto eq = line.find('=');
      require(eq != std::string_view::npos, at + "expected 'key = value'");
      require(!doc.sections.empty(), at + "key outside of any section");
      const std::string key(io_detail::trim(line.substr(0, eq)));
      const std::string value(io_detail::trim(line.substr(eq + 1)));
      require(!key.empty(), at + "empty key");
      auto& s = doc.sections.back();
      require(s.find(key) == nullptr, at + "duplicate key '" + key + "'");
      s.entries.push_back({key, value, line_no, false});
    }
    if (end == text.size()) break;
  }
  return doc;
}

inline ConfigDocument parse_config_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), "cannot open config '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path.string());
}

}  // namespace vpeval
