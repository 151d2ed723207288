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

// Tab-separated text formats for embeddings, trials and scores.
//
// Embedding file:
//   #dim <d>
//   [#role <train|validation|eval-enroll|eval-test>]
//   [#anonymised_by <system>]
//   <utterance_id> TAB <speaker_id> TAB <target_id|-> TAB <v1> <v2> ... <vd>
//
// Trial file:  <enrollment_id> TAB <test_utterance_id> TAB <target|nontarget>
// Score file:  <enrollment_id> TAB <test_utterance_id> TAB <target|nontarget> TAB <score>
//
// Numbers are read and written with std::from_chars / std::to_chars, so the
// formats are independent of the process locale.

#pragma once

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "vpeval/core.hpp"

namespace vpeval {

inline constexpr int kEmbeddingDecimals = 9;
inline constexpr int kScoreDecimals = 6;

namespace io_detail {

inline std::string line_prefix(const std::filesystem::path& path, std::size_t line) {
  return path.string() + ": line " + std::to_string(line) + ": ";
}

inline std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), "cannot open '" + path.string() + "'");
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  return lines;
}

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

inline std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    const std::size_t start = i;
    while (i < s.size() && s[i] != ' ' && s[i] != '\t') ++i;
    if (i > start) out.push_back(s.substr(start, i - start));
  }
  return out;
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(out.good(), "cannot write '" + path.string() + "'");
  out << content;
  out.flush();
  require(out.good(), "failed writing '" + path.string() + "'");
}

}  // namespace io_detail

/// Strict locale-independent decimal parse. Rejects trailing garbage,
/// non-finite values and thousands separators.
inline std::optional<double> parse_double(std::string_view s) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  if (!std::isfinite(value)) return std::nullopt;
  return value;
}

inline std::optional<long long> parse_int(std::string_view s) {
  long long value = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return value;
}

/// Fixed-point decimal rendering with the given number of decimals.
inline std::string format_fixed(double value, int decimals) {
  char buf[64];
  const auto [ptr, ec] =
      std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::fixed, decimals);
  ensure(ec == std::errc(), "number formatting failed");
  return std::string(buf, ptr);
}

inline TrialLabel parse_label(std::string_view s) {
  if (s == "target") return TrialLabel::kTarget;
  if (s == "nontarget") return TrialLabel::kNontarget;
  throw InputError("unknown trial label '" + std::string(s) + "'");
}

// ---------------------------------------------------------------------------
// Embedding files

inline std::string format_embedding_file(const LabeledEmbeddingSet& set,
                                         bool with_metadata = true) {
  std::string out = "#dim " + std::to_string(set.dim()) + "\n";
  if (with_metadata) {
    out += "#role " + std::string(to_string(set.role())) + "\n";
    if (set.anonymised_by()) out += "#anonymised_by " + set.anonymised_by()->str() + "\n";
  }
  for (const auto& r : set.records()) {
    out += r.utterance_id;
    out += '\t';
    out += r.speaker_id;
    out += '\t';
    out += r.target_id ? *r.target_id : std::string("-");
    out += '\t';
    const auto values = r.embedding.values();
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (i) out += ' ';
      out += format_fixed(values[i], kEmbeddingDecimals);
    }
    out += '\n';
  }
  return out;
}

inline void emit_embedding_file(const LabeledEmbeddingSet& set,
                                const std::filesystem::path& path) {
  io_detail::write_file(path, format_embedding_file(set));
}

/// Reads an embedding file. `default_role` applies when the file has no
/// `#role` line. Errors carry the offending line number.
inline LabeledEmbeddingSet parse_embedding_file(const std::filesystem::path& path,
                                                SetRole default_role = SetRole::kTrain) {
  using namespace io_detail;
  const auto lines = read_lines(path);
  require(!lines.empty(), path.string() + ": empty embedding file (missing #dim header)");

  const auto header = split_ws(lines[0]);
  require(header.size() == 2 && header[0] == "#dim",
          line_prefix(path, 1) + "expected '#dim <d>' header");
  const auto dim = parse_int(header[1]);
  require(dim && *dim >= 2, line_prefix(path, 1) + "dimension must be an integer >= 2");

  SetRole role = default_role;
  std::optional<SystemId> anonymised_by;
  std::vector<UtteranceRecord> records;
  std::unordered_map<std::string, std::size_t> seen;
  for (std::size_t ln = 1; ln < lines.size(); ++ln) {
    const std::string_view line = lines[ln];
    const std::size_t number = ln + 1;
    if (line.empty()) continue;
    if (line.front() == '#') {
      const auto kv = split_ws(line);
      require(kv.size() == 2, line_prefix(path, number) + "malformed header line");
      try {
        if (kv[0] == "#role") {
          role = parse_role(kv[1]);
        } else if (kv[0] == "#anonymised_by") {
          anonymised_by = SystemId::parse(kv[1]);
        } else {
          throw InputError("unknown header '" + std::string(kv[0]) + "'");
        }
      } catch (const InputError& e) {
        throw InputError(line_prefix(path, number) + e.what());
      }
      continue;
    }
    const auto fields = split(line, '\t');
    require(fields.size() == 4,
            line_prefix(path, number) + "expected 4 tab-separated fields, got " +
                std::to_string(fields.size()));
    require(is_token(fields[0]) && is_token(fields[1]) && is_token(fields[2]),
            line_prefix(path, number) + "empty or invalid id field");
    const auto tokens = split_ws(fields[3]);
    require(static_cast<long long>(tokens.size()) == *dim,
            line_prefix(path, number) + "expected " + std::to_string(*dim) +
                " values, got " + std::to_string(tokens.size()));
    std::vector<double> values;
    values.reserve(tokens.size());
    for (const auto tok : tokens) {
      const auto v = parse_double(tok);
      require(v.has_value(), line_prefix(path, number) + "invalid or non-finite value '" +
                                 std::string(tok) + "'");
      values.push_back(*v);
    }
    std::string utt(fields[0]);
    const auto [it, inserted] = seen.emplace(utt, number);
    require(inserted, line_prefix(path, number) + "duplicate utterance id '" + utt +
                          "' (first seen on line " + std::to_string(it->second) + ")");
    UtteranceRecord rec{std::move(utt), std::string(fields[1]), Embedding(std::move(values)),
                        std::nullopt};
    if (fields[2] != "-") rec.target_id = std::string(fields[2]);
    if (!records.empty()) {
      require(rec.target_id.has_value() == records.front().target_id.has_value(),
              line_prefix(path, number) + "target id must be given on all rows or none");
    }
    records.push_back(std::move(rec));
  }
  if (!records.empty() && !records.front().target_id) anonymised_by.reset();
  return LabeledEmbeddingSet(std::move(records), role, std::move(anonymised_by));
}

// ---------------------------------------------------------------------------
// Trial files

inline std::string format_trial_file(const std::vector<Trial>& trials) {
  std::string out;
  for (const auto& t : trials) {
    out += t.enrollment_id + '\t' + t.test_utterance_id + '\t' +
           std::string(to_string(t.label)) + '\n';
  }
  return out;
}

inline void emit_trial_file(const std::vector<Trial>& trials,
                            const std::filesystem::path& path) {
  io_detail::write_file(path, format_trial_file(trials));
}

inline std::vector<Trial> parse_trial_file(const std::filesystem::path& path) {
  using namespace io_detail;
  std::vector<Trial> trials;
  const auto lines = read_lines(path);
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    if (lines[ln].empty()) continue;
    const auto f = split(lines[ln], '\t');
    require(f.size() == 3 && is_token(f[0]) && is_token(f[1]),
            line_prefix(path, ln + 1) + "malformed trial line");
    try {
      trials.push_back({std::string(f[0]), std::string(f[1]), parse_label(f[2])});
    } catch (const InputError& e) {
      throw InputError(line_prefix(path, ln + 1) + e.what());
    }
  }
  return trials;
}

// ---------------------------------------------------------------------------
// Score files

inline std::string format_score_file(const ScoreSet& scores) {
  std::string out;
  for (const auto& e : scores.entries) {
    require(std::isfinite(e.score), "non-finite score for trial " + e.enrollment_id +
                                        "/" + e.test_utterance_id);
    out += e.enrollment_id + '\t' + e.test_utterance_id + '\t' +
           std::string(to_string(e.label)) + '\t' + format_fixed(e.score, kScoreDecimals) +
           '\n';
  }
  return out;
}

inline void emit_score_file(const ScoreSet& scores, const std::filesystem::path& path) {
  io_detail::write_file(path, format_score_file(scores));
}

inline ScoreSet parse_score_file(const std::filesystem::path& path) {
  using namespace io_detail;
  ScoreSet scores;
  const auto lines = read_lines(path);
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    if (lines[ln].empty()) continue;
    const auto f = split(lines[ln], '\t');
    require(f.size() == 4 && is_token(f[0]) && is_token(f[1]),
            line_prefix(path, ln + 1) + "malformed score line");
    TrialLabel label;
    try {
      label = parse_label(f[2]);
    } catch (const InputError& e) {
      throw InputError(line_prefix(path, ln + 1) + e.what());
    }
    const auto score = parse_double(f[3]);
    require(score.has_value(),
            line_prefix(path, ln + 1) + "invalid score '" + std::string(f[3]) + "'");
    scores.entries.push_back({std::string(f[0]), std::string(f[1]), label, *score});
  }
  return scores;
}

}  // namespace vpeval
