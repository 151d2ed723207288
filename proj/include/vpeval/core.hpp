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

// Domain types shared by every stage of the evaluation pipeline.

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "vpeval/error.hpp"

namespace vpeval {

inline bool is_token(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') return false;
  }
  return true;
}

/// A fixed-dimension real vector describing one utterance's speaker
/// characteristics. Values are always finite.
class Embedding {
 public:
  Embedding() = default;

  explicit Embedding(std::vector<double> values) : values_(std::move(values)) {
    require(!values_.empty(), "embedding must have at least one value");
    for (double v : values_) {
      require(std::isfinite(v), "embedding contains a non-finite value");
    }
  }

  explicit Embedding(const Eigen::VectorXd& v)
      : Embedding(std::vector<double>(v.data(), v.data() + v.size())) {}

  std::size_t dim() const { return values_.size(); }
  std::span<const double> values() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }

  Eigen::Map<const Eigen::VectorXd> vec() const {
    return {values_.data(), static_cast<Eigen::Index>(values_.size())};
  }

  double norm() const { return vec().norm(); }

  /// Unit-length copy. Zero vectors cannot be normalized.
  Embedding normalized() const {
    const double n = norm();
    require(n > 0.0, "cannot normalize a zero-norm embedding");
    std::vector<double> out(values_);
    for (double& v : out) v /= n;
    return Embedding(std::move(out));
  }

  friend bool operator==(const Embedding&, const Embedding&) = default;

 private:
  std::vector<double> values_;
};

/// Identifies one anonymisation system configuration, e.g. ("B5", "feature_swap").
struct SystemId {
  std::string name;
  std::optional<std::string> variant;

  /// `name` or `name:variant`.
  std::string str() const { return variant ? name + ":" + *variant : name; }

  static SystemId parse(std::string_view text) {
    require(is_token(text), "invalid system id '" + std::string(text) + "'");
    const auto colon = text.find(':');
    if (colon == std::string_view::npos) return {std::string(text), std::nullopt};
    require(colon > 0 && colon + 1 < text.size(),
            "invalid system id '" + std::string(text) + "'");
    return {std::string(text.substr(0, colon)),
            std::string(text.substr(colon + 1))};
  }

  friend bool operator==(const SystemId&, const SystemId&) = default;
};

struct UtteranceRecord {
  std::string utterance_id;
  std::string speaker_id;
  Embedding embedding;
  // Pseudo-speaker assigned by anonymisation; absent for original data.
  std::optional<std::string> target_id;

  friend bool operator==(const UtteranceRecord&, const UtteranceRecord&) = default;
};

enum class SetRole { kTrain, kValidation, kEvalEnroll, kEvalTest };

inline std::string_view to_string(SetRole role) {
  switch (role) {
    case SetRole::kTrain: return "train";
    case SetRole::kValidation: return "validation";
    case SetRole::kEvalEnroll: return "eval-enroll";
    case SetRole::kEvalTest: return "eval-test";
  }
  return "train";
}

inline SetRole parse_role(std::string_view s) {
  if (s == "train") return SetRole::kTrain;
  if (s == "validation") return SetRole::kValidation;
  if (s == "eval-enroll") return SetRole::kEvalEnroll;
  if (s == "eval-test") return SetRole::kEvalTest;
  throw InputError("unknown set role '" + std::string(s) + "'");
}

/// Collection of utterance records. Construction validates unique utterance
/// ids, a single shared dimension and consistent target-id presence.
class LabeledEmbeddingSet {
 public:
  LabeledEmbeddingSet() = default;

  LabeledEmbeddingSet(std::vector<UtteranceRecord> records, SetRole role,
                      std::optional<SystemId> anonymised_by = std::nullopt)
      : records_(std::move(records)),
        role_(role),
        anonymised_by_(std::move(anonymised_by)) {
    index_.reserve(records_.size());
    for (std::size_t i = 0; i < records_.size(); ++i) {
      const auto& r = records_[i];
      require(is_token(r.utterance_id), "invalid utterance id '" + r.utterance_id + "'");
      require(is_token(r.speaker_id), "invalid speaker id '" + r.speaker_id + "'");
      require(!r.target_id || is_token(*r.target_id),
              "invalid target id for utterance " + r.utterance_id);
      require(r.embedding.dim() == records_.front().embedding.dim(),
              "utterance " + r.utterance_id + " has dim " +
                  std::to_string(r.embedding.dim()) + ", expected " +
                  std::to_string(records_.front().embedding.dim()));
      require(r.target_id.has_value() == records_.front().target_id.has_value(),
              "utterance " + r.utterance_id +
                  ": target ids must be present on all records or none");
      require(index_.emplace(r.utterance_id, i).second,
              "duplicate utterance id '" + r.utterance_id + "'");
      if (speaker_index_.emplace(r.speaker_id, speakers_.size()).second) {
        speakers_.push_back(r.speaker_id);
        by_speaker_.emplace_back();
      }
      by_speaker_[speaker_index_.at(r.speaker_id)].push_back(i);
    }
    if (!records_.empty()) {
      require(records_.front().embedding.dim() >= 2, "embedding dim must be >= 2");
    }
    require(!anonymised_by_ || records_.empty() || records_.front().target_id,
            "anonymised set must carry target ids");
  }

  const std::vector<UtteranceRecord>& records() const { return records_; }
  const UtteranceRecord& operator[](std::size_t i) const { return records_[i]; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  std::size_t dim() const { return records_.empty() ? 0 : records_.front().embedding.dim(); }
  SetRole role() const { return role_; }
  const std::optional<SystemId>& anonymised_by() const { return anonymised_by_; }
  bool is_anonymised() const { return !records_.empty() && records_.front().target_id.has_value(); }

  const UtteranceRecord* find(std::string_view utterance_id) const {
    const auto it = index_.find(std::string(utterance_id));
    return it == index_.end() ? nullptr : &records_[it->second];
  }

  /// Speaker ids in order of first appearance.
  const std::vector<std::string>& speakers() const { return speakers_; }

  bool has_speaker(const std::string& speaker) const {
    return speaker_index_.contains(speaker);
  }

  /// Record indices of one speaker, in file order.
  const std::vector<std::size_t>& utterances_of(const std::string& speaker) const {
    const auto it = speaker_index_.find(speaker);
    require(it != speaker_index_.end(), "unknown speaker '" + speaker + "'");
    return by_speaker_[it->second];
  }

  friend bool operator==(const LabeledEmbeddingSet& a, const LabeledEmbeddingSet& b) {
    return a.records_ == b.records_ && a.role_ == b.role_ &&
           a.anonymised_by_ == b.anonymised_by_;
  }

 private:
  std::vector<UtteranceRecord> records_;
  SetRole role_ = SetRole::kTrain;
  std::optional<SystemId> anonymised_by_;
  std::unordered_map<std::string, std::size_t> index_;
  std::unordered_map<std::string, std::size_t> speaker_index_;
  std::vector<std::string> speakers_;
  std::vector<std::vector<std::size_t>> by_speaker_;
};

/// Throws if the two sets share any speaker id. Attacker training data and
/// evaluation data must come from disjoint populations.
inline void check_disjoint_speakers(const LabeledEmbeddingSet& train,
                                    const LabeledEmbeddingSet& eval) {
  for (const auto& s : eval.speakers()) {
    require(!train.has_speaker(s),
            "speaker '" + s + "' appears in both training and evaluation data");
  }
}

enum class TrialLabel { kTarget, kNontarget };

inline std::string_view to_string(TrialLabel label) {
  return label == TrialLabel::kTarget ? "target" : "nontarget";
}

struct Trial {
  std::string enrollment_id;
  std::string test_utterance_id;
  TrialLabel label;

  friend bool operator==(const Trial&, const Trial&) = default;
};

struct ScoreEntry {
  std::string enrollment_id;
  std::string test_utterance_id;
  TrialLabel label;
  double score;

  friend bool operator==(const ScoreEntry&, const ScoreEntry&) = default;
};

struct ScoreSet {
  std::vector<ScoreEntry> entries;

  std::size_t count(TrialLabel label) const {
    std::size_t n = 0;
    for (const auto& e : entries) n += e.label == label;
    return n;
  }

  friend bool operator==(const ScoreSet&, const ScoreSet&) = default;
};

}  // namespace vpeval
