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

// Train/validation splitting and trial-list generation.

#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "vpeval/core.hpp"
#include "vpeval/io.hpp"
#include "vpeval/rng.hpp"

namespace vpeval {

enum class ProtocolKind { kEval, kValidation };

struct EnrollmentSpec {
  std::string enrollment_id;
  std::string speaker_id;
  std::vector<std::string> utterance_ids;

  friend bool operator==(const EnrollmentSpec&, const EnrollmentSpec&) = default;
};

struct TrialProtocol {
  ProtocolKind kind = ProtocolKind::kEval;
  std::vector<EnrollmentSpec> enrollments;
  std::vector<Trial> trials;
  // Speakers left out of a validation protocol for having too few utterances.
  std::vector<std::string> skipped_speakers;

  const EnrollmentSpec* find_enrollment(const std::string& id) const {
    for (const auto& e : enrollments) {
      if (e.enrollment_id == id) return &e;
    }
    return nullptr;
  }

  friend bool operator==(const TrialProtocol&, const TrialProtocol&) = default;
};

/// Throws unless the protocol is internally consistent against its data:
/// every trial references a known enrollment and test utterance, labels agree
/// with speaker identities, and no enrollment utterance is also a test.
inline void check_protocol(const TrialProtocol& protocol, const LabeledEmbeddingSet& tests) {
  std::unordered_map<std::string, const EnrollmentSpec*> by_id;
  std::unordered_set<std::string> enroll_utts;
  for (const auto& e : protocol.enrollments) {
    require(by_id.emplace(e.enrollment_id, &e).second,
            "duplicate enrollment id '" + e.enrollment_id + "'");
    enroll_utts.insert(e.utterance_ids.begin(), e.utterance_ids.end());
  }
  for (const auto& t : protocol.trials) {
    const auto it = by_id.find(t.enrollment_id);
    require(it != by_id.end(), "trial " + t.enrollment_id + " " + t.test_utterance_id +
                                   ": unknown enrollment id");
    const auto* rec = tests.find(t.test_utterance_id);
    require(rec != nullptr, "trial " + t.enrollment_id + " " + t.test_utterance_id +
                                ": unknown test utterance");
    require(!enroll_utts.contains(t.test_utterance_id),
            "utterance '" + t.test_utterance_id + "' is used for enrollment and as a test");
    const bool same = rec->speaker_id == it->second->speaker_id;
    require(same == (t.label == TrialLabel::kTarget),
            "trial " + t.enrollment_id + " " + t.test_utterance_id +
                ": label does not match speaker identities");
  }
}

struct SplitResult {
  LabeledEmbeddingSet train;
  LabeledEmbeddingSet validation;
  double fraction = 0.10;
};

/// Per-speaker stratified split. Each speaker sends round(fraction * count)
/// utterances (at least one) to validation, chosen by a seeded shuffle.
/// Record order within each output follows the input order.
inline SplitResult split_train_validation(const LabeledEmbeddingSet& data, double fraction,
                                          std::uint64_t seed) {
  require(fraction > 0.0 && fraction < 0.5, "validation fraction must be in (0, 0.5)");
  std::vector<bool> to_validation(data.size(), false);
  for (const auto& speaker : data.speakers()) {
    std::vector<std::size_t> idx = data.utterances_of(speaker);
    require(idx.size() >= 2, "speaker '" + speaker + "' has fewer than 2 utterances");
    auto count = static_cast<std::size_t>(std::lround(fraction * static_cast<double>(idx.size())));
    count = std::clamp<std::size_t>(count, 1, idx.size() - 1);
    Rng rng(derive_seed(seed, "split:" + speaker));
    rng.shuffle(idx);
    for (std::size_t i = 0; i < count; ++i) to_validation[idx[i]] = true;
  }
  std::vector<UtteranceRecord> train, validation;
  for (std::size_t i = 0; i < data.size(); ++i) {
    (to_validation[i] ? validation : train).push_back(data[i]);
  }
  return {LabeledEmbeddingSet(std::move(train), SetRole::kTrain, data.anonymised_by()),
          LabeledEmbeddingSet(std::move(validation), SetRole::kValidation, data.anonymised_by()),
          fraction};
}

namespace protocol_detail {

// Draws `count` items from `pool` without replacement, starting a freshly
// shuffled pass whenever the pool is exhausted.
template <typename T>
std::vector<T> draw_cycling(const std::vector<T>& pool, std::size_t count, Rng& rng) {
  std::vector<T> out;
  if (pool.empty()) return out;
  std::vector<T> pass;
  while (out.size() < count) {
    if (pass.empty()) {
      pass = pool;
      rng.shuffle(pass);
    }
    out.push_back(std::move(pass.back()));
    pass.pop_back();
  }
  return out;
}

}  // namespace protocol_detail

/// Validation trial list over speakers seen in attacker training.
///
/// Speakers with at most `n_enroll` utterances are skipped. For every other
/// speaker, `n_enroll` seeded-random utterances form its enrollment model,
/// each remaining utterance is one target trial, and `nontarget_per_speaker`
/// nontarget trials pair the enrollment with test utterances of other kept
/// speakers. A speaker with 8 utterances therefore yields 3 target and 5
/// nontarget trials under the defaults.
inline TrialProtocol build_validation_protocol(const LabeledEmbeddingSet& validation,
                                               std::uint64_t seed, std::size_t n_enroll = 5,
                                               std::size_t nontarget_per_speaker = 5) {
  require(!validation.empty(), "validation set is empty");
  require(n_enroll >= 1, "n_enroll must be positive");
  TrialProtocol protocol;
  protocol.kind = ProtocolKind::kValidation;

  std::vector<std::string> kept;
  std::unordered_map<std::string, std::vector<std::string>> tests_of;
  for (const auto& speaker : validation.speakers()) {
    const auto& idx = validation.utterances_of(speaker);
    if (idx.size() <= n_enroll) {
      protocol.skipped_speakers.push_back(speaker);
      continue;
    }
    std::vector<std::string> ids;
    for (auto i : idx) ids.push_back(validation[i].utterance_id);
    Rng rng(derive_seed(seed, "enroll:" + speaker));
    rng.shuffle(ids);
    EnrollmentSpec spec{speaker, speaker, {ids.begin(), ids.begin() + n_enroll}};
    protocol.enrollments.push_back(std::move(spec));
    tests_of[speaker] = {ids.begin() + n_enroll, ids.end()};
    kept.push_back(speaker);
  }
  require(kept.size() >= 2, "validation protocol needs at least 2 speakers with more than " +
                                std::to_string(n_enroll) + " utterances, found " +
                                std::to_string(kept.size()));

  for (const auto& speaker : kept) {
    for (const auto& utt : tests_of[speaker]) {
      protocol.trials.push_back({speaker, utt, TrialLabel::kTarget});
    }
    std::vector<std::string> others;
    for (const auto& other : kept) {
      if (other == speaker) continue;
      others.insert(others.end(), tests_of[other].begin(), tests_of[other].end());
    }
    Rng rng(derive_seed(seed, "nontarget:" + speaker));
    for (auto& utt : protocol_detail::draw_cycling(others, nontarget_per_speaker, rng)) {
      protocol.trials.push_back({speaker, std::move(utt), TrialLabel::kNontarget});
    }
  }
  return protocol;
}

/// Evaluation trial list: one enrollment model per speaker of `enroll` (all of
/// its utterances); each test utterance yields one target trial plus
/// `nontarget_per_test` trials against distinct other enrolled speakers.
inline TrialProtocol build_eval_protocol(const LabeledEmbeddingSet& enroll,
                                         const LabeledEmbeddingSet& test, std::uint64_t seed,
                                         std::size_t nontarget_per_test = 5) {
  require(!enroll.empty() && !test.empty(), "evaluation enroll and test sets must be non-empty");
  TrialProtocol protocol;
  protocol.kind = ProtocolKind::kEval;
  for (const auto& speaker : enroll.speakers()) {
    EnrollmentSpec spec{speaker, speaker, {}};
    for (auto i : enroll.utterances_of(speaker)) {
      const auto& id = enroll[i].utterance_id;
      require(test.find(id) == nullptr,
              "utterance '" + id + "' appears in both enrollment and test sets");
      spec.utterance_ids.push_back(id);
    }
    protocol.enrollments.push_back(std::move(spec));
  }
  require(enroll.speakers().size() >= nontarget_per_test + 1,
          "need at least " + std::to_string(nontarget_per_test + 1) +
              " enrolled speakers for " + std::to_string(nontarget_per_test) +
              " nontarget trials per test utterance");
  for (const auto& rec : test.records()) {
    require(enroll.has_speaker(rec.speaker_id),
            "test speaker '" + rec.speaker_id + "' has no enrollment utterances");
    protocol.trials.push_back({rec.speaker_id, rec.utterance_id, TrialLabel::kTarget});
    std::vector<std::string> others;
    for (const auto& s : enroll.speakers()) {
      if (s != rec.speaker_id) others.push_back(s);
    }
    Rng rng(derive_seed(seed, "nontarget:" + rec.utterance_id));
    // Partial Fisher-Yates: the first nontarget_per_test entries are distinct.
    for (std::size_t i = 0; i < nontarget_per_test; ++i) {
      std::swap(others[i], others[i + rng.uniform_index(others.size() - i)]);
      protocol.trials.push_back({others[i], rec.utterance_id, TrialLabel::kNontarget});
    }
  }
  return protocol;
}

// Enrollment map file: <enrollment_id> TAB <speaker_id> TAB <utt>[,<utt>...]

inline void emit_enrollment_map(const TrialProtocol& protocol,
                                const std::filesystem::path& path) {
  std::string out;
  for (const auto& e : protocol.enrollments) {
    out += e.enrollment_id + '\t' + e.speaker_id + '\t';
    for (std::size_t i = 0; i < e.utterance_ids.size(); ++i) {
      if (i) out += ',';
      out += e.utterance_ids[i];
    }
    out += '\n';
  }
  io_detail::write_file(path, out);
}

inline std::vector<EnrollmentSpec> parse_enrollment_map(const std::filesystem::path& path) {
  using namespace io_detail;
  std::vector<EnrollmentSpec> out;
  const auto lines = read_lines(path);
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    if (lines[ln].empty()) continue;
    const auto f = split(lines[ln], '\t');
    require(f.size() == 3 && is_token(f[0]) && is_token(f[1]),
            line_prefix(path, ln + 1) + "malformed enrollment line");
    EnrollmentSpec spec{std::string(f[0]), std::string(f[1]), {}};
    for (auto u : split(f[2], ',')) {
      require(is_token(u), line_prefix(path, ln + 1) + "empty utterance id");
      spec.utterance_ids.emplace_back(u);
    }
    out.push_back(std::move(spec));
  }
  return out;
}

/// Enrollment spec that enrolls every speaker of `enroll` with all of its
/// utterances under enrollment id = speaker id.
inline std::vector<EnrollmentSpec> enroll_by_speaker(const LabeledEmbeddingSet& enroll) {
  std::vector<EnrollmentSpec> out;
  for (const auto& speaker : enroll.speakers()) {
    EnrollmentSpec spec{speaker, speaker, {}};
    for (auto i : enroll.utterances_of(speaker)) spec.utterance_ids.push_back(enroll[i].utterance_id);
    out.push_back(std::move(spec));
  }
  return out;
}

}  // namespace vpeval
