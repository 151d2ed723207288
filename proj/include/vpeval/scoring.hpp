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

// Enrollment models and the cosine backend.

#pragma once

#include <algorithm>
#include <map>
#include <unordered_map>
#include <span>
#include <string>
#include <vector>

#include "vpeval/attacker_model.hpp"
#include "vpeval/core.hpp"
#include "vpeval/protocol.hpp"

namespace vpeval {

struct EnrollmentModel {
  std::string enrollment_id;
  std::string source_speaker_id;
  Embedding centroid;                  // unit norm
  std::vector<Embedding> members;      // embeddings the centroid was built from
};

/// Mean of the utterance embeddings, normalized to unit length.
inline EnrollmentModel build_enrollment_model(std::span<const UtteranceRecord> utterances,
                                              const std::string& enrollment_id) {
  require(!utterances.empty(), "enrollment model '" + enrollment_id + "' has no utterances");
  const auto& first = utterances.front();
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(first.embedding.dim()));
  EnrollmentModel model{enrollment_id, first.speaker_id, {}, {}};
  for (const auto& u : utterances) {
    require(u.speaker_id == first.speaker_id,
            "enrollment model '" + enrollment_id + "' mixes speakers " + first.speaker_id +
                " and " + u.speaker_id);
    require(u.embedding.dim() == first.embedding.dim(),
            "enrollment model '" + enrollment_id + "' mixes embedding dims");
    sum += u.embedding.vec();
    model.members.push_back(u.embedding);
  }
  const double n = sum.norm();
  require(n > 1e-12 * static_cast<double>(utterances.size()),
          "enrollment model '" + enrollment_id + "' has a zero-norm mean");
  model.centroid = Embedding(Eigen::VectorXd(sum / n));
  return model;
}

/// Cosine similarity in [-1, 1]; higher means more similar.
inline double cosine_score(const Embedding& a, const Embedding& b) {
  require(a.dim() == b.dim(), "cosine_score: dim mismatch (" + std::to_string(a.dim()) +
                                  " vs " + std::to_string(b.dim()) + ")");
  const double na = a.norm(), nb = b.norm();
  require(na > 0.0 && nb > 0.0, "cosine_score: zero vector");
  const double c = a.vec().dot(b.vec()) / (na * nb);
  return std::clamp(c, -1.0, 1.0);
}

/// Builds one enrollment model per entry of the protocol's enrollment spec
/// from utterances of `enroll`.
inline std::map<std::string, EnrollmentModel> build_enrollment_models(
    const TrialProtocol& protocol, const LabeledEmbeddingSet& enroll) {
  std::map<std::string, EnrollmentModel> models;
  for (const auto& spec : protocol.enrollments) {
    std::vector<UtteranceRecord> utts;
    utts.reserve(spec.utterance_ids.size());
    for (const auto& id : spec.utterance_ids) {
      const auto* rec = enroll.find(id);
      require(rec != nullptr, "enrollment '" + spec.enrollment_id +
                                  "' references unknown utterance '" + id + "'");
      require(rec->speaker_id == spec.speaker_id,
              "enrollment '" + spec.enrollment_id + "' lists utterance '" + id +
                  "' of another speaker");
      utts.push_back(*rec);
    }
    models.emplace(spec.enrollment_id, build_enrollment_model(utts, spec.enrollment_id));
  }
  return models;
}

/// Scores every trial in protocol order. With a projector, each enrollment
/// centroid is recomputed from its projected members and every test embedding
/// is projected before the cosine.
inline ScoreSet score_protocol(const TrialProtocol& protocol,
                               const std::map<std::string, EnrollmentModel>& enrollments,
                               const LabeledEmbeddingSet& tests,
                               const AttackerModel* projector = nullptr) {
  std::map<std::string, Embedding> centroids;
  for (const auto& [id, model] : enrollments) {
    if (!projector) {
      centroids.emplace(id, model.centroid);
      continue;
    }
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(projector->k()));
    for (const auto& m : model.members) sum += project(*projector, m).vec();
    const double n = sum.norm();
    require(n > 1e-12, "enrollment model '" + id + "' has a zero-norm projected mean");
    centroids.emplace(id, Embedding(Eigen::VectorXd(sum / n)));
  }

  std::unordered_map<std::string, Embedding> projected_tests;
  ScoreSet out;
  out.entries.reserve(protocol.trials.size());
  for (const auto& trial : protocol.trials) {
    const auto c = centroids.find(trial.enrollment_id);
    require(c != centroids.end(), "trial " + trial.enrollment_id + " " +
                                      trial.test_utterance_id + ": unknown enrollment id");
    const auto* rec = tests.find(trial.test_utterance_id);
    require(rec != nullptr, "trial " + trial.enrollment_id + " " + trial.test_utterance_id +
                                ": unknown test utterance");
    double score;
    if (projector) {
      auto p = projected_tests.find(trial.test_utterance_id);
      if (p == projected_tests.end()) {
        p = projected_tests.emplace(trial.test_utterance_id, project(*projector, rec->embedding))
                .first;
      }
      score = cosine_score(c->second, p->second);
    } else {
      score = cosine_score(c->second, rec->embedding);
    }
    out.entries.push_back({trial.enrollment_id, trial.test_utterance_id, trial.label, score});
  }
  return out;
}

/// Convenience overload: enrollment models are built from `enroll`.
inline ScoreSet score_protocol(const TrialProtocol& protocol, const LabeledEmbeddingSet& enroll,
                               const LabeledEmbeddingSet& tests,
                               const AttackerModel* projector = nullptr) {
  return score_protocol(protocol, build_enrollment_models(protocol, enroll), tests, projector);
}

}  // namespace vpeval
