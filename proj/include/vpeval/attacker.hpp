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

// Linear-discriminant attacker trained on anonymised speaker-labelled data.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <numeric>
#include <string>
#include <vector>

#include "vpeval/attacker_model.hpp"
#include "vpeval/metrics.hpp"
#include "vpeval/point.hpp"
#include "vpeval/protocol.hpp"
#include "vpeval/scoring.hpp"

namespace vpeval {

/// Regularised LDA.
///
/// S_w is the pooled within-speaker covariance, shrunk as
/// (1 - shrinkage) * S_w + shrinkage * (trace(S_w) / dim) * I (plain I when
/// the trace is zero), and S_b the count-weighted covariance of the speaker
/// means. The discriminant directions are S_w^{-1/2} u for the k leading
/// eigenvectors u of S_w^{-1/2} S_b S_w^{-1/2}; they are Gram-Schmidt
/// orthonormalised and each row's first nonzero component is made positive.
inline AttackerModel train_attacker(const LabeledEmbeddingSet& train, std::size_t k = 8,
                                    double shrinkage = 0.1) {
  const auto& speakers = train.speakers();
  require(speakers.size() >= 2, "attacker training needs at least 2 speakers, got " +
                                    std::to_string(speakers.size()));
  const std::size_t dim = train.dim();
  require(k >= 1, "attacker rank k must be >= 1");
  require(k < dim && k <= speakers.size() - 1,
          "attacker rank k=" + std::to_string(k) + " must be < dim (" + std::to_string(dim) +
              ") and <= speakers - 1 (" + std::to_string(speakers.size() - 1) + ")");
  require(shrinkage >= 0.0 && shrinkage <= 1.0, "shrinkage must lie in [0, 1]");
  for (const auto& s : speakers) {
    require(train.utterances_of(s).size() >= 2,
            "speaker " + s + " needs at least 2 training utterances");
  }
  for (const auto& r : train.records()) {
    require(std::abs(r.embedding.norm() - 1.0) <= 1e-6,
            "training embedding " + r.utterance_id + " is not unit-norm");
  }

  const auto d = static_cast<Eigen::Index>(dim);
  const double n_total = static_cast<double>(train.size());
  Eigen::VectorXd global = Eigen::VectorXd::Zero(d);
  for (const auto& r : train.records()) global += r.embedding.vec();
  global /= n_total;

  Eigen::MatrixXd sw = Eigen::MatrixXd::Zero(d, d);
  Eigen::MatrixXd sb = Eigen::MatrixXd::Zero(d, d);
  for (const auto& s : speakers) {
    const auto& idx = train.utterances_of(s);
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
    for (auto i : idx) mean += train[i].embedding.vec();
    mean /= static_cast<double>(idx.size());
    for (auto i : idx) {
      const Eigen::VectorXd c = train[i].embedding.vec() - mean;
      sw.selfadjointView<Eigen::Lower>().rankUpdate(c);
    }
    const Eigen::VectorXd m = mean - global;
    sb.selfadjointView<Eigen::Lower>().rankUpdate(m, static_cast<double>(idx.size()));
  }
  sw = sw.selfadjointView<Eigen::Lower>();
  sb = sb.selfadjointView<Eigen::Lower>();
  sw /= n_total;
  sb /= n_total;
  // Without any within-speaker spread (noise-free data) the target is I.
  double scale = sw.trace() / static_cast<double>(dim);
  if (!(scale > 1e-15)) scale = 1.0;
  sw = (1.0 - shrinkage) * sw;
  sw.diagonal().array() += shrinkage * scale;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> wes(sw);
  ensure(wes.info() == Eigen::Success, "eigen-decomposition of S_w failed");
  const double floor = 1e-12 * std::max(1.0, wes.eigenvalues().cwiseAbs().maxCoeff());
  require(wes.eigenvalues().minCoeff() > floor,
          "within-speaker scatter is singular despite shrinkage " + std::to_string(shrinkage));
  const Eigen::MatrixXd whiten = wes.eigenvectors() *
                                 wes.eigenvalues().cwiseInverse().cwiseSqrt().asDiagonal() *
                                 wes.eigenvectors().transpose();

  Eigen::MatrixXd wb = whiten * sb * whiten;
  wb = 0.5 * (wb + wb.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> bes(wb);
  ensure(bes.info() == Eigen::Success, "eigen-decomposition of whitened S_b failed");

  // Eigen returns ascending eigenvalues, order by value descending, then index.
  std::vector<Eigen::Index> order(static_cast<std::size_t>(d));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return bes.eigenvalues()[a] > bes.eigenvalues()[b];
  });

  Eigen::MatrixXd rows(static_cast<Eigen::Index>(k), d);
  for (std::size_t r = 0; r < k; ++r) {
    Eigen::VectorXd v = whiten * bes.eigenvectors().col(order[r]);
    for (std::size_t p = 0; p < r; ++p) {
      const auto prev = rows.row(static_cast<Eigen::Index>(p)).transpose();
      v -= prev.dot(v) * prev;
    }
    const double n = v.norm();
    ensure(n > 1e-10, "discriminant directions are linearly dependent");
    v /= n;
    for (Eigen::Index c = 0; c < d; ++c) {
      if (std::abs(v[c]) > 1e-12) {
        if (v[c] < 0) v = -v;
        break;
      }
    }
    rows.row(static_cast<Eigen::Index>(r)) = v.transpose();
  }

  AttackerModel model;
  model.projection = std::move(rows);
  model.trained_on = train.anonymised_by().value_or(SystemId{"original", std::nullopt});
  model.shrinkage = shrinkage;
  return model;
}

/// Scores the evaluation and validation protocols through the attacker's
/// projection and returns the EER pair. `val_data` supplies both enrollment
/// and test utterances of the validation protocol.
inline EvaluationPoint evaluate_attack(const AttackerModel& model,
                                       const TrialProtocol& eval_protocol,
                                       const LabeledEmbeddingSet& eval_enroll,
                                       const LabeledEmbeddingSet& eval_test,
                                       const TrialProtocol& val_protocol,
                                       const LabeledEmbeddingSet& val_data,
                                       const SystemId& eval_system,
                                       const std::string& scenario_label = "") {
  const ScoreSet test_scores = score_protocol(eval_protocol, eval_enroll, eval_test, &model);
  const ScoreSet val_scores = score_protocol(val_protocol, val_data, val_data, &model);
  EvaluationPoint point;
  point.eer_test = compute_eer(test_scores);
  point.eer_val = compute_eer(val_scores);
  point.eval_system = eval_system;
  point.attacker_system = model.trained_on;
  point.scenario_label = scenario_label;
  return point;
}

}  // namespace vpeval
