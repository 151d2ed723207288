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

// Brute-force EER used to cross-check compute_eer. Shares no code with it.

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "vpeval/metrics.hpp"

namespace vpeval {

/// Sweeps every midpoint between adjacent distinct scores plus +-inf,
/// counting errors directly at each threshold. Returns (FAR + FRR) / 2 at the
/// threshold minimising |FAR - FRR|, ties broken by the smaller max(FAR, FRR).
inline Eer eer_bruteforce_oracle(const ScoreSet& scores) {
  std::vector<double> targets, nontargets, all;
  for (const auto& e : scores.entries) {
    require(std::isfinite(e.score), "non-finite score");
    (e.label == TrialLabel::kTarget ? targets : nontargets).push_back(e.score);
    all.push_back(e.score);
  }
  require(!targets.empty() && !nontargets.empty(),
          "EER needs at least one target and one nontarget score");
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());

  std::vector<double> thresholds{-std::numeric_limits<double>::infinity()};
  for (std::size_t i = 0; i + 1 < all.size(); ++i) {
    thresholds.push_back(0.5 * (all[i] + all[i + 1]));
  }
  thresholds.push_back(std::numeric_limits<double>::infinity());

  double best_diff = std::numeric_limits<double>::infinity();
  double best_max = std::numeric_limits<double>::infinity();
  double best = 0.0;
  for (double th : thresholds) {
    double rejected_targets = 0, accepted_nontargets = 0;
    for (double s : targets) rejected_targets += s < th;
    for (double s : nontargets) accepted_nontargets += s >= th;
    const double frr = rejected_targets / static_cast<double>(targets.size());
    const double far = accepted_nontargets / static_cast<double>(nontargets.size());
    const double diff = std::abs(far - frr);
    const double mx = std::max(far, frr);
    if (diff < best_diff || (diff == best_diff && mx < best_max)) {
      best_diff = diff;
      best_max = mx;
      best = 0.5 * (far + frr);
    }
  }
  return Eer{100.0 * best};
}

}  // namespace vpeval
