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

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "vpeval/core.hpp"
#include "vpeval/io.hpp"

namespace vpeval {

/// Equal error rate in percent, 0 <= value <= 100.
struct Eer {
  double value = 0.0;

  /// Two-decimal rendering used in every report.
  std::string str() const { return format_fixed(value, 2); }

  friend auto operator<=>(const Eer&, const Eer&) = default;
};

namespace metrics_detail {

inline void check_scores(std::span<const double> targets, std::span<const double> nontargets) {
  require(!targets.empty(), "EER needs at least one target score");
  require(!nontargets.empty(), "EER needs at least one nontarget score");
  for (double s : targets) require(std::isfinite(s), "non-finite target score");
  for (double s : nontargets) require(std::isfinite(s), "non-finite nontarget score");
}

inline void split_scores(const ScoreSet& scores, std::vector<double>& targets,
                         std::vector<double>& nontargets) {
  for (const auto& e : scores.entries) {
    (e.label == TrialLabel::kTarget ? targets : nontargets).push_back(e.score);
  }
}

}  // namespace metrics_detail

/// Equal error rate of a verification experiment where higher scores mean
/// "same speaker" and a trial is accepted when score >= threshold.
///
/// The operating points are the thresholds -inf, every distinct score, and
/// +inf. At threshold t, FRR(t) is the fraction of target scores below t and
/// FAR(t) the fraction of nontarget scores at or above t. The two curves are
/// interpolated linearly between consecutive operating points and the EER is
/// their crossing. Counts are kept as integers so the crossing is computed as
/// one rational number; this keeps the result independent of score order and
/// exactly symmetric under label swap with score negation.
inline Eer compute_eer(std::span<const double> targets, std::span<const double> nontargets) {
  metrics_detail::check_scores(targets, nontargets);
  std::vector<double> t(targets.begin(), targets.end());
  std::vector<double> n(nontargets.begin(), nontargets.end());
  std::sort(t.begin(), t.end());
  std::sort(n.begin(), n.end());
  const auto num_t = static_cast<std::int64_t>(t.size());
  const auto num_n = static_cast<std::int64_t>(n.size());

  // miss = #targets < threshold, fa = #nontargets >= threshold.
  // gap = miss * N - fa * T is FRR - FAR scaled by T * N and is nondecreasing.
  std::int64_t prev_miss = 0, prev_gap = -num_n * num_t;  // threshold -inf
  std::size_t it = 0, in = 0;
  auto crossing = [&](std::int64_t miss, std::int64_t gap) {
    // Values of (miss, gap) at the bracketing points give
    // EER = (miss0 * gap1 - miss1 * gap0) / (T * (gap1 - gap0)).
    const __int128 numer = static_cast<__int128>(prev_miss) * gap -
                           static_cast<__int128>(miss) * prev_gap;
    __int128 denom = static_cast<__int128>(num_t) * (gap - prev_gap);
    __int128 a = numer < 0 ? -numer : numer, b = denom;
    while (b != 0) {
      const __int128 r = a % b;
      a = b;
      b = r;
    }
    const __int128 g = a == 0 ? 1 : a;
    return Eer{100.0 * static_cast<double>(numer / g) / static_cast<double>(denom / g)};
  };
  while (it < t.size() || in < n.size()) {
    double threshold;
    if (it == t.size()) threshold = n[in];
    else if (in == n.size()) threshold = t[it];
    else threshold = std::min(t[it], n[in]);
    // Scores strictly below `threshold` have been consumed: it targets and in
    // nontargets are below, so FAR counts the rest.
    const std::int64_t miss = static_cast<std::int64_t>(it);
    const std::int64_t fa = num_n - static_cast<std::int64_t>(in);
    const std::int64_t gap = miss * num_n - fa * num_t;
    if (gap >= 0) return crossing(miss, gap);
    prev_miss = miss;
    prev_gap = gap;
    while (it < t.size() && t[it] == threshold) ++it;
    while (in < n.size() && n[in] == threshold) ++in;
  }
  // threshold +inf: everything rejected.
  return crossing(num_t, num_t * num_n);
}

inline Eer compute_eer(const ScoreSet& scores) {
  std::vector<double> targets, nontargets;
  metrics_detail::split_scores(scores, targets, nontargets);
  return compute_eer(targets, nontargets);
}

}  // namespace vpeval
