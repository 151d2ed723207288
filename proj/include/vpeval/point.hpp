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

#include <string>

#include "vpeval/core.hpp"
#include "vpeval/metrics.hpp"

namespace vpeval {

/// One (evaluation data, attacker) pairing summarised by its two EERs.
struct EvaluationPoint {
  Eer eer_test;
  Eer eer_val;
  SystemId eval_system;
  SystemId attacker_system;
  std::string scenario_label;

  bool matched() const { return eval_system == attacker_system; }

  void validate() const {
    require(eer_test.value >= 0.0 && eer_test.value <= 100.0 && eer_val.value >= 0.0 &&
                eer_val.value <= 100.0,
            "point '" + scenario_label + "': EERs must lie in [0, 100]");
  }

  friend bool operator==(const EvaluationPoint&, const EvaluationPoint&) = default;
};

}  // namespace vpeval
