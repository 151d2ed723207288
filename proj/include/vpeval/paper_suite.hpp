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

// Built-in copy of configs/paper_suite.conf (a test keeps the two identical).

#pragma once

#include <string_view>

#include "vpeval/suite.hpp"

namespace vpeval {

inline constexpr std::string_view kPaperSuiteConfig = R"suite(# Reference scenario suite used by the acceptance gate and `vpeval run-suite`.
#
# B2..B5   independent utterance-level systems with decreasing leak
# B3-voc   B3 with its synthesis rotation replaced
# B5-feat  B5 with its feature mixer replaced
# B3-SL    B3 with one pseudo-speaker per source speaker
# C1       deterministic target selection; C1-re rebuilt selector;
#          C1-rand the same system with random per-utterance selection

[world]
dim = 32
train_speakers = 50
eval_speakers = 200
utterances_per_speaker = 400
eval_utterances_per_speaker = 60
channel_noise_sigma = 0.3

[suite]
name = paper_suite
master_seed = 1
margin = 2.0
validation_fraction = 0.1
attacker_k = 8
shrinkage = 0.1
validation_enroll = 5
validation_nontargets = 100
eval_nontargets = 10

[system B2]
leak = 0.2

[system B3]
leak = 0.16

[system B4]
leak = 0.13

[system B5]
leak = 0.10

[system B3-voc]
base = B3
variant = vocoder_swap

[system B5-feat]
base = B5
variant = feature_swap

[system B3-SL]
base = B3
selection = speaker_random

[system C1]
leak = 0.16
selection = deterministic

[system C1-re]
base = C1
variant = selector_rebuild

[system C1-rand]
base = C1
selection = utterance_random

[pairing B2/B2]
eval = B2
attacker = B2
role = reference

[pairing B3/B3]
eval = B3
attacker = B3
role = reference

[pairing B4/B4]
eval = B4
attacker = B4
role = reference

[pairing B5/B5]
eval = B5
attacker = B5
role = reference

[pairing B3-voc/B3-voc]
eval = B3-voc
attacker = B3-voc
role = holdout

[pairing B5-feat/B5-feat]
eval = B5-feat
attacker = B5-feat
role = holdout

[pairing B3/B4]
eval = B3
attacker = B4
role = mismatch

[pairing B3/B5]
eval = B3
attacker = B5
role = mismatch

[pairing B4/B3]
eval = B4
attacker = B3
role = mismatch

[pairing B4/B5]
eval = B4
attacker = B5
role = mismatch

[pairing B5/B3]
eval = B5
attacker = B3
role = mismatch

[pairing B5/B4]
eval = B5
attacker = B4
role = mismatch

[pairing B3/B3-voc]
eval = B3
attacker = B3-voc
role = mismatch

[pairing B5/B5-feat]
eval = B5
attacker = B5-feat
role = mismatch

[pairing B3-SL/B3-SL]
eval = B3-SL
attacker = B3-SL
role = mismatch

[pairing B3-SL/B3]
eval = B3-SL
attacker = B3
role = corrected

[pairing C1/C1-re]
eval = C1
attacker = C1-re
role = mismatch

[pairing C1/C1-rand]
eval = C1
attacker = C1-rand
role = corrected
)suite";

inline ScenarioConfig paper_suite_config() {
  return scenario_config_from(parse_config_text(kPaperSuiteConfig, "paper_suite"));
}

}  // namespace vpeval
