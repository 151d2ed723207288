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

// Acceptance gate. Prints one PASS/FAIL line per criterion and exits non-zero
// if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "vpeval/metrics.hpp"
#include "vpeval/metrics_oracle.hpp"
#include "vpeval/paper_suite.hpp"
#include "vpeval/protocol.hpp"
#include "vpeval/suite.hpp"

namespace fs = std::filesystem;
using namespace vpeval;

namespace {

constexpr int kSeeds = 20;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string fmt(double v, int decimals = 2) { return format_fixed(v, decimals); }

struct Outcome {
  bool pass;
  std::string detail;
};

int g_failures = 0;

void report(int id, const std::string& name, const Outcome& o) {
  std::cout << (o.pass ? "PASS" : "FAIL") << "  criterion " << id << " (" << name << "): "
            << o.detail << std::endl;
  if (!o.pass) ++g_failures;
}

Outcome guarded(const std::function<Outcome()>& f) {
  try {
    return f();
  } catch (const std::exception& e) {
    return {false, std::string("exception: ") + e.what()};
  }
}

ScoreSet make_scores(const std::vector<double>& t, const std::vector<double>& n) {
  ScoreSet s;
  for (std::size_t i = 0; i < t.size(); ++i) {
    s.entries.push_back({"e", "t" + std::to_string(i), TrialLabel::kTarget, t[i]});
  }
  for (std::size_t i = 0; i < n.size(); ++i) {
    s.entries.push_back({"e", "n" + std::to_string(i), TrialLabel::kNontarget, n[i]});
  }
  return s;
}

ScoreSet random_scores(Rng& rng, int variant) {
  const std::size_t nt = 100 + rng.uniform_index(200), nn = 100 + rng.uniform_index(400);
  const double shift = 3.0 * rng.uniform();
  std::vector<double> t(nt), n(nn);
  for (auto& x : t) x = rng.normal() + shift;
  for (auto& x : n) x = rng.normal();
  if (variant % 4 == 0) {  // millesimal rounding, a few ties
    for (auto& x : t) x = std::round(x * 1e3) / 1e3;
    for (auto& x : n) x = std::round(x * 1e3) / 1e3;
  } else if (variant % 4 == 1) {  // printed score precision
    for (auto& x : t) x = std::round(x * 1e6) / 1e6;
    for (auto& x : n) x = std::round(x * 1e6) / 1e6;
  }
  return make_scores(t, n);
}

// ---- criterion 1 -------------------------------------------------------------

Outcome eer_oracle_equivalence() {
  const auto t0 = Clock::now();
  Rng rng(derive_seed(1, "acceptance-eer"));
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const auto s = random_scores(rng, i);
    worst = std::max(worst, std::abs(compute_eer(s).value - eer_bruteforce_oracle(s).value));
  }
  bool exact = true;
  const std::vector<std::pair<ScoreSet, double>> worked{
      {make_scores({1.0, 1.0}, {0.0, 0.0}), 0.0},
      {make_scores({0.5}, {0.5}), 50.0},
      {make_scores({0.9, 0.8, 0.3}, {0.7, 0.4, 0.2}), 100.0 / 3.0}};
  std::string values;
  for (const auto& [s, expected] : worked) {
    const double a = compute_eer(s).value, b = eer_bruteforce_oracle(s).value;
    exact = exact && std::abs(a - expected) < 1e-12 && std::abs(b - expected) < 1e-12;
    values += (values.empty() ? "" : "/") + Eer{a}.str();
  }
  const double secs = seconds_since(t0);
  return {worst <= 0.5 && exact && secs < 10.0,
          "max |compute - oracle| = " + fmt(worst, 4) + " pp over 1000 sets; worked examples " +
              values + (exact ? " exact" : " NOT exact") + "; " + fmt(secs) + " s"};
}

// ---- criterion 2 -------------------------------------------------------------

Outcome eer_properties() {
  Rng rng(derive_seed(2, "acceptance-props"));
  int monotone_bad = 0, symmetry_bad = 0;
  for (int i = 0; i < 200; ++i) {
    const auto s = random_scores(rng, i);
    const double base = compute_eer(s).value;
    auto m = s;
    for (auto& e : m.entries) e.score = std::exp(2.0 * e.score) - 3.0;
    monotone_bad += compute_eer(m).value != base;
    auto f = s;
    for (auto& e : f.entries) {
      e.label = e.label == TrialLabel::kTarget ? TrialLabel::kNontarget : TrialLabel::kTarget;
      e.score = -e.score;
    }
    symmetry_bad += compute_eer(f).value != base;
  }
  std::vector<double> lo(150), hi(150);
  for (std::size_t i = 0; i < lo.size(); ++i) {
    lo[i] = rng.uniform();
    hi[i] = 2.0 + rng.uniform();
  }
  const bool separated = compute_eer(make_scores(hi, lo)).value == 0.0 &&
                         compute_eer(make_scores({1.0, 1.0}, {0.0, 0.0})).value == 0.0;
  const bool identical = compute_eer(make_scores(lo, lo)).value == 50.0 &&
                         compute_eer(make_scores({0.5}, {0.5})).value == 50.0;
  return {monotone_bad == 0 && symmetry_bad == 0 && separated && identical,
          "monotone violations " + std::to_string(monotone_bad) + "/200, label-sign violations " +
              std::to_string(symmetry_bad) + "/200, separated=0%: " +
              (separated ? "yes" : "no") + ", identical=50%: " + (identical ? "yes" : "no")};
}

// ---- suite runs (criteria 3-8) ---------------------------------------------

struct SuiteRuns {
  std::vector<ScenarioResult> results;
  double seconds = 0;
  std::string error;

  std::vector<double> test(const std::string& label) const {
    std::vector<double> v;
    for (const auto& r : results) v.push_back(r.find(label)->point.eer_test.value);
    return v;
  }
};

SuiteRuns run_paper_suite() {
  SuiteRuns runs;
  const auto t0 = Clock::now();
  try {
    for (int seed = 1; seed <= kSeeds; ++seed) {
      auto cfg = paper_suite_config();
      cfg.master_seed = static_cast<std::uint64_t>(seed);
      runs.results.push_back(run_scenario_suite(cfg));
    }
  } catch (const std::exception& e) {
    runs.error = e.what();
  }
  runs.seconds = seconds_since(t0);
  return runs;
}

Outcome full_mismatch_ordering(const SuiteRuns& runs) {
  const std::vector<std::string> systems{"B3", "B4", "B5"};
  bool ok = true;
  std::string detail;
  for (const auto& e : systems) {
    const double matched = median(runs.test(e + "/" + e));
    for (const auto& a : systems) {
      if (a == e) continue;
      const double mism = median(runs.test(e + "/" + a));
      ok = ok && mism - matched >= 5.0;
      detail += (detail.empty() ? "" : "; ") + e + ": " + fmt(matched) + " vs " + a + " " +
                fmt(mism);
    }
  }
  return {ok, "median EER_test matched vs full mismatch: " + detail};
}

Outcome partial_mismatch_ordering(const SuiteRuns& runs) {
  const auto b3 = runs.test("B3/B3"), b3v = runs.test("B3/B3-voc");
  const auto b5 = runs.test("B5/B5"), b5f = runs.test("B5/B5-feat");
  std::vector<double> voc_gap, feat_gap;
  for (std::size_t i = 0; i < b3.size(); ++i) {
    voc_gap.push_back(b3v[i] - b3[i]);
    feat_gap.push_back(b5f[i] - b5[i]);
  }
  const double v = median(voc_gap), f = median(feat_gap);
  return {f > v && v >= 0.0, "median gap feature_swap " + fmt(f) + " pp, vocoder_swap " +
                                 fmt(v) + " pp (B3 " + fmt(median(b3)) + " -> " +
                                 fmt(median(b3v)) + ", B5 " + fmt(median(b5)) + " -> " +
                                 fmt(median(b5f)) + ")"};
}

Outcome hidden_mismatch_collapse(const SuiteRuns& runs) {
  const double sl = median(runs.test("B3-SL/B3-SL")), ul = median(runs.test("B3-SL/B3"));
  const double det = median(runs.test("C1/C1-re")), rnd = median(runs.test("C1/C1-rand"));
  return {sl >= ul + 10.0 && det >= rnd + 10.0,
          "speaker-level trained " + fmt(sl) + " vs utterance-level trained " + fmt(ul) +
              "; deterministic retrained " + fmt(det) + " vs random-selection trained " +
              fmt(rnd)};
}

Outcome validation_gap_direction(const SuiteRuns& runs) {
  int n = 0, bad = 0;
  std::string worst;
  double worst_margin = 1e9;
  for (const auto& r : runs.results) {
    for (const auto& o : r.outcomes) {
      if (!o.point.matched()) continue;
      ++n;
      const double m = o.point.eer_test.value - o.point.eer_val.value;
      if (m <= 0) ++bad;
      if (m < worst_margin) {
        worst_margin = m;
        worst = o.pairing.label;
      }
    }
  }
  return {bad == 0 && n > 0, std::to_string(n - bad) + "/" + std::to_string(n) +
                                 " matched pairings with EER_val < EER_test (smallest gap " +
                                 fmt(worst_margin) + " pp, " + worst + ")"};
}

Outcome detector_efficacy(const SuiteRuns& runs) {
  int mism = 0, flagged = 0, hold = 0, hold_flagged = 0;
  for (const auto& r : runs.results) {
    for (const auto& o : r.outcomes) {
      if (!o.verdict) continue;
      if (o.pairing.role == PairingRole::kMismatch) {
        ++mism;
        flagged += o.verdict->flagged;
      } else if (o.pairing.role == PairingRole::kHoldout) {
        ++hold;
        hold_flagged += o.verdict->flagged;
      }
    }
  }
  const double rate = mism ? static_cast<double>(flagged) / mism : 0.0;
  return {mism > 0 && hold > 0 && rate >= 0.9 && hold_flagged == 0,
          std::to_string(flagged) + "/" + std::to_string(mism) + " mismatched flagged (" +
              fmt(100 * rate, 1) + "%), " + std::to_string(hold_flagged) + "/" +
              std::to_string(hold) + " matched holdouts flagged, margin 2.0"};
}

Outcome published_points(const SuiteRuns& runs) {
  const EvaluationPoint b3{Eer{27}, Eer{11}, SystemId{"B3", std::nullopt},
                           SystemId{"B3", std::nullopt}, "published B3/B3"};
  const EvaluationPoint cand{Eer{44}, Eer{10}, SystemId{"B3", std::nullopt},
                             SystemId{"B4", std::nullopt}, "published 44 -> 10"};
  // Additional matched reference points, taken from the first simulated run.
  const auto refs = runs.results.front();
  std::vector<EvaluationPoint> extra;
  for (const auto& label : {"B2/B2", "B4/B4", "B5/B5"}) extra.push_back(refs.find(label)->point);

  const auto gap_b3 = assess(b3, ReferenceLine{0, 0, 2}).relative_gap.value();
  const auto gap_c = assess(cand, ReferenceLine{0, 0, 2}).relative_gap.value();
  bool single_rejected = false;
  try {
    detect_report({b3}, {cand});
  } catch (const InputError&) {
    single_rejected = true;
  }
  bool all_flagged = true;
  std::string residuals;
  std::vector<EvaluationPoint> matched{b3};
  for (const auto& p : extra) {
    matched.push_back(p);
    const auto rep = detect_report(matched, {cand}, 2.0);
    all_flagged = all_flagged && rep.verdicts.front().flagged;
    residuals += (residuals.empty() ? "" : ", ") + fmt(rep.verdicts.front().residual);
  }
  const bool gaps = std::abs(gap_b3 - 0.59) < 0.005 && std::abs(gap_c - 0.77) < 0.005;
  return {gaps && single_rejected && all_flagged,
          "relative gaps " + fmt(gap_b3, 3) + " and " + fmt(gap_c, 3) +
              "; one matched point " + (single_rejected ? "rejected" : "NOT rejected") +
              "; candidate residual with 2/3/4 matched points: " + residuals +
              (all_flagged ? " (flagged)" : " (NOT always flagged)")};
}

// ---- criterion 9 -------------------------------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism_and_runtime() {
  const fs::path base = fs::path(VPEVAL_TEST_TMP);
  fs::remove_all(base);
  fs::create_directories(base);
  double longest = 0;
  for (const char* run : {"run_a", "run_b"}) {
    const std::string cmd = std::string("\"") + VPEVAL_CLI + "\" run-suite --config \"" +
                            VPEVAL_SOURCE_DIR + "/configs/paper_suite.conf\" --seed 7 --out-dir \"" +
                            (base / run).string() + "\" > \"" + (base / run).string() + ".log\"";
    const auto t0 = Clock::now();
    const int rc = std::system(cmd.c_str());
    longest = std::max(longest, seconds_since(t0));
    if (rc != 0) return {false, std::string("run-suite exited with status ") + std::to_string(rc)};
  }
  int files = 0;
  for (const auto& entry : fs::directory_iterator(base / "run_a")) {
    const auto other = base / "run_b" / entry.path().filename();
    if (!fs::exists(other) || slurp(entry.path()) != slurp(other)) {
      return {false, entry.path().filename().string() + " differs between runs"};
    }
    ++files;
  }
  const bool has_svg = fs::exists(base / "run_a" / "report.svg");
  return {files >= 6 && has_svg && longest < 300.0,
          std::to_string(files) + " output files byte-identical across two runs; slowest run " +
              fmt(longest, 1) + " s (limit 300 s)"};
}

// ---- criterion 10 ------------------------------------------------------------

Outcome protocol_invariants() {
  // Closed-form case: 8 utterances per speaker, defaults.
  std::vector<UtteranceRecord> recs;
  Rng rng(10);
  for (int s = 0; s < 30; ++s) {
    for (int u = 0; u < 8; ++u) {
      std::vector<double> v(4);
      for (auto& x : v) x = rng.normal();
      recs.push_back({"s" + std::to_string(s) + "u" + std::to_string(u), "s" + std::to_string(s),
                      Embedding(v).normalized(), std::nullopt});
    }
  }
  const LabeledEmbeddingSet eight(recs, SetRole::kValidation);
  std::string problems;
  auto check = [&](const LabeledEmbeddingSet& data, const TrialProtocol& p, std::size_t nontargets) {
    std::set<std::string> enrolled;
    for (const auto& e : p.enrollments) {
      if (e.utterance_ids.size() != 5) problems += " enroll!=5:" + e.enrollment_id;
      enrolled.insert(e.utterance_ids.begin(), e.utterance_ids.end());
    }
    std::map<std::string, std::pair<std::size_t, std::size_t>> counts;
    for (const auto& t : p.trials) {
      if (enrolled.count(t.test_utterance_id)) problems += " overlap:" + t.test_utterance_id;
      (t.label == TrialLabel::kTarget ? counts[t.enrollment_id].first
                                      : counts[t.enrollment_id].second)++;
    }
    for (const auto& e : p.enrollments) {
      const std::size_t n = data.utterances_of(e.speaker_id).size();
      const auto c = counts[e.enrollment_id];
      if (c.first != n - 5 || c.second != nontargets) problems += " counts:" + e.enrollment_id;
    }
  };
  const auto p8 = build_validation_protocol(eight, 3);
  check(eight, p8, 5);
  const auto& first = p8.trials;
  std::size_t t0 = 0, n0 = 0;
  for (const auto& t : first) {
    if (t.enrollment_id != "s0") continue;
    (t.label == TrialLabel::kTarget ? t0 : n0)++;
  }
  // Validation protocols of the simulated suite world.
  const auto cfg = paper_suite_config();
  const auto world = sample_world(cfg.world, derive_seed(cfg.master_seed, "world"));
  std::size_t kept = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto split = split_train_validation(world.train, cfg.validation_fraction, seed);
    const auto p = build_validation_protocol(split.validation, seed, 5, cfg.validation_nontargets);
    check(split.validation, p, cfg.validation_nontargets);
    kept += p.enrollments.size();
  }
  const bool ok = problems.empty() && t0 == 3 && n0 == 5;
  return {ok, "8-utterance speaker -> " + std::to_string(t0) + " target + " + std::to_string(n0) +
                  " nontarget trials; " + std::to_string(p8.enrollments.size() + kept) +
                  " enrollment models checked" + (problems.empty() ? "" : "; problems:" + problems)};
}

}  // namespace

int main() {
  report(1, "EER oracle equivalence", guarded(eer_oracle_equivalence));
  report(2, "EER properties", guarded(eer_properties));

  const SuiteRuns runs = run_paper_suite();
  std::cout << "      paper_suite: " << runs.results.size() << " seeded runs in "
            << fmt(runs.seconds, 1) << " s" << std::endl;
  auto with_runs = [&](const std::function<Outcome(const SuiteRuns&)>& f) {
    if (!runs.error.empty()) return Outcome{false, "suite failed: " + runs.error};
    return guarded([&] { return f(runs); });
  };
  report(3, "full-mismatch ordering", with_runs(full_mismatch_ordering));
  report(4, "partial-mismatch ordering", with_runs(partial_mismatch_ordering));
  report(5, "hidden-mismatch collapse", with_runs(hidden_mismatch_collapse));
  report(6, "validation-gap direction", with_runs(validation_gap_direction));
  report(7, "detector efficacy", with_runs(detector_efficacy));
  report(8, "published-point verdicts", with_runs(published_points));
  report(9, "determinism and runtime", guarded(determinism_and_runtime));
  report(10, "protocol invariants", guarded(protocol_invariants));

  std::cout << (g_failures == 0 ? "all criteria passed" : std::to_string(g_failures) + " criteria failed")
            << std::endl;
  return g_failures == 0 ? 0 : 1;
}
