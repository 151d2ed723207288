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

// End-to-end scenario suites: one simulated world, a set of anonymisation
// systems and a list of (evaluation system, attacker system) pairings.
//
// For every pairing the attacker's training data and the evaluation
// enrollment data are anonymised with the attacker's system, the evaluation
// test data with the evaluated system. The attacker is trained on 90% of its
// data and validated on the held-out 10% (same speakers). The reference line
// is fitted over the pairings with role `reference`; every other pairing is
// assessed against it.

#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "vpeval/anonsim.hpp"
#include "vpeval/attacker.hpp"
#include "vpeval/config.hpp"
#include "vpeval/detector.hpp"
#include "vpeval/protocol.hpp"
#include "vpeval/svg.hpp"

namespace vpeval {

enum class PairingRole { kReference, kHoldout, kMismatch, kCorrected };

inline std::string_view to_string(PairingRole r) {
  switch (r) {
    case PairingRole::kReference: return "reference";
    case PairingRole::kHoldout: return "holdout";
    case PairingRole::kMismatch: return "mismatch";
    case PairingRole::kCorrected: return "corrected";
  }
  return "mismatch";
}

inline PairingRole parse_pairing_role(std::string_view s) {
  if (s == "reference") return PairingRole::kReference;
  if (s == "holdout") return PairingRole::kHoldout;
  if (s == "mismatch") return PairingRole::kMismatch;
  if (s == "corrected") return PairingRole::kCorrected;
  throw InputError("unknown pairing role '" + std::string(s) + "'");
}

struct SystemDef {
  std::string name;
  SystemParams params;                 // used when `base` is empty
  std::string base;                    // derive from another system
  std::optional<Selection> selection;  // selection override for derived systems
  std::optional<VariantKind> variant;
};

struct PairingDef {
  std::string label;
  std::string eval_system;
  std::string attacker_system;
  PairingRole role = PairingRole::kMismatch;
};

struct ScenarioConfig {
  std::string name = "suite";
  WorldConfig world;
  std::vector<SystemDef> systems;
  std::vector<PairingDef> pairings;
  std::uint64_t master_seed = 1;
  double margin = 2.0;
  double validation_fraction = 0.1;
  std::size_t attacker_k = 8;
  double shrinkage = 0.1;
  std::size_t validation_enroll = 5;
  std::size_t validation_nontargets = 5;
  std::size_t eval_nontargets = 5;

  const SystemDef* find_system(const std::string& n) const {
    for (const auto& s : systems) {
      if (s.name == n) return &s;
    }
    return nullptr;
  }

  void validate() const {
    world.validate();
    require(!systems.empty(), "suite '" + name + "' defines no systems");
    require(!pairings.empty(), "suite '" + name + "' defines no pairings");
    std::set<std::string> seen;
    for (const auto& s : systems) {
      require(is_token(s.name), "invalid system name '" + s.name + "'");
      require(seen.insert(s.name).second, "duplicate system '" + s.name + "'");
      if (!s.base.empty()) {
        const auto* b = find_system(s.base);
        require(b != nullptr, "system '" + s.name + "' derives from undefined system '" + s.base + "'");
        require(b->base.empty(), "system '" + s.name + "': base '" + s.base +
                                     "' must itself be a base system");
        require(s.selection || s.variant,
                "system '" + s.name + "' must set a selection or a variant");
      }
    }
    std::set<std::string> labels;
    for (const auto& p : pairings) {
      require(labels.insert(p.label).second, "duplicate pairing '" + p.label + "'");
      require(find_system(p.eval_system) != nullptr,
              "pairing '" + p.label + "' references undefined system '" + p.eval_system + "'");
      require(find_system(p.attacker_system) != nullptr,
              "pairing '" + p.label + "' references undefined system '" + p.attacker_system + "'");
      require(p.role != PairingRole::kReference || p.eval_system == p.attacker_system,
              "pairing '" + p.label + "': reference pairings must be matched");
    }
    require(margin >= 0.0, "margin must be >= 0");
  }
};

/// Builds a ScenarioConfig from a parsed document. Unknown sections and keys
/// are errors.
inline ScenarioConfig scenario_config_from(const ConfigDocument& doc) {
  ScenarioConfig cfg;
  for (const auto& sec : doc.sections) {
    if (sec.kind == "world") {
      require(sec.name.empty(), "[world] takes no name");
      auto& w = cfg.world;
      if (auto v = sec.get_count("dim")) w.dim = *v;
      if (auto v = sec.get_count("train_speakers")) w.n_train_speakers = *v;
      if (auto v = sec.get_count("eval_speakers")) w.n_eval_speakers = *v;
      if (auto v = sec.get_count("utterances_per_speaker")) w.utterances_per_speaker = *v;
      if (auto v = sec.get_count("eval_utterances_per_speaker")) w.eval_utterances_per_speaker = *v;
      if (auto v = sec.get_double("channel_noise_sigma")) w.channel_noise_sigma = *v;
      if (auto v = sec.get_bool("orthogonal_centroids")) w.orthogonal_centroids = *v;
    } else if (sec.kind == "suite") {
      require(sec.name.empty(), "[suite] takes no name");
      if (auto v = sec.get_string("name")) cfg.name = *v;
      if (auto v = sec.get_count("master_seed")) cfg.master_seed = *v;
      if (auto v = sec.get_double("margin")) cfg.margin = *v;
      if (auto v = sec.get_double("validation_fraction")) cfg.validation_fraction = *v;
      if (auto v = sec.get_count("attacker_k")) cfg.attacker_k = *v;
      if (auto v = sec.get_double("shrinkage")) cfg.shrinkage = *v;
      if (auto v = sec.get_count("validation_enroll")) cfg.validation_enroll = *v;
      if (auto v = sec.get_count("validation_nontargets")) cfg.validation_nontargets = *v;
      if (auto v = sec.get_count("eval_nontargets")) cfg.eval_nontargets = *v;
    } else if (sec.kind == "system") {
      require(!sec.name.empty(), "[system] needs a name");
      SystemDef def;
      def.name = sec.name;
      if (auto v = sec.get_string("base")) def.base = *v;
      if (auto v = sec.get_string("variant")) def.variant = parse_variant_kind(*v);
      if (auto v = sec.get_string("selection")) def.selection = parse_selection(*v);
      auto& p = def.params;
      p.system_id = SystemId{def.name, std::nullopt};
      if (def.base.empty()) {
        if (def.selection) p.selection = *def.selection;
        if (auto v = sec.get_double("target_strength")) p.target_strength = *v;
        if (auto v = sec.get_double("leak")) p.leak = *v;
        if (auto v = sec.get_double("post_noise")) p.post_noise = *v;
        if (auto v = sec.get_count("pool_size")) p.pool_size = *v;
        if (auto v = sec.get_count("target_rank")) p.target_rank = *v;
        if (auto v = sec.get_double("vocoder_angle")) p.vocoder_angle = *v;
      }
      sec.check_all_used();
      cfg.systems.push_back(std::move(def));
      continue;
    } else if (sec.kind == "pairing") {
      require(!sec.name.empty(), "[pairing] needs a label");
      PairingDef p;
      p.label = sec.name;
      const auto e = sec.get_string("eval");
      const auto a = sec.get_string("attacker");
      require(e && a, "[pairing " + sec.name + "] needs 'eval' and 'attacker'");
      p.eval_system = *e;
      p.attacker_system = *a;
      if (auto v = sec.get_string("role")) {
        p.role = parse_pairing_role(*v);
      } else {
        p.role = p.eval_system == p.attacker_system ? PairingRole::kReference
                                                    : PairingRole::kMismatch;
      }
      cfg.pairings.push_back(std::move(p));
    } else {
      throw InputError("unknown config section [" + sec.title() + "]");
    }
    sec.check_all_used();
  }
  for (auto& s : cfg.systems) s.params.dim = cfg.world.dim;
  cfg.validate();
  return cfg;
}

/// Instantiates every system of the suite. Base systems draw their
/// parameters from (master_seed, system name); derived systems copy their
/// base and then apply the selection override and the variant.
inline std::map<std::string, AnonSystemSpec> build_systems(const ScenarioConfig& cfg) {
  std::map<std::string, AnonSystemSpec> out;
  for (const auto& def : cfg.systems) {
    if (!def.base.empty()) continue;
    out.emplace(def.name, make_system(def.params, derive_seed(cfg.master_seed, "system:" + def.name)));
  }
  for (const auto& def : cfg.systems) {
    if (def.base.empty()) continue;
    AnonSystemSpec spec = out.at(def.base);
    if (def.selection) spec.selection = *def.selection;
    if (def.variant) {
      spec = make_variant(spec, *def.variant, derive_seed(cfg.master_seed, "system:" + def.name));
    }
    spec.system_id = SystemId{def.name, std::nullopt};
    spec.validate();
    out.emplace(def.name, std::move(spec));
  }
  return out;
}

struct PairingOutcome {
  PairingDef pairing;
  EvaluationPoint point;
  std::optional<Verdict> verdict;  // set for non-reference pairings once a line exists
};

struct ScenarioResult {
  std::string name;
  std::vector<PairingOutcome> outcomes;
  std::optional<ReferenceLine> line;
  std::string fit_error;  // why no line could be fitted
  std::vector<std::filesystem::path> artifacts;

  std::vector<EvaluationPoint> points() const {
    std::vector<EvaluationPoint> out;
    for (const auto& o : outcomes) out.push_back(o.point);
    return out;
  }
  std::vector<EvaluationPoint> reference_points() const {
    std::vector<EvaluationPoint> out;
    for (const auto& o : outcomes) {
      if (o.pairing.role == PairingRole::kReference) out.push_back(o.point);
    }
    return out;
  }
  std::vector<EvaluationPoint> candidate_points() const {
    std::vector<EvaluationPoint> out;
    for (const auto& o : outcomes) {
      if (o.pairing.role != PairingRole::kReference) out.push_back(o.point);
    }
    return out;
  }
  const PairingOutcome* find(const std::string& label) const {
    for (const auto& o : outcomes) {
      if (o.pairing.label == label) return &o;
    }
    return nullptr;
  }
};

namespace suite_detail {

template <class F>
auto with_pairing_context(const std::string& label, F&& f) {
  try {
    return f();
  } catch (const InputError& e) {
    throw InputError("pairing '" + label + "': " + e.what());
  } catch (const InvariantError& e) {
    throw InvariantError("pairing '" + label + "': " + e.what());
  }
}

}  // namespace suite_detail

inline ScenarioResult run_scenario_suite(const ScenarioConfig& cfg) {
  cfg.validate();
  const auto systems = build_systems(cfg);
  const World world = sample_world(cfg.world, derive_seed(cfg.master_seed, "world"));
  const TrialProtocol eval_protocol =
      build_eval_protocol(world.eval_enroll, world.eval_test,
                          derive_seed(cfg.master_seed, "eval-protocol"), cfg.eval_nontargets);

  ScenarioResult result;
  result.name = cfg.name;
  for (std::size_t i = 0; i < cfg.pairings.size(); ++i) {
    const auto& pairing = cfg.pairings[i];
    const std::uint64_t seed = derive_seed(cfg.master_seed, static_cast<std::uint64_t>(i));
    const auto& eval_sys = systems.at(pairing.eval_system);
    const auto& attack_sys = systems.at(pairing.attacker_system);
    EvaluationPoint point = suite_detail::with_pairing_context(pairing.label, [&] {
      const auto train = anonymise_dataset(world.train, attack_sys, derive_seed(seed, "train"),
                                           &world.centroids);
      const auto split =
          split_train_validation(train, cfg.validation_fraction, derive_seed(seed, "split"));
      const auto model = train_attacker(split.train, cfg.attacker_k, cfg.shrinkage);
      const auto enroll = anonymise_dataset(world.eval_enroll, attack_sys,
                                            derive_seed(seed, "enroll"), &world.centroids);
      const auto test = anonymise_dataset(world.eval_test, eval_sys, derive_seed(seed, "test"),
                                          &world.centroids);
      const auto val_protocol =
          build_validation_protocol(split.validation, derive_seed(seed, "validation"),
                                    cfg.validation_enroll, cfg.validation_nontargets);
      return evaluate_attack(model, eval_protocol, enroll, test, val_protocol, split.validation,
                             eval_sys.system_id, pairing.label);
    });
    result.outcomes.push_back({pairing, std::move(point), std::nullopt});
  }

  try {
    result.line = fit_reference_line(result.reference_points());
  } catch (const InputError& e) {
    result.fit_error = e.what();
  }
  if (result.line) {
    for (auto& o : result.outcomes) {
      if (o.pairing.role != PairingRole::kReference) {
        o.verdict = assess(o.point, *result.line, cfg.margin);
      }
    }
  }
  return result;
}

/// Results table: rows = attacker system, columns = evaluated system, cells =
/// EER_test with 2 decimals (empty where no pairing exists). Systems appear
/// in order of first use.
inline std::string format_results_table(const std::vector<EvaluationPoint>& points) {
  require(!points.empty(), "results table needs at least one point");
  std::vector<std::string> rows, cols;
  std::map<std::pair<std::string, std::string>, std::string> cells;
  auto add_unique = [](std::vector<std::string>& v, const std::string& s) {
    if (std::find(v.begin(), v.end(), s) == v.end()) v.push_back(s);
  };
  for (const auto& p : points) {
    const auto a = p.attacker_system.str(), e = p.eval_system.str();
    add_unique(rows, a);
    add_unique(cols, e);
    require(cells.emplace(std::pair{a, e}, p.eer_test.str()).second,
            "results table: more than one pairing for attacker " + a + " / eval " + e);
  }
  std::string out = "attacker\\eval";
  for (const auto& c : cols) out += ',' + c;
  out += '\n';
  for (const auto& r : rows) {
    out += r;
    for (const auto& c : cols) {
      out += ',';
      if (const auto it = cells.find({r, c}); it != cells.end()) out += it->second;
    }
    out += '\n';
  }
  return out;
}

inline void emit_results_table(const ScenarioResult& result, const std::filesystem::path& path) {
  io_detail::write_file(path, format_results_table(result.points()));
}

/// Writes table.csv, points.csv, matched.csv, candidates.csv and, when a
/// reference line exists, verdicts.csv and report.svg into `dir`.
inline std::vector<std::filesystem::path> emit_suite_outputs(ScenarioResult& result,
                                                             const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  require(!ec, "cannot create output directory '" + dir.string() + "'");
  std::vector<std::filesystem::path> files;
  emit_results_table(result, dir / "table.csv");
  files.push_back(dir / "table.csv");
  emit_points_csv(result.points(), dir / "points.csv");
  files.push_back(dir / "points.csv");
  emit_points_csv(result.reference_points(), dir / "matched.csv");
  files.push_back(dir / "matched.csv");
  emit_points_csv(result.candidate_points(), dir / "candidates.csv");
  files.push_back(dir / "candidates.csv");
  if (result.line) {
    DetectReport report;
    report.line = *result.line;
    report.matched = result.reference_points();
    for (const auto& o : result.outcomes) {
      if (o.verdict) report.verdicts.push_back(*o.verdict);
    }
    io_detail::write_file(dir / "verdicts.csv", format_verdict_csv(report));
    files.push_back(dir / "verdicts.csv");
    emit_report_svg(report, dir / "report.svg");
    files.push_back(dir / "report.svg");
  }
  result.artifacts = files;
  return files;
}

/// One-line-per-pairing human summary.
inline std::string format_suite_summary(const ScenarioResult& result) {
  std::string out = "suite " + result.name + "\n";
  for (const auto& o : result.outcomes) {
    out += "  " + o.pairing.label + " [" + std::string(to_string(o.pairing.role)) + "] eval=" +
           o.point.eval_system.str() + " attacker=" + o.point.attacker_system.str() +
           " EER_test=" + o.point.eer_test.str() + " EER_val=" + o.point.eer_val.str();
    if (o.verdict) {
      out += " residual=" + format_fixed(o.verdict->residual, 2) +
             (o.verdict->flagged ? " FLAGGED" : "");
    }
    out += '\n';
  }
  out += result.line ? format_line_summary(*result.line) : "no reference line: " + result.fit_error;
  out += '\n';
  return out;
}

}  // namespace vpeval
