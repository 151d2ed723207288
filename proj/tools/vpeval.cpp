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

// vpeval command-line front end.
//
// Exit codes: 0 success, 1 input error, 2 internal invariant violation.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "vpeval/anonsim.hpp"
#include "vpeval/attacker.hpp"
#include "vpeval/detector.hpp"
#include "vpeval/io.hpp"
#include "vpeval/metrics.hpp"
#include "vpeval/paper_suite.hpp"
#include "vpeval/protocol.hpp"
#include "vpeval/scoring.hpp"
#include "vpeval/suite.hpp"
#include "vpeval/svg.hpp"

namespace fs = std::filesystem;
using namespace vpeval;

namespace {

ConfigDocument load_config(const std::string& source, const std::vector<std::string>& overrides) {
  ConfigDocument doc = (source == "paper_suite" && !fs::exists(source))
                           ? parse_config_text(kPaperSuiteConfig, "paper_suite")
                           : parse_config_file(source);
  for (const auto& o : overrides) doc.apply_override(o);
  return doc;
}

struct SimulateArgs {
  std::string config;
  std::string out_dir;
  std::vector<std::string> systems;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
};

void run_simulate(const SimulateArgs& a) {
  auto doc = load_config(a.config, a.overrides);
  if (a.seed) doc.apply_override("suite.master_seed=" + std::to_string(*a.seed));
  const auto cfg = scenario_config_from(doc);
  const auto systems = build_systems(cfg);
  const World world = sample_world(cfg.world, derive_seed(cfg.master_seed, "world"));
  const fs::path out(a.out_dir);
  fs::create_directories(out);
  emit_embedding_file(world.train, out / "train.emb");
  emit_embedding_file(world.eval_enroll, out / "eval_enroll.emb");
  emit_embedding_file(world.eval_test, out / "eval_test.emb");
  std::vector<std::string> names = a.systems;
  if (names.empty()) {
    for (const auto& s : cfg.systems) names.push_back(s.name);
  }
  for (const auto& name : names) {
    const auto it = systems.find(name);
    require(it != systems.end(), "unknown system '" + name + "'");
    const std::uint64_t seed = derive_seed(cfg.master_seed, "simulate:" + name);
    const fs::path dir = out / name;
    fs::create_directories(dir);
    emit_embedding_file(
        anonymise_dataset(world.train, it->second, derive_seed(seed, "train"), &world.centroids),
        dir / "train.emb");
    emit_embedding_file(anonymise_dataset(world.eval_enroll, it->second,
                                          derive_seed(seed, "enroll"), &world.centroids),
                        dir / "eval_enroll.emb");
    emit_embedding_file(anonymise_dataset(world.eval_test, it->second, derive_seed(seed, "test"),
                                          &world.centroids),
                        dir / "eval_test.emb");
  }
  std::cout << "wrote world and " << names.size() << " anonymised system(s) to " << out.string()
            << "\n";
}

struct ProtocolArgs {
  std::string mode;
  std::string embeddings, enroll, test;
  std::string out, enroll_map_out, train_out;
  std::uint64_t seed = 1;
  std::size_t n_enroll = 5;
  std::size_t nontargets = 5;
  double fraction = 0.1;
};

void run_protocol(const ProtocolArgs& a) {
  if (a.mode == "split") {
    require(!a.embeddings.empty() && !a.out.empty() && !a.train_out.empty(),
            "split needs --embeddings, --train-out and --out");
    const auto data = parse_embedding_file(a.embeddings, SetRole::kTrain);
    const auto split = split_train_validation(data, a.fraction, a.seed);
    emit_embedding_file(split.train, a.train_out);
    emit_embedding_file(split.validation, a.out);
    std::cout << "split " << data.size() << " utterances: " << split.train.size() << " train, "
              << split.validation.size() << " validation\n";
    return;
  }
  TrialProtocol protocol;
  if (a.mode == "val") {
    require(!a.embeddings.empty(), "val mode needs --embeddings");
    const auto data = parse_embedding_file(a.embeddings, SetRole::kValidation);
    protocol = build_validation_protocol(data, a.seed, a.n_enroll, a.nontargets);
    for (const auto& s : protocol.skipped_speakers) {
      std::cerr << "skipped speaker " << s << ": needs more than " << a.n_enroll
                << " utterances\n";
    }
    if (!a.enroll_map_out.empty()) emit_enrollment_map(protocol, a.enroll_map_out);
  } else if (a.mode == "eval") {
    require(!a.enroll.empty() && !a.test.empty(), "eval mode needs --enroll and --test");
    protocol = build_eval_protocol(parse_embedding_file(a.enroll, SetRole::kEvalEnroll),
                                   parse_embedding_file(a.test, SetRole::kEvalTest), a.seed,
                                   a.nontargets);
    if (!a.enroll_map_out.empty()) emit_enrollment_map(protocol, a.enroll_map_out);
  } else {
    throw InputError("unknown protocol mode '" + a.mode + "' (val, eval or split)");
  }
  emit_trial_file(protocol.trials, a.out);
  std::cout << "wrote " << protocol.trials.size() << " trials for " << protocol.enrollments.size()
            << " enrollment models\n";
}

struct ScoreArgs {
  std::string protocol, enroll, test, enroll_map, attacker, out;
};

void run_score(const ScoreArgs& a) {
  const auto enroll = parse_embedding_file(a.enroll, SetRole::kEvalEnroll);
  const auto test = parse_embedding_file(a.test, SetRole::kEvalTest);
  TrialProtocol protocol;
  protocol.trials = parse_trial_file(a.protocol);
  protocol.enrollments =
      a.enroll_map.empty() ? enroll_by_speaker(enroll) : parse_enrollment_map(a.enroll_map);
  std::optional<AttackerModel> model;
  if (!a.attacker.empty()) model = parse_attacker_model(a.attacker);
  const auto scores = score_protocol(protocol, enroll, test, model ? &*model : nullptr);
  emit_score_file(scores, a.out);
  std::cout << "scored " << scores.entries.size() << " trials\n";
}

struct DetectArgs {
  std::string matched, candidates, out_csv, out_svg;
  double margin = 2.0;
};

void run_detect(const DetectArgs& a) {
  const auto matched = parse_points_csv(a.matched);
  const auto candidates =
      a.candidates.empty() ? std::vector<EvaluationPoint>{} : parse_points_csv(a.candidates);
  const auto report = detect_report(matched, candidates, a.margin);
  std::cout << format_line_summary(report.line) << "\n";
  for (const auto& v : report.verdicts) {
    std::cout << v.point.scenario_label << ": residual " << format_fixed(v.residual, 2)
              << " pp, relative gap "
              << (v.relative_gap ? format_fixed(*v.relative_gap, 3) : std::string("n/a"))
              << (v.flagged ? ", FLAGGED" : ", ok") << "\n";
  }
  if (!a.out_csv.empty()) io_detail::write_file(a.out_csv, format_verdict_csv(report));
  if (!a.out_svg.empty()) emit_report_svg(report, a.out_svg);
}

struct SuiteArgs {
  std::string config = "paper_suite";
  std::string out_dir;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::optional<double> margin;
};

void run_suite(const SuiteArgs& a) {
  auto doc = load_config(a.config, a.overrides);
  if (a.seed) doc.apply_override("suite.master_seed=" + std::to_string(*a.seed));
  if (a.margin) doc.apply_override("suite.margin=" + format_fixed(*a.margin, 6));
  const auto cfg = scenario_config_from(doc);
  auto result = run_scenario_suite(cfg);
  std::cout << format_suite_summary(result);
  if (!a.out_dir.empty()) {
    const auto files = emit_suite_outputs(result, a.out_dir);
    for (const auto& f : files) std::cout << "wrote " << f.string() << "\n";
  }
}

struct ReportArgs {
  std::string points, out;
};

void run_report(const ReportArgs& a) {
  const auto points = parse_points_csv(a.points);
  const std::string table = format_results_table(points);
  if (a.out.empty()) {
    std::cout << table;
  } else {
    io_detail::write_file(a.out, table);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Voice-anonymisation privacy evaluation and mismatch detection"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* c_sim = app.add_subcommand("simulate", "write a simulated world and its anonymised copies");
  c_sim->add_option("--config", sim.config, "config file, or 'paper_suite'")->required();
  c_sim->add_option("--out-dir", sim.out_dir, "output directory")->required();
  c_sim->add_option("--system", sim.systems, "systems to write (default: all)");
  c_sim->add_option("--set", sim.overrides, "override a config key, e.g. world.dim=16");
  c_sim->add_option("--seed", sim.seed, "master seed");

  ProtocolArgs proto;
  auto* c_proto = app.add_subcommand("protocol", "build a trial list or a validation split");
  c_proto->add_option("--mode", proto.mode, "val, eval or split")->required();
  c_proto->add_option("--embeddings", proto.embeddings, "validation (val) or full (split) set");
  c_proto->add_option("--enroll", proto.enroll, "enrollment set (eval)");
  c_proto->add_option("--test", proto.test, "test set (eval)");
  c_proto->add_option("--out", proto.out, "trial file, or validation set for split")->required();
  c_proto->add_option("--enroll-map-out", proto.enroll_map_out, "write enrollment composition");
  c_proto->add_option("--train-out", proto.train_out, "training portion (split)");
  c_proto->add_option("--seed", proto.seed, "seed");
  c_proto->add_option("--n-enroll", proto.n_enroll, "enrollment utterances per speaker (val)");
  c_proto->add_option("--nontargets", proto.nontargets,
                      "nontarget trials per speaker (val) or per test utterance (eval)");
  c_proto->add_option("--fraction", proto.fraction, "validation fraction (split)");

  std::string train_path, model_out;
  std::size_t k = 8;
  double shrinkage = 0.1;
  auto* c_train = app.add_subcommand("train-attacker", "train the LDA attacker");
  c_train->add_option("--train", train_path, "anonymised training set")->required();
  c_train->add_option("--out", model_out, "model file")->required();
  c_train->add_option("--k", k, "projection rank");
  c_train->add_option("--shrinkage", shrinkage, "within-class shrinkage");

  ScoreArgs score;
  auto* c_score = app.add_subcommand("score", "score a trial list");
  c_score->add_option("--protocol", score.protocol, "trial file")->required();
  c_score->add_option("--enroll", score.enroll, "enrollment embeddings")->required();
  c_score->add_option("--test", score.test, "test embeddings")->required();
  c_score->add_option("--enroll-map", score.enroll_map,
                      "enrollment composition (default: all utterances of each speaker)");
  c_score->add_option("--attacker", score.attacker, "attacker model file");
  c_score->add_option("--out", score.out, "score file")->required();

  std::string scores_path;
  auto* c_eer = app.add_subcommand("eer", "equal error rate of a score file");
  c_eer->add_option("--scores", scores_path, "score file")->required();

  DetectArgs det;
  auto* c_det = app.add_subcommand("detect", "fit the reference line and assess candidates");
  c_det->add_option("--matched", det.matched, "matched points CSV")->required();
  c_det->add_option("--candidates", det.candidates, "candidate points CSV");
  c_det->add_option("--margin", det.margin, "flag threshold in percentage points");
  c_det->add_option("--out-csv", det.out_csv, "verdict CSV");
  c_det->add_option("--out-svg", det.out_svg, "scatter plot");

  SuiteArgs suite;
  auto* c_suite = app.add_subcommand("run-suite", "run a scenario suite end to end");
  c_suite->add_option("--config", suite.config, "config file, or 'paper_suite' (default)");
  c_suite->add_option("--out-dir", suite.out_dir, "directory for tables and plots");
  c_suite->add_option("--set", suite.overrides, "override a config key, e.g. world.dim=16");
  c_suite->add_option("--seed", suite.seed, "master seed");
  c_suite->add_option("--margin", suite.margin, "detector margin");

  ReportArgs rep;
  auto* c_rep = app.add_subcommand("report", "render a points CSV as an attacker x eval table");
  c_rep->add_option("--points", rep.points, "points CSV")->required();
  c_rep->add_option("--out", rep.out, "table CSV (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*c_sim) run_simulate(sim);
    if (*c_proto) run_protocol(proto);
    if (*c_train) {
      const auto model = train_attacker(parse_embedding_file(train_path, SetRole::kTrain), k,
                                        shrinkage);
      emit_attacker_model(model, model_out);
      std::cout << "trained k=" << model.k() << " attacker on " << model.trained_on.str() << "\n";
    }
    if (*c_score) run_score(score);
    if (*c_eer) std::cout << "EER=" << compute_eer(parse_score_file(scores_path)).str() << "%\n";
    if (*c_det) run_detect(det);
    if (*c_suite) run_suite(suite);
    if (*c_rep) run_report(rep);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const InvariantError& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 2;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
