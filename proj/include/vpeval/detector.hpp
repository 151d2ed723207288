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

// Mismatch detector.
//
// Matched evaluations (attacker trained on the evaluated system) place
// (EER_test, EER_val) on a common trend. A reference line fitted through them
// predicts the validation EER expected for a given test EER; an evaluation
// whose validation EER lies well below that prediction is flagged.

#pragma once

#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "vpeval/io.hpp"
#include "vpeval/point.hpp"

namespace vpeval {

struct ReferenceLine {
  double slope = 0.0;
  double intercept = 0.0;
  std::size_t n_points = 0;

  double predict(double eer_test) const { return slope * eer_test + intercept; }
};

struct Verdict {
  EvaluationPoint point;
  double residual = 0.0;               // eer_val - predicted, percentage points
  std::optional<double> relative_gap;  // (eer_test - eer_val) / eer_test
  bool flagged = false;
  double margin_used = 0.0;
};

/// Ordinary least squares of eer_val on eer_test over matched points.
inline ReferenceLine fit_reference_line(const std::vector<EvaluationPoint>& points) {
  require(points.size() >= 2, "insufficient matched points: need at least 2, got " +
                                  std::to_string(points.size()));
  for (const auto& p : points) {
    require(p.matched(), "point '" + p.scenario_label + "' (" + p.eval_system.str() + " / " +
                             p.attacker_system.str() + ") is not a matched evaluation");
  }
  const double n = static_cast<double>(points.size());
  double mx = 0.0, my = 0.0;
  for (const auto& p : points) {
    mx += p.eer_test.value;
    my += p.eer_val.value;
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& p : points) {
    const double dx = p.eer_test.value - mx;
    sxx += dx * dx;
    sxy += dx * (p.eer_val.value - my);
  }
  require(sxx > 1e-12 * std::max(1.0, mx * mx),
          "matched points need at least 2 distinct eer_test values");
  ReferenceLine line;
  line.slope = sxy / sxx;
  line.intercept = my - line.slope * mx;
  line.n_points = points.size();
  return line;
}

inline Verdict assess(const EvaluationPoint& point, const ReferenceLine& line,
                      double margin = 2.0) {
  require(margin >= 0.0, "margin must be >= 0");
  Verdict v;
  v.point = point;
  v.residual = point.eer_val.value - line.predict(point.eer_test.value);
  if (point.eer_test.value > 0.0) {
    v.relative_gap = (point.eer_test.value - point.eer_val.value) / point.eer_test.value;
  }
  v.flagged = v.residual < -margin;
  v.margin_used = margin;
  return v;
}

struct DetectReport {
  ReferenceLine line;
  std::vector<EvaluationPoint> matched;
  std::vector<Verdict> verdicts;
};

inline DetectReport detect_report(const std::vector<EvaluationPoint>& matched,
                                  const std::vector<EvaluationPoint>& candidates,
                                  double margin = 2.0) {
  DetectReport report;
  report.line = fit_reference_line(matched);
  report.matched = matched;
  for (const auto& c : candidates) report.verdicts.push_back(assess(c, report.line, margin));
  return report;
}

// ---- points CSV ------------------------------------------------------------

inline constexpr std::string_view kPointsHeader =
    "scenario_label,eval_system,attacker_system,eer_test,eer_val";

inline std::string format_points_csv(const std::vector<EvaluationPoint>& points) {
  std::string out(kPointsHeader);
  out += '\n';
  for (const auto& p : points) {
    out += p.scenario_label + ',' + p.eval_system.str() + ',' + p.attacker_system.str() + ',' +
           p.eer_test.str() + ',' + p.eer_val.str() + '\n';
  }
  return out;
}

inline void emit_points_csv(const std::vector<EvaluationPoint>& points,
                            const std::filesystem::path& path) {
  io_detail::write_file(path, format_points_csv(points));
}

inline std::vector<EvaluationPoint> parse_points_csv(const std::filesystem::path& path) {
  using namespace io_detail;
  const auto lines = read_lines(path);
  require(!lines.empty() && lines[0] == kPointsHeader,
          line_prefix(path, 1) + "expected header '" + std::string(kPointsHeader) + "'");
  std::vector<EvaluationPoint> points;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto f = split(lines[i], ',');
    require(f.size() == 5, line_prefix(path, i + 1) + "expected 5 comma-separated fields");
    EvaluationPoint p;
    p.scenario_label = std::string(f[0]);
    try {
      p.eval_system = SystemId::parse(f[1]);
      p.attacker_system = SystemId::parse(f[2]);
    } catch (const InputError& e) {
      throw InputError(line_prefix(path, i + 1) + e.what());
    }
    const auto t = parse_double(f[3]);
    const auto v = parse_double(f[4]);
    require(t && v, line_prefix(path, i + 1) + "invalid EER value");
    p.eer_test = Eer{*t};
    p.eer_val = Eer{*v};
    require(*t >= 0 && *t <= 100 && *v >= 0 && *v <= 100,
            line_prefix(path, i + 1) + "EERs must lie in [0, 100]");
    points.push_back(std::move(p));
  }
  return points;
}

// ---- verdict CSV -----------------------------------------------------------

inline std::string format_verdict_csv(const DetectReport& report) {
  std::string out =
      "scenario_label,eval_system,attacker_system,eer_test,eer_val,predicted_val,residual,"
      "relative_gap,flagged\n";
  for (const auto& v : report.verdicts) {
    const auto& p = v.point;
    out += p.scenario_label + ',' + p.eval_system.str() + ',' + p.attacker_system.str() + ',' +
           p.eer_test.str() + ',' + p.eer_val.str() + ',' +
           format_fixed(report.line.predict(p.eer_test.value), 2) + ',' +
           format_fixed(v.residual, 2) + ',' +
           (v.relative_gap ? format_fixed(*v.relative_gap, 3) : std::string()) + ',' +
           (v.flagged ? "yes" : "no") + '\n';
  }
  return out;
}

inline std::string format_line_summary(const ReferenceLine& line) {
  return "reference line: eer_val = " + format_fixed(line.slope, 4) + " * eer_test " +
         (line.intercept < 0 ? "- " : "+ ") + format_fixed(std::abs(line.intercept), 4) +
         " (" + std::to_string(line.n_points) + " matched points)";
}

}  // namespace vpeval
