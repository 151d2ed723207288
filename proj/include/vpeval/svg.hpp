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

// Scatter plot of a detector report as a standalone SVG document.
// Matched points: filled circles. Unflagged candidates: hollow squares.
// Flagged candidates: red crosses. All coordinates are printed with fixed
// decimals so the output is byte-stable.

#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "vpeval/detector.hpp"

namespace vpeval {

inline std::string xml_escape(std::string_view text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

inline std::string render_report_svg(const DetectReport& report) {
  constexpr double kWidth = 640, kHeight = 480;
  constexpr double kLeft = 70, kRight = 20, kTop = 20, kBottom = 60;
  double hi = 50.0;
  for (const auto& p : report.matched) hi = std::max({hi, p.eer_test.value, p.eer_val.value});
  for (const auto& v : report.verdicts) {
    hi = std::max({hi, v.point.eer_test.value, v.point.eer_val.value});
  }
  hi = std::min(100.0, std::ceil(hi / 10.0) * 10.0);
  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  auto sx = [&](double x) { return kLeft + pw * x / hi; };
  auto sy = [&](double y) { return kTop + ph * (1.0 - y / hi); };
  auto f = [](double v) { return format_fixed(v, 2); };

  std::string s;
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + f(kWidth) + "\" height=\"" +
       f(kHeight) + "\" viewBox=\"0 0 " + f(kWidth) + " " + f(kHeight) + "\">\n";
  s += "<rect x=\"0\" y=\"0\" width=\"" + f(kWidth) + "\" height=\"" + f(kHeight) +
       "\" fill=\"white\"/>\n";
  // Axes and ticks.
  s += "<g stroke=\"black\" stroke-width=\"1\" font-family=\"sans-serif\" font-size=\"11\">\n";
  s += "<line x1=\"" + f(sx(0)) + "\" y1=\"" + f(sy(0)) + "\" x2=\"" + f(sx(hi)) + "\" y2=\"" +
       f(sy(0)) + "\"/>\n";
  s += "<line x1=\"" + f(sx(0)) + "\" y1=\"" + f(sy(0)) + "\" x2=\"" + f(sx(0)) + "\" y2=\"" +
       f(sy(hi)) + "\"/>\n";
  for (double t = 0; t <= hi + 1e-9; t += 10) {
    s += "<line x1=\"" + f(sx(t)) + "\" y1=\"" + f(sy(0)) + "\" x2=\"" + f(sx(t)) + "\" y2=\"" +
         f(sy(0) + 5) + "\"/>\n";
    s += "<text stroke=\"none\" x=\"" + f(sx(t)) + "\" y=\"" + f(sy(0) + 18) +
         "\" text-anchor=\"middle\">" + format_fixed(t, 0) + "</text>\n";
    s += "<line x1=\"" + f(sx(0) - 5) + "\" y1=\"" + f(sy(t)) + "\" x2=\"" + f(sx(0)) +
         "\" y2=\"" + f(sy(t)) + "\"/>\n";
    s += "<text stroke=\"none\" x=\"" + f(sx(0) - 8) + "\" y=\"" + f(sy(t) + 4) +
         "\" text-anchor=\"end\">" + format_fixed(t, 0) + "</text>\n";
  }
  s += "</g>\n";
  s += "<text x=\"" + f(kLeft + pw / 2) + "\" y=\"" + f(kHeight - 15) +
       "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">EER_test (%)</text>\n";
  s += "<text x=\"18\" y=\"" + f(kTop + ph / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 18 " +
       f(kTop + ph / 2) +
       ")\" font-family=\"sans-serif\" font-size=\"13\">EER_val (%)</text>\n";

  // Reference line clipped to the plot box.
  double x0 = 0, x1 = hi;
  const auto& line = report.line;
  if (line.slope != 0.0) {
    const double xa = (0.0 - line.intercept) / line.slope;
    const double xb = (hi - line.intercept) / line.slope;
    x0 = std::clamp(std::min(xa, xb), 0.0, hi);
    x1 = std::clamp(std::max(xa, xb), 0.0, hi);
  }
  auto clampy = [&](double y) { return std::clamp(y, 0.0, hi); };
  s += "<line x1=\"" + f(sx(x0)) + "\" y1=\"" + f(sy(clampy(line.predict(x0)))) + "\" x2=\"" +
       f(sx(x1)) + "\" y2=\"" + f(sy(clampy(line.predict(x1)))) +
       "\" stroke=\"#555555\" stroke-width=\"1.5\" stroke-dasharray=\"6 4\"/>\n";

  for (const auto& p : report.matched) {
    s += "<circle cx=\"" + f(sx(p.eer_test.value)) + "\" cy=\"" + f(sy(p.eer_val.value)) +
         "\" r=\"5\" fill=\"#1f77b4\"><title>" + xml_escape(p.scenario_label) + "</title></circle>\n";
  }
  for (const auto& v : report.verdicts) {
    const double cx = sx(v.point.eer_test.value), cy = sy(v.point.eer_val.value);
    if (v.flagged) {
      s += "<path d=\"M " + f(cx - 5) + " " + f(cy - 5) + " L " + f(cx + 5) + " " + f(cy + 5) +
           " M " + f(cx - 5) + " " + f(cy + 5) + " L " + f(cx + 5) + " " + f(cy - 5) +
           "\" stroke=\"#d62728\" stroke-width=\"2\"><title>" + xml_escape(v.point.scenario_label) +
           " (flagged)</title></path>\n";
    } else {
      s += "<rect x=\"" + f(cx - 4.5) + "\" y=\"" + f(cy - 4.5) +
           "\" width=\"9\" height=\"9\" fill=\"none\" stroke=\"#2ca02c\" stroke-width=\"1.5\"><title>" +
           xml_escape(v.point.scenario_label) + "</title></rect>\n";
    }
  }
  s += "</svg>\n";
  return s;
}

inline void emit_report_svg(const DetectReport& report, const std::filesystem::path& path) {
  io_detail::write_file(path, render_report_svg(report));
}

}  // namespace vpeval
