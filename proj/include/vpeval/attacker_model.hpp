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

#include <Eigen/Dense>

#include <filesystem>
#include <string>

#include "vpeval/core.hpp"
#include "vpeval/io.hpp"

namespace vpeval {

/// Linear projection learned by the attacker from anonymised training data.
/// `projection` is k x dim with orthonormal rows.
struct AttackerModel {
  Eigen::MatrixXd projection;
  SystemId trained_on;
  double shrinkage = 0.1;

  std::size_t k() const { return static_cast<std::size_t>(projection.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(projection.cols()); }
};

/// normalize(projection * e).
inline Embedding project(const AttackerModel& model, const Embedding& e) {
  require(e.dim() == model.dim(), "projection expects dim " + std::to_string(model.dim()) +
                                      ", got " + std::to_string(e.dim()));
  const Eigen::VectorXd y = model.projection * e.vec();
  const double n = y.norm();
  require(n > 1e-12, "projected embedding has zero norm");
  return Embedding(Eigen::VectorXd(y / n));
}

// Model file:
//   k <k>
//   dim <dim>
//   lambda <shrinkage>
//   trained_on <system>
//   followed by k rows of dim space-separated values.

inline void emit_attacker_model(const AttackerModel& model, const std::filesystem::path& path) {
  std::string out = "k " + std::to_string(model.k()) + "\ndim " + std::to_string(model.dim()) +
                    "\nlambda " + format_fixed(model.shrinkage, 6) + "\ntrained_on " +
                    model.trained_on.str() + "\n";
  for (Eigen::Index r = 0; r < model.projection.rows(); ++r) {
    for (Eigen::Index c = 0; c < model.projection.cols(); ++c) {
      if (c) out += ' ';
      out += format_fixed(model.projection(r, c), 12);
    }
    out += '\n';
  }
  io_detail::write_file(path, out);
}

inline AttackerModel parse_attacker_model(const std::filesystem::path& path) {
  using namespace io_detail;
  const auto lines = read_lines(path);
  require(lines.size() >= 4, path.string() + ": truncated model header");
  auto header = [&](std::size_t i, std::string_view key) {
    const auto kv = split_ws(lines[i]);
    require(kv.size() == 2 && kv[0] == key,
            line_prefix(path, i + 1) + "expected '" + std::string(key) + " <value>'");
    return std::string(kv[1]);
  };
  const auto k = parse_int(header(0, "k"));
  const auto dim = parse_int(header(1, "dim"));
  const auto lambda = parse_double(header(2, "lambda"));
  require(k && *k >= 1 && dim && *dim >= 2 && *k < *dim && lambda,
          path.string() + ": invalid model header values");
  AttackerModel model;
  model.trained_on = SystemId::parse(header(3, "trained_on"));
  model.shrinkage = *lambda;
  model.projection.resize(*k, *dim);
  require(static_cast<long long>(lines.size()) >= 4 + *k,
          path.string() + ": expected " + std::to_string(*k) + " projection rows");
  for (long long r = 0; r < *k; ++r) {
    const auto tokens = split_ws(lines[4 + r]);
    require(static_cast<long long>(tokens.size()) == *dim,
            line_prefix(path, 5 + r) + "expected " + std::to_string(*dim) + " values");
    for (long long c = 0; c < *dim; ++c) {
      const auto v = parse_double(tokens[c]);
      require(v.has_value(), line_prefix(path, 5 + r) + "invalid value");
      model.projection(r, c) = *v;
    }
  }
  return model;
}

}  // namespace vpeval
