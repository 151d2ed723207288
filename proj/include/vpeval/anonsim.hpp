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

// Synthetic speaker world and anonymisation-system archetypes.
//
// A speaker is a unit centroid on the sphere; its utterances are noisy copies.
// An anonymisation system replaces the voice with a pseudo-speaker vector t
// drawn from its target pool, keeps a small leak of the source centroid x and
// adds fresh noise:
//
//   y = normalize(V * M * (alpha * t + beta * x) + gamma * n')
//
// M ("mixer") stands in for the feature pipeline and V ("vocoder rotation")
// for the synthesis stage. Pool vectors span only the first `target_rank`
// coordinates before mixing, so each system hides pseudo-speaker variation
// in its own subspace and leaves residual speaker cues in the complement.
// An attacker that learns the complement of one system is blind to another.

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "vpeval/core.hpp"
#include "vpeval/rng.hpp"

namespace vpeval {

struct WorldConfig {
  std::size_t dim = 32;
  std::size_t n_train_speakers = 50;
  std::size_t n_eval_speakers = 100;
  std::size_t utterances_per_speaker = 400;
  // Utterances per evaluation speaker; 0 means utterances_per_speaker.
  std::size_t eval_utterances_per_speaker = 0;
  double channel_noise_sigma = 0.3;
  // Draw all centroids as rows of one random orthogonal matrix
  // (needs dim >= total speakers).
  bool orthogonal_centroids = false;

  std::size_t eval_utterances() const {
    return eval_utterances_per_speaker ? eval_utterances_per_speaker : utterances_per_speaker;
  }

  void validate() const {
    require(dim >= 8, "world dim must be >= 8");
    require(n_train_speakers > 0 && n_eval_speakers > 0, "speaker counts must be positive");
    require(utterances_per_speaker > 0, "utterances_per_speaker must be positive");
    require(eval_utterances() >= 2, "evaluation speakers need >= 2 utterances (enroll + test)");
    require(channel_noise_sigma >= 0.0 && std::isfinite(channel_noise_sigma),
            "channel_noise_sigma must be >= 0");
    require(!orthogonal_centroids || dim >= n_train_speakers + n_eval_speakers,
            "orthogonal centroids need dim >= number of speakers");
  }
};

using CentroidMap = std::unordered_map<std::string, Embedding>;

struct World {
  LabeledEmbeddingSet train;
  LabeledEmbeddingSet eval_enroll;
  LabeledEmbeddingSet eval_test;
  CentroidMap centroids;  // true centroid of every speaker
};

namespace anonsim_detail {

inline Eigen::VectorXd gaussian(std::size_t dim, Rng& rng) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(dim));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = rng.normal();
  return v;
}

inline Eigen::VectorXd unit_gaussian(std::size_t dim, Rng& rng) {
  Eigen::VectorXd v;
  do {
    v = gaussian(dim, rng);
  } while (v.norm() < 1e-12);
  return v / v.norm();
}

inline std::string pad(std::size_t i, int width) {
  std::string s = std::to_string(i);
  return std::string(s.size() < static_cast<std::size_t>(width) ? width - s.size() : 0, '0') + s;
}

}  // namespace anonsim_detail

/// Haar-distributed orthogonal matrix (QR of a Gaussian matrix, R-diagonal
/// sign fix).
inline Eigen::MatrixXd random_orthogonal(std::size_t dim, Rng& rng) {
  const auto n = static_cast<Eigen::Index>(dim);
  Eigen::MatrixXd g(n, n);
  for (Eigen::Index c = 0; c < n; ++c)
    for (Eigen::Index r = 0; r < n; ++r) g(r, c) = rng.normal();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (r(i, i) < 0) q.col(i) = -q.col(i);
  }
  return q;
}

/// Orthogonal matrix that rotates every plane of a random orthonormal basis
/// by exactly `angle` radians (odd dim leaves one axis fixed). angle = 0
/// yields the identity. Built with a Cayley transform of a scaled
/// skew-symmetric matrix.
inline Eigen::MatrixXd small_rotation(std::size_t dim, double angle, Rng& rng) {
  const auto n = static_cast<Eigen::Index>(dim);
  const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(n, n);
  if (angle == 0.0) return identity;
  const Eigen::MatrixXd basis = random_orthogonal(dim, rng);
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i + 1 < n; i += 2) {
    j(i, i + 1) = 1.0;
    j(i + 1, i) = -1.0;
  }
  const Eigen::MatrixXd k = basis * j * basis.transpose() * (2.0 * std::tan(angle / 2.0));
  return (identity - 0.5 * k).partialPivLu().solve(identity + 0.5 * k);
}

inline double orthogonality_error(const Eigen::MatrixXd& q) {
  return (q.transpose() * q - Eigen::MatrixXd::Identity(q.cols(), q.cols())).cwiseAbs().maxCoeff();
}

/// Samples train and evaluation speaker populations. Speaker ids are
/// `tr0001`/`ev0001`, utterance ids `<speaker>-<nnnn>`. The first half of
/// each evaluation speaker's utterances is its enrollment data.
inline World sample_world(const WorldConfig& config, std::uint64_t seed) {
  using namespace anonsim_detail;
  config.validate();
  World world;
  std::optional<Eigen::MatrixXd> basis;
  if (config.orthogonal_centroids) {
    Rng rng(derive_seed(seed, "orthogonal-centroids"));
    basis = random_orthogonal(config.dim, rng);
  }
  const double per_dim = config.channel_noise_sigma / std::sqrt(static_cast<double>(config.dim));
  std::vector<UtteranceRecord> train, enroll, test;
  std::size_t speaker_index = 0;

  auto make_speaker = [&](const std::string& speaker, std::size_t n_utts,
                          std::vector<UtteranceRecord>& first,
                          std::vector<UtteranceRecord>& second, std::size_t n_first) {
    Eigen::VectorXd centroid;
    if (basis) {
      centroid = basis->row(static_cast<Eigen::Index>(speaker_index)).transpose();
    } else {
      Rng rng(derive_seed(seed, "centroid:" + speaker));
      centroid = unit_gaussian(config.dim, rng);
    }
    ++speaker_index;
    const Embedding c(centroid);
    world.centroids.emplace(speaker, c);
    for (std::size_t u = 0; u < n_utts; ++u) {
      const std::string utt = speaker + "-" + pad(u + 1, 4);
      Embedding e = c;
      if (config.channel_noise_sigma > 0.0) {
        Rng rng(derive_seed(seed, "utt:" + utt));
        const Eigen::VectorXd v = centroid + per_dim * gaussian(config.dim, rng);
        e = Embedding(v).normalized();
      }
      (u < n_first ? first : second).push_back({utt, speaker, std::move(e), std::nullopt});
    }
  };
  for (std::size_t s = 0; s < config.n_train_speakers; ++s) {
    make_speaker("tr" + pad(s + 1, 4), config.utterances_per_speaker, train, train,
                 config.utterances_per_speaker);
  }
  const std::size_t n_eval = config.eval_utterances();
  for (std::size_t s = 0; s < config.n_eval_speakers; ++s) {
    make_speaker("ev" + pad(s + 1, 4), n_eval, enroll, test, n_eval / 2);
  }
  world.train = LabeledEmbeddingSet(std::move(train), SetRole::kTrain);
  world.eval_enroll = LabeledEmbeddingSet(std::move(enroll), SetRole::kEvalEnroll);
  world.eval_test = LabeledEmbeddingSet(std::move(test), SetRole::kEvalTest);
  return world;
}

enum class Selection { kUtteranceRandom, kSpeakerRandom, kDeterministic };

inline std::string_view to_string(Selection s) {
  switch (s) {
    case Selection::kUtteranceRandom: return "utterance_random";
    case Selection::kSpeakerRandom: return "speaker_random";
    case Selection::kDeterministic: return "deterministic";
  }
  return "utterance_random";
}

inline Selection parse_selection(std::string_view s) {
  if (s == "utterance_random") return Selection::kUtteranceRandom;
  if (s == "speaker_random") return Selection::kSpeakerRandom;
  if (s == "deterministic") return Selection::kDeterministic;
  throw InputError("unknown selection '" + std::string(s) + "'");
}

/// Deterministic target selection: rotate the source speaker embedding and
/// pick the pool vector with the largest inner product. Rebuilding with a
/// new seed gives a different, equally deterministic mapping.
struct DeterministicSelector {
  Eigen::MatrixXd rotation;

  std::size_t select(const Embedding& x, const std::vector<Embedding>& pool) const {
    require(!pool.empty(), "empty target pool");
    require(static_cast<Eigen::Index>(x.dim()) == rotation.cols(), "selector dim mismatch");
    const Eigen::VectorXd r = rotation * x.vec();
    std::size_t best = 0;
    double best_dot = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < pool.size(); ++i) {
      const double d = pool[i].vec().dot(r);
      if (d > best_dot) {
        best_dot = d;
        best = i;
      }
    }
    return best;
  }
};

struct AnonSystemSpec {
  SystemId system_id;
  std::vector<Embedding> target_pool;  // unit-norm pseudo-speaker vectors
  double target_strength = 1.0;        // alpha
  double leak = 0.13;                  // beta
  double post_noise = 0.2;             // gamma
  Eigen::MatrixXd mixer;
  Eigen::MatrixXd vocoder_rotation;
  Selection selection = Selection::kUtteranceRandom;
  DeterministicSelector selector;
  double vocoder_angle = 0.15;  // rotation angle used by vocoder_swap variants

  std::size_t dim() const { return static_cast<std::size_t>(mixer.rows()); }

  void validate() const {
    require(target_strength > 0.0, system_id.str() + ": target strength must be > 0");
    require(leak >= 0.0 && leak < target_strength,
            system_id.str() + ": leak must satisfy 0 <= leak < target strength");
    require(post_noise >= 0.0, system_id.str() + ": post noise must be >= 0");
    require(!target_pool.empty(), system_id.str() + ": empty target pool");
    const auto d = mixer.rows();
    require(d >= 2 && mixer.cols() == d && vocoder_rotation.rows() == d &&
                vocoder_rotation.cols() == d,
            system_id.str() + ": matrices must be square with matching dims");
    require(orthogonality_error(mixer) <= 1e-9, system_id.str() + ": mixer is not orthogonal");
    require(orthogonality_error(vocoder_rotation) <= 1e-9,
            system_id.str() + ": vocoder rotation is not orthogonal");
    for (const auto& t : target_pool) {
      require(static_cast<Eigen::Index>(t.dim()) == d, system_id.str() + ": pool dim mismatch");
    }
    if (selection == Selection::kDeterministic) {
      require(selector.rotation.rows() == d && selector.rotation.cols() == d,
              system_id.str() + ": deterministic selection needs a selector rotation");
    }
  }
};

/// Parameters from which a base system is generated.
struct SystemParams {
  SystemId system_id;
  std::size_t dim = 32;
  double target_strength = 1.0;
  double leak = 0.13;
  double post_noise = 0.2;
  std::size_t pool_size = 200;
  std::size_t target_rank = 8;
  Selection selection = Selection::kUtteranceRandom;
  double vocoder_angle = 0.15;
};

/// Fresh base system: independent pool, mixer and selector, identity vocoder.
inline AnonSystemSpec make_system(const SystemParams& p, std::uint64_t seed) {
  using namespace anonsim_detail;
  require(p.pool_size >= 1, "pool size must be positive");
  require(p.target_rank >= 1 && p.target_rank <= p.dim, "target rank must be in [1, dim]");
  AnonSystemSpec spec;
  spec.system_id = p.system_id;
  spec.target_strength = p.target_strength;
  spec.leak = p.leak;
  spec.post_noise = p.post_noise;
  spec.selection = p.selection;
  spec.vocoder_angle = p.vocoder_angle;
  Rng pool_rng(derive_seed(seed, "pool"));
  for (std::size_t i = 0; i < p.pool_size; ++i) {
    Eigen::VectorXd t = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p.dim));
    t.head(static_cast<Eigen::Index>(p.target_rank)) = unit_gaussian(p.target_rank, pool_rng);
    spec.target_pool.emplace_back(t);
  }
  Rng mixer_rng(derive_seed(seed, "mixer"));
  spec.mixer = random_orthogonal(p.dim, mixer_rng);
  spec.vocoder_rotation = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(p.dim),
                                                    static_cast<Eigen::Index>(p.dim));
  Rng selector_rng(derive_seed(seed, "selector"));
  spec.selector.rotation = random_orthogonal(p.dim, selector_rng);
  spec.validate();
  return spec;
}

enum class VariantKind { kVocoderSwap, kFeatureSwap, kSelectorRebuild };

inline std::string_view to_string(VariantKind k) {
  switch (k) {
    case VariantKind::kVocoderSwap: return "vocoder_swap";
    case VariantKind::kFeatureSwap: return "feature_swap";
    case VariantKind::kSelectorRebuild: return "selector_rebuild";
  }
  return "vocoder_swap";
}

inline VariantKind parse_variant_kind(std::string_view s) {
  if (s == "vocoder_swap") return VariantKind::kVocoderSwap;
  if (s == "feature_swap") return VariantKind::kFeatureSwap;
  if (s == "selector_rebuild") return VariantKind::kSelectorRebuild;
  throw InputError("unknown variant kind '" + std::string(s) + "'");
}

/// Single-module change of a system. vocoder_swap replaces the vocoder
/// rotation with a fresh rotation by spec.vocoder_angle; feature_swap draws
/// an independent mixer; selector_rebuild draws a new deterministic selector
/// (an attacker retraining the selection network). Everything else is kept.
inline AnonSystemSpec make_variant(const AnonSystemSpec& spec, VariantKind kind,
                                   std::uint64_t seed) {
  AnonSystemSpec out = spec;
  Rng rng(derive_seed(seed, std::string("variant:") + std::string(to_string(kind))));
  switch (kind) {
    case VariantKind::kVocoderSwap:
      out.vocoder_rotation = small_rotation(spec.dim(), spec.vocoder_angle, rng);
      break;
    case VariantKind::kFeatureSwap:
      out.mixer = random_orthogonal(spec.dim(), rng);
      break;
    case VariantKind::kSelectorRebuild:
      out.selector.rotation = random_orthogonal(spec.dim(), rng);
      break;
  }
  out.system_id.variant = std::string(to_string(kind));
  out.validate();
  return out;
}

inline std::string target_token(const AnonSystemSpec& spec, std::size_t index) {
  return spec.system_id.name + "-t" + anonsim_detail::pad(index, 4);
}

/// Anonymises every utterance of `data` with `spec`.
///
/// The source centroid x of each speaker comes from `centroids` when given
/// (simulation knows the truth) and is otherwise estimated as the normalized
/// mean of that speaker's utterances in `data`. Deterministic selection is
/// applied to x. Random choices and the fresh noise use per-speaker and
/// per-utterance streams, so the output does not depend on record order.
inline LabeledEmbeddingSet anonymise_dataset(const LabeledEmbeddingSet& data,
                                             const AnonSystemSpec& spec, std::uint64_t seed,
                                             const CentroidMap* centroids = nullptr) {
  using namespace anonsim_detail;
  spec.validate();
  require(data.empty() || data.dim() == spec.dim(),
          "anonymise: data dim " + std::to_string(data.dim()) + " does not match system dim " +
              std::to_string(spec.dim()));
  const Eigen::MatrixXd transform = spec.vocoder_rotation * spec.mixer;
  const double per_dim = spec.post_noise / std::sqrt(static_cast<double>(spec.dim()));

  std::unordered_map<std::string, Embedding> source;
  std::unordered_map<std::string, std::size_t> speaker_target;
  for (const auto& speaker : data.speakers()) {
    Embedding x;
    if (centroids && centroids->contains(speaker)) {
      x = centroids->at(speaker);
    } else {
      Eigen::VectorXd sum = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(data.dim()));
      for (auto i : data.utterances_of(speaker)) sum += data[i].embedding.vec();
      x = Embedding(sum).normalized();
    }
    if (spec.selection == Selection::kSpeakerRandom) {
      Rng rng(derive_seed(seed, "speaker:" + speaker));
      speaker_target[speaker] = rng.uniform_index(spec.target_pool.size());
    } else if (spec.selection == Selection::kDeterministic) {
      speaker_target[speaker] = spec.selector.select(x, spec.target_pool);
    }
    source.emplace(speaker, std::move(x));
  }

  std::vector<UtteranceRecord> out;
  out.reserve(data.size());
  for (const auto& rec : data.records()) {
    Rng rng(derive_seed(seed, "utt:" + rec.utterance_id));
    const std::size_t target = spec.selection == Selection::kUtteranceRandom
                                   ? rng.uniform_index(spec.target_pool.size())
                                   : speaker_target.at(rec.speaker_id);
    const Eigen::VectorXd clean = spec.target_strength * spec.target_pool[target].vec() +
                                  spec.leak * source.at(rec.speaker_id).vec();
    Eigen::VectorXd y = transform * clean;
    if (spec.post_noise > 0.0) y += per_dim * gaussian(spec.dim(), rng);
    out.push_back({rec.utterance_id, rec.speaker_id, Embedding(y).normalized(),
                   target_token(spec, target)});
  }
  return LabeledEmbeddingSet(std::move(out), data.role(), spec.system_id);
}

}  // namespace vpeval
