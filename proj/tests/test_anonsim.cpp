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

#include <gtest/gtest.h>

#include <boost/math/distributions/chi_squared.hpp>

#include <cmath>
#include <map>
#include <set>

#include "test_util.hpp"
#include "vpeval/anonsim.hpp"
#include "vpeval/io.hpp"
#include "vpeval/metrics.hpp"
#include "vpeval/metrics_oracle.hpp"
#include "vpeval/scoring.hpp"

namespace vpeval {
namespace {

WorldConfig small_world() {
  WorldConfig c;
  c.n_train_speakers = 6;
  c.n_eval_speakers = 8;
  c.utterances_per_speaker = 10;
  return c;
}

SystemParams params(const std::string& name, Selection sel = Selection::kUtteranceRandom) {
  SystemParams p;
  p.system_id = SystemId{name, std::nullopt};
  p.selection = sel;
  return p;
}

TEST(World, ZeroNoiseUtterancesEqualCentroid) {
  auto c = small_world();
  c.channel_noise_sigma = 0.0;
  const auto w = sample_world(c, 3);
  for (const auto* set : {&w.train, &w.eval_enroll, &w.eval_test}) {
    for (const auto& r : set->records()) EXPECT_EQ(r.embedding, w.centroids.at(r.speaker_id));
  }
}

TEST(World, SameSeedByteIdentical) {
  const WorldConfig c;
  const auto a = sample_world(c, 17), b = sample_world(c, 17);
  EXPECT_EQ(format_embedding_file(a.train), format_embedding_file(b.train));
  EXPECT_EQ(format_embedding_file(a.eval_enroll), format_embedding_file(b.eval_enroll));
  EXPECT_EQ(format_embedding_file(a.eval_test), format_embedding_file(b.eval_test));
  EXPECT_NE(format_embedding_file(a.train), format_embedding_file(sample_world(c, 18).train));
}

TEST(World, ShapeAndDisjointPopulations) {
  auto c = small_world();
  c.eval_utterances_per_speaker = 7;
  const auto w = sample_world(c, 1);
  EXPECT_EQ(w.train.size(), 60u);
  EXPECT_EQ(w.train.speakers().size(), 6u);
  EXPECT_EQ(w.eval_enroll.size(), 8u * 3u);
  EXPECT_EQ(w.eval_test.size(), 8u * 4u);
  EXPECT_NO_THROW(check_disjoint_speakers(w.train, w.eval_test));
  EXPECT_EQ(w.eval_enroll.speakers(), w.eval_test.speakers());
  for (const auto& r : w.train.records()) EXPECT_NEAR(r.embedding.norm(), 1.0, 1e-9);
}

TEST(World, ConfigValidation) {
  WorldConfig c;
  c.dim = 4;
  EXPECT_THROW(sample_world(c, 1), InputError);
  c = WorldConfig{};
  c.channel_noise_sigma = -1;
  EXPECT_THROW(sample_world(c, 1), InputError);
  c = WorldConfig{};
  c.orthogonal_centroids = true;  // 150 speakers do not fit into 32 dims
  EXPECT_THROW(sample_world(c, 1), InputError);
}

TEST(World, OrthogonalZeroNoiseGivesZeroEer) {
  WorldConfig c;
  c.n_train_speakers = 4;
  c.n_eval_speakers = 12;
  c.utterances_per_speaker = 6;
  c.channel_noise_sigma = 0.0;
  c.orthogonal_centroids = true;
  const auto w = sample_world(c, 9);
  for (const auto& [a, ca] : w.centroids) {
    for (const auto& [b, cb] : w.centroids) {
      EXPECT_NEAR(ca.vec().dot(cb.vec()), a == b ? 1.0 : 0.0, 1e-12);
    }
  }
  const auto p = build_eval_protocol(w.eval_enroll, w.eval_test, 2);
  const auto scores = score_protocol(p, w.eval_enroll, w.eval_test);
  EXPECT_EQ(compute_eer(scores).value, 0.0);
  EXPECT_EQ(eer_bruteforce_oracle(scores).value, 0.0);
}

TEST(Orthogonal, HaarAndSmallRotation) {
  Rng rng(5);
  for (int i = 0; i < 5; ++i) {
    EXPECT_LE(orthogonality_error(random_orthogonal(32, rng)), 1e-9);
    const auto v = small_rotation(32, 0.15, rng);
    EXPECT_LE(orthogonality_error(v), 1e-9);
    // Sixteen planes, each rotated by exactly 0.15 rad.
    EXPECT_NEAR(v.trace(), 32.0 * std::cos(0.15), 1e-9);
  }
  EXPECT_TRUE(small_rotation(8, 0.0, rng).isIdentity(0.0));
}

TEST(System, ConstructionInvariants) {
  const auto s = make_system(params("B3"), 4);
  EXPECT_NO_THROW(s.validate());
  EXPECT_EQ(s.target_pool.size(), 200u);
  for (const auto& t : s.target_pool) {
    EXPECT_NEAR(t.norm(), 1.0, 1e-12);
    for (std::size_t d = 8; d < 32; ++d) EXPECT_EQ(t[d], 0.0);
  }
  EXPECT_LE(orthogonality_error(s.mixer), 1e-9);
  EXPECT_TRUE(s.vocoder_rotation.isIdentity(0.0));
  auto bad = params("X");
  bad.leak = 1.5;
  EXPECT_THROW(make_system(bad, 1), InputError);
  bad = params("X");
  bad.pool_size = 0;
  EXPECT_THROW(make_system(bad, 1), InputError);
  bad = params("X");
  bad.target_rank = 40;
  EXPECT_THROW(make_system(bad, 1), InputError);
}

TEST(Anonymise, SpeakerLevelNoiseFreeCollapsesToTarget) {
  auto p = params("S", Selection::kSpeakerRandom);
  p.leak = 0.0;
  p.post_noise = 0.0;
  const auto spec = make_system(p, 2);
  const auto w = sample_world(small_world(), 2);
  const auto out = anonymise_dataset(w.train, spec, 8, &w.centroids);
  for (const auto& speaker : out.speakers()) {
    const auto& idx = out.utterances_of(speaker);
    std::set<std::string> targets;
    for (auto i : idx) {
      targets.insert(*out[i].target_id);
      EXPECT_EQ(out[i].embedding, out[idx.front()].embedding);
    }
    ASSERT_EQ(targets.size(), 1u);
    // Oracle: the output must equal normalize(V M t) for the recorded target.
    const std::string tid = *targets.begin();
    const std::size_t pool_index = std::stoul(tid.substr(tid.find("-t") + 2));
    const Eigen::VectorXd expect =
        (spec.vocoder_rotation * spec.mixer * spec.target_pool[pool_index].vec()).normalized();
    for (Eigen::Index d = 0; d < expect.size(); ++d) {
      EXPECT_NEAR(out[idx.front()].embedding[static_cast<std::size_t>(d)], expect[d], 1e-12);
    }
  }
}

TEST(Anonymise, UtteranceRandomVariesTargets) {
  auto p = params("U");
  p.pool_size = 100;
  const auto spec = make_system(p, 3);
  const auto w = sample_world(small_world(), 3);
  const auto out = anonymise_dataset(w.train, spec, 1, &w.centroids);
  for (const auto& speaker : out.speakers()) {
    std::set<std::string> targets;
    for (auto i : out.utterances_of(speaker)) targets.insert(*out[i].target_id);
    EXPECT_GT(targets.size(), 1u) << speaker;
  }
}

TEST(Anonymise, UtteranceRandomTargetsAreUniform) {
  auto p = params("U");
  p.pool_size = 20;
  const auto spec = make_system(p, 3);
  WorldConfig c = small_world();
  c.n_train_speakers = 40;
  c.utterances_per_speaker = 100;
  const auto w = sample_world(c, 4);
  const auto out = anonymise_dataset(w.train, spec, 77, &w.centroids);
  std::map<std::string, double> counts;
  for (const auto& r : out.records()) counts[*r.target_id] += 1.0;
  const double expected = static_cast<double>(out.size()) / 20.0;
  double chi2 = 0.0;
  for (std::size_t i = 0; i < 20; ++i) {
    const double o = counts[target_token(spec, i)];
    chi2 += (o - expected) * (o - expected) / expected;
  }
  const boost::math::chi_squared dist(19.0);
  EXPECT_GT(boost::math::cdf(boost::math::complement(dist, chi2)), 0.01) << chi2;
}

TEST(Anonymise, DeterministicSelectionIsSpeakerConsistent) {
  const auto spec = make_system(params("C", Selection::kDeterministic), 5);
  WorldConfig c = small_world();
  c.n_train_speakers = 1000;
  c.utterances_per_speaker = 2;
  c.channel_noise_sigma = 0.05;
  const auto w = sample_world(c, 6);
  // Without true centroids the selector sees the per-speaker mean estimate.
  for (const CentroidMap* centroids : {&w.centroids, static_cast<const CentroidMap*>(nullptr)}) {
    const auto out = anonymise_dataset(w.train, spec, 3, centroids);
    std::size_t same = 0;
    for (const auto& speaker : out.speakers()) {
      const auto& idx = out.utterances_of(speaker);
      same += *out[idx[0]].target_id == *out[idx[1]].target_id;
    }
    EXPECT_GE(static_cast<double>(same) / 1000.0, 0.95);
  }
}

TEST(Anonymise, SelectorIsDeterministic) {
  const auto spec = make_system(params("C", Selection::kDeterministic), 5);
  Rng rng(1);
  for (int i = 0; i < 100; ++i) {
    const auto x = testing::random_unit(32, rng);
    EXPECT_EQ(spec.selector.select(x, spec.target_pool), spec.selector.select(x, spec.target_pool));
  }
  const auto rebuilt = make_variant(spec, VariantKind::kSelectorRebuild, 9);
  std::size_t differ = 0;
  for (int i = 0; i < 100; ++i) {
    const auto x = testing::random_unit(32, rng);
    differ += spec.selector.select(x, spec.target_pool) !=
              rebuilt.selector.select(x, rebuilt.target_pool);
  }
  EXPECT_GT(differ, 90u);
}

TEST(Anonymise, OutputContract) {
  const auto spec = make_system(params("B3"), 5);
  const auto w = sample_world(small_world(), 5);
  const auto out = anonymise_dataset(w.eval_test, spec, 1, &w.centroids);
  ASSERT_EQ(out.size(), w.eval_test.size());
  EXPECT_EQ(out.role(), SetRole::kEvalTest);
  EXPECT_EQ(out.anonymised_by(), spec.system_id);
  for (std::size_t i = 0; i < out.size(); ++i) {
    EXPECT_EQ(out[i].utterance_id, w.eval_test[i].utterance_id);
    EXPECT_EQ(out[i].speaker_id, w.eval_test[i].speaker_id);
    EXPECT_TRUE(out[i].target_id.has_value());
    EXPECT_NEAR(out[i].embedding.norm(), 1.0, 1e-9);
  }
  EXPECT_EQ(out, anonymise_dataset(w.eval_test, spec, 1, &w.centroids));
  EXPECT_NE(out, anonymise_dataset(w.eval_test, spec, 2, &w.centroids));
}

TEST(Anonymise, IndependentOfRecordOrder) {
  const auto spec = make_system(params("B3", Selection::kSpeakerRandom), 5);
  const auto w = sample_world(small_world(), 5);
  auto recs = w.train.records();
  Rng rng(4);
  rng.shuffle(recs);
  const LabeledEmbeddingSet shuffled(recs, SetRole::kTrain);
  const auto a = anonymise_dataset(w.train, spec, 7, &w.centroids);
  const auto b = anonymise_dataset(shuffled, spec, 7, &w.centroids);
  for (const auto& r : b.records()) EXPECT_EQ(r, *a.find(r.utterance_id));
}

TEST(Anonymise, DimMismatch) {
  auto p = params("B3");
  p.dim = 16;
  const auto spec = make_system(p, 1);
  const auto w = sample_world(small_world(), 1);
  EXPECT_THROW(anonymise_dataset(w.train, spec, 1), InputError);
}

TEST(Variant, VocoderZeroAngleOnlyRelabels) {
  auto p = params("B3");
  p.vocoder_angle = 0.0;
  const auto spec = make_system(p, 1);
  const auto v = make_variant(spec, VariantKind::kVocoderSwap, 2);
  EXPECT_EQ(v.vocoder_rotation, spec.vocoder_rotation);
  EXPECT_EQ(v.mixer, spec.mixer);
  EXPECT_EQ(v.system_id, (SystemId{"B3", "vocoder_swap"}));
}

TEST(Variant, VocoderPreservesOtherFields) {
  const auto spec = make_system(params("B3"), 1);
  const auto v = make_variant(spec, VariantKind::kVocoderSwap, 2);
  EXPECT_EQ(v.target_pool, spec.target_pool);
  EXPECT_EQ(v.target_strength, spec.target_strength);
  EXPECT_EQ(v.leak, spec.leak);
  EXPECT_EQ(v.post_noise, spec.post_noise);
  EXPECT_EQ(v.mixer, spec.mixer);
  EXPECT_FALSE(v.vocoder_rotation.isIdentity(1e-3));
  EXPECT_LE(orthogonality_error(v.vocoder_rotation), 1e-9);
}

TEST(Variant, FeatureSwapSeedsGiveDifferentMixers) {
  const auto spec = make_system(params("B5"), 1);
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto a = make_variant(spec, VariantKind::kFeatureSwap, 2 * s);
    const auto b = make_variant(spec, VariantKind::kFeatureSwap, 2 * s + 1);
    EXPECT_GT((a.mixer - b.mixer).norm(), 0.1);
    EXPECT_LE(orthogonality_error(a.mixer), 1e-9);
    EXPECT_EQ(a.target_pool, spec.target_pool);
    EXPECT_EQ(a.vocoder_rotation, spec.vocoder_rotation);
  }
}

}  // namespace
}  // namespace vpeval
