// tests/features_test.cpp

// Copyright 2026  The spkver Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.


#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "spkver/corpus.hpp"
#include "spkver/features.hpp"
#include "test_util.hpp"

namespace spkver {
namespace {

using testing::CodeOf;

FeatureMatrix Features(const Matrix& data, const std::string& prefix = "x") {
  FeatureMatrix m;
  m.data = data;
  m.labels = NumberedLabels(prefix, static_cast<int>(data.cols()));
  return m;
}

AudioClip Voiced(std::uint64_t seed, double seconds = 1.0) {
  Rng rng(seed);
  UtteranceSpec spec;
  spec.duration_s = seconds;
  return SynthesizeUtterance(RandomSpeakerProfile(rng), spec, seed + 1);
}

TEST(LogEnergyTest, Examples) {
  FrameMatrix fm;
  fm.frames = Matrix(2, 400);
  for (std::size_t i = 0; i < 400; ++i) fm.frames(1, i) = 1.0;
  const auto e = FrameLogEnergy(fm);
  EXPECT_NEAR(e[0], std::log(1e-10), 1e-12);
  EXPECT_NEAR(e[0], -23.0259, 1e-4);
  EXPECT_NEAR(e[1], 5.9915, 1e-4);
  EXPECT_DOUBLE_EQ(e[1], std::log(400.0000000001));
}

TEST(LogEnergyTest, GainAddsTwoLogC) {
  std::mt19937_64 rng(1);
  const AudioClip c = testing::Gaussian(rng, 4000);
  AudioClip scaled = c;
  for (double& s : scaled.samples) s *= 3.0;
  const auto e1 = FrameLogEnergy(FrameSignal(c, 25, 10, false));
  const auto e2 = FrameLogEnergy(FrameSignal(scaled, 25, 10, false));
  for (std::size_t t = 0; t < e1.size(); ++t) EXPECT_NEAR(e2[t] - e1[t], 2 * std::log(3.0), 1e-9);
}

TEST(DeltaTest, ConstantGivesZero) {
  const FeatureMatrix out = AppendDeltas(Features(Matrix(10, 3, 4.2)), 2);
  ASSERT_EQ(out.dim(), 9u);
  for (std::size_t t = 0; t < 10; ++t)
    for (std::size_t j = 3; j < 9; ++j) EXPECT_EQ(out.data(t, j), 0.0);
}

TEST(DeltaTest, RampHasUnitSlope) {
  Matrix ramp(12, 1);
  for (std::size_t t = 0; t < 12; ++t) ramp(t, 0) = static_cast<double>(t);
  const FeatureMatrix out = AppendDeltas(Features(ramp), 2);
  for (std::size_t t = 2; t + 2 < 12; ++t) EXPECT_DOUBLE_EQ(out.data(t, 1), 1.0);
  // Edge replication shrinks the slope at the ends: (1*(1-0) + 2*(2-0)) / 10.
  EXPECT_DOUBLE_EQ(out.data(0, 1), 0.5);
  // Second derivative of a line vanishes away from the edges.
  for (std::size_t t = 4; t + 4 < 12; ++t) EXPECT_NEAR(out.data(t, 2), 0.0, 1e-15);
}

TEST(DeltaTest, ThirteenToThirtyNineWithLabels) {
  std::mt19937_64 rng(2);
  FeatureMatrix base = Features(testing::RandomMatrix(rng, 20, 13), "c");
  base.labels.back() = "E";
  const FeatureMatrix out = AppendDeltas(base, 2);
  EXPECT_EQ(out.dim(), 39u);
  EXPECT_EQ(out.labels[13], "d_c1");
  EXPECT_EQ(out.labels[25], "d_E");
  EXPECT_EQ(out.labels[26], "dd_c1");
  EXPECT_EQ(out.labels[38], "dd_E");
}

TEST(DeltaTest, TooFewFrames) {
  EXPECT_EQ(CodeOf([] { AppendDeltas(Features(Matrix(4, 2)), 2); }), ErrorCode::kTooFewFrames);
  EXPECT_NO_THROW(AppendDeltas(Features(Matrix(5, 2)), 2));
}

TEST(DeltaTest, InvariantToConstantOffset) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix x = testing::RandomMatrix(rng, 30, 5);
    Matrix shifted = x;
    for (std::size_t t = 0; t < 30; ++t)
      for (std::size_t j = 0; j < 5; ++j) shifted(t, j) += 10.0 * (j + 1) - trial;
    const FeatureMatrix a = AppendDeltas(Features(x), 2), b = AppendDeltas(Features(shifted), 2);
    for (std::size_t t = 0; t < 30; ++t)
      for (std::size_t j = 5; j < 15; ++j) ASSERT_NEAR(a.data(t, j), b.data(t, j), 1e-12);
  }
}

TEST(FuseTest, LayoutAndIdentity) {
  std::mt19937_64 rng(4);
  const FeatureMatrix a = Features(testing::RandomMatrix(rng, 7, 39), "c");
  const FeatureMatrix b = Features(testing::RandomMatrix(rng, 7, 12), "w");
  const FeatureMatrix f = Fuse(a, b);
  ASSERT_EQ(f.dim(), 51u);
  for (std::size_t t = 0; t < 7; ++t)
    for (std::size_t j = 0; j < 51; ++j) EXPECT_EQ(f.data(t, j), j < 39 ? a.data(t, j) : b.data(t, j - 39));
  EXPECT_EQ(f.labels[39], "w1");
  FeatureMatrix empty;
  empty.data = Matrix(7, 0);
  EXPECT_EQ(Fuse(a, empty), a);
  EXPECT_EQ(CodeOf([&] { Fuse(a, Features(Matrix(6, 12))); }), ErrorCode::kFrameCountMismatch);
}

TEST(VadMaskTest, Selection) {
  std::mt19937_64 rng(5);
  const FeatureMatrix m = Features(testing::RandomMatrix(rng, 10, 3));
  VadMask all;
  all.active.assign(10, true);
  EXPECT_EQ(ApplyVadMask(m, all), m);
  VadMask alt;
  for (int t = 0; t < 10; ++t) alt.active.push_back(t % 2 == 0);
  const FeatureMatrix half = ApplyVadMask(m, alt);
  ASSERT_EQ(half.num_frames(), 5u);
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(half.data(i, j), m.data(2 * i, j));
  VadMask none;
  none.active.assign(10, false);
  EXPECT_EQ(CodeOf([&] { ApplyVadMask(m, none); }), ErrorCode::kAllFramesRemoved);
  VadMask short_mask;
  short_mask.active.assign(9, true);
  EXPECT_EQ(CodeOf([&] { ApplyVadMask(m, short_mask); }), ErrorCode::kLengthMismatch);
}

TEST(CmsTest, ZeroMeanSingleFrameIdempotent) {
  std::mt19937_64 rng(6);
  const FeatureMatrix m = Features(testing::RandomMatrix(rng, 25, 6, 5.0));
  const FeatureMatrix c = CepstralMeanSubtract(m);
  for (std::size_t j = 0; j < 6; ++j) {
    double mean = 0;
    for (std::size_t t = 0; t < 25; ++t) mean += c.data(t, j);
    EXPECT_NEAR(mean / 25, 0.0, 1e-9);
  }
  const FeatureMatrix twice = CepstralMeanSubtract(c);
  for (std::size_t i = 0; i < c.data.data().size(); ++i)
    EXPECT_NEAR(twice.data.data()[i], c.data.data()[i], 1e-12);
  const FeatureMatrix one = CepstralMeanSubtract(Features(testing::RandomMatrix(rng, 1, 4)));
  for (double v : one.data.data()) EXPECT_EQ(v, 0.0);
}

TEST(CmsTest, ChannelOffsetInvariance) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g(0, 20);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix x = testing::RandomMatrix(rng, 40, 8);
    Matrix y = x;
    std::vector<double> offset(8);
    for (double& o : offset) o = g(rng);
    for (std::size_t t = 0; t < 40; ++t)
      for (std::size_t j = 0; j < 8; ++j) y(t, j) += offset[j];
    const FeatureMatrix a = CepstralMeanSubtract(Features(x)), b = CepstralMeanSubtract(Features(y));
    for (std::size_t i = 0; i < a.data.data().size(); ++i)
      ASSERT_NEAR(a.data.data()[i], b.data.data()[i], 1e-12);
  }
}

TEST(CmsTest, CepstralModeLeavesLsfColumns) {
  FeatureMatrix m;
  m.labels = {"c1", "E", "d_c1", "dd_E", "w1", "w2"};
  m.data = Matrix(3, 6);
  for (std::size_t t = 0; t < 3; ++t)
    for (std::size_t j = 0; j < 6; ++j) m.data(t, j) = static_cast<double>(t + j);
  EXPECT_EQ(CmsColumns(m, CmsMode::kCepstral), (std::vector<bool>{true, true, true, true, false, false}));
  const FeatureMatrix c = CepstralMeanSubtract(m, CmsMode::kCepstral);
  EXPECT_EQ(c.data(0, 4), m.data(0, 4));
  EXPECT_EQ(c.data(0, 0), -1.0);
  EXPECT_EQ(CepstralMeanSubtract(m, CmsMode::kOff), m);
  EXPECT_EQ(CodeOf([] { ParseCmsMode("some"); }), ErrorCode::kConfigError);
}

TEST(ExtractTest, Dimensions) {
  const AudioClip clip = Voiced(10);
  const FrontEndConfig cfg;
  const FeatureMatrix mfcc = ExtractFeatures(clip, cfg, FeatureKind::kMfcc);
  const FeatureMatrix lsf = ExtractFeatures(clip, cfg, FeatureKind::kLsf);
  const FeatureMatrix fused = ExtractFeatures(clip, cfg, FeatureKind::kFused);
  EXPECT_EQ(mfcc.dim(), 39u);
  EXPECT_EQ(lsf.dim(), 12u);
  EXPECT_EQ(fused.dim(), 51u);
  EXPECT_EQ(FeatureDim(FeatureKind::kFused, cfg.cepstra, cfg.lpc_order), 51);
  EXPECT_EQ(fused.labels[12], "E");
  EXPECT_EQ(fused.labels[39], "w1");
  EXPECT_EQ(mfcc.num_frames(), fused.num_frames());
  // VAD drops the silent lead-in and tail.
  EXPECT_LT(fused.num_frames(), FrameSignal(clip, 25, 10, false).num_frames());
}

TEST(ExtractTest, FusedIsConcatenationBeforeCms) {
  const AudioClip clip = Voiced(11);
  FrontEndConfig cfg;
  cfg.cms = CmsMode::kOff;
  const FeatureMatrix mfcc = ExtractFeatures(clip, cfg, FeatureKind::kMfcc);
  const FeatureMatrix lsf = ExtractFeatures(clip, cfg, FeatureKind::kLsf);
  EXPECT_EQ(ExtractFeatures(clip, cfg, FeatureKind::kFused), Fuse(mfcc, lsf));
}

TEST(ExtractTest, DeterministicAndVadReference) {
  const AudioClip clip = Voiced(12);
  const FrontEndConfig cfg;
  EXPECT_EQ(ExtractFeatures(clip, cfg, FeatureKind::kFused), ExtractFeatures(clip, cfg, FeatureKind::kFused));
  // Using the clip itself as the VAD reference is the same as no reference.
  EXPECT_EQ(ExtractFeatures(clip, cfg, FeatureKind::kFused, &clip), ExtractFeatures(clip, cfg, FeatureKind::kFused));
  const AudioClip noise = GenerateNoise(NoiseKind::kWhite, 1.0, 3);
  const AudioClip noisy = MixNoiseAtSnr(clip, noise, 0.0);
  const std::size_t with_ref = ExtractFeatures(noisy, cfg, FeatureKind::kFused, &clip).num_frames();
  EXPECT_EQ(with_ref, ExtractFeatures(clip, cfg, FeatureKind::kFused).num_frames());
  AudioClip shorter = clip;
  shorter.samples.pop_back();
  EXPECT_EQ(CodeOf([&] { ExtractFeatures(noisy, cfg, FeatureKind::kFused, &shorter); }), ErrorCode::kLengthMismatch);
}

TEST(FeatureFileTest, RoundTripAndFormat) {
  const FeatureMatrix m = ExtractFeatures(Voiced(13), FrontEndConfig{}, FeatureKind::kFused);
  const std::string text = SerializeFeatures(m);
  EXPECT_EQ(text.rfind("#dims=51 hop_ms=10 labels=c1,c2,", 0), 0u);
  const FeatureMatrix back = ParseFeatures(text);
  ASSERT_EQ(back.dim(), 51u);
  ASSERT_EQ(back.num_frames(), m.num_frames());
  EXPECT_EQ(back.labels, m.labels);
  for (std::size_t i = 0; i < m.data.data().size(); ++i) {
    const double v = m.data.data()[i];
    EXPECT_NEAR(back.data.data()[i], v, 5e-9 * std::abs(v) + 1e-300);
  }
  // Re-serializing parsed text is a fixed point.
  EXPECT_EQ(SerializeFeatures(back), text);
}

TEST(FeatureFileTest, RejectsMalformedInput) {
  EXPECT_EQ(CodeOf([] { ParseFeatures("1,2,3\n"); }), ErrorCode::kFeatureParseError);
  EXPECT_EQ(CodeOf([] { ParseFeatures("#dims=2 hop_ms=10 labels=a,b\n1,2\n3\n"); }), ErrorCode::kDimMismatch);
  EXPECT_EQ(CodeOf([] { ParseFeatures("#dims=3 hop_ms=10 labels=a,b\n"); }), ErrorCode::kDimMismatch);
  EXPECT_EQ(CodeOf([] { ParseFeatures("#dims=2 hop_ms=10 labels=a,b\n1,x\n"); }), ErrorCode::kFeatureParseError);
  EXPECT_EQ(CodeOf([] { ParseFeatures("#dims=2 colour=red\n"); }), ErrorCode::kFeatureParseError);
  EXPECT_EQ(CodeOf([] { ReadFeatures("/nonexistent/f.csv"); }), ErrorCode::kMissingFeatures);
}

}  // namespace
}  // namespace spkver
