// tests/dsp_frontend_test.cpp

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
#include <random>

#include "spkver/corpus.hpp"
#include "spkver/dsp_frontend.hpp"
#include "test_util.hpp"

namespace spkver {
namespace {

using testing::CodeOf;

AudioClip Clip(std::vector<double> s, int rate = 16000) { return AudioClip{std::move(s), rate}; }

double Power(const std::vector<double>& x) {
  double p = 0.0;
  for (double v : x) p += v * v;
  return p / static_cast<double>(x.size());
}

TEST(PreEmphasisTest, ZeroCoefficientIsIdentity) {
  const AudioClip in = Clip({0.1, -0.2, 0.3, 0.4});
  EXPECT_EQ(PreEmphasize(in, 0.0).samples, in.samples);
}

TEST(PreEmphasisTest, ConstantSignal) {
  const AudioClip out = PreEmphasize(Clip(std::vector<double>(10, 1.0)), 0.97);
  EXPECT_DOUBLE_EQ(out.samples[0], 1.0);
  for (std::size_t t = 1; t < out.size(); ++t) EXPECT_NEAR(out.samples[t], 0.03, 1e-15);
}

TEST(PreEmphasisTest, Impulse) {
  const AudioClip out = PreEmphasize(Clip({1, 0, 0}), 0.95);
  EXPECT_EQ(out.samples, (std::vector<double>{1.0, -0.95, 0.0}));
}

TEST(PreEmphasisTest, EmptyClipFails) {
  EXPECT_EQ(CodeOf([] { PreEmphasize(AudioClip{}, 0.97); }), ErrorCode::kEmptySignal);
}

TEST(PreEmphasisTest, IsLinear) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int trial = 0; trial < 50; ++trial) {
    const AudioClip y1 = testing::Gaussian(rng, 300), y2 = testing::Gaussian(rng, 300);
    const double alpha = u(rng), beta = u(rng);
    AudioClip mix = y1;
    for (std::size_t i = 0; i < mix.size(); ++i) mix.samples[i] = alpha * y1.samples[i] + beta * y2.samples[i];
    const auto lhs = PreEmphasize(mix, 0.97).samples;
    const auto p1 = PreEmphasize(y1, 0.97).samples, p2 = PreEmphasize(y2, 0.97).samples;
    for (std::size_t i = 0; i < lhs.size(); ++i)
      ASSERT_NEAR(lhs[i], alpha * p1[i] + beta * p2[i], 1e-12);
  }
}

TEST(HammingTest, ThreePoints) {
  const auto w = HammingWindow(3);
  ASSERT_EQ(w.size(), 3u);
  EXPECT_NEAR(w[0], 0.08, 1e-15);
  EXPECT_NEAR(w[1], 1.0, 1e-15);
  EXPECT_NEAR(w[2], 0.08, 1e-15);
}

TEST(HammingTest, SymmetricAndBounded) {
  for (std::size_t n = 2; n <= 600; n += 7) {
    const auto w = HammingWindow(n);
    for (std::size_t i = 0; i < n; ++i) {
      EXPECT_NEAR(w[i], w[n - 1 - i], 1e-14);
      EXPECT_GE(w[i], 0.08 - 1e-15);
      EXPECT_LE(w[i], 1.0 + 1e-15);
    }
  }
}

TEST(HammingTest, SumMatchesDirectSummation) {
  const auto w = HammingWindow(400);
  long double cos_sum = 0;
  for (int n = 0; n < 400; ++n) cos_sum += std::cos(2.0L * std::numbers::pi_v<long double> * n / 399.0L);
  double total = 0.0;
  for (double v : w) total += v;
  EXPECT_NEAR(total, static_cast<double>(0.54L * 400 - 0.46L * cos_sum), 1e-10);
}

TEST(HammingTest, TooShort) {
  EXPECT_EQ(CodeOf([] { HammingWindow(1); }), ErrorCode::kWindowTooShort);
  EXPECT_EQ(CodeOf([] { HammingWindow(0); }), ErrorCode::kWindowTooShort);
}

TEST(FramingTest, OneSecondAt16k) {
  const FrameMatrix fm = FrameSignal(AudioClip{std::vector<double>(16000, 0.1), 16000}, 25, 10, false);
  EXPECT_EQ(fm.frame_len_samples, 400u);
  EXPECT_EQ(fm.hop_samples, 160u);
  EXPECT_EQ(fm.num_frames(), 98u);
}

TEST(FramingTest, NonOverlappingFramesReproducePrefix) {
  std::mt19937_64 rng(5);
  const AudioClip c = testing::Gaussian(rng, 1234);
  const FrameMatrix fm = FrameSignal(c, 10, 10, false);  // 160 samples
  ASSERT_EQ(fm.num_frames(), 1234u / 160);
  std::size_t k = 0;
  for (std::size_t t = 0; t < fm.num_frames(); ++t)
    for (double v : fm.frames.row(t)) EXPECT_EQ(v, c.samples[k++]);
}

TEST(FramingTest, WindowedConstant) {
  const FrameMatrix fm = FrameSignal(AudioClip{std::vector<double>(1000, 0.25), 16000}, 25, 10, true);
  const auto w = HammingWindow(400);
  for (std::size_t t = 0; t < fm.num_frames(); ++t)
    for (std::size_t i = 0; i < 400; ++i) EXPECT_DOUBLE_EQ(fm.frames(t, i), 0.25 * w[i]);
}

TEST(FramingTest, Errors) {
  EXPECT_EQ(CodeOf([] { FrameSignal(AudioClip{std::vector<double>(399, 0.1), 16000}, 25, 10, false); }),
            ErrorCode::kSignalTooShort);
  EXPECT_EQ(CodeOf([] { FrameSignal(AudioClip{std::vector<double>(1000, 0.1), 16000}, 0, 10, false); }),
            ErrorCode::kInvalidArgument);
  EXPECT_EQ(CodeOf([] { FrameSignal(AudioClip{std::vector<double>(1000, 0.1), 16000}, 10, 25, false); }),
            ErrorCode::kInvalidArgument);
}

TEST(VadTest, AllZeroSignalIsInactive) {
  const FrameMatrix fm = FrameSignal(AudioClip{std::vector<double>(4000, 0.0), 16000}, 25, 10, false);
  const VadMask m = DetectVoiceActivity(fm, -60, 30);
  EXPECT_TRUE(m.all_silent);
  EXPECT_EQ(m.num_active(), 0u);
  EXPECT_EQ(m.active.size(), fm.num_frames());
}

TEST(VadTest, SingleLoudFrame) {
  std::mt19937_64 rng(9);
  AudioClip c = testing::Gaussian(rng, 16000, 1e-5);
  // Non-overlapping frames make "exactly one frame" unambiguous.
  for (std::size_t i = 4000; i < 4400; ++i) c.samples[i] = 0.5 * std::sin(0.3 * i);
  const FrameMatrix fm = FrameSignal(c, 25, 25, false);
  const VadMask m = DetectVoiceActivity(fm, -120, 30);
  ASSERT_EQ(m.num_active(), 1u);
  EXPECT_TRUE(m.active[10]);
}

TEST(VadTest, PeakFrameAlwaysActive) {
  // Floor above every frame: only the loudest survives.
  const FrameMatrix fm = FrameSignal(testing::Tone(200, 4000, 1e-4), 25, 10, false);
  const VadMask m = DetectVoiceActivity(fm, 50.0, 30.0);
  EXPECT_EQ(m.num_active(), 1u);
  EXPECT_FALSE(m.all_silent);
}

TEST(VadTest, MatchesBruteForceEnergySplit) {
  // Synthetic voiced signal with 500 ms of silence inserted in the middle.
  Rng prng(17);
  const SpeakerProfile p = RandomSpeakerProfile(prng);
  UtteranceSpec spec;
  spec.duration_s = 2.0;
  AudioClip c = SynthesizeUtterance(p, spec, 21);
  for (std::size_t i = 12000; i < 20000; ++i) c.samples[i] = 1e-5 * ((i * 7919) % 13 - 6.0);
  const FrameMatrix fm = FrameSignal(c, 25, 10, false);
  const VadMask m = DetectVoiceActivity(fm, -60, 30);

  std::vector<double> e_db;
  for (std::size_t t = 0; t < fm.num_frames(); ++t) {
    double e = 0;
    for (std::size_t i = 0; i < 400; ++i) e += c.samples[t * 160 + i] * c.samples[t * 160 + i];
    e_db.push_back(10 * std::log10(e + 1e-10));
  }
  const double thr = std::max(*std::max_element(e_db.begin(), e_db.end()) - 30.0, -60.0);
  std::size_t expected = 0;
  for (double e : e_db) expected += e > thr;
  EXPECT_EQ(m.num_active(), expected);
  // Frames wholly inside the gap are dropped.
  for (std::size_t t = 12000 / 160 + 1; (t * 160 + 400) <= 20000; ++t) EXPECT_FALSE(m.active[t]) << t;
}

TEST(VadTest, GainInvariance) {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> gain(0.01, 1.0);
  for (int trial = 0; trial < 30; ++trial) {
    AudioClip c = testing::Gaussian(rng, 8000, 0.1);
    // Piecewise loudness so the mask is non-trivial.
    for (std::size_t i = 0; i < c.size(); ++i) c.samples[i] *= std::pow(10.0, -2.0 * ((i / 1000) % 3) / 2.0);
    const VadMask base = DetectVoiceActivity(FrameSignal(c, 25, 10, false), -200, 30);
    const double g = gain(rng);
    for (double& s : c.samples) s *= g;
    const VadMask scaled = DetectVoiceActivity(FrameSignal(c, 25, 10, false), -200, 30);
    EXPECT_EQ(base.active, scaled.active) << "gain " << g;
  }
}

TEST(MixNoiseTest, ErrorCases) {
  const AudioClip clean = testing::Tone(300, 1000);
  EXPECT_EQ(CodeOf([&] { MixNoiseAtSnr(clean, AudioClip{std::vector<double>(100, 0.0), 16000}, 0); }),
            ErrorCode::kSilentNoise);
  EXPECT_EQ(CodeOf([&] { MixNoiseAtSnr(clean, AudioClip{{}, 16000}, 0); }), ErrorCode::kSilentNoise);
  EXPECT_EQ(CodeOf([&] { MixNoiseAtSnr(clean, testing::Tone(50, 100, 0.5, 8000), 0); }),
            ErrorCode::kRateMismatch);
  EXPECT_EQ(CodeOf([&] { MixNoiseAtSnr(AudioClip{}, clean, 0); }), ErrorCode::kEmptySignal);
}

// Measured post hoc: the added component is (out - clean) since no test
// signal here is loud enough to trigger peak normalization.
double MeasuredSnr(const AudioClip& clean, const AudioClip& out, const std::vector<bool>& use) {
  double ps = 0, pn = 0;
  for (std::size_t i = 0; i < clean.size(); ++i) {
    if (!use[i]) continue;
    const double n = out.samples[i] - clean.samples[i];
    ps += clean.samples[i] * clean.samples[i];
    pn += n * n;
  }
  return 10 * std::log10(ps / pn);
}

TEST(MixNoiseTest, AchievesRequestedSnr) {
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<int> len(2000, 9000);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int pair = 0; pair < 20; ++pair) {
    const AudioClip clean = testing::Gaussian(rng, static_cast<std::size_t>(len(rng)), 0.03);
    AudioClip noise{std::vector<double>(static_cast<std::size_t>(len(rng))), 16000};
    for (double& s : noise.samples) s = u(rng) * (pair % 2 ? 1.0 : 0.01);
    for (double snr : {-10.0, 0.0, 10.0, 30.0}) {
      const AudioClip out = MixNoiseAtSnr(clean, noise, snr);
      EXPECT_NEAR(MeasuredSnr(clean, out, std::vector<bool>(clean.size(), true)), snr, 0.1);
    }
  }
}

TEST(MixNoiseTest, SnrOverVadActiveSamples) {
  std::mt19937_64 rng(37);
  for (int pair = 0; pair < 20; ++pair) {
    AudioClip clean = testing::Gaussian(rng, 8000, 0.03);
    for (std::size_t i = 0; i < 2000; ++i) clean.samples[i] *= 1e-3;  // quiet lead-in
    const AudioClip noise = testing::Gaussian(rng, 3000, 0.2);
    const VadMask vad = DetectVoiceActivity(FrameSignal(clean, 25, 10, false), -60, 30);
    const auto use = ActiveSampleMask(vad, clean.size());
    for (double snr : {-10.0, 0.0, 10.0, 30.0}) {
      const AudioClip out = MixNoiseAtSnr(clean, noise, snr, vad);
      EXPECT_NEAR(MeasuredSnr(clean, out, use), snr, 0.1);
    }
  }
}

TEST(MixNoiseTest, HighSnrBarelyChangesSignal) {
  std::mt19937_64 rng(41);
  const AudioClip clean = testing::Gaussian(rng, 5000, 0.1);
  const AudioClip out = MixNoiseAtSnr(clean, testing::Gaussian(rng, 700, 0.3), 60.0);
  std::vector<double> diff(clean.size());
  for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = out.samples[i] - clean.samples[i];
  EXPECT_LT(std::sqrt(Power(diff) / Power(clean.samples)), 0.002);
}

TEST(MixNoiseTest, WhiteNoiseIntoUnitPowerTone) {
  // A unit-power sine peaks at sqrt(2), so the mix gets peak-normalized; the
  // tone component is recovered by projecting the output onto the tone.
  const AudioClip tone = testing::Tone(440, 16000, std::sqrt(2.0));
  std::mt19937_64 rng(43);
  const AudioClip out = MixNoiseAtSnr(tone, testing::Gaussian(rng, 16000, 1.0), 10.0);
  double num = 0, den = 0;
  for (std::size_t i = 0; i < tone.size(); ++i) {
    num += out.samples[i] * tone.samples[i];
    den += tone.samples[i] * tone.samples[i];
  }
  const double k = num / den;
  std::vector<double> speech(tone.size()), noise(tone.size());
  for (std::size_t i = 0; i < tone.size(); ++i) {
    speech[i] = k * tone.samples[i];
    noise[i] = out.samples[i] - speech[i];
  }
  EXPECT_NEAR(Power(tone.samples), 1.0, 1e-3);
  EXPECT_NEAR(10 * std::log10(Power(speech) / Power(noise)), 10.0, 0.1);
}

TEST(MixNoiseTest, LoopsShortNoiseAndNormalizesOnlyOnClipping) {
  const AudioClip clean{std::vector<double>(10, 0.5), 16000};
  const AudioClip noise{{1.0, -1.0, 0.5}, 16000};
  const auto aligned = AlignNoise(noise, 10);
  EXPECT_EQ(aligned, (std::vector<double>{1, -1, 0.5, 1, -1, 0.5, 1, -1, 0.5, 1}));
  const AudioClip quiet = MixNoiseAtSnr(clean, noise, 40.0);
  for (std::size_t i = 0; i < 10; ++i) EXPECT_GT(quiet.samples[i], 0.49);
  const AudioClip loud = MixNoiseAtSnr(clean, noise, -20.0);
  double peak = 0;
  for (double s : loud.samples) peak = std::max(peak, std::abs(s));
  EXPECT_NEAR(peak, 1.0, 1e-12);
}

}  // namespace
}  // namespace spkver
