// tests/pipeline_test.cpp

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

#include <atomic>
#include <filesystem>

#include "spkver/corpus.hpp"
#include "spkver/pipeline.hpp"
#include "test_util.hpp"

namespace spkver {
namespace {

namespace fs = std::filesystem;
using testing::CodeOf;

fs::path TempDir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("spkver_pipeline_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

CorpusSpec SmallSpec(std::uint64_t seed) {
  CorpusSpec spec;
  spec.n_speakers = 3;
  spec.utts_per_speaker = 4;
  spec.test_per_speaker = 1;
  spec.n_background = 2;
  spec.n_impostors = 1;
  spec.utts_per_other = 2;
  spec.utterance.duration_s = 0.6;
  spec.seed = seed;
  return spec;
}

TEST(ConfigTest, EmitParseRoundTrip) {
  const PipelineConfig defaults;
  PipelineConfig parsed;
  ApplyConfigText(parsed, EmitConfig(defaults));
  EXPECT_EQ(EmitConfig(parsed), EmitConfig(defaults));

  PipelineConfig c;
  ApplyConfigText(c,
                  "# comment line\n"
                  "features = mfcc   # trailing comment\n"
                  "pca = false\n"
                  "svm_gamma = 0.25\n"
                  "cms = cepstral\n"
                  "lpc_order = 10\n"
                  "jobs = 3\n");
  EXPECT_EQ(c.features, FeatureKind::kMfcc);
  EXPECT_FALSE(c.pca_enabled);
  EXPECT_EQ(c.gamma_mode, GammaMode::kFixed);
  EXPECT_EQ(c.gamma_value, 0.25);
  EXPECT_EQ(c.front_end.cms, CmsMode::kCepstral);
  EXPECT_EQ(c.front_end.lpc_order, 10);
  EXPECT_EQ(c.jobs, 3);
  PipelineConfig again;
  ApplyConfigText(again, EmitConfig(c));
  EXPECT_EQ(EmitConfig(again), EmitConfig(c));
}

TEST(ConfigTest, DefaultsMatchDocumentedValues) {
  const PipelineConfig c;
  EXPECT_EQ(c.front_end.preemph_a, 0.97);
  EXPECT_EQ(c.front_end.cepstra.frame_ms, 25.0);
  EXPECT_EQ(c.front_end.cepstra.hop_ms, 10.0);
  EXPECT_EQ(c.front_end.cepstra.n_cepstra, 12);
  EXPECT_EQ(c.front_end.cepstra.n_filters, 26);
  EXPECT_EQ(c.front_end.cepstra.fft_size, 512);
  EXPECT_EQ(c.front_end.lpc_order, 12);
  EXPECT_EQ(c.pca_retention, 0.95);
  EXPECT_EQ(c.svm_c, 10.0);
  EXPECT_EQ(c.svm_tol, 1e-3);
  EXPECT_EQ(c.neg_ratio, 20.0);
  EXPECT_EQ(c.gamma_mode, GammaMode::kAuto);
}

TEST(ConfigTest, RejectsBadInput) {
  for (const std::string bad : {"nonsense", "unknown_key = 1", "lpc_order = 11", "fft_size = 500",
                                "pca = maybe", "svm_c = 0", "svm_kernel = sigmoid", "preemph_a = 1.5",
                                "n_cepstra = 2.5", "features = pitch", "vad_reference = other"}) {
    PipelineConfig c;
    EXPECT_EQ(CodeOf([&] { ApplyConfigText(c, bad); }), ErrorCode::kConfigError) << bad;
  }
  EXPECT_EQ(CodeOf([] { LoadConfig("/nonexistent/cfg.ini"); }), ErrorCode::kConfigError);
}

TEST(ManifestTest, ParseResolveAndSerialize) {
  const std::string text =
      "speaker_id,utterance_id,role,path\n"
      "spk001,u01,enroll,wav/spk001/u01.wav\n"
      "spk001,u02,test,/abs/u02.wav\n"
      "bkg001,u01,background,b.wav\n"
      "imp001,u01,impostor,i.wav\n";
  const CorpusManifest m = ParseManifest(text, "/root/corpus");
  ASSERT_EQ(m.entries.size(), 4u);
  EXPECT_EQ(m.entries[0].path, fs::path("/root/corpus/wav/spk001/u01.wav"));
  EXPECT_EQ(m.entries[1].path, fs::path("/abs/u02.wav"));
  EXPECT_EQ(m.entries[1].role, Role::kTest);
  EXPECT_EQ(m.SpeakersWithRole(Role::kEnroll), std::vector<std::string>{"spk001"});
  EXPECT_EQ(SerializeManifest(ParseManifest(text)), text);

  const CorpusManifest with_vad = ParseManifest("a,u1,test,n.wav,c.wav\n", "/d");
  EXPECT_EQ(with_vad.entries[0].vad_path, fs::path("/d/c.wav"));
  EXPECT_EQ(SerializeManifest(ParseManifest("a,u1,test,n.wav,c.wav\n")),
            "speaker_id,utterance_id,role,path,vad_path\na,u1,test,n.wav,c.wav\n");
}

TEST(ManifestTest, RejectsInvalid) {
  for (const std::string bad : {"a,u1,enroll\n", "a,u1,judge,x.wav\n", "a,u1,enroll,x.wav\na,u1,test,y.wav\n",
                                ",u1,enroll,x.wav\n", "b,u1,background,x.wav\nb,u2,impostor,y.wav\n"}) {
    EXPECT_EQ(CodeOf([&] { ParseManifest(bad); }), ErrorCode::kManifestError) << bad;
  }
}

TEST(CorpusTest, LayoutAndDeterminism) {
  const GeneratedCorpus a = GenerateCorpus(SmallSpec(4));
  const GeneratedCorpus b = GenerateCorpus(SmallSpec(4));
  ASSERT_EQ(a.clips.size(), 3u * 4 + 3u * 2);
  EXPECT_EQ(SerializeManifest(a.manifest), SerializeManifest(b.manifest));
  for (std::size_t i = 0; i < a.clips.size(); ++i) EXPECT_EQ(a.clips[i].samples, b.clips[i].samples);
  EXPECT_NE(GenerateCorpus(SmallSpec(5)).clips[0].samples, a.clips[0].samples);
  EXPECT_EQ(a.manifest.SpeakersWithRole(Role::kTest).size(), 3u);
  EXPECT_EQ(a.manifest.SpeakersWithRole(Role::kBackground), (std::vector<std::string>{"bkg001", "bkg002"}));
  EXPECT_EQ(a.manifest.SpeakersWithRole(Role::kImpostor), std::vector<std::string>{"imp001"});
  std::size_t tests = 0;
  for (const auto& e : a.manifest.entries) tests += e.role == Role::kTest;
  EXPECT_EQ(tests, 3u);
  for (const auto& clip : a.clips) {
    EXPECT_EQ(clip.samples.size(), 9600u);
    double peak = 0;
    for (double s : clip.samples) peak = std::max(peak, std::abs(s));
    EXPECT_LE(peak, 1.0);
    EXPECT_GT(peak, 0.1);
  }
}

TEST(CorpusTest, SpeakersArePairwiseDistinct) {
  const auto profiles = DrawDistinctSpeakers(30, 11);
  std::vector<LsfVector> lsf;
  for (const auto& p : profiles) lsf.push_back(LpcToLsf(SpeakerReferenceFilter(p, 16000)));
  for (std::size_t i = 0; i < lsf.size(); ++i)
    for (std::size_t j = i + 1; j < lsf.size(); ++j) EXPECT_GT(LsfDistance(lsf[i], lsf[j]), 0.05);
}

TEST(CorpusTest, WriteCorpusReadsBack) {
  const fs::path dir = TempDir("write");
  const GeneratedCorpus c = GenerateCorpus(SmallSpec(6));
  WriteCorpus(c, dir);
  const CorpusManifest m = ReadManifest(dir / "manifest.csv");
  ASSERT_EQ(m.entries.size(), c.clips.size());
  for (std::size_t i = 0; i < m.entries.size(); ++i) {
    const AudioClip back = ReadWav(m.entries[i].path);
    ASSERT_EQ(back.samples.size(), c.clips[i].samples.size());
    for (std::size_t k = 0; k < back.samples.size(); ++k)
      ASSERT_NEAR(back.samples[k], c.clips[i].samples[k], 1.0 / 32767);
  }
  fs::remove_all(dir);
}

TEST(NoiseTest, KindsAreDeterministicAndNormalized) {
  for (NoiseKind k : {NoiseKind::kBabble, NoiseKind::kSubway, NoiseKind::kWhite}) {
    const AudioClip a = GenerateNoise(k, 0.5, 3), b = GenerateNoise(k, 0.5, 3);
    ASSERT_EQ(a.samples.size(), 8000u);
    EXPECT_EQ(a.samples, b.samples);
    double peak = 0;
    for (double s : a.samples) peak = std::max(peak, std::abs(s));
    EXPECT_NEAR(peak, 0.5, 1e-12);
  }
  EXPECT_EQ(CodeOf([] { ParseNoiseKind("pink"); }), ErrorCode::kInvalidArgument);
}

TEST(ParallelForTest, VisitsEachIndexOnceAndRethrows) {
  for (int jobs : {1, 4}) {
    std::vector<std::atomic<int>> hits(100);
    ParallelFor(100, jobs, [&](std::size_t i) { ++hits[i]; });
    for (const auto& h : hits) EXPECT_EQ(h.load(), 1);
    EXPECT_EQ(CodeOf([&] {
                ParallelFor(10, jobs, [](std::size_t i) {
                  if (i == 7) Fail(ErrorCode::kDegenerateData, "boom");
                });
              }),
              ErrorCode::kDegenerateData);
  }
}

TEST(GammaTest, Modes) {
  PipelineConfig c;
  const Matrix m(4, 2, 3.0);
  EXPECT_EQ(ResolveGamma(c, m, 20), 0.05);
  c.gamma_mode = GammaMode::kFixed;
  c.gamma_value = 0.3;
  EXPECT_EQ(ResolveGamma(c, m, 20), 0.3);
  c.gamma_mode = GammaMode::kScale;
  Matrix v(2, 1);
  v(0, 0) = -1;
  v(1, 0) = 1;
  EXPECT_EQ(ResolveGamma(c, v, 4), 0.25);
}

// Extract -> train -> score on a tiny corpus, on disk and in memory.
TEST(EndToEndTest, SmallCorpus) {
  const fs::path dir = TempDir("e2e");
  const GeneratedCorpus corpus = GenerateCorpus(SmallSpec(7));
  WriteCorpus(corpus, dir / "corpus");
  const CorpusManifest m = ReadManifest(dir / "corpus" / "manifest.csv");
  PipelineConfig cfg;
  const ExtractReport rep = ExtractCorpus(m, cfg, dir / "feats");
  EXPECT_TRUE(rep.failures.empty());
  EXPECT_EQ(rep.written, m.entries.size());

  const TrainingSet set = LoadTrainingSet(m, dir / "feats");
  EXPECT_EQ(set.enroll.size(), 3u);
  EXPECT_EQ(set.background.size(), 4u);
  const TrainedSystem sys = TrainSystem(set, cfg);
  ASSERT_EQ(sys.models.size(), 3u);
  ASSERT_TRUE(sys.pca.has_value());
  EXPECT_LE(sys.pca->output_dim(), 51u);
  EXPECT_DOUBLE_EQ(sys.gamma, 1.0 / static_cast<double>(sys.pca->output_dim()));
  for (const auto& [spk, model] : sys.models) {
    EXPECT_EQ(model.speaker_id, spk);
    EXPECT_EQ(model.input_dim, 51u);
    EXPECT_EQ(model.dim(), sys.pca->output_dim());
    EXPECT_EQ(ParseModel(SerializeModel(model)), model);
  }

  PipelineConfig two_jobs = cfg;
  two_jobs.jobs = 2;
  EXPECT_EQ(TrainSystem(set, two_jobs).models, sys.models);

  std::vector<TrialUtterance> utts;
  for (const auto& e : m.entries)
    if (e.role == Role::kTest || e.role == Role::kImpostor)
      utts.push_back({e.speaker_id, e.role, ReadFeatures(FeaturePath(dir / "feats", e))});
  const auto trials = ScoreTrials(sys.models, utts, 2);
  // 3 genuine trials plus 2 impostor utterances against 3 models.
  ASSERT_EQ(trials.size(), 3u + 2u * 3u);
  std::size_t targets = 0;
  for (const auto& t : trials) {
    targets += t.is_target;
    EXPECT_TRUE(std::isfinite(t.score));
  }
  EXPECT_EQ(targets, 3u);
  EXPECT_EQ(ScoreTrials(sys.models, utts, 1).size(), trials.size());

  fs::remove(FeaturePath(dir / "feats", m.entries[0]));
  EXPECT_EQ(CodeOf([&] { LoadTrainingSet(m, dir / "feats"); }), ErrorCode::kMissingFeatures);
  EXPECT_EQ(CodeOf([&] { TrainSystem(TrainingSet{}, cfg); }), ErrorCode::kEmptyClass);
  fs::remove_all(dir);
}

}  // namespace
}  // namespace spkver
