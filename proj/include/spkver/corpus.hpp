// spkver/corpus.hpp

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

#ifndef SPKVER_CORPUS_HPP_
#define SPKVER_CORPUS_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "spkver/audio_io.hpp"
#include "spkver/common.hpp"
#include "spkver/lsf.hpp"

namespace spkver {

// ---------------------------------------------------------------------------
// Manifest

enum class Role { kEnroll, kTest, kBackground, kImpostor };

inline const char* RoleName(Role r) {
  switch (r) {
    case Role::kEnroll: return "enroll";
    case Role::kTest: return "test";
    case Role::kBackground: return "background";
    case Role::kImpostor: return "impostor";
  }
  return "enroll";
}

inline Role ParseRole(const std::string& s) {
  if (s == "enroll") return Role::kEnroll;
  if (s == "test") return Role::kTest;
  if (s == "background") return Role::kBackground;
  if (s == "impostor") return Role::kImpostor;
  Fail(ErrorCode::kManifestError, "unknown role '" + s + "'");
}

struct ManifestEntry {
  std::string speaker_id;
  std::string utterance_id;
  Role role = Role::kEnroll;
  std::filesystem::path path;
  // Optional clean reference used for VAD when `path` is a noisy copy.
  std::filesystem::path vad_path;
};

/// CSV `speaker_id,utterance_id,role,path[,vad_path]`. Relative paths are
/// resolved against the manifest's directory when read.
struct CorpusManifest {
  std::vector<ManifestEntry> entries;

  void Validate() const {
    std::set<std::pair<std::string, std::string>> seen;
    std::set<std::string> background, impostor;
    for (const auto& e : entries) {
      if (e.speaker_id.empty() || e.utterance_id.empty())
        Fail(ErrorCode::kManifestError, "empty speaker or utterance id");
      if (!seen.emplace(e.speaker_id, e.utterance_id).second)
        Fail(ErrorCode::kManifestError, "duplicate entry " + e.speaker_id + "/" + e.utterance_id);
      if (e.role == Role::kBackground) background.insert(e.speaker_id);
      if (e.role == Role::kImpostor) impostor.insert(e.speaker_id);
    }
    for (const auto& s : background)
      if (impostor.count(s))
        Fail(ErrorCode::kManifestError, "speaker " + s + " is both background and impostor");
  }

  std::vector<std::string> SpeakersWithRole(Role role) const {
    std::vector<std::string> out;
    for (const auto& e : entries)
      if (e.role == role && std::find(out.begin(), out.end(), e.speaker_id) == out.end())
        out.push_back(e.speaker_id);
    return out;
  }
};

inline std::string SerializeManifest(const CorpusManifest& m) {
  bool any_vad = false;
  for (const auto& e : m.entries) any_vad = any_vad || !e.vad_path.empty();
  std::string out = any_vad ? "speaker_id,utterance_id,role,path,vad_path\n"
                            : "speaker_id,utterance_id,role,path\n";
  for (const auto& e : m.entries) {
    out += e.speaker_id + "," + e.utterance_id + "," + RoleName(e.role) + "," + e.path.generic_string();
    if (any_vad) out += "," + e.vad_path.generic_string();
    out += "\n";
  }
  return out;
}

inline CorpusManifest ParseManifest(const std::string& text, const std::filesystem::path& base_dir = {}) {
  CorpusManifest m;
  std::istringstream in(text);
  std::string line;
  bool first = true;
  auto resolve = [&](const std::string& p) -> std::filesystem::path {
    std::filesystem::path path(p);
    if (p.empty() || path.is_absolute() || base_dir.empty()) return path;
    return base_dir / path;
  };
  while (std::getline(in, line)) {
    line = Trim(line);
    if (line.empty() || line[0] == '#') continue;
    if (first) {
      first = false;
      if (line.rfind("speaker_id,", 0) == 0) continue;
    }
    const auto f = SplitString(line, ',');
    if (f.size() != 4 && f.size() != 5)
      Fail(ErrorCode::kManifestError, "manifest line needs 4 or 5 fields: '" + line + "'");
    ManifestEntry e{Trim(f[0]), Trim(f[1]), ParseRole(Trim(f[2])), resolve(Trim(f[3])), {}};
    if (f.size() == 5) e.vad_path = resolve(Trim(f[4]));
    m.entries.push_back(std::move(e));
  }
  m.Validate();
  return m;
}

inline CorpusManifest ReadManifest(const std::filesystem::path& path) {
  return ParseManifest(ReadFileText(path, ErrorCode::kManifestError), path.parent_path());
}

// ---------------------------------------------------------------------------
// Deterministic random numbers. Fixed algorithms (rather than std::
// distributions) so generated corpora are identical across standard libraries.

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t NextU64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  double Uniform() { return static_cast<double>(NextU64() >> 11) * 0x1.0p-53; }
  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }
  std::size_t Index(std::size_t n) { return static_cast<std::size_t>(NextU64() % n); }
  double Gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = Uniform();
    while (u1 <= 0.0) u1 = Uniform();
    const double u2 = Uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * kPi * u2);
    has_spare_ = true;
    return r * std::cos(2.0 * kPi * u2);
  }

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

inline std::uint64_t MixSeed(std::uint64_t a, std::uint64_t b) {
  Rng r(a * 0x100000001b3ULL ^ (b + 0x632be59bd9b4e019ULL));
  return r.NextU64();
}

// ---------------------------------------------------------------------------
// Synthetic talkers: an AR(12) vocal tract (six formant resonators) excited by
// a glottal pulse train plus aspiration noise.

inline constexpr int kSynthFormants = 6;
inline constexpr std::array<std::array<double, kSynthFormants>, 5> kVowelFormantsHz = {{
    {730, 1090, 2440, 3400, 4500, 5500},  // a
    {270, 2290, 3010, 3700, 4600, 5600},  // i
    {300, 870, 2240, 3300, 4400, 5400},   // u
    {530, 1840, 2480, 3500, 4500, 5500},  // e
    {570, 840, 2410, 3400, 4400, 5500},   // o
}};

struct SpeakerProfile {
  double tract_scale = 1.0;
  std::array<double, kSynthFormants> formant_offset{};  // multiplicative
  std::array<double, kSynthFormants> bandwidth_hz{};
  double f0_hz = 120.0;
  double glottal_pole = 0.9;
  double aspiration = 0.05;
};

/// A(z) with the given resonances: each formant contributes
/// 1 - 2 r cos(theta) z^-1 + r^2 z^-2, r = exp(-pi B / fs).
inline LpcModel FormantFilter(const std::array<double, kSynthFormants>& freqs_hz,
                              const std::array<double, kSynthFormants>& bw_hz, int sample_rate_hz) {
  std::vector<double> poly{1.0};
  for (int k = 0; k < kSynthFormants; ++k) {
    const double r = std::exp(-kPi * bw_hz[k] / sample_rate_hz);
    const double theta = 2.0 * kPi * freqs_hz[k] / sample_rate_hz;
    const std::vector<double> f{1.0, -2.0 * r * std::cos(theta), r * r};
    std::vector<double> next(poly.size() + 2, 0.0);
    for (std::size_t i = 0; i < poly.size(); ++i)
      for (std::size_t j = 0; j < 3; ++j) next[i + j] += poly[i] * f[j];
    poly = std::move(next);
  }
  LpcModel m;
  m.a.resize(poly.size() - 1);
  for (std::size_t k = 1; k < poly.size(); ++k) m.a[k - 1] = -poly[k];
  return m;
}

inline std::array<double, kSynthFormants> SpeakerFormants(const SpeakerProfile& p, std::size_t vowel,
                                                          double jitter = 1.0) {
  std::array<double, kSynthFormants> f{};
  for (int k = 0; k < kSynthFormants; ++k)
    f[k] = std::min(kVowelFormantsHz[vowel][k] * p.tract_scale * p.formant_offset[k] * jitter, 7400.0);
  return f;
}

/// The speaker's reference tract filter (vowel "a").
inline LpcModel SpeakerReferenceFilter(const SpeakerProfile& p, int sample_rate_hz) {
  return FormantFilter(SpeakerFormants(p, 0), p.bandwidth_hz, sample_rate_hz);
}

inline SpeakerProfile RandomSpeakerProfile(Rng& rng) {
  SpeakerProfile p;
  p.tract_scale = rng.Uniform(0.85, 1.2);
  for (int k = 0; k < kSynthFormants; ++k) {
    p.formant_offset[k] = rng.Uniform(0.85, 1.15);
    p.bandwidth_hz[k] = rng.Uniform(50.0, 110.0) * (1.0 + 0.35 * k);
  }
  p.f0_hz = rng.Uniform(90.0, 240.0);
  p.glottal_pole = rng.Uniform(0.8, 0.96);
  p.aspiration = rng.Uniform(0.02, 0.1);
  return p;
}

struct UtteranceSpec {
  double duration_s = 1.0;
  double silence_s = 0.1;  // leading and trailing
  double segment_s = 0.2;
  double peak = 0.5;
};

/// One utterance: silence, a run of vowel segments with jittered formants and
/// pitch, silence; passed through a mild random channel and scaled to `peak`.
inline AudioClip SynthesizeUtterance(const SpeakerProfile& p, const UtteranceSpec& spec,
                                     std::uint64_t seed, int sample_rate_hz = 16000,
                                     bool with_silence = true) {
  Rng rng(seed);
  const std::size_t total = static_cast<std::size_t>(spec.duration_s * sample_rate_hz);
  const std::size_t sil = with_silence ? static_cast<std::size_t>(spec.silence_s * sample_rate_hz) : 0;
  const std::size_t seg_len = std::max<std::size_t>(1, static_cast<std::size_t>(spec.segment_s * sample_rate_hz));
  AudioClip clip;
  clip.sample_rate_hz = sample_rate_hz;
  clip.samples.assign(total, 0.0);

  std::vector<double> state(2 * kSynthFormants, 0.0);  // past outputs
  double glottal = 0.0;
  double phase = 0.0;
  const double f0 = p.f0_hz * rng.Uniform(0.95, 1.05);
  const double vibrato_hz = rng.Uniform(3.0, 6.0);
  LpcModel tract;
  for (std::size_t t = sil; t + sil < total; ++t) {
    const std::size_t pos = t - sil;
    if (pos % seg_len == 0) {
      const std::size_t vowel = rng.Index(kVowelFormantsHz.size());
      tract = FormantFilter(SpeakerFormants(p, vowel, rng.Uniform(0.98, 1.02)), p.bandwidth_hz,
                            sample_rate_hz);
    }
    const double inst_f0 = f0 * (1.0 + 0.03 * std::sin(2.0 * kPi * vibrato_hz * t / sample_rate_hz));
    phase += inst_f0 / sample_rate_hz;
    double pulse = 0.0;
    if (phase >= 1.0) {
      phase -= 1.0;
      pulse = 1.0;
    }
    glottal = p.glottal_pole * glottal + pulse;
    const double excitation = glottal + p.aspiration * rng.Gaussian();
    double y = excitation;
    for (std::size_t k = 0; k < tract.a.size(); ++k) y += tract.a[k] * state[k];
    for (std::size_t k = state.size() - 1; k > 0; --k) state[k] = state[k - 1];
    state[0] = y;
    clip.samples[t] = y;
  }
  const double channel = rng.Uniform(-0.3, 0.3);
  for (std::size_t t = total; t-- > 1;) clip.samples[t] += channel * clip.samples[t - 1];
  double peak = 0.0;
  for (double s : clip.samples) peak = std::max(peak, std::abs(s));
  if (peak > 0.0)
    for (double& s : clip.samples) s *= spec.peak / peak;
  // Low-level noise floor so silent stretches are not digitally zero.
  for (double& s : clip.samples) s += 1e-4 * rng.Gaussian();
  return clip;
}

inline double LsfDistance(const LsfVector& a, const LsfVector& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.omegas.size(); ++i) d = std::max(d, std::abs(a.omegas[i] - b.omegas[i]));
  return d;
}

/// Draws `count` profiles whose reference filters are pairwise more than
/// `min_lsf_distance` rad apart (max-abs over the 12 LSFs).
inline std::vector<SpeakerProfile> DrawDistinctSpeakers(std::size_t count, std::uint64_t seed,
                                                        double min_lsf_distance = 0.05,
                                                        int sample_rate_hz = 16000) {
  Rng rng(seed);
  std::vector<SpeakerProfile> out;
  std::vector<LsfVector> lsfs;
  std::size_t attempts = 0;
  while (out.size() < count) {
    if (++attempts > 1000 * (count + 1))
      Fail(ErrorCode::kInvalidArgument, "cannot draw enough distinct speakers");
    SpeakerProfile p = RandomSpeakerProfile(rng);
    const LsfVector lsf = LpcToLsf(SpeakerReferenceFilter(p, sample_rate_hz));
    bool distinct = true;
    for (const auto& other : lsfs) distinct = distinct && LsfDistance(lsf, other) > min_lsf_distance;
    if (!distinct) continue;
    out.push_back(p);
    lsfs.push_back(lsf);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Noise proxies

enum class NoiseKind { kBabble, kSubway, kWhite };

inline NoiseKind ParseNoiseKind(const std::string& s) {
  if (s == "babble") return NoiseKind::kBabble;
  if (s == "subway") return NoiseKind::kSubway;
  if (s == "white") return NoiseKind::kWhite;
  Fail(ErrorCode::kInvalidArgument, "noise kind must be babble|subway|white, got '" + s + "'");
}

/// Babble: several unrelated synthetic talkers summed. Subway: low-passed
/// brown noise with slow amplitude modulation. White: Gaussian.
inline AudioClip GenerateNoise(NoiseKind kind, double duration_s, std::uint64_t seed,
                               int sample_rate_hz = 16000) {
  const std::size_t n = static_cast<std::size_t>(duration_s * sample_rate_hz);
  AudioClip out;
  out.sample_rate_hz = sample_rate_hz;
  out.samples.assign(n, 0.0);
  Rng rng(seed);
  if (kind == NoiseKind::kBabble) {
    constexpr int kTalkers = 6;
    UtteranceSpec spec;
    spec.duration_s = duration_s;
    spec.segment_s = 0.15;
    for (int k = 0; k < kTalkers; ++k) {
      const SpeakerProfile p = RandomSpeakerProfile(rng);
      const AudioClip talker = SynthesizeUtterance(p, spec, rng.NextU64(), sample_rate_hz, false);
      for (std::size_t i = 0; i < n; ++i) out.samples[i] += talker.samples[i];
    }
  } else if (kind == NoiseKind::kSubway) {
    double brown = 0.0, lp = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      brown = 0.995 * brown + rng.Gaussian();
      lp = 0.9 * lp + 0.1 * brown;
      const double mod = 1.0 + 0.4 * std::sin(2.0 * kPi * 0.7 * i / sample_rate_hz);
      out.samples[i] = lp * mod + 0.3 * rng.Gaussian();
    }
  } else {
    for (double& s : out.samples) s = rng.Gaussian();
  }
  double peak = 0.0;
  for (double s : out.samples) peak = std::max(peak, std::abs(s));
  if (peak > 0.0)
    for (double& s : out.samples) s *= 0.5 / peak;
  return out;
}

// ---------------------------------------------------------------------------
// Corpus layout

struct CorpusSpec {
  std::size_t n_speakers = 10;        // enrolled targets
  std::size_t utts_per_speaker = 8;   // split into enroll + test
  std::size_t test_per_speaker = 3;
  std::size_t n_background = 0;
  std::size_t n_impostors = 0;
  std::size_t utts_per_other = 5;     // per background / impostor speaker
  UtteranceSpec utterance;
  std::uint64_t seed = 1;
  int sample_rate_hz = 16000;
};

inline std::string PaddedId(const std::string& prefix, std::size_t i, int width = 3) {
  std::string n = std::to_string(i);
  if (n.size() < static_cast<std::size_t>(width)) n.insert(0, static_cast<std::size_t>(width) - n.size(), '0');
  return prefix + n;
}

struct GeneratedCorpus {
  CorpusManifest manifest;  // paths relative to the corpus root
  std::vector<AudioClip> clips;
  std::vector<SpeakerProfile> profiles;  // targets, background, impostors
};

/// Speakers are drawn jointly (so every pair is distinct), then split into
/// targets, background cohort and impostors.
inline GeneratedCorpus GenerateCorpus(const CorpusSpec& spec) {
  if (spec.n_speakers > 0 && spec.utts_per_speaker <= spec.test_per_speaker)
    Fail(ErrorCode::kInvalidArgument, "utts_per_speaker must exceed test_per_speaker");
  const std::size_t total = spec.n_speakers + spec.n_background + spec.n_impostors;
  GeneratedCorpus out;
  out.profiles = DrawDistinctSpeakers(total, MixSeed(spec.seed, 0x5eed), 0.05, spec.sample_rate_hz);
  for (std::size_t s = 0; s < total; ++s) {
    std::string spk;
    std::size_t n_utts = spec.utts_per_other;
    if (s < spec.n_speakers) {
      spk = PaddedId("spk", s + 1);
      n_utts = spec.utts_per_speaker;
    } else if (s < spec.n_speakers + spec.n_background) {
      spk = PaddedId("bkg", s - spec.n_speakers + 1);
    } else {
      spk = PaddedId("imp", s - spec.n_speakers - spec.n_background + 1);
    }
    for (std::size_t u = 0; u < n_utts; ++u) {
      Role role = Role::kEnroll;
      if (s < spec.n_speakers) role = u + spec.test_per_speaker >= n_utts ? Role::kTest : Role::kEnroll;
      else if (s < spec.n_speakers + spec.n_background) role = Role::kBackground;
      else role = Role::kImpostor;
      const std::string utt = PaddedId("u", u + 1, 2);
      out.clips.push_back(SynthesizeUtterance(out.profiles[s], spec.utterance,
                                              MixSeed(MixSeed(spec.seed, s + 1), u + 1),
                                              spec.sample_rate_hz));
      out.manifest.entries.push_back(
          {spk, utt, role, std::filesystem::path("wav") / spk / (utt + ".wav"), {}});
    }
  }
  out.manifest.Validate();
  return out;
}

inline CorpusManifest WriteCorpus(const GeneratedCorpus& corpus, const std::filesystem::path& out_dir) {
  CorpusManifest m = corpus.manifest;
  for (std::size_t i = 0; i < m.entries.size(); ++i) WriteWav(corpus.clips[i], out_dir / m.entries[i].path);
  WriteFileAtomic(out_dir / "manifest.csv", SerializeManifest(m));
  return m;
}

}  // namespace spkver

#endif  // SPKVER_CORPUS_HPP_
