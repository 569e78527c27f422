// spkver/dsp_frontend.hpp

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

#ifndef SPKVER_DSP_FRONTEND_HPP_
#define SPKVER_DSP_FRONTEND_HPP_

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <vector>

#include "spkver/audio_io.hpp"
#include "spkver/common.hpp"

namespace spkver {

/// T analysis frames of N samples each, taken every `hop_samples`.
struct FrameMatrix {
  Matrix frames;
  std::size_t frame_len_samples = 0;
  std::size_t hop_samples = 0;
  int sample_rate_hz = 0;

  std::size_t num_frames() const noexcept { return frames.rows(); }
};

struct VadMask {
  std::vector<bool> active;
  double threshold_db = 0.0;
  // Set when no frame carried any energy; `active` is then all false.
  bool all_silent = false;
  std::size_t frame_len_samples = 0;
  std::size_t hop_samples = 0;

  std::size_t num_active() const {
    return static_cast<std::size_t>(std::count(active.begin(), active.end(), true));
  }
};

/// x(0) = y(0), x(t) = y(t) - a*y(t-1).
inline AudioClip PreEmphasize(const AudioClip& clip, double a) {
  if (clip.empty()) Fail(ErrorCode::kEmptySignal, "pre-emphasis of an empty clip");
  if (a != 0.0 && (a < 0.95 || a > 0.98))
    std::fprintf(stderr, "WARNING: pre-emphasis coefficient %g outside [0.95, 0.98]\n", a);
  AudioClip out;
  out.sample_rate_hz = clip.sample_rate_hz;
  out.samples.resize(clip.size());
  out.samples[0] = clip.samples[0];
  for (std::size_t t = 1; t < clip.size(); ++t)
    out.samples[t] = clip.samples[t] - a * clip.samples[t - 1];
  return out;
}

inline std::vector<double> HammingWindow(std::size_t n_samples) {
  if (n_samples < 2)
    Fail(ErrorCode::kWindowTooShort, "Hamming window needs at least 2 samples");
  std::vector<double> w(n_samples);
  const double denom = static_cast<double>(n_samples - 1);
  for (std::size_t n = 0; n < n_samples; ++n)
    w[n] = 0.54 - 0.46 * std::cos(2.0 * kPi * static_cast<double>(n) / denom);
  return w;
}

inline std::size_t MsToSamples(double ms, int sample_rate_hz) {
  return static_cast<std::size_t>(std::lround(ms * sample_rate_hz / 1000.0));
}

/// Frame i covers samples [i*hop, i*hop + N); a trailing partial frame is
/// dropped.
inline FrameMatrix FrameSignal(const AudioClip& clip, double frame_ms, double hop_ms,
                               bool apply_window) {
  if (!(frame_ms > 0.0) || !(hop_ms > 0.0))
    Fail(ErrorCode::kInvalidArgument, "frame and hop lengths must be positive");
  const std::size_t n = MsToSamples(frame_ms, clip.sample_rate_hz);
  const std::size_t hop = MsToSamples(hop_ms, clip.sample_rate_hz);
  if (n < 2 || hop < 1)
    Fail(ErrorCode::kInvalidArgument, "frame shorter than 2 samples or zero hop");
  if (hop > n) Fail(ErrorCode::kInvalidArgument, "hop exceeds frame length");
  if (clip.size() < n)
    Fail(ErrorCode::kSignalTooShort, "clip of " + std::to_string(clip.size()) +
                                         " samples is shorter than one " +
                                         std::to_string(n) + "-sample frame");
  const std::size_t num_frames = (clip.size() - n) / hop + 1;
  FrameMatrix fm;
  fm.frames = Matrix(num_frames, n);
  fm.frame_len_samples = n;
  fm.hop_samples = hop;
  fm.sample_rate_hz = clip.sample_rate_hz;
  std::vector<double> window;
  if (apply_window) window = HammingWindow(n);
  for (std::size_t i = 0; i < num_frames; ++i) {
    auto row = fm.frames.row(i);
    const double* src = clip.samples.data() + i * hop;
    for (std::size_t k = 0; k < n; ++k) row[k] = apply_window ? src[k] * window[k] : src[k];
  }
  return fm;
}

inline double FrameEnergyDb(std::span<const double> frame) {
  double e = 0.0;
  for (double s : frame) e += s * s;
  return 10.0 * std::log10(e + 1e-10);
}

/// Energy-threshold VAD: a frame is active when its energy exceeds
/// max(peak - dynamic_range_db, floor_db). The loudest frame is always active
/// unless the whole input is silent.
inline VadMask DetectVoiceActivity(const FrameMatrix& frames, double floor_db,
                                   double dynamic_range_db) {
  const std::size_t t_count = frames.num_frames();
  if (t_count == 0) Fail(ErrorCode::kEmptySignal, "VAD over zero frames");
  std::vector<double> energy_db(t_count);
  std::size_t peak = 0;
  bool any_energy = false;
  for (std::size_t t = 0; t < t_count; ++t) {
    const auto row = frames.frames.row(t);
    energy_db[t] = FrameEnergyDb(row);
    any_energy = any_energy || std::any_of(row.begin(), row.end(), [](double s) { return s != 0.0; });
    if (energy_db[t] > energy_db[peak]) peak = t;
  }
  VadMask mask;
  mask.frame_len_samples = frames.frame_len_samples;
  mask.hop_samples = frames.hop_samples;
  mask.active.assign(t_count, false);
  mask.threshold_db = std::max(energy_db[peak] - dynamic_range_db, floor_db);
  if (!any_energy) {
    mask.all_silent = true;
    return mask;
  }
  for (std::size_t t = 0; t < t_count; ++t)
    mask.active[t] = energy_db[t] > mask.threshold_db;
  mask.active[peak] = true;
  return mask;
}

/// Indices of samples covered by at least one active frame.
inline std::vector<bool> ActiveSampleMask(const VadMask& vad, std::size_t num_samples) {
  std::vector<bool> covered(num_samples, false);
  for (std::size_t t = 0; t < vad.active.size(); ++t) {
    if (!vad.active[t]) continue;
    const std::size_t begin = t * vad.hop_samples;
    const std::size_t end = std::min(begin + vad.frame_len_samples, num_samples);
    for (std::size_t i = begin; i < end; ++i) covered[i] = true;
  }
  return covered;
}

/// Noise looped (or truncated from offset 0) to the clean length.
inline std::vector<double> AlignNoise(const AudioClip& noise, std::size_t length) {
  std::vector<double> out(length);
  for (std::size_t i = 0; i < length; ++i) out[i] = noise.samples[i % noise.size()];
  return out;
}

/// Adds `noise` to `clean` so that 10*log10(P_speech / P_noise) = snr_db.
/// Both powers are measured over the VAD-active samples when a mask is
/// given, otherwise over the whole clip. The sum is peak-normalized only if
/// it would clip.
inline AudioClip MixNoiseAtSnr(const AudioClip& clean, const AudioClip& noise, double snr_db,
                               const std::optional<VadMask>& vad = std::nullopt) {
  if (clean.empty()) Fail(ErrorCode::kEmptySignal, "clean clip is empty");
  if (noise.empty()) Fail(ErrorCode::kSilentNoise, "noise clip is empty");
  if (clean.sample_rate_hz != noise.sample_rate_hz)
    Fail(ErrorCode::kRateMismatch, std::to_string(clean.sample_rate_hz) + " Hz clean vs " +
                                       std::to_string(noise.sample_rate_hz) + " Hz noise");
  const std::vector<double> aligned = AlignNoise(noise, clean.size());
  std::vector<bool> use(clean.size(), true);
  if (vad && !vad->all_silent && vad->num_active() > 0) use = ActiveSampleMask(*vad, clean.size());

  double ps = 0.0, pn = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < clean.size(); ++i) {
    if (!use[i]) continue;
    ps += clean.samples[i] * clean.samples[i];
    pn += aligned[i] * aligned[i];
    ++count;
  }
  ps /= static_cast<double>(count);
  pn /= static_cast<double>(count);
  if (!(pn > 0.0)) Fail(ErrorCode::kSilentNoise, "noise has zero power over the measured span");
  const double gain = std::sqrt(ps / (pn * std::pow(10.0, snr_db / 10.0)));

  AudioClip out;
  out.sample_rate_hz = clean.sample_rate_hz;
  out.samples.resize(clean.size());
  double peak = 0.0;
  for (std::size_t i = 0; i < clean.size(); ++i) {
    out.samples[i] = clean.samples[i] + gain * aligned[i];
    peak = std::max(peak, std::abs(out.samples[i]));
  }
  if (peak > 1.0)
    for (double& s : out.samples) s /= peak;
  return out;
}

}  // namespace spkver

#endif  // SPKVER_DSP_FRONTEND_HPP_
