// spkver/mfcc.hpp

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

#ifndef SPKVER_MFCC_HPP_
#define SPKVER_MFCC_HPP_

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "spkver/audio_io.hpp"
#include "spkver/common.hpp"
#include "spkver/dsp_frontend.hpp"
#include "spkver/feature_matrix.hpp"

namespace spkver {

struct CepstraConfig {
  int n_cepstra = 12;
  int n_filters = 26;
  int fft_size = 512;
  double fmin_hz = 0.0;
  double fmax_hz = 8000.0;
  double log_floor = 1e-10;
  double frame_ms = 25.0;
  double hop_ms = 10.0;

  void Validate(int sample_rate_hz) const {
    if (n_cepstra < 1 || n_cepstra > n_filters)
      Fail(ErrorCode::kBadOrder, "need 1 <= n_cepstra <= n_filters");
    if (!(fmin_hz >= 0.0) || !(fmin_hz < fmax_hz) || fmax_hz > sample_rate_hz / 2.0)
      Fail(ErrorCode::kInvalidArgument, "need 0 <= fmin < fmax <= sample_rate/2");
    if (!(log_floor > 0.0)) Fail(ErrorCode::kInvalidArgument, "log_floor must be positive");
  }
};

inline bool IsPowerOfTwo(int n) { return n > 0 && (n & (n - 1)) == 0; }

/// In-place iterative radix-2 FFT. `data.size()` must be a power of two.
inline void Fft(std::vector<std::complex<double>>& data) {
  const std::size_t n = data.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(data[i], data[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = -2.0 * kPi / static_cast<double>(len);
    for (std::size_t i = 0; i < n; i += len) {
      for (std::size_t k = 0; k < len / 2; ++k) {
        const std::complex<double> w(std::cos(ang * static_cast<double>(k)),
                                     std::sin(ang * static_cast<double>(k)));
        const auto u = data[i + k];
        const auto v = data[i + k + len / 2] * w;
        data[i + k] = u + v;
        data[i + k + len / 2] = u - v;
      }
    }
  }
}

/// |FFT(frame)|^2 at bins 0..fft_size/2, frame zero-padded to fft_size.
inline std::vector<double> PowerSpectrum(std::span<const double> frame, int fft_size) {
  if (!IsPowerOfTwo(fft_size) || static_cast<std::size_t>(fft_size) < frame.size())
    Fail(ErrorCode::kBadFftSize, "fft_size " + std::to_string(fft_size) +
                                     " must be a power of two >= frame length " +
                                     std::to_string(frame.size()));
  std::vector<std::complex<double>> buf(static_cast<std::size_t>(fft_size));
  std::copy(frame.begin(), frame.end(), buf.begin());
  Fft(buf);
  std::vector<double> out(static_cast<std::size_t>(fft_size / 2 + 1));
  for (std::size_t b = 0; b < out.size(); ++b) out[b] = std::norm(buf[b]);
  return out;
}

/// Base-2 mel warping: 1000 Hz maps to 1000 mel, and each doubling of
/// (1 + f/1000) adds 1000 mel.
inline double MelScale(double f_hz) {
  if (f_hz < 0.0) Fail(ErrorCode::kNegativeFrequency, "negative frequency " + std::to_string(f_hz));
  return 1000.0 * std::log(1.0 + f_hz / 1000.0) / std::log(2.0);
}

inline double InverseMelScale(double mel) {
  return 1000.0 * (std::exp2(mel / 1000.0) - 1.0);
}

struct MelFilterbank {
  int n_filters = 0;
  int fft_size = 0;
  int sample_rate_hz = 0;
  Matrix weights;  // n_filters x (fft_size/2 + 1)
  std::vector<double> center_freqs_hz;
  std::vector<double> boundary_freqs_hz;  // n_filters + 2 edges
};

/// Triangular filters whose K+2 edges are equally spaced in mel between
/// fmin and fmax, evaluated at the FFT bin centre frequencies.
inline MelFilterbank BuildMelFilterbank(const CepstraConfig& cfg, int sample_rate_hz) {
  cfg.Validate(sample_rate_hz);
  if (!IsPowerOfTwo(cfg.fft_size)) Fail(ErrorCode::kBadFftSize, "fft_size must be a power of two");
  const int k_count = cfg.n_filters;
  const std::size_t n_bins = static_cast<std::size_t>(cfg.fft_size / 2 + 1);
  const double mel_lo = MelScale(cfg.fmin_hz);
  const double mel_hi = MelScale(cfg.fmax_hz);
  const double bin_hz = static_cast<double>(sample_rate_hz) / cfg.fft_size;

  MelFilterbank fb;
  fb.n_filters = k_count;
  fb.fft_size = cfg.fft_size;
  fb.sample_rate_hz = sample_rate_hz;
  fb.boundary_freqs_hz.resize(static_cast<std::size_t>(k_count + 2));
  for (int i = 0; i < k_count + 2; ++i) {
    const double mel = mel_lo + (mel_hi - mel_lo) * i / (k_count + 1);
    fb.boundary_freqs_hz[i] = InverseMelScale(mel);
  }
  fb.boundary_freqs_hz.front() = cfg.fmin_hz;
  fb.boundary_freqs_hz.back() = cfg.fmax_hz;
  for (int i = 0; i + 1 < k_count + 2; ++i) {
    if (std::lround(fb.boundary_freqs_hz[i] / bin_hz) ==
        std::lround(fb.boundary_freqs_hz[i + 1] / bin_hz))
      Fail(ErrorCode::kTooManyFilters, "filter edges " + std::to_string(i) + " and " +
                                           std::to_string(i + 1) + " fall on the same FFT bin");
  }

  fb.weights = Matrix(static_cast<std::size_t>(k_count), n_bins);
  fb.center_freqs_hz.resize(static_cast<std::size_t>(k_count));
  for (int k = 0; k < k_count; ++k) {
    const double lo = fb.boundary_freqs_hz[k];
    const double mid = fb.boundary_freqs_hz[k + 1];
    const double hi = fb.boundary_freqs_hz[k + 2];
    fb.center_freqs_hz[k] = mid;
    bool any = false;
    for (std::size_t b = 0; b < n_bins; ++b) {
      const double f = static_cast<double>(b) * bin_hz;
      double w = 0.0;
      if (f > lo && f <= mid) w = (f - lo) / (mid - lo);
      else if (f > mid && f < hi) w = (hi - f) / (hi - mid);
      fb.weights(k, b) = w;
      any = any || w > 0.0;
    }
    if (!any) Fail(ErrorCode::kTooManyFilters, "filter " + std::to_string(k) + " covers no FFT bin");
  }
  return fb;
}

/// S_k = 20*log10(max(sqrt(filter energy), floor)): the filter outputs as a
/// magnitude envelope in dB.
inline std::vector<double> LogMelEnergies(std::span<const double> powspec, const MelFilterbank& fb,
                                          double log_floor) {
  if (powspec.size() != fb.weights.cols())
    Fail(ErrorCode::kDimMismatch, "power spectrum has " + std::to_string(powspec.size()) +
                                      " bins, filterbank expects " +
                                      std::to_string(fb.weights.cols()));
  std::vector<double> out(static_cast<std::size_t>(fb.n_filters));
  for (std::size_t k = 0; k < out.size(); ++k) {
    const double energy = Dot(fb.weights.row(k), powspec);
    out[k] = 20.0 * std::log10(std::max(std::sqrt(energy), log_floor));
  }
  return out;
}

/// c_n = sum_{k=1..K} S_k cos(n (k - 1/2) pi / K), n = 1..L.
inline std::vector<double> DctCepstrum(std::span<const double> log_energies, int n_cepstra) {
  const int k_count = static_cast<int>(log_energies.size());
  if (n_cepstra < 1 || n_cepstra > k_count)
    Fail(ErrorCode::kBadOrder, "cepstral order " + std::to_string(n_cepstra) +
                                   " outside [1, " + std::to_string(k_count) + "]");
  std::vector<double> c(static_cast<std::size_t>(n_cepstra), 0.0);
  for (int n = 1; n <= n_cepstra; ++n) {
    double acc = 0.0;
    for (int k = 1; k <= k_count; ++k)
      acc += log_energies[k - 1] * std::cos(n * (k - 0.5) * kPi / k_count);
    c[n - 1] = acc;
  }
  return c;
}

/// Cepstra of already-framed (and windowed) data, one row per frame.
inline Matrix CepstraFromFrames(const FrameMatrix& frames, const CepstraConfig& cfg,
                                const MelFilterbank& fb) {
  Matrix out(frames.num_frames(), static_cast<std::size_t>(cfg.n_cepstra));
  for (std::size_t t = 0; t < frames.num_frames(); ++t) {
    const auto spec = PowerSpectrum(frames.frames.row(t), cfg.fft_size);
    const auto env = LogMelEnergies(spec, fb, cfg.log_floor);
    const auto c = DctCepstrum(env, cfg.n_cepstra);
    std::copy(c.begin(), c.end(), out.row(t).begin());
  }
  return out;
}

/// Pre-emphasis, Hamming-windowed framing, power spectrum, mel dB envelope
/// and DCT. Rows are frames, columns c_1..c_L.
inline Matrix MfccMatrix(const AudioClip& clip, const CepstraConfig& cfg, double preemph_a) {
  cfg.Validate(clip.sample_rate_hz);
  const AudioClip emphasized = PreEmphasize(clip, preemph_a);
  const FrameMatrix frames = FrameSignal(emphasized, cfg.frame_ms, cfg.hop_ms, true);
  const MelFilterbank fb = BuildMelFilterbank(cfg, clip.sample_rate_hz);
  return CepstraFromFrames(frames, cfg, fb);
}

inline FeatureMatrix MfccFeatures(const AudioClip& clip, const CepstraConfig& cfg,
                                  double preemph_a) {
  FeatureMatrix m;
  m.data = MfccMatrix(clip, cfg, preemph_a);
  m.labels = NumberedLabels("c", cfg.n_cepstra);
  m.frame_hop_ms = cfg.hop_ms;
  return m;
}

}  // namespace spkver

#endif  // SPKVER_MFCC_HPP_
