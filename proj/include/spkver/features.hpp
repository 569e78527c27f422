// spkver/features.hpp

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

#ifndef SPKVER_FEATURES_HPP_
#define SPKVER_FEATURES_HPP_

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "spkver/audio_io.hpp"
#include "spkver/common.hpp"
#include "spkver/dsp_frontend.hpp"
#include "spkver/feature_matrix.hpp"
#include "spkver/lsf.hpp"
#include "spkver/mfcc.hpp"

namespace spkver {

/// E_t = ln(sum s^2 + 1e-10) over each (unwindowed) frame.
inline std::vector<double> FrameLogEnergy(const FrameMatrix& frames) {
  std::vector<double> out(frames.num_frames());
  for (std::size_t t = 0; t < out.size(); ++t) {
    double e = 0.0;
    for (double s : frames.frames.row(t)) e += s * s;
    out[t] = std::log(e + 1e-10);
  }
  return out;
}

namespace features_detail {

/// Regression delta over +-window frames with edge replication.
inline Matrix DeltaOf(const Matrix& x, int window) {
  const long t_count = static_cast<long>(x.rows());
  double denom = 0.0;
  for (int tau = 1; tau <= window; ++tau) denom += tau * tau;
  denom *= 2.0;
  Matrix out(x.rows(), x.cols());
  for (long t = 0; t < t_count; ++t) {
    for (std::size_t j = 0; j < x.cols(); ++j) {
      double acc = 0.0;
      for (int tau = 1; tau <= window; ++tau) {
        const long fwd = std::min(t + tau, t_count - 1);
        const long back = std::max(t - tau, 0L);
        acc += tau * (x(static_cast<std::size_t>(fwd), j) - x(static_cast<std::size_t>(back), j));
      }
      out(static_cast<std::size_t>(t), j) = acc / denom;
    }
  }
  return out;
}

}  // namespace features_detail

/// [x, delta(x), delta(delta(x))]: D columns become 3D.
inline FeatureMatrix AppendDeltas(const FeatureMatrix& m, int window) {
  if (window < 1) Fail(ErrorCode::kInvalidArgument, "delta window must be >= 1");
  if (m.num_frames() < static_cast<std::size_t>(2 * window + 1))
    Fail(ErrorCode::kTooFewFrames, std::to_string(m.num_frames()) + " frames, need " +
                                       std::to_string(2 * window + 1));
  const Matrix d1 = features_detail::DeltaOf(m.data, window);
  const Matrix d2 = features_detail::DeltaOf(d1, window);
  const std::size_t dim = m.dim();
  FeatureMatrix out;
  out.frame_hop_ms = m.frame_hop_ms;
  out.labels = m.labels;
  for (const auto& l : m.labels) out.labels.push_back("d_" + l);
  for (const auto& l : m.labels) out.labels.push_back("dd_" + l);
  out.data = Matrix(m.num_frames(), 3 * dim);
  for (std::size_t t = 0; t < m.num_frames(); ++t) {
    auto row = out.data.row(t);
    for (std::size_t j = 0; j < dim; ++j) {
      row[j] = m.data(t, j);
      row[dim + j] = d1(t, j);
      row[2 * dim + j] = d2(t, j);
    }
  }
  return out;
}

/// Row-wise concatenation [first | second].
inline FeatureMatrix Fuse(const FeatureMatrix& first, const FeatureMatrix& second) {
  if (first.num_frames() != second.num_frames())
    Fail(ErrorCode::kFrameCountMismatch, std::to_string(first.num_frames()) + " vs " +
                                             std::to_string(second.num_frames()) + " frames");
  if (first.frame_hop_ms != second.frame_hop_ms)
    Fail(ErrorCode::kFrameCountMismatch, "streams have different frame hops");
  FeatureMatrix out;
  out.frame_hop_ms = first.frame_hop_ms;
  out.labels = first.labels;
  out.labels.insert(out.labels.end(), second.labels.begin(), second.labels.end());
  out.data = Matrix(first.num_frames(), first.dim() + second.dim());
  for (std::size_t t = 0; t < first.num_frames(); ++t) {
    auto row = out.data.row(t);
    std::copy(first.data.row(t).begin(), first.data.row(t).end(), row.begin());
    std::copy(second.data.row(t).begin(), second.data.row(t).end(),
              row.begin() + static_cast<long>(first.dim()));
  }
  return out;
}

inline FeatureMatrix ApplyVadMask(const FeatureMatrix& m, const VadMask& mask) {
  if (mask.active.size() != m.num_frames())
    Fail(ErrorCode::kLengthMismatch, "mask of " + std::to_string(mask.active.size()) +
                                         " frames for " + std::to_string(m.num_frames()));
  FeatureMatrix out;
  out.labels = m.labels;
  out.frame_hop_ms = m.frame_hop_ms;
  out.data = Matrix(0, m.dim());
  for (std::size_t t = 0; t < m.num_frames(); ++t)
    if (mask.active[t]) out.data.AppendRow(m.data.row(t));
  if (out.num_frames() == 0) Fail(ErrorCode::kAllFramesRemoved, "VAD removed every frame");
  return out;
}

enum class CmsMode { kAll, kCepstral, kOff };

inline const char* CmsModeName(CmsMode mode) {
  switch (mode) {
    case CmsMode::kAll: return "all";
    case CmsMode::kCepstral: return "cepstral";
    case CmsMode::kOff: return "off";
  }
  return "all";
}

inline CmsMode ParseCmsMode(const std::string& s) {
  if (s == "all") return CmsMode::kAll;
  if (s == "cepstral") return CmsMode::kCepstral;
  if (s == "off") return CmsMode::kOff;
  Fail(ErrorCode::kConfigError, "cms mode must be all|cepstral|off, got '" + s + "'");
}

/// Columns derived from the LSF stream are labelled w<k> (with delta
/// prefixes if any); everything else is cepstral.
inline bool IsLsfLabel(const std::string& label) {
  std::string base = label;
  while (base.rfind("d_", 0) == 0) base = base.substr(2);
  while (base.rfind("dd_", 0) == 0) base = base.substr(3);
  return !base.empty() && base[0] == 'w';
}

inline std::vector<bool> CmsColumns(const FeatureMatrix& m, CmsMode mode) {
  std::vector<bool> sel(m.dim(), mode == CmsMode::kAll);
  if (mode == CmsMode::kCepstral)
    for (std::size_t j = 0; j < m.dim(); ++j) sel[j] = !IsLsfLabel(m.labels[j]);
  return sel;
}

/// Subtracts the per-utterance mean from the selected columns.
inline FeatureMatrix CepstralMeanSubtract(const FeatureMatrix& m, const std::vector<bool>& columns) {
  if (columns.size() != m.dim())
    Fail(ErrorCode::kDimMismatch, "column selector size does not match feature dim");
  if (m.num_frames() == 0) Fail(ErrorCode::kEmptyUtterance, "CMS over zero frames");
  FeatureMatrix out = m;
  const double inv_t = 1.0 / static_cast<double>(m.num_frames());
  for (std::size_t j = 0; j < m.dim(); ++j) {
    if (!columns[j]) continue;
    double mean = 0.0;
    for (std::size_t t = 0; t < m.num_frames(); ++t) mean += m.data(t, j);
    mean *= inv_t;
    for (std::size_t t = 0; t < m.num_frames(); ++t) out.data(t, j) = m.data(t, j) - mean;
  }
  return out;
}

inline FeatureMatrix CepstralMeanSubtract(const FeatureMatrix& m, CmsMode mode = CmsMode::kAll) {
  return CepstralMeanSubtract(m, CmsColumns(m, mode));
}

enum class FeatureKind { kMfcc, kLsf, kFused };

inline const char* FeatureKindName(FeatureKind k) {
  switch (k) {
    case FeatureKind::kMfcc: return "mfcc";
    case FeatureKind::kLsf: return "lsf";
    case FeatureKind::kFused: return "fused";
  }
  return "fused";
}

inline FeatureKind ParseFeatureKind(const std::string& s) {
  if (s == "mfcc") return FeatureKind::kMfcc;
  if (s == "lsf") return FeatureKind::kLsf;
  if (s == "fused") return FeatureKind::kFused;
  Fail(ErrorCode::kConfigError, "feature kind must be mfcc|lsf|fused, got '" + s + "'");
}

inline int FeatureDim(FeatureKind kind, const CepstraConfig& cep, int lpc_order) {
  const int mfcc = 3 * (cep.n_cepstra + 1);
  switch (kind) {
    case FeatureKind::kMfcc: return mfcc;
    case FeatureKind::kLsf: return lpc_order;
    case FeatureKind::kFused: return mfcc + lpc_order;
  }
  return 0;
}

struct FrontEndConfig {
  double preemph_a = 0.97;
  CepstraConfig cepstra;
  int lpc_order = 12;
  int delta_window = 2;
  double vad_floor_db = -60.0;
  double vad_dynamic_range_db = 30.0;
  bool vad_enabled = true;
  CmsMode cms = CmsMode::kAll;
};

/// Full per-utterance protocol: cepstra + log energy with deltas (39 dims),
/// LSFs (12 dims) or both fused (51 dims); VAD frame removal; CMS.
/// The VAD mask comes from `vad_reference` when given (e.g. the clean
/// version of a noisy clip), otherwise from `clip` itself.
inline FeatureMatrix ExtractFeatures(const AudioClip& clip, const FrontEndConfig& cfg,
                                     FeatureKind kind,
                                     const AudioClip* vad_reference = nullptr) {
  const CepstraConfig& cep = cfg.cepstra;
  const FrameMatrix raw = FrameSignal(clip, cep.frame_ms, cep.hop_ms, false);
  const AudioClip emphasized = PreEmphasize(clip, cfg.preemph_a);
  const FrameMatrix windowed = FrameSignal(emphasized, cep.frame_ms, cep.hop_ms, true);

  FeatureMatrix mfcc39;
  if (kind != FeatureKind::kLsf) {
    FeatureMatrix base;
    base.frame_hop_ms = cep.hop_ms;
    const MelFilterbank fb = BuildMelFilterbank(cep, clip.sample_rate_hz);
    const Matrix c = CepstraFromFrames(windowed, cep, fb);
    const std::vector<double> energy = FrameLogEnergy(raw);
    base.labels = NumberedLabels("c", cep.n_cepstra);
    base.labels.push_back("E");
    base.data = Matrix(c.rows(), c.cols() + 1);
    for (std::size_t t = 0; t < c.rows(); ++t) {
      auto row = base.data.row(t);
      std::copy(c.row(t).begin(), c.row(t).end(), row.begin());
      row[c.cols()] = energy[t];
    }
    mfcc39 = AppendDeltas(base, cfg.delta_window);
  }
  FeatureMatrix lsf;
  if (kind != FeatureKind::kMfcc) {
    lsf.frame_hop_ms = cep.hop_ms;
    lsf.data = LsfFromFrames(windowed.frames, cfg.lpc_order);
    lsf.labels = NumberedLabels("w", cfg.lpc_order);
  }
  FeatureMatrix out = kind == FeatureKind::kMfcc ? mfcc39
                      : kind == FeatureKind::kLsf ? lsf
                                                  : Fuse(mfcc39, lsf);
  if (cfg.vad_enabled) {
    VadMask mask;
    if (vad_reference) {
      if (vad_reference->size() != clip.size())
        Fail(ErrorCode::kLengthMismatch, "VAD reference clip length differs from input");
      mask = DetectVoiceActivity(FrameSignal(*vad_reference, cep.frame_ms, cep.hop_ms, false),
                                 cfg.vad_floor_db, cfg.vad_dynamic_range_db);
    } else {
      mask = DetectVoiceActivity(raw, cfg.vad_floor_db, cfg.vad_dynamic_range_db);
    }
    out = ApplyVadMask(out, mask);
  }
  if (cfg.cms != CmsMode::kOff) out = CepstralMeanSubtract(out, cfg.cms);
  out.CheckInvariants();
  return out;
}

}  // namespace spkver

#endif  // SPKVER_FEATURES_HPP_
