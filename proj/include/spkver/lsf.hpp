// spkver/lsf.hpp

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

#ifndef SPKVER_LSF_HPP_
#define SPKVER_LSF_HPP_

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "spkver/audio_io.hpp"
#include "spkver/common.hpp"
#include "spkver/dsp_frontend.hpp"
#include "spkver/feature_matrix.hpp"

namespace spkver {

/// All-pole model with inverse filter A(z) = 1 - sum_k a_k z^-k.
struct LpcModel {
  std::vector<double> a;  // a_1..a_P
  double gain = 1.0;
  std::vector<double> reflection;  // filled by LevinsonDurbin

  int order() const noexcept { return static_cast<int>(a.size()); }

  /// Coefficients of A(z) in powers of z^-1: [1, -a_1, ..., -a_P].
  std::vector<double> InverseFilter() const {
    std::vector<double> poly(a.size() + 1);
    poly[0] = 1.0;
    for (std::size_t k = 0; k < a.size(); ++k) poly[k + 1] = -a[k];
    return poly;
  }
};

/// Line spectral frequencies in (0, pi), strictly increasing. Entries at
/// even positions (0, 2, ...) are roots of the sum polynomial, odd positions
/// roots of the difference polynomial.
struct LsfVector {
  std::vector<double> omegas;

  int order() const noexcept { return static_cast<int>(omegas.size()); }
  bool operator==(const LsfVector&) const = default;
};

/// r[tau] = sum_{t=tau}^{N-1} s(t) s(t - tau), tau = 0..max_lag.
inline std::vector<double> Autocorrelate(std::span<const double> frame, int max_lag) {
  if (max_lag < 0 || frame.size() <= static_cast<std::size_t>(max_lag))
    Fail(ErrorCode::kFrameTooShort, "frame of " + std::to_string(frame.size()) +
                                        " samples for " + std::to_string(max_lag) + " lags");
  std::vector<double> r(static_cast<std::size_t>(max_lag) + 1, 0.0);
  for (std::size_t lag = 0; lag < r.size(); ++lag) {
    double acc = 0.0;
    for (std::size_t t = lag; t < frame.size(); ++t) acc += frame[t] * frame[t - lag];
    r[lag] = acc;
  }
  return r;
}

/// Solves the Toeplitz normal equations by the Levinson-Durbin recursion.
/// The gain is the square root of the final prediction-error energy.
inline LpcModel LevinsonDurbin(std::span<const double> r) {
  if (r.empty()) Fail(ErrorCode::kInvalidArgument, "empty autocorrelation");
  if (!(r[0] > 0.0)) Fail(ErrorCode::kSingularAutocorrelation, "r[0] must be positive");
  const std::size_t order = r.size() - 1;
  LpcModel model;
  model.a.assign(order, 0.0);
  model.reflection.assign(order, 0.0);
  std::vector<double> prev(order, 0.0);
  double err = r[0];
  for (std::size_t i = 0; i < order; ++i) {
    double acc = r[i + 1];
    for (std::size_t j = 0; j < i; ++j) acc -= model.a[j] * r[i - j];
    const double k = acc / err;
    if (!(std::abs(k) < 1.0))
      Fail(ErrorCode::kSingularAutocorrelation,
           "reflection coefficient " + std::to_string(k) + " at stage " + std::to_string(i + 1));
    prev = model.a;
    model.a[i] = k;
    for (std::size_t j = 0; j < i; ++j) model.a[j] = prev[j] - k * prev[i - 1 - j];
    model.reflection[i] = k;
    err *= (1.0 - k * k);
    if (!(err > 0.0)) Fail(ErrorCode::kSingularAutocorrelation, "prediction error vanished");
  }
  model.gain = std::sqrt(err);
  return model;
}

struct SumDiffPolys {
  std::vector<double> sum;   // A(z) + z^-(P+1) A(1/z), palindromic
  std::vector<double> diff;  // A(z) - z^-(P+1) A(1/z), antipalindromic
};

inline SumDiffPolys LpcToSumDiffPolys(const LpcModel& model) {
  std::vector<double> a = model.InverseFilter();
  a.push_back(0.0);
  const std::size_t len = a.size();  // P + 2
  SumDiffPolys out{std::vector<double>(len), std::vector<double>(len)};
  for (std::size_t i = 0; i < len; ++i) {
    out.sum[i] = a[i] + a[len - 1 - i];
    out.diff[i] = a[i] - a[len - 1 - i];
  }
  return out;
}

/// Divides the sum polynomial by (1 + z^-1) and the difference polynomial by
/// (1 - z^-1). Only even orders have both trivial roots.
inline SumDiffPolys RemoveTrivialRoots(const SumDiffPolys& polys) {
  const std::size_t len = polys.sum.size();
  if (len < 3 || polys.diff.size() != len)
    Fail(ErrorCode::kInvalidArgument, "malformed sum/difference polynomials");
  const std::size_t order = len - 2;
  if (order % 2 != 0)
    Fail(ErrorCode::kOddOrder, "trivial-root removal implemented for even orders only (P=" +
                                   std::to_string(order) + ")");
  SumDiffPolys out{std::vector<double>(len - 1), std::vector<double>(len - 1)};
  out.sum[0] = polys.sum[0];
  out.diff[0] = polys.diff[0];
  for (std::size_t i = 1; i < len - 1; ++i) {
    out.sum[i] = polys.sum[i] - out.sum[i - 1];
    out.diff[i] = polys.diff[i] + out.diff[i - 1];
  }
  const double rem_sum = polys.sum[len - 1] - out.sum[len - 2];
  const double rem_diff = polys.diff[len - 1] + out.diff[len - 2];
  if (std::abs(rem_sum) > 1e-9 || std::abs(rem_diff) > 1e-9)
    Fail(ErrorCode::kNonzeroRemainder, "remainders " + std::to_string(rem_sum) + ", " +
                                           std::to_string(rem_diff));
  return out;
}

namespace lsf_detail {

/// For a palindromic q of even degree 2m, e^{j m w} q(e^{jw}) is the real
/// cosine series q[m] + 2 sum_{k=1..m} q[m-k] cos(k w).
inline double CosineForm(const std::vector<double>& q, double w) {
  const std::size_t m = (q.size() - 1) / 2;
  double acc = q[m];
  for (std::size_t k = 1; k <= m; ++k) acc += 2.0 * q[m - k] * std::cos(static_cast<double>(k) * w);
  return acc;
}

inline std::vector<double> BracketRoots(const std::vector<double>& q, int grid_points) {
  std::vector<double> roots;
  double w_lo = 0.0;
  double f_lo = CosineForm(q, w_lo);
  for (int i = 1; i <= grid_points; ++i) {
    const double w_hi = kPi * i / grid_points;
    const double f_hi = CosineForm(q, w_hi);
    if (f_lo == 0.0 && i > 1) {
      roots.push_back(w_lo);
    } else if ((f_lo < 0.0 && f_hi > 0.0) || (f_lo > 0.0 && f_hi < 0.0)) {
      double lo = w_lo, hi = w_hi, flo = f_lo;
      while (hi - lo >= 1e-10) {
        const double mid = 0.5 * (lo + hi);
        const double fm = CosineForm(q, mid);
        if (fm == 0.0) {
          lo = hi = mid;
          break;
        }
        if ((fm < 0.0) == (flo < 0.0)) {
          lo = mid;
          flo = fm;
        } else {
          hi = mid;
        }
      }
      roots.push_back(0.5 * (lo + hi));
    }
    w_lo = w_hi;
    f_lo = f_hi;
  }
  return roots;
}

}  // namespace lsf_detail

inline constexpr int kLsfGridPoints = 4096;

/// Roots of the two reduced polynomials on the upper unit circle, found by
/// sign changes of their cosine forms on a dense grid and refined by
/// bisection to |dw| < 1e-10. A grid that misses a close root pair is
/// refined up to twice (x4 each) before giving up.
inline LsfVector FindLsfRoots(const std::vector<double>& sum_reduced,
                              const std::vector<double>& diff_reduced) {
  if (sum_reduced.size() != diff_reduced.size() || sum_reduced.size() % 2 == 0)
    Fail(ErrorCode::kInvalidArgument, "reduced polynomials must share an even degree");
  const std::size_t half = (sum_reduced.size() - 1) / 2;
  std::vector<double> s_roots, d_roots;
  int grid = kLsfGridPoints;
  for (int attempt = 0; attempt < 3; ++attempt, grid *= 4) {
    s_roots = lsf_detail::BracketRoots(sum_reduced, grid);
    d_roots = lsf_detail::BracketRoots(diff_reduced, grid);
    if (s_roots.size() == half && d_roots.size() == half) break;
  }
  if (s_roots.size() != half || d_roots.size() != half)
    Fail(ErrorCode::kRootCountMismatch, "found " + std::to_string(s_roots.size()) + " + " +
                                            std::to_string(d_roots.size()) + " roots, expected " +
                                            std::to_string(half) + " each");
  LsfVector out;
  out.omegas.reserve(2 * half);
  for (std::size_t i = 0; i < half; ++i) {
    out.omegas.push_back(s_roots[i]);
    out.omegas.push_back(d_roots[i]);
  }
  for (std::size_t i = 1; i < out.omegas.size(); ++i)
    if (!(out.omegas[i] > out.omegas[i - 1]))
      Fail(ErrorCode::kRootCountMismatch, "sum and difference roots do not interlace");
  return out;
}

inline LsfVector LpcToLsf(const LpcModel& model) {
  const SumDiffPolys reduced = RemoveTrivialRoots(LpcToSumDiffPolys(model));
  return FindLsfRoots(reduced.sum, reduced.diff);
}

/// omega_k = k*pi/(P+1): the LSFs of A(z) = 1.
inline LsfVector UniformLsf(int order) {
  LsfVector v;
  for (int k = 1; k <= order; ++k) v.omegas.push_back(k * kPi / (order + 1));
  return v;
}

namespace lsf_detail {

inline std::vector<double> PolyMultiply(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> out(x.size() + y.size() - 1, 0.0);
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = 0; j < y.size(); ++j) out[i + j] += x[i] * y[j];
  return out;
}

}  // namespace lsf_detail

/// Rebuilds A(z) from interlaced LSFs: each root pair contributes
/// (1 - 2 cos(w) z^-1 + z^-2), the trivial roots are restored and
/// A = (S + D) / 2. The gain is set to 1.
inline LpcModel LsfToLpc(const LsfVector& lsf) {
  const std::size_t order = lsf.omegas.size();
  if (order == 0 || order % 2 != 0)
    Fail(ErrorCode::kOddOrder, "LSF order must be even and positive");
  for (std::size_t i = 0; i < order; ++i) {
    const double w = lsf.omegas[i];
    const double prev = i == 0 ? 0.0 : lsf.omegas[i - 1];
    if (!(w > prev) || !(w < kPi))
      Fail(ErrorCode::kInterlacingViolated, "LSFs must be strictly increasing in (0, pi)");
  }
  std::vector<double> s{1.0}, d{1.0};
  for (std::size_t i = 0; i < order; ++i) {
    const std::vector<double> factor{1.0, -2.0 * std::cos(lsf.omegas[i]), 1.0};
    if (i % 2 == 0) s = lsf_detail::PolyMultiply(s, factor);
    else d = lsf_detail::PolyMultiply(d, factor);
  }
  s = lsf_detail::PolyMultiply(s, {1.0, 1.0});
  d = lsf_detail::PolyMultiply(d, {1.0, -1.0});
  LpcModel model;
  model.a.resize(order);
  for (std::size_t k = 1; k <= order; ++k) model.a[k - 1] = -0.5 * (s[k] + d[k]);
  model.gain = 1.0;
  return model;
}

/// Per-frame LSFs of already pre-emphasized, windowed frames. Frames whose
/// energy r[0] falls below `silence_floor`, or whose autocorrelation is
/// numerically singular, get the uniform (flat-spectrum) vector.
inline Matrix LsfFromFrames(const Matrix& frames, int order, double silence_floor = 1e-10,
                            std::size_t* fallback_count = nullptr) {
  if (order <= 0 || order % 2 != 0)
    Fail(ErrorCode::kOddOrder, "LPC order must be even and positive, got " + std::to_string(order));
  Matrix out(frames.rows(), static_cast<std::size_t>(order));
  const LsfVector uniform = UniformLsf(order);
  std::size_t fallbacks = 0;
  for (std::size_t t = 0; t < frames.rows(); ++t) {
    const auto r = Autocorrelate(frames.row(t), order);
    LsfVector v = uniform;
    if (r[0] >= silence_floor) {
      try {
        v = LpcToLsf(LevinsonDurbin(r));
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kSingularAutocorrelation &&
            e.code() != ErrorCode::kRootCountMismatch)
          throw;
        v = uniform;
        ++fallbacks;
      }
    } else {
      ++fallbacks;
    }
    std::copy(v.omegas.begin(), v.omegas.end(), out.row(t).begin());
  }
  if (fallback_count) *fallback_count = fallbacks;
  return out;
}

/// Same framing and windowing as the cepstral path; columns w1..wP.
inline FeatureMatrix LsfFeatures(const AudioClip& clip, int order, double preemph_a,
                                 double frame_ms = 25.0, double hop_ms = 10.0) {
  const AudioClip emphasized = PreEmphasize(clip, preemph_a);
  const FrameMatrix frames = FrameSignal(emphasized, frame_ms, hop_ms, true);
  FeatureMatrix m;
  m.data = LsfFromFrames(frames.frames, order);
  m.labels = NumberedLabels("w", order);
  m.frame_hop_ms = hop_ms;
  return m;
}

}  // namespace spkver

#endif  // SPKVER_LSF_HPP_
