// spkver/eval.hpp

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

#ifndef SPKVER_EVAL_HPP_
#define SPKVER_EVAL_HPP_

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "spkver/common.hpp"

namespace spkver {

struct TrialScore {
  std::string claimed_id;
  bool is_target = false;
  double score = 0.0;
};

struct DetPoint {
  double threshold = 0.0;
  double far = 0.0;
  double frr = 0.0;
};

/// Operating points ordered by increasing threshold. A trial is accepted
/// when score >= threshold.
struct DetCurve {
  std::vector<DetPoint> points;
  double eer = 0.0;
  double eer_threshold = 0.0;
};

/// Thresholds are the sorted distinct scores plus -inf and +inf. At each
/// threshold FAR = #(impostor >= thr) / #impostor and
/// FRR = #(target < thr) / #target.
inline DetCurve SweepFarFrr(const std::vector<TrialScore>& trials) {
  std::vector<double> tgt, imp;
  for (const auto& t : trials) {
    if (!std::isfinite(t.score)) Fail(ErrorCode::kInvalidArgument, "non-finite trial score");
    (t.is_target ? tgt : imp).push_back(t.score);
  }
  if (tgt.empty() || imp.empty())
    Fail(ErrorCode::kOneClassOnly, tgt.empty() ? "no target trials" : "no impostor trials");
  std::sort(tgt.begin(), tgt.end());
  std::sort(imp.begin(), imp.end());
  std::vector<double> thresholds;
  thresholds.reserve(tgt.size() + imp.size() + 2);
  thresholds.push_back(-std::numeric_limits<double>::infinity());
  std::merge(tgt.begin(), tgt.end(), imp.begin(), imp.end(), std::back_inserter(thresholds));
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());
  thresholds.push_back(std::numeric_limits<double>::infinity());

  const double n_tgt = static_cast<double>(tgt.size());
  const double n_imp = static_cast<double>(imp.size());
  DetCurve curve;
  curve.points.reserve(thresholds.size());
  std::size_t tgt_below = 0, imp_below = 0;
  for (double thr : thresholds) {
    while (tgt_below < tgt.size() && tgt[tgt_below] < thr) ++tgt_below;
    while (imp_below < imp.size() && imp[imp_below] < thr) ++imp_below;
    curve.points.push_back({thr, static_cast<double>(imp.size() - imp_below) / n_imp,
                            static_cast<double>(tgt_below) / n_tgt});
  }
  return curve;
}

/// Locates where FAR - FRR changes sign between adjacent sweep points and
/// interpolates both rates linearly to the crossing. An exact tie is
/// returned directly.
inline std::pair<double, double> EerAndThreshold(const DetCurve& curve) {
  const auto& p = curve.points;
  if (p.empty()) Fail(ErrorCode::kInvalidArgument, "empty DET curve");
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double d = p[i].far - p[i].frr;
    if (d == 0.0) return {p[i].far, p[i].threshold};
    if (i + 1 < p.size()) {
      const double d_next = p[i + 1].far - p[i + 1].frr;
      if (d > 0.0 && d_next < 0.0) {
        const double t = d / (d - d_next);
        const double eer = p[i].far + t * (p[i + 1].far - p[i].far);
        double thr = p[i + 1].threshold;
        if (std::isfinite(p[i].threshold) && std::isfinite(p[i + 1].threshold))
          thr = p[i].threshold + t * (p[i + 1].threshold - p[i].threshold);
        return {eer, thr};
      }
    }
  }
  Fail(ErrorCode::kInvalidArgument, "DET curve never crosses FAR = FRR");
}

inline double ComputeEer(const DetCurve& curve) { return EerAndThreshold(curve).first; }

/// Sweep plus EER in one call.
inline DetCurve EvaluateTrials(const std::vector<TrialScore>& trials) {
  DetCurve c = SweepFarFrr(trials);
  std::tie(c.eer, c.eer_threshold) = EerAndThreshold(c);
  return c;
}

/// Inverse standard normal CDF, Acklam's rational approximation
/// (relative error below 1.2e-9 over (0, 1)).
inline double Probit(double p) {
  if (!(p > 0.0)) return -std::numeric_limits<double>::infinity();
  if (!(p < 1.0)) return std::numeric_limits<double>::infinity();
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p > 1.0 - p_low) {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double q = p - 0.5;
  const double r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

inline constexpr double kDetRateClamp = 1e-4;

/// (probit(FAR), probit(FRR)) with rates clamped to [1e-4, 1 - 1e-4].
inline std::vector<std::pair<double, double>> DetPoints(const DetCurve& curve) {
  auto clamp = [](double r) { return std::clamp(r, kDetRateClamp, 1.0 - kDetRateClamp); };
  std::vector<std::pair<double, double>> out;
  out.reserve(curve.points.size());
  for (const auto& p : curve.points) out.emplace_back(Probit(clamp(p.far)), Probit(clamp(p.frr)));
  return out;
}

// ---------------------------------------------------------------------------
// Files

inline std::string SerializeTrials(const std::vector<TrialScore>& trials) {
  std::string out = "claimed_id,is_target,score\n";
  for (const auto& t : trials)
    out += t.claimed_id + "," + (t.is_target ? "1" : "0") + "," + FormatReal(t.score, 17) + "\n";
  return out;
}

inline std::vector<TrialScore> ParseTrials(const std::string& text) {
  std::vector<TrialScore> out;
  std::istringstream in(text);
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    line = Trim(line);
    if (line.empty() || line[0] == '#') continue;
    if (first) {
      first = false;
      if (line == "claimed_id,is_target,score") continue;
    }
    const auto f = SplitString(line, ',');
    if (f.size() != 3 || (f[1] != "0" && f[1] != "1"))
      Fail(ErrorCode::kInvalidArgument, "bad trial line '" + line + "'");
    out.push_back({f[0], f[1] == "1", ParseReal(f[2], ErrorCode::kInvalidArgument)});
  }
  return out;
}

inline std::string SerializeDetCsv(const DetCurve& curve) {
  std::string out = "threshold,far,frr\n";
  for (const auto& p : curve.points)
    out += FormatReal(p.threshold, 17) + "," + FormatReal(p.far, 17) + "," + FormatReal(p.frr, 17) + "\n";
  out += "#eer=" + FormatReal(curve.eer, 17) + "\n";
  return out;
}

namespace svg_detail {

inline std::string Num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

inline std::string Escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

}  // namespace svg_detail

/// Standalone DET plot: probit-scaled axes labelled in %, one polyline per
/// curve, a legend and a marker at each curve's EER. No timestamps, so
/// identical input gives identical bytes.
inline std::string RenderDetSvg(const std::vector<std::pair<std::string, DetCurve>>& curves) {
  using svg_detail::Num;
  if (curves.empty()) Fail(ErrorCode::kInvalidArgument, "no curves to plot");
  constexpr double kW = 560, kH = 560, kLeft = 70, kTop = 30, kPlot = 440;
  const double lo = Probit(kDetRateClamp), hi = Probit(1.0 - kDetRateClamp);
  auto sx = [&](double z) { return kLeft + (z - lo) / (hi - lo) * kPlot; };
  auto sy = [&](double z) { return kTop + kPlot - (z - lo) / (hi - lo) * kPlot; };
  static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
  static const std::pair<double, const char*> kTicks[] = {
      {0.01, "0.01"}, {0.1, "0.1"}, {0.5, "0.5"}, {1, "1"},   {2, "2"},   {5, "5"},  {10, "10"},
      {20, "20"},     {40, "40"},   {60, "60"},   {80, "80"}, {95, "95"}, {99, "99"}};

  std::ostringstream s;
  s << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
    << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
    << "\" viewBox=\"0 0 " << kW << " " << kH << "\" font-family=\"sans-serif\" font-size=\"11\">\n"
    << "<rect x=\"0\" y=\"0\" width=\"" << kW << "\" height=\"" << kH << "\" fill=\"white\"/>\n"
    << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << kPlot << "\" height=\"" << kPlot
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (const auto& [pct, label] : kTicks) {
    const double z = Probit(pct / 100.0);
    s << "<line x1=\"" << Num(sx(z)) << "\" y1=\"" << kTop << "\" x2=\"" << Num(sx(z)) << "\" y2=\""
      << kTop + kPlot << "\" stroke=\"#dddddd\"/>\n"
      << "<line x1=\"" << kLeft << "\" y1=\"" << Num(sy(z)) << "\" x2=\"" << kLeft + kPlot << "\" y2=\""
      << Num(sy(z)) << "\" stroke=\"#dddddd\"/>\n"
      << "<text x=\"" << Num(sx(z)) << "\" y=\"" << kTop + kPlot + 15 << "\" text-anchor=\"middle\">"
      << label << "</text>\n"
      << "<text x=\"" << kLeft - 6 << "\" y=\"" << Num(sy(z) + 4) << "\" text-anchor=\"end\">" << label
      << "</text>\n";
  }
  s << "<text x=\"" << kLeft + kPlot / 2 << "\" y=\"" << kH - 25
    << "\" text-anchor=\"middle\">False Acceptance Rate (%)</text>\n"
    << "<text x=\"18\" y=\"" << kTop + kPlot / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
    << kTop + kPlot / 2 << ")\">False Rejection Rate (%)</text>\n"
    << "<line x1=\"" << Num(sx(lo)) << "\" y1=\"" << Num(sy(lo)) << "\" x2=\"" << Num(sx(hi)) << "\" y2=\""
    << Num(sy(hi)) << "\" stroke=\"#999999\" stroke-dasharray=\"4 4\"/>\n";

  for (std::size_t c = 0; c < curves.size(); ++c) {
    const auto& [name, curve] = curves[c];
    const char* color = kColors[c % std::size(kColors)];
    s << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    bool first = true;
    for (const auto& [x, y] : DetPoints(curve)) {
      s << (first ? "" : " ") << Num(sx(x)) << "," << Num(sy(y));
      first = false;
    }
    s << "\"/>\n";
    const double ez = Probit(std::clamp(curve.eer, kDetRateClamp, 1.0 - kDetRateClamp));
    s << "<circle cx=\"" << Num(sx(ez)) << "\" cy=\"" << Num(sy(ez)) << "\" r=\"4\" fill=\"" << color
      << "\"/>\n";
    const double ly = kTop + 16 + 16 * static_cast<double>(c);
    s << "<rect x=\"" << kLeft + kPlot - 170 << "\" y=\"" << Num(ly - 9) << "\" width=\"12\" height=\"10\" fill=\""
      << color << "\"/>\n"
      << "<text x=\"" << kLeft + kPlot - 152 << "\" y=\"" << Num(ly) << "\">"
      << svg_detail::Escape(name) << " (EER " << Num(100.0 * curve.eer) << "%)</text>\n";
  }
  s << "</svg>\n";
  return s.str();
}

inline void WriteDetSvg(const std::vector<std::pair<std::string, DetCurve>>& curves,
                        const std::filesystem::path& path) {
  WriteFileAtomic(path, RenderDetSvg(curves));
}

}  // namespace spkver

#endif  // SPKVER_EVAL_HPP_
