// spkver/common.hpp

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

#ifndef SPKVER_COMMON_HPP_
#define SPKVER_COMMON_HPP_

#include <cmath>
#include <cstddef>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace spkver {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr double kPi = std::numbers::pi;

/// Every failure the library reports carries one of these codes, so callers
/// (and the CLI's exit-code mapping) can branch without parsing messages.
enum class ErrorCode {
  kInvalidArgument,
  kIoFailure,
  // audio_io
  kNotWav,
  kUnsupportedFormat,
  kTruncatedFile,
  // dsp_frontend
  kEmptySignal,
  kWindowTooShort,
  kSignalTooShort,
  kSilentNoise,
  kRateMismatch,
  // mfcc
  kBadFftSize,
  kNegativeFrequency,
  kTooManyFilters,
  kBadOrder,
  // lsf
  kFrameTooShort,
  kSingularAutocorrelation,
  kNonzeroRemainder,
  kRootCountMismatch,
  kInterlacingViolated,
  kOddOrder,
  // features
  kTooFewFrames,
  kFrameCountMismatch,
  kLengthMismatch,
  kAllFramesRemoved,
  kFeatureParseError,
  // reduction / svm
  kDegenerateData,
  kDimMismatch,
  kEmptyClass,
  kEmptyUtterance,
  kModelParseError,
  // eval
  kOneClassOnly,
  // cli
  kMissingFeatures,
  kMissingModel,
  kManifestError,
  kConfigError,
};

inline const char* ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kIoFailure: return "IoFailure";
    case ErrorCode::kNotWav: return "NotWav";
    case ErrorCode::kUnsupportedFormat: return "UnsupportedFormat";
    case ErrorCode::kTruncatedFile: return "TruncatedFile";
    case ErrorCode::kEmptySignal: return "EmptySignal";
    case ErrorCode::kWindowTooShort: return "WindowTooShort";
    case ErrorCode::kSignalTooShort: return "SignalTooShort";
    case ErrorCode::kSilentNoise: return "SilentNoise";
    case ErrorCode::kRateMismatch: return "RateMismatch";
    case ErrorCode::kBadFftSize: return "BadFftSize";
    case ErrorCode::kNegativeFrequency: return "NegativeFrequency";
    case ErrorCode::kTooManyFilters: return "TooManyFilters";
    case ErrorCode::kBadOrder: return "BadOrder";
    case ErrorCode::kFrameTooShort: return "FrameTooShort";
    case ErrorCode::kSingularAutocorrelation: return "SingularAutocorrelation";
    case ErrorCode::kNonzeroRemainder: return "NonzeroRemainder";
    case ErrorCode::kRootCountMismatch: return "RootCountMismatch";
    case ErrorCode::kInterlacingViolated: return "InterlacingViolated";
    case ErrorCode::kOddOrder: return "OddOrder";
    case ErrorCode::kTooFewFrames: return "TooFewFrames";
    case ErrorCode::kFrameCountMismatch: return "FrameCountMismatch";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kAllFramesRemoved: return "AllFramesRemoved";
    case ErrorCode::kFeatureParseError: return "FeatureParseError";
    case ErrorCode::kDegenerateData: return "DegenerateData";
    case ErrorCode::kDimMismatch: return "DimMismatch";
    case ErrorCode::kEmptyClass: return "EmptyClass";
    case ErrorCode::kEmptyUtterance: return "EmptyUtterance";
    case ErrorCode::kModelParseError: return "ModelParseError";
    case ErrorCode::kOneClassOnly: return "OneClassOnly";
    case ErrorCode::kMissingFeatures: return "MissingFeatures";
    case ErrorCode::kMissingModel: return "MissingModel";
    case ErrorCode::kManifestError: return "ManifestError";
    case ErrorCode::kConfigError: return "ConfigError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + what),
        code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void Fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

/// Dense row-major matrix of doubles. Rows are exposed as spans.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return rows_ == 0; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }

  std::span<double> row(std::size_t r) {
    return {data_.data() + r * cols_, cols_};
  }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  void AppendRow(std::span<const double> values) {
    if (rows_ == 0 && cols_ == 0) cols_ = values.size();
    if (values.size() != cols_)
      Fail(ErrorCode::kDimMismatch, "row of length " +
                                        std::to_string(values.size()) +
                                        " appended to matrix with " +
                                        std::to_string(cols_) + " columns");
    data_.insert(data_.end(), values.begin(), values.end());
    ++rows_;
  }

  const std::vector<double>& data() const noexcept { return data_; }
  std::vector<double>& data() noexcept { return data_; }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

inline double Dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double SquaredDistance(std::span<const double> a,
                              std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

/// %g-style text with a fixed number of significant digits; infinities as
/// "inf" / "-inf".
inline std::string FormatReal(double v, int significant_digits) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", significant_digits, v);
  return buf;
}

inline double ParseReal(std::string_view text, ErrorCode on_error) {
  std::string s(text);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\r' || s.back() == '\t'))
    s.pop_back();
  std::size_t start = s.find_first_not_of(" \t");
  if (start == std::string::npos) Fail(on_error, "empty numeric field");
  s = s.substr(start);
  if (s == "inf" || s == "+inf") return INFINITY;
  if (s == "-inf") return -INFINITY;
  std::size_t consumed = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &consumed);
  } catch (const std::exception&) {
    Fail(on_error, "not a number: '" + s + "'");
  }
  if (consumed != s.size()) Fail(on_error, "trailing text in number: '" + s + "'");
  return v;
}

inline std::vector<std::string> SplitString(std::string_view text, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = text.find(sep, start);
    if (pos == std::string_view::npos) {
      out.emplace_back(text.substr(start));
      break;
    }
    out.emplace_back(text.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

inline std::string Trim(std::string_view text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = text.find_last_not_of(" \t\r\n");
  return std::string(text.substr(first, last - first + 1));
}

/// Writes through a sibling temp file and renames it over `path`, so readers
/// never observe a half-written file.
inline void WriteFileAtomic(const std::filesystem::path& path,
                            std::string_view contents) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) Fail(ErrorCode::kIoFailure, "cannot open " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) Fail(ErrorCode::kIoFailure, "write failed: " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) Fail(ErrorCode::kIoFailure, "rename to " + path.string() + ": " + ec.message());
}

inline std::string ReadFileText(const std::filesystem::path& path,
                                ErrorCode on_missing = ErrorCode::kIoFailure) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(on_missing, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace spkver

#endif  // SPKVER_COMMON_HPP_
