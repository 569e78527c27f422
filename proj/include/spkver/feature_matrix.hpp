// spkver/feature_matrix.hpp

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

#ifndef SPKVER_FEATURE_MATRIX_HPP_
#define SPKVER_FEATURE_MATRIX_HPP_

#include <cmath>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "spkver/common.hpp"

namespace spkver {

/// T frames x D dims with one label per dimension.
struct FeatureMatrix {
  Matrix data;
  std::vector<std::string> labels;
  double frame_hop_ms = 10.0;

  std::size_t num_frames() const noexcept { return data.rows(); }
  std::size_t dim() const noexcept { return labels.size(); }

  void CheckInvariants() const {
    if (data.rows() > 0 && data.cols() != labels.size())
      Fail(ErrorCode::kDimMismatch, std::to_string(labels.size()) + " labels for " +
                                        std::to_string(data.cols()) + " columns");
    for (double v : data.data())
      if (!std::isfinite(v)) Fail(ErrorCode::kInvalidArgument, "non-finite feature value");
  }

  bool operator==(const FeatureMatrix&) const = default;
};

inline std::vector<std::string> NumberedLabels(const std::string& prefix, int count) {
  std::vector<std::string> out;
  for (int i = 1; i <= count; ++i) out.push_back(prefix + std::to_string(i));
  return out;
}

/// Header `#dims=<D> hop_ms=<h> labels=<l1,l2,...>` followed by one CSV row
/// of D values (9 significant digits) per frame.
inline std::string SerializeFeatures(const FeatureMatrix& m) {
  m.CheckInvariants();
  std::string out = "#dims=" + std::to_string(m.dim()) + " hop_ms=" + FormatReal(m.frame_hop_ms, 9) +
                    " labels=";
  for (std::size_t j = 0; j < m.labels.size(); ++j) {
    if (j) out += ',';
    out += m.labels[j];
  }
  out += '\n';
  for (std::size_t t = 0; t < m.num_frames(); ++t) {
    const auto row = m.data.row(t);
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j) out += ',';
      out += FormatReal(row[j], 9);
    }
    out += '\n';
  }
  return out;
}

inline FeatureMatrix ParseFeatures(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line.rfind("#dims=", 0) != 0)
    Fail(ErrorCode::kFeatureParseError, "missing '#dims=' header");
  FeatureMatrix m;
  std::size_t dims = 0;
  bool have_labels = false;
  std::istringstream header(line.substr(1));
  std::string field;
  while (header >> field) {
    const auto eq = field.find('=');
    if (eq == std::string::npos) Fail(ErrorCode::kFeatureParseError, "bad header field '" + field + "'");
    const std::string key = field.substr(0, eq), value = field.substr(eq + 1);
    if (key == "dims") {
      dims = static_cast<std::size_t>(ParseReal(value, ErrorCode::kFeatureParseError));
    } else if (key == "hop_ms") {
      m.frame_hop_ms = ParseReal(value, ErrorCode::kFeatureParseError);
    } else if (key == "labels") {
      m.labels = value.empty() ? std::vector<std::string>{} : SplitString(value, ',');
      have_labels = true;
    } else {
      Fail(ErrorCode::kFeatureParseError, "unknown header key '" + key + "'");
    }
  }
  if (!have_labels) m.labels = NumberedLabels("x", static_cast<int>(dims));
  if (m.labels.size() != dims)
    Fail(ErrorCode::kDimMismatch, "header declares " + std::to_string(dims) + " dims but " +
                                      std::to_string(m.labels.size()) + " labels");
  m.data = Matrix(0, dims);
  std::vector<double> row;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto fields = SplitString(line, ',');
    if (fields.size() != dims)
      Fail(ErrorCode::kDimMismatch, "row with " + std::to_string(fields.size()) +
                                        " values, header declares " + std::to_string(dims));
    row.clear();
    for (const auto& f : fields) row.push_back(ParseReal(f, ErrorCode::kFeatureParseError));
    m.data.AppendRow(row);
  }
  return m;
}

inline void WriteFeatures(const FeatureMatrix& m, const std::filesystem::path& path) {
  WriteFileAtomic(path, SerializeFeatures(m));
}

inline FeatureMatrix ReadFeatures(const std::filesystem::path& path) {
  return ParseFeatures(ReadFileText(path, ErrorCode::kMissingFeatures));
}

}  // namespace spkver

#endif  // SPKVER_FEATURE_MATRIX_HPP_
