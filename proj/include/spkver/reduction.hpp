// spkver/reduction.hpp

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

#ifndef SPKVER_REDUCTION_HPP_
#define SPKVER_REDUCTION_HPP_

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <optional>
#include <vector>

#include "spkver/common.hpp"
#include "spkver/feature_matrix.hpp"

namespace spkver {

/// Global per-dimension standardization fitted on pooled training frames:
/// x -> (x - mean) / stddev. Constant columns keep a unit divisor.
struct FeatureScaler {
  std::vector<double> mean;
  std::vector<double> stddev;

  std::size_t dim() const noexcept { return mean.size(); }

  Matrix Apply(const Matrix& m) const {
    if (m.cols() != dim())
      Fail(ErrorCode::kDimMismatch, "features have " + std::to_string(m.cols()) +
                                        " dims, scaler expects " + std::to_string(dim()));
    Matrix out(m.rows(), m.cols());
    for (std::size_t r = 0; r < m.rows(); ++r)
      for (std::size_t j = 0; j < m.cols(); ++j) out(r, j) = (m(r, j) - mean[j]) / stddev[j];
    return out;
  }

  bool operator==(const FeatureScaler&) const = default;
};

/// Mean vector plus a D x d orthonormal projection basis (column j is the
/// j-th principal direction) and its eigenvalues, non-increasing.
struct PcaTransform {
  std::vector<double> mean;
  Matrix basis;
  std::vector<double> eigenvalues;

  std::size_t input_dim() const noexcept { return basis.rows(); }
  std::size_t output_dim() const noexcept { return basis.cols(); }

  PcaTransform Truncated(std::size_t d) const {
    if (d > output_dim()) Fail(ErrorCode::kInvalidArgument, "cannot truncate to a larger dimension");
    PcaTransform t;
    t.mean = mean;
    t.eigenvalues.assign(eigenvalues.begin(), eigenvalues.begin() + static_cast<long>(d));
    t.basis = Matrix(input_dim(), d);
    for (std::size_t i = 0; i < input_dim(); ++i)
      for (std::size_t j = 0; j < d; ++j) t.basis(i, j) = basis(i, j);
    return t;
  }

  bool operator==(const PcaTransform&) const = default;
};

struct SymmetricEigen {
  std::vector<double> values;  // sorted non-increasing
  Matrix vectors;              // column j pairs with values[j]
  int sweeps = 0;
};

/// Cyclic Jacobi rotations until the off-diagonal mass falls below
/// `tol` relative to the total, or `max_sweeps` is reached.
inline SymmetricEigen JacobiEigen(Matrix a, double tol = 1e-12, int max_sweeps = 100) {
  const std::size_t n = a.rows();
  if (a.cols() != n) Fail(ErrorCode::kDimMismatch, "Jacobi needs a square matrix");
  Matrix v(n, n);
  for (std::size_t i = 0; i < n; ++i) v(i, i) = 1.0;

  auto off_norm = [&]() {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (i != j) s += a(i, j) * a(i, j);
    return s;
  };
  double total = 0.0;
  for (double x : a.data()) total += x * x;

  int sweep = 0;
  for (; sweep < max_sweeps; ++sweep) {
    if (off_norm() <= tol * tol * std::max(total, 1e-300)) break;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return a(x, x) > a(y, y); });
  SymmetricEigen out;
  out.sweeps = sweep;
  out.values.resize(n);
  out.vectors = Matrix(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    out.values[j] = a(order[j], order[j]);
    for (std::size_t i = 0; i < n; ++i) out.vectors(i, j) = v(i, order[j]);
  }
  return out;
}

/// Sample covariance with divisor T - 1 (T for a single row).
inline Matrix Covariance(const Matrix& data, const std::vector<double>& mean) {
  const std::size_t d = data.cols();
  Matrix cov(d, d);
  std::vector<double> centred(d);
  for (std::size_t t = 0; t < data.rows(); ++t) {
    for (std::size_t j = 0; j < d; ++j) centred[j] = data(t, j) - mean[j];
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = i; j < d; ++j) cov(i, j) += centred[i] * centred[j];
  }
  const double denom = data.rows() > 1 ? static_cast<double>(data.rows() - 1) : 1.0;
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i; j < d; ++j) {
      cov(i, j) /= denom;
      cov(j, i) = cov(i, j);
    }
  return cov;
}

inline std::vector<double> ColumnMeans(const Matrix& data) {
  std::vector<double> mean(data.cols(), 0.0);
  for (std::size_t t = 0; t < data.rows(); ++t)
    for (std::size_t j = 0; j < data.cols(); ++j) mean[j] += data(t, j);
  for (double& m : mean) m /= static_cast<double>(data.rows());
  return mean;
}

inline FeatureScaler FitScaler(const Matrix& data) {
  if (data.rows() == 0) Fail(ErrorCode::kDegenerateData, "scaler fit on an empty matrix");
  FeatureScaler sc;
  sc.mean = ColumnMeans(data);
  sc.stddev.assign(data.cols(), 0.0);
  for (std::size_t t = 0; t < data.rows(); ++t)
    for (std::size_t j = 0; j < data.cols(); ++j) {
      const double d = data(t, j) - sc.mean[j];
      sc.stddev[j] += d * d;
    }
  const double denom = data.rows() > 1 ? static_cast<double>(data.rows() - 1) : 1.0;
  for (double& s : sc.stddev) {
    s = std::sqrt(s / denom);
    if (!(s > 1e-12)) s = 1.0;
  }
  return sc;
}

/// Full-rank PCA of pooled training rows. Each basis column is signed so
/// that its largest-magnitude entry is positive.
inline PcaTransform FitPca(const Matrix& data) {
  if (data.rows() == 0 || data.cols() == 0)
    Fail(ErrorCode::kDegenerateData, "PCA over an empty matrix");
  for (double x : data.data())
    if (!std::isfinite(x)) Fail(ErrorCode::kInvalidArgument, "non-finite value in PCA input");
  if (data.rows() <= data.cols())
    std::fprintf(stderr, "WARNING: PCA fit with %zu rows for %zu dimensions\n", data.rows(),
                 data.cols());
  PcaTransform pca;
  pca.mean = ColumnMeans(data);
  const Matrix cov = Covariance(data, pca.mean);
  bool any_variance = false;
  for (std::size_t j = 0; j < cov.rows(); ++j) any_variance = any_variance || cov(j, j) > 0.0;
  if (!any_variance) Fail(ErrorCode::kDegenerateData, "zero variance in every column");

  SymmetricEigen eig = JacobiEigen(cov);
  const std::size_t d = cov.rows();
  for (std::size_t j = 0; j < d; ++j) {
    std::size_t arg = 0;
    for (std::size_t i = 1; i < d; ++i)
      if (std::abs(eig.vectors(i, j)) > std::abs(eig.vectors(arg, j))) arg = i;
    if (eig.vectors(arg, j) < 0.0)
      for (std::size_t i = 0; i < d; ++i) eig.vectors(i, j) = -eig.vectors(i, j);
  }
  pca.basis = std::move(eig.vectors);
  pca.eigenvalues = std::move(eig.values);
  return pca;
}

inline PcaTransform FitPca(const FeatureMatrix& pooled) { return FitPca(pooled.data); }

/// `fixed_d` wins when given; otherwise the smallest d whose leading
/// eigenvalues carry at least `retention` of the total variance.
/// Retention 1.0 keeps every eigenvalue above roundoff (1e-12 of the largest).
inline std::size_t ChooseDimension(const std::vector<double>& eigenvalues, double retention,
                                   std::optional<std::size_t> fixed_d = std::nullopt) {
  const std::size_t n = eigenvalues.size();
  if (fixed_d) return std::min(*fixed_d, n);
  if (!(retention > 0.0) || retention > 1.0)
    Fail(ErrorCode::kInvalidArgument, "retention must lie in (0, 1]");
  if (n == 0) return 0;
  const double largest = std::max(eigenvalues.front(), 0.0);
  const double noise = 1e-12 * largest;
  if (retention >= 1.0) {
    std::size_t d = 0;
    for (double l : eigenvalues) d += l > noise ? 1 : 0;
    return std::max<std::size_t>(d, 1);
  }
  double total = 0.0;
  for (double l : eigenvalues) total += std::max(l, 0.0);
  if (!(total > 0.0)) return 1;
  double acc = 0.0;
  for (std::size_t d = 0; d < n; ++d) {
    acc += std::max(eigenvalues[d], 0.0);
    if (acc / total >= retention - 1e-12) return d + 1;
  }
  return n;
}

/// y = basis^T (x - mean) for every row.
inline Matrix Project(const PcaTransform& t, const Matrix& m) {
  if (m.cols() != t.input_dim())
    Fail(ErrorCode::kDimMismatch, "features have " + std::to_string(m.cols()) +
                                      " dims, PCA expects " + std::to_string(t.input_dim()));
  const std::size_t d_in = t.input_dim(), d_out = t.output_dim();
  Matrix out(m.rows(), d_out);
  std::vector<double> centred(d_in);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t i = 0; i < d_in; ++i) centred[i] = m(r, i) - t.mean[i];
    for (std::size_t j = 0; j < d_out; ++j) {
      double acc = 0.0;
      for (std::size_t i = 0; i < d_in; ++i) acc += t.basis(i, j) * centred[i];
      out(r, j) = acc;
    }
  }
  return out;
}

inline FeatureMatrix Project(const PcaTransform& t, const FeatureMatrix& m) {
  FeatureMatrix out;
  out.frame_hop_ms = m.frame_hop_ms;
  out.data = Project(t, m.data);
  out.labels = NumberedLabels("pc", static_cast<int>(t.output_dim()));
  return out;
}

/// x = basis y + mean.
inline Matrix Reconstruct(const PcaTransform& t, const Matrix& y) {
  if (y.cols() != t.output_dim()) Fail(ErrorCode::kDimMismatch, "reconstruct dimension mismatch");
  Matrix out(y.rows(), t.input_dim());
  for (std::size_t r = 0; r < y.rows(); ++r)
    for (std::size_t i = 0; i < t.input_dim(); ++i) {
      double acc = t.mean[i];
      for (std::size_t j = 0; j < t.output_dim(); ++j) acc += t.basis(i, j) * y(r, j);
      out(r, i) = acc;
    }
  return out;
}

}  // namespace spkver

#endif  // SPKVER_REDUCTION_HPP_
