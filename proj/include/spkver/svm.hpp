// spkver/svm.hpp

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

#ifndef SPKVER_SVM_HPP_
#define SPKVER_SVM_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <list>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "spkver/common.hpp"
#include "spkver/feature_matrix.hpp"
#include "spkver/features.hpp"
#include "spkver/reduction.hpp"

namespace spkver {

enum class KernelKind { kRbf, kPolynomial };

/// rbf: exp(-gamma |x - y|^2); polynomial: x.y + 1 (degree 1, offset 1).
struct KernelSpec {
  KernelKind kind = KernelKind::kRbf;
  double gamma = 1.0;

  static KernelSpec Rbf(double gamma) { return {KernelKind::kRbf, gamma}; }
  static KernelSpec Polynomial() { return {KernelKind::kPolynomial, 0.0}; }

  void Validate() const {
    if (kind == KernelKind::kRbf && !(std::isfinite(gamma) && gamma > 0.0))
      Fail(ErrorCode::kInvalidArgument, "rbf gamma must be finite and positive");
  }

  double operator()(std::span<const double> x, std::span<const double> y) const {
    if (x.size() != y.size())
      Fail(ErrorCode::kDimMismatch, "kernel on vectors of length " + std::to_string(x.size()) +
                                        " and " + std::to_string(y.size()));
    if (kind == KernelKind::kRbf) return std::exp(-gamma * SquaredDistance(x, y));
    return Dot(x, y) + 1.0;
  }

  bool operator==(const KernelSpec&) const = default;
};

inline double KernelEval(const KernelSpec& spec, std::span<const double> x,
                         std::span<const double> y) {
  return spec(x, y);
}

inline const char* KernelName(KernelKind k) { return k == KernelKind::kRbf ? "rbf" : "polynomial"; }

/// One verification model: the target-vs-background SVM plus the front-end
/// state (PCA, CMS mode) needed to map raw features into its space.
struct SpeakerModel {
  std::string speaker_id;
  Matrix support_vectors;              // M x d
  std::vector<double> signed_weights;  // alpha_i * y_i
  double bias = 0.0;
  KernelSpec kernel;
  double C = 10.0;
  std::optional<FeatureScaler> scaler;
  std::optional<PcaTransform> pca;
  CmsMode cms = CmsMode::kAll;
  std::string feature_layout = "fused";
  std::size_t input_dim = 0;  // feature dim before PCA
  bool converged = true;
  std::size_t iterations = 0;

  std::size_t dim() const noexcept { return support_vectors.cols(); }
  std::size_t num_support_vectors() const noexcept { return signed_weights.size(); }

  bool operator==(const SpeakerModel&) const = default;
};

/// sum_i w_i K(x, sv_i) + b, i.e. the SVM discriminant before the sign.
inline double DecisionValue(const SpeakerModel& model, std::span<const double> x) {
  if (model.num_support_vectors() > 0 && x.size() != model.dim())
    Fail(ErrorCode::kDimMismatch, "vector of dim " + std::to_string(x.size()) +
                                      " for model of dim " + std::to_string(model.dim()));
  double acc = model.bias;
  for (std::size_t i = 0; i < model.num_support_vectors(); ++i)
    acc += model.signed_weights[i] * model.kernel(x, model.support_vectors.row(i));
  return acc;
}

/// +1 iff the decision value is strictly positive; a tie rejects.
inline int Classify(const SpeakerModel& model, std::span<const double> x) {
  return DecisionValue(model, x) > 0.0 ? +1 : -1;
}

/// Mean frame decision value over an already projected utterance.
inline double ScoreUtterance(const SpeakerModel& model, const Matrix& frames) {
  if (frames.rows() == 0) Fail(ErrorCode::kEmptyUtterance, "scoring an utterance with no frames");
  double acc = 0.0;
  for (std::size_t t = 0; t < frames.rows(); ++t) acc += DecisionValue(model, frames.row(t));
  return acc / static_cast<double>(frames.rows());
}

/// Raw feature frames through the model's embedded scaler and PCA.
inline Matrix ToModelSpace(const SpeakerModel& model, const Matrix& features) {
  if (model.input_dim != 0 && features.cols() != model.input_dim)
    Fail(ErrorCode::kDimMismatch, "features have " + std::to_string(features.cols()) +
                                      " dims, model expects " + std::to_string(model.input_dim));
  Matrix x = model.scaler ? model.scaler->Apply(features) : features;
  if (model.pca) x = Project(*model.pca, x);
  return x;
}

inline double ScoreFeatures(const SpeakerModel& model, const FeatureMatrix& features) {
  return ScoreUtterance(model, ToModelSpace(model, features.data));
}

struct SmoOptions {
  double C = 10.0;
  double tol = 1e-3;
  std::size_t max_iterations = 1000000;
  std::size_t cache_bytes = std::size_t{256} << 20;
};

struct SmoResult {
  std::vector<double> alpha;
  double bias = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

namespace svm_detail {

/// LRU cache of kernel matrix rows.
class KernelRowCache {
 public:
  KernelRowCache(const Matrix& x, const KernelSpec& kernel, std::size_t max_bytes)
      : x_(x), kernel_(kernel), diag_(x.rows()) {
    const std::size_t row_bytes = std::max<std::size_t>(x.rows() * sizeof(double), 1);
    capacity_ = std::max<std::size_t>(2, max_bytes / row_bytes);
    for (std::size_t i = 0; i < x.rows(); ++i) diag_[i] = kernel_(x_.row(i), x_.row(i));
  }

  double diag(std::size_t i) const { return diag_[i]; }

  const std::vector<double>& Row(std::size_t i) {
    auto it = index_.find(i);
    if (it != index_.end()) {
      lru_.splice(lru_.begin(), lru_, it->second);
      return it->second->second;
    }
    if (index_.size() >= capacity_) {
      index_.erase(lru_.back().first);
      lru_.pop_back();
    }
    std::vector<double> row(x_.rows());
    for (std::size_t k = 0; k < x_.rows(); ++k) row[k] = kernel_(x_.row(i), x_.row(k));
    lru_.emplace_front(i, std::move(row));
    index_[i] = lru_.begin();
    return lru_.front().second;
  }

 private:
  using Entry = std::pair<std::size_t, std::vector<double>>;
  const Matrix& x_;
  KernelSpec kernel_;
  std::vector<double> diag_;
  std::size_t capacity_ = 2;
  std::list<Entry> lru_;
  std::unordered_map<std::size_t, std::list<Entry>::iterator> index_;
};

}  // namespace svm_detail

/// Sequential minimal optimization of the C-SVM dual
///   min 1/2 a^T Q a - e^T a,  0 <= a_i <= C,  y^T a = 0,  Q_ij = y_i y_j K_ij,
/// choosing the maximal-violating pair each step. Stops when the KKT gap
/// m(a) - M(a) drops below tol. The bias is averaged over free support
/// vectors, or taken at the midpoint of the feasible interval if none are free.
inline SmoResult SolveSmo(const Matrix& x, const std::vector<int>& y, const KernelSpec& kernel,
                          const SmoOptions& opts) {
  const std::size_t n = x.rows();
  if (y.size() != n) Fail(ErrorCode::kDimMismatch, "label count differs from example count");
  kernel.Validate();
  if (!(opts.C > 0.0)) Fail(ErrorCode::kInvalidArgument, "C must be positive");
  const double c = opts.C;
  constexpr double kTau = 1e-12;

  svm_detail::KernelRowCache cache(x, kernel, opts.cache_bytes);
  SmoResult res;
  res.alpha.assign(n, 0.0);
  std::vector<double> grad(n, -1.0);
  std::vector<double>& alpha = res.alpha;

  auto in_up = [&](std::size_t t) {
    return (y[t] == +1 && alpha[t] < c) || (y[t] == -1 && alpha[t] > 0.0);
  };
  auto in_low = [&](std::size_t t) {
    return (y[t] == +1 && alpha[t] > 0.0) || (y[t] == -1 && alpha[t] < c);
  };

  std::size_t iter = 0;
  for (; iter < opts.max_iterations; ++iter) {
    double g_max = -std::numeric_limits<double>::infinity();
    double g_min = std::numeric_limits<double>::infinity();
    std::size_t i = n, j = n;
    for (std::size_t t = 0; t < n; ++t) {
      const double v = -y[t] * grad[t];
      if (in_up(t) && v > g_max) {
        g_max = v;
        i = t;
      }
      if (in_low(t) && v < g_min) {
        g_min = v;
        j = t;
      }
    }
    if (i == n || j == n || g_max - g_min < opts.tol) {
      res.converged = true;
      break;
    }

    const std::vector<double>& k_i = cache.Row(i);
    const std::vector<double>& k_j = cache.Row(j);
    const double old_ai = alpha[i], old_aj = alpha[j];
    const double q_ij = y[i] * y[j] * k_i[j];
    if (y[i] != y[j]) {
      double quad = cache.diag(i) + cache.diag(j) + 2.0 * q_ij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0.0) {
        if (alpha[j] < 0.0) {
          alpha[j] = 0.0;
          alpha[i] = diff;
        }
      } else if (alpha[i] < 0.0) {
        alpha[i] = 0.0;
        alpha[j] = -diff;
      }
      if (diff > 0.0) {
        if (alpha[i] > c) {
          alpha[i] = c;
          alpha[j] = c - diff;
        }
      } else if (alpha[j] > c) {
        alpha[j] = c;
        alpha[i] = c + diff;
      }
    } else {
      double quad = cache.diag(i) + cache.diag(j) - 2.0 * q_ij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > c) {
        if (alpha[i] > c) {
          alpha[i] = c;
          alpha[j] = sum - c;
        }
      } else if (alpha[j] < 0.0) {
        alpha[j] = 0.0;
        alpha[i] = sum;
      }
      if (sum > c) {
        if (alpha[j] > c) {
          alpha[j] = c;
          alpha[i] = sum - c;
        }
      } else if (alpha[i] < 0.0) {
        alpha[i] = 0.0;
        alpha[j] = sum;
      }
    }
    const double d_ai = alpha[i] - old_ai, d_aj = alpha[j] - old_aj;
    for (std::size_t t = 0; t < n; ++t)
      grad[t] += y[t] * (y[i] * k_i[t] * d_ai + y[j] * k_j[t] * d_aj);
  }
  res.iterations = iter;

  double ub = std::numeric_limits<double>::infinity();
  double lb = -std::numeric_limits<double>::infinity();
  double free_sum = 0.0;
  std::size_t n_free = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const double yg = y[t] * grad[t];
    if (alpha[t] >= c) {
      if (y[t] == -1) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else if (alpha[t] <= 0.0) {
      if (y[t] == +1) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else {
      ++n_free;
      free_sum += yg;
    }
  }
  double rho = 0.0;
  if (n_free > 0) rho = free_sum / static_cast<double>(n_free);
  else if (std::isfinite(ub) && std::isfinite(lb)) rho = 0.5 * (ub + lb);
  else if (std::isfinite(ub)) rho = ub;
  else if (std::isfinite(lb)) rho = lb;
  res.bias = -rho;
  return res;
}

/// sum a_i - 1/2 sum_ij a_i a_j y_i y_j K_ij.
inline double DualObjective(const Matrix& x, const std::vector<int>& y,
                            const std::vector<double>& alpha, const KernelSpec& kernel) {
  double lin = 0.0, quad = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    lin += alpha[i];
    if (alpha[i] == 0.0) continue;
    for (std::size_t j = 0; j < x.rows(); ++j)
      if (alpha[j] != 0.0) quad += alpha[i] * alpha[j] * y[i] * y[j] * kernel(x.row(i), x.row(j));
  }
  return lin - 0.5 * quad;
}

struct SvmTrainOptions {
  KernelSpec kernel;
  double C = 10.0;
  double tol = 1e-3;
  std::uint64_t seed = 0;
  // Negatives are subsampled (seeded) to at most neg_ratio x positives;
  // 0 disables subsampling.
  double neg_ratio = 20.0;
  std::size_t max_iterations = 1000000;
};

struct SvmTrainReport {
  SmoResult smo;
  Matrix x;  // the training set actually used, positives first
  std::vector<int> y;
};

/// Up to `keep` of `n` indices, chosen by a seeded partial Fisher-Yates
/// shuffle and returned in ascending order.
inline std::vector<std::size_t> SampleIndices(std::size_t n, std::size_t keep, std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  if (keep >= n) return idx;
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < keep; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng() % (n - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(keep);
  std::sort(idx.begin(), idx.end());
  return idx;
}

/// Target frames (+1) against background frames (-1). Support vectors are
/// the examples with alpha > 1e-8.
inline SpeakerModel TrainSvm(const Matrix& pos, const Matrix& neg, const SvmTrainOptions& opts,
                             SvmTrainReport* report = nullptr) {
  if (pos.rows() == 0 || neg.rows() == 0)
    Fail(ErrorCode::kEmptyClass, pos.rows() == 0 ? "no positive examples" : "no negative examples");
  if (pos.cols() != neg.cols())
    Fail(ErrorCode::kDimMismatch, "positive and negative examples differ in dimension");
  if (!(opts.C > 0.0)) Fail(ErrorCode::kInvalidArgument, "C must be positive");
  opts.kernel.Validate();

  std::size_t keep = neg.rows();
  if (opts.neg_ratio > 0.0)
    keep = std::min(keep, static_cast<std::size_t>(opts.neg_ratio * static_cast<double>(pos.rows())));
  keep = std::max<std::size_t>(keep, 1);
  const auto neg_idx = SampleIndices(neg.rows(), keep, opts.seed);

  Matrix x(pos.rows() + neg_idx.size(), pos.cols());
  std::vector<int> y(x.rows());
  for (std::size_t i = 0; i < pos.rows(); ++i) {
    std::copy(pos.row(i).begin(), pos.row(i).end(), x.row(i).begin());
    y[i] = +1;
  }
  for (std::size_t k = 0; k < neg_idx.size(); ++k) {
    const std::size_t r = pos.rows() + k;
    std::copy(neg.row(neg_idx[k]).begin(), neg.row(neg_idx[k]).end(), x.row(r).begin());
    y[r] = -1;
  }

  SmoOptions smo_opts;
  smo_opts.C = opts.C;
  smo_opts.tol = opts.tol;
  smo_opts.max_iterations = opts.max_iterations;
  SmoResult smo = SolveSmo(x, y, opts.kernel, smo_opts);
  if (!smo.converged)
    std::fprintf(stderr, "WARNING: SMO hit the iteration cap (%zu) before reaching tol %g\n",
                 smo.iterations, opts.tol);

  SpeakerModel model;
  model.kernel = opts.kernel;
  model.C = opts.C;
  model.bias = smo.bias;
  model.converged = smo.converged;
  model.iterations = smo.iterations;
  model.input_dim = x.cols();
  model.support_vectors = Matrix(0, x.cols());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    if (smo.alpha[i] > 1e-8) {
      model.support_vectors.AppendRow(x.row(i));
      model.signed_weights.push_back(smo.alpha[i] * y[i]);
    }
  }
  if (report) {
    report->smo = std::move(smo);
    report->x = std::move(x);
    report->y = std::move(y);
  }
  return model;
}

// ---------------------------------------------------------------------------
// Model file: UTF-8 text, sections [meta] [scale] [pca] [cms] [sv], reals written
// with 17 significant digits so they read back bit-exactly.

namespace model_detail {

inline std::string Reals(std::span<const double> v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ' ';
    out += FormatReal(v[i], 17);
  }
  return out;
}

inline std::vector<double> ParseReals(const std::string& text) {
  std::vector<double> out;
  std::istringstream in(text);
  std::string tok;
  while (in >> tok) out.push_back(ParseReal(tok, ErrorCode::kModelParseError));
  return out;
}

}  // namespace model_detail

inline std::string SerializeModel(const SpeakerModel& m) {
  using model_detail::Reals;
  std::string out;
  out += "[meta]\n";
  out += "speaker_id = " + m.speaker_id + "\n";
  out += std::string("kernel = ") + KernelName(m.kernel.kind) + "\n";
  out += "gamma = " + FormatReal(m.kernel.gamma, 17) + "\n";
  out += "C = " + FormatReal(m.C, 17) + "\n";
  out += "bias = " + FormatReal(m.bias, 17) + "\n";
  out += "dim = " + std::to_string(m.dim()) + "\n";
  out += "input_dim = " + std::to_string(m.input_dim) + "\n";
  out += "num_sv = " + std::to_string(m.num_support_vectors()) + "\n";
  out += "feature_layout = " + m.feature_layout + "\n";
  out += std::string("converged = ") + (m.converged ? "1" : "0") + "\n";
  out += "iterations = " + std::to_string(m.iterations) + "\n";
  out += std::string("created_by_version = ") + kVersion + "\n";
  out += "[scale]\n";
  if (m.scaler) {
    out += "enabled = 1\n";
    out += "mean: " + Reals(m.scaler->mean) + "\n";
    out += "std: " + Reals(m.scaler->stddev) + "\n";
  } else {
    out += "enabled = 0\n";
  }
  out += "[pca]\n";
  if (m.pca) {
    const PcaTransform& p = *m.pca;
    out += "enabled = 1\n";
    out += "mean: " + Reals(p.mean) + "\n";
    out += "basis:\n";
    std::vector<double> col(p.input_dim());
    for (std::size_t j = 0; j < p.output_dim(); ++j) {
      for (std::size_t i = 0; i < p.input_dim(); ++i) col[i] = p.basis(i, j);
      out += Reals(col) + "\n";
    }
    out += "eigenvalues: " + Reals(p.eigenvalues) + "\n";
  } else {
    out += "enabled = 0\n";
  }
  out += "[cms]\n";
  out += std::string("mode = ") + CmsModeName(m.cms) + "\n";
  out += "[sv]\n";
  std::vector<double> line;
  for (std::size_t i = 0; i < m.num_support_vectors(); ++i) {
    line.assign(1, m.signed_weights[i]);
    line.insert(line.end(), m.support_vectors.row(i).begin(), m.support_vectors.row(i).end());
    out += Reals(line) + "\n";
  }
  return out;
}

inline SpeakerModel ParseModel(const std::string& text) {
  using model_detail::ParseReals;
  auto bad = [](const std::string& why) -> void { Fail(ErrorCode::kModelParseError, why); };
  SpeakerModel m;
  std::unordered_map<std::string, std::string> meta;
  std::string section;
  bool pca_enabled = false, in_basis = false;
  std::vector<std::vector<double>> basis_rows;
  std::vector<double> pca_mean, pca_eig;
  std::vector<std::vector<double>> sv_lines;
  bool seen_meta = false, seen_pca = false, seen_cms = false, seen_sv = false;
  bool scale_enabled = false;
  std::vector<double> scale_mean, scale_std;

  std::istringstream in(text);
  std::string raw;
  while (std::getline(in, raw)) {
    const std::string line = Trim(raw);
    if (line.empty() || line[0] == '#') continue;
    if (line.front() == '[') {
      if (line.back() != ']') bad("malformed section header '" + line + "'");
      section = line.substr(1, line.size() - 2);
      in_basis = false;
      if (section == "meta") seen_meta = true;
      else if (section == "pca") seen_pca = true;
      else if (section == "cms") seen_cms = true;
      else if (section == "sv") seen_sv = true;
      else if (section == "scale") {}
      else bad("unknown section [" + section + "]");
      continue;
    }
    if (section.empty()) bad("content before the first section");
    if (section == "meta") {
      const auto eq = line.find('=');
      if (eq == std::string::npos) bad("expected key = value in [meta]: '" + line + "'");
      meta[Trim(line.substr(0, eq))] = Trim(line.substr(eq + 1));
    } else if (section == "scale") {
      if (line.rfind("enabled", 0) == 0) {
        const auto eq = line.find('=');
        if (eq == std::string::npos) bad("bad scale enabled line");
        scale_enabled = Trim(line.substr(eq + 1)) == "1";
      } else if (line.rfind("mean:", 0) == 0) {
        scale_mean = ParseReals(line.substr(5));
      } else if (line.rfind("std:", 0) == 0) {
        scale_std = ParseReals(line.substr(4));
      } else {
        bad("unexpected line in [scale]: '" + line + "'");
      }
    } else if (section == "pca") {
      if (line.rfind("enabled", 0) == 0) {
        const auto eq = line.find('=');
        if (eq == std::string::npos) bad("bad pca enabled line");
        pca_enabled = Trim(line.substr(eq + 1)) == "1";
      } else if (line.rfind("mean:", 0) == 0) {
        pca_mean = ParseReals(line.substr(5));
        in_basis = false;
      } else if (line.rfind("basis:", 0) == 0) {
        in_basis = true;
      } else if (line.rfind("eigenvalues:", 0) == 0) {
        pca_eig = ParseReals(line.substr(12));
        in_basis = false;
      } else if (in_basis) {
        basis_rows.push_back(ParseReals(line));
      } else {
        bad("unexpected line in [pca]: '" + line + "'");
      }
    } else if (section == "cms") {
      const auto eq = line.find('=');
      if (eq == std::string::npos || Trim(line.substr(0, eq)) != "mode") bad("expected mode = ... in [cms]");
      try {
        m.cms = ParseCmsMode(Trim(line.substr(eq + 1)));
      } catch (const Error& e) {
        bad(e.what());
      }
    } else if (section == "sv") {
      sv_lines.push_back(ParseReals(line));
    }
  }
  if (!seen_meta || !seen_pca || !seen_cms || !seen_sv) bad("missing one of [meta] [pca] [cms] [sv]");

  auto get = [&](const std::string& key) -> std::string {
    auto it = meta.find(key);
    if (it == meta.end()) Fail(ErrorCode::kModelParseError, "missing meta key '" + key + "'");
    return it->second;
  };
  auto get_real = [&](const std::string& key) { return ParseReal(get(key), ErrorCode::kModelParseError); };
  auto get_count = [&](const std::string& key) {
    const double v = get_real(key);
    if (v < 0 || v != std::floor(v)) Fail(ErrorCode::kModelParseError, "meta '" + key + "' must be a count");
    return static_cast<std::size_t>(v);
  };

  m.speaker_id = get("speaker_id");
  const std::string kernel = get("kernel");
  if (kernel == "rbf") m.kernel.kind = KernelKind::kRbf;
  else if (kernel == "polynomial") m.kernel.kind = KernelKind::kPolynomial;
  else bad("unknown kernel '" + kernel + "'");
  m.kernel.gamma = get_real("gamma");
  m.C = get_real("C");
  m.bias = get_real("bias");
  const std::size_t dim = get_count("dim");
  m.input_dim = meta.count("input_dim") ? get_count("input_dim") : dim;
  m.feature_layout = meta.count("feature_layout") ? meta["feature_layout"] : "fused";
  m.converged = !meta.count("converged") || meta["converged"] == "1";
  m.iterations = meta.count("iterations") ? get_count("iterations") : 0;
  if (meta.count("num_sv") && get_count("num_sv") != sv_lines.size())
    bad("num_sv does not match the number of [sv] lines");
  try {
    m.kernel.Validate();
  } catch (const Error& e) {
    bad(e.what());
  }

  if (scale_enabled) {
    if (scale_mean.size() != m.input_dim || scale_std.size() != m.input_dim)
      bad("scale vectors must have input_dim entries");
    for (double v : scale_std)
      if (!(v > 0.0)) bad("scale std entries must be positive");
    m.scaler = FeatureScaler{scale_mean, scale_std};
  }

  if (pca_enabled) {
    PcaTransform p;
    const std::size_t d_in = pca_mean.size();
    if (d_in == 0 || d_in != m.input_dim) bad("pca mean length does not match input_dim");
    if (basis_rows.size() != dim) bad("pca basis must have dim rows");
    if (pca_eig.size() != dim) bad("pca eigenvalue count must equal dim");
    p.mean = pca_mean;
    p.eigenvalues = pca_eig;
    p.basis = Matrix(d_in, dim);
    for (std::size_t j = 0; j < dim; ++j) {
      if (basis_rows[j].size() != d_in) bad("pca basis row has the wrong length");
      for (std::size_t i = 0; i < d_in; ++i) p.basis(i, j) = basis_rows[j][i];
    }
    m.pca = std::move(p);
  } else if (!basis_rows.empty() || !pca_mean.empty()) {
    bad("pca data present but enabled = 0");
  }

  m.support_vectors = Matrix(0, dim);
  for (const auto& l : sv_lines) {
    if (l.size() != dim + 1) bad("support vector line has " + std::to_string(l.size()) + " values, expected " + std::to_string(dim + 1));
    m.signed_weights.push_back(l[0]);
    m.support_vectors.AppendRow(std::span<const double>(l).subspan(1));
  }
  return m;
}

inline void WriteModel(const SpeakerModel& m, const std::filesystem::path& path) {
  WriteFileAtomic(path, SerializeModel(m));
}

inline SpeakerModel ReadModel(const std::filesystem::path& path) {
  return ParseModel(ReadFileText(path, ErrorCode::kMissingModel));
}

}  // namespace spkver

#endif  // SPKVER_SVM_HPP_
