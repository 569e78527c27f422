// spkver/pipeline.hpp

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

#ifndef SPKVER_PIPELINE_HPP_
#define SPKVER_PIPELINE_HPP_

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "spkver/audio_io.hpp"
#include "spkver/common.hpp"
#include "spkver/corpus.hpp"
#include "spkver/eval.hpp"
#include "spkver/features.hpp"
#include "spkver/reduction.hpp"
#include "spkver/svm.hpp"

namespace spkver {

enum class GammaMode { kAuto, kScale, kFixed };

struct PipelineConfig {
  FrontEndConfig front_end;
  FeatureKind features = FeatureKind::kFused;
  bool vad_from_clean = true;

  bool standardize = true;
  bool pca_enabled = true;
  double pca_retention = 0.95;
  std::size_t pca_fixed_d = 0;  // 0: use retention

  KernelKind kernel = KernelKind::kRbf;
  double svm_c = 10.0;
  GammaMode gamma_mode = GammaMode::kAuto;
  double gamma_value = 0.0;
  double svm_tol = 1e-3;
  double neg_ratio = 20.0;
  std::size_t max_iterations = 1000000;

  std::uint64_t seed = 1;
  int jobs = 1;
};

namespace config_detail {

inline std::string Bool(bool b) { return b ? "true" : "false"; }

inline bool ParseBool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "on" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "off" || v == "no") return false;
  Fail(ErrorCode::kConfigError, key + ": expected a boolean, got '" + v + "'");
}

inline double Real(const std::string& key, const std::string& v, double lo, double hi) {
  double x = 0.0;
  try {
    x = ParseReal(v, ErrorCode::kConfigError);
  } catch (const Error&) {
    Fail(ErrorCode::kConfigError, key + ": expected a number, got '" + v + "'");
  }
  if (!(x >= lo && x <= hi))
    Fail(ErrorCode::kConfigError, key + " = " + v + " outside [" + FormatReal(lo, 6) + ", " +
                                      FormatReal(hi, 6) + "]");
  return x;
}

inline long Int(const std::string& key, const std::string& v, long lo, long hi) {
  const double x = Real(key, v, static_cast<double>(lo), static_cast<double>(hi));
  if (x != std::floor(x)) Fail(ErrorCode::kConfigError, key + ": expected an integer, got '" + v + "'");
  return static_cast<long>(x);
}

}  // namespace config_detail

/// Applies one `key = value` setting, range-checking the value.
inline void SetConfigValue(PipelineConfig& c, const std::string& key, const std::string& value) {
  using namespace config_detail;
  CepstraConfig& cep = c.front_end.cepstra;
  if (key == "preemph_a") c.front_end.preemph_a = Real(key, value, 0.0, 0.99);
  else if (key == "frame_ms") cep.frame_ms = Real(key, value, 1.0, 200.0);
  else if (key == "hop_ms") cep.hop_ms = Real(key, value, 1.0, 200.0);
  else if (key == "n_cepstra") cep.n_cepstra = static_cast<int>(Int(key, value, 1, 64));
  else if (key == "n_filters") cep.n_filters = static_cast<int>(Int(key, value, 1, 128));
  else if (key == "fft_size") {
    cep.fft_size = static_cast<int>(Int(key, value, 2, 65536));
    if (!IsPowerOfTwo(cep.fft_size)) Fail(ErrorCode::kConfigError, "fft_size must be a power of two");
  } else if (key == "fmin_hz") cep.fmin_hz = Real(key, value, 0.0, 1e6);
  else if (key == "fmax_hz") cep.fmax_hz = Real(key, value, 1.0, 1e6);
  else if (key == "log_floor") cep.log_floor = Real(key, value, 1e-300, 1.0);
  else if (key == "lpc_order") {
    c.front_end.lpc_order = static_cast<int>(Int(key, value, 2, 64));
    if (c.front_end.lpc_order % 2 != 0) Fail(ErrorCode::kConfigError, "lpc_order must be even");
  } else if (key == "delta_window") c.front_end.delta_window = static_cast<int>(Int(key, value, 1, 10));
  else if (key == "vad") c.front_end.vad_enabled = ParseBool(key, value);
  else if (key == "vad_dynamic_range_db") c.front_end.vad_dynamic_range_db = Real(key, value, 0.0, 200.0);
  else if (key == "vad_floor_db") c.front_end.vad_floor_db = Real(key, value, -300.0, 100.0);
  else if (key == "vad_reference") {
    if (value != "clean" && value != "self") Fail(ErrorCode::kConfigError, "vad_reference must be clean|self");
    c.vad_from_clean = value == "clean";
  } else if (key == "cms") c.front_end.cms = ParseCmsMode(value);
  else if (key == "features") c.features = ParseFeatureKind(value);
  else if (key == "standardize") c.standardize = ParseBool(key, value);
  else if (key == "pca") c.pca_enabled = ParseBool(key, value);
  else if (key == "pca_retention") {
    c.pca_retention = Real(key, value, 0.0, 1.0);
    if (c.pca_retention == 0.0) Fail(ErrorCode::kConfigError, "pca_retention must be > 0");
  } else if (key == "pca_fixed_d") c.pca_fixed_d = static_cast<std::size_t>(Int(key, value, 0, 100000));
  else if (key == "svm_kernel") {
    if (value == "rbf") c.kernel = KernelKind::kRbf;
    else if (value == "polynomial") c.kernel = KernelKind::kPolynomial;
    else Fail(ErrorCode::kConfigError, "svm_kernel must be rbf|polynomial");
  } else if (key == "svm_c") {
    c.svm_c = Real(key, value, 0.0, 1e12);
    if (c.svm_c == 0.0) Fail(ErrorCode::kConfigError, "svm_c must be > 0");
  } else if (key == "svm_gamma") {
    if (value == "auto") c.gamma_mode = GammaMode::kAuto;
    else if (value == "scale") c.gamma_mode = GammaMode::kScale;
    else {
      c.gamma_mode = GammaMode::kFixed;
      c.gamma_value = Real(key, value, 0.0, 1e12);
      if (c.gamma_value == 0.0) Fail(ErrorCode::kConfigError, "svm_gamma must be > 0");
    }
  } else if (key == "svm_tol") {
    c.svm_tol = Real(key, value, 0.0, 1.0);
    if (c.svm_tol == 0.0) Fail(ErrorCode::kConfigError, "svm_tol must be > 0");
  } else if (key == "svm_neg_ratio") c.neg_ratio = Real(key, value, 0.0, 1e9);
  else if (key == "svm_max_iter") c.max_iterations = static_cast<std::size_t>(Int(key, value, 1, 1000000000));
  else if (key == "seed") c.seed = static_cast<std::uint64_t>(Int(key, value, 0, 9007199254740991L));
  else if (key == "jobs") c.jobs = static_cast<int>(Int(key, value, 1, 256));
  else Fail(ErrorCode::kConfigError, "unknown config key '" + key + "'");
}

/// Flat `key = value` text; `#` starts a comment.
inline void ApplyConfigText(PipelineConfig& c, const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = Trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      Fail(ErrorCode::kConfigError, "line " + std::to_string(lineno) + ": expected key = value");
    SetConfigValue(c, Trim(line.substr(0, eq)), Trim(line.substr(eq + 1)));
  }
}

inline PipelineConfig LoadConfig(const std::filesystem::path& path) {
  PipelineConfig c;
  ApplyConfigText(c, ReadFileText(path, ErrorCode::kConfigError));
  return c;
}

/// Every setting, one per line, in a fixed order. Feeding the output back to
/// ApplyConfigText reproduces the same config.
inline std::string EmitConfig(const PipelineConfig& c) {
  using config_detail::Bool;
  const CepstraConfig& cep = c.front_end.cepstra;
  std::ostringstream s;
  auto real = [](double v) { return FormatReal(v, 17); };
  s << "preemph_a = " << real(c.front_end.preemph_a) << "\n"
    << "frame_ms = " << real(cep.frame_ms) << "\n"
    << "hop_ms = " << real(cep.hop_ms) << "\n"
    << "n_cepstra = " << cep.n_cepstra << "\n"
    << "n_filters = " << cep.n_filters << "\n"
    << "fft_size = " << cep.fft_size << "\n"
    << "fmin_hz = " << real(cep.fmin_hz) << "\n"
    << "fmax_hz = " << real(cep.fmax_hz) << "\n"
    << "log_floor = " << real(cep.log_floor) << "\n"
    << "lpc_order = " << c.front_end.lpc_order << "\n"
    << "delta_window = " << c.front_end.delta_window << "\n"
    << "vad = " << Bool(c.front_end.vad_enabled) << "\n"
    << "vad_dynamic_range_db = " << real(c.front_end.vad_dynamic_range_db) << "\n"
    << "vad_floor_db = " << real(c.front_end.vad_floor_db) << "\n"
    << "vad_reference = " << (c.vad_from_clean ? "clean" : "self") << "\n"
    << "cms = " << CmsModeName(c.front_end.cms) << "\n"
    << "features = " << FeatureKindName(c.features) << "\n"
    << "standardize = " << Bool(c.standardize) << "\n"
    << "pca = " << Bool(c.pca_enabled) << "\n"
    << "pca_retention = " << real(c.pca_retention) << "\n"
    << "pca_fixed_d = " << c.pca_fixed_d << "\n"
    << "svm_kernel = " << KernelName(c.kernel) << "\n"
    << "svm_c = " << real(c.svm_c) << "\n"
    << "svm_gamma = "
    << (c.gamma_mode == GammaMode::kAuto ? "auto"
        : c.gamma_mode == GammaMode::kScale ? "scale"
                                            : real(c.gamma_value))
    << "\n"
    << "svm_tol = " << real(c.svm_tol) << "\n"
    << "svm_neg_ratio = " << real(c.neg_ratio) << "\n"
    << "svm_max_iter = " << c.max_iterations << "\n"
    << "seed = " << c.seed << "\n"
    << "jobs = " << c.jobs << "\n";
  return s.str();
}

/// Runs fn(0..n-1) on up to `jobs` threads. The first exception is rethrown
/// after all workers finish.
inline void ParallelFor(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(std::max(jobs, 1)), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex mu;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(mu);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

// ---------------------------------------------------------------------------
// Extraction

inline std::filesystem::path FeaturePath(const std::filesystem::path& dir, const ManifestEntry& e) {
  return dir / e.speaker_id / (e.utterance_id + ".csv");
}

inline FeatureMatrix ExtractEntry(const ManifestEntry& e, const PipelineConfig& cfg) {
  const AudioClip clip = ReadWav(e.path);
  if (cfg.vad_from_clean && !e.vad_path.empty()) {
    const AudioClip reference = ReadWav(e.vad_path);
    return ExtractFeatures(clip, cfg.front_end, cfg.features, &reference);
  }
  return ExtractFeatures(clip, cfg.front_end, cfg.features);
}

struct ExtractReport {
  std::size_t written = 0;
  std::vector<std::string> failures;  // "speaker/utt: message"
};

/// One feature file per manifest entry. Failures are collected per
/// utterance rather than aborting the run.
inline ExtractReport ExtractCorpus(const CorpusManifest& manifest, const PipelineConfig& cfg,
                                   const std::filesystem::path& out_dir) {
  std::vector<std::string> errors(manifest.entries.size());
  ParallelFor(manifest.entries.size(), cfg.jobs, [&](std::size_t i) {
    const ManifestEntry& e = manifest.entries[i];
    try {
      WriteFeatures(ExtractEntry(e, cfg), FeaturePath(out_dir, e));
    } catch (const std::exception& ex) {
      errors[i] = e.speaker_id + "/" + e.utterance_id + ": " + ex.what();
    }
  });
  ExtractReport report;
  for (const auto& err : errors) {
    if (err.empty()) ++report.written;
    else report.failures.push_back(err);
  }
  return report;
}

// ---------------------------------------------------------------------------
// Noise

/// Looped noise source shared by every utterance of a noisy condition.
inline AudioClip ConditionNoise(NoiseKind kind, std::uint64_t seed, int sample_rate_hz = 16000) {
  return GenerateNoise(kind, 3.0, MixSeed(seed, 0x6e6f697365), sample_rate_hz);
}

/// `clean` plus `noise` at `snr_db`, with speech power measured over the
/// clean signal's VAD-active samples.
inline AudioClip AddNoise(const AudioClip& clean, const AudioClip& noise, double snr_db,
                          const PipelineConfig& cfg) {
  const auto& cep = cfg.front_end.cepstra;
  const VadMask vad = DetectVoiceActivity(FrameSignal(clean, cep.frame_ms, cep.hop_ms, false),
                                          cfg.front_end.vad_floor_db, cfg.front_end.vad_dynamic_range_db);
  return MixNoiseAtSnr(clean, noise, snr_db, vad);
}

/// Writes noisy copies of the entries whose role is in `roles` under
/// out_dir/wav/<speaker>/<utt>.wav and returns a manifest pointing at them,
/// with the clean file kept as each entry's VAD reference. Other entries are
/// passed through unchanged.
inline CorpusManifest MixNoiseIntoManifest(const CorpusManifest& manifest, const AudioClip& noise,
                                           double snr_db, const std::set<Role>& roles,
                                           const PipelineConfig& cfg, const std::filesystem::path& out_dir) {
  CorpusManifest out = manifest;
  std::vector<std::size_t> todo;
  for (std::size_t i = 0; i < out.entries.size(); ++i)
    if (roles.count(out.entries[i].role)) todo.push_back(i);
  ParallelFor(todo.size(), cfg.jobs, [&](std::size_t k) {
    ManifestEntry& e = out.entries[todo[k]];
    const AudioClip clean = ReadWav(e.path);
    const std::filesystem::path rel = std::filesystem::path("wav") / e.speaker_id / (e.utterance_id + ".wav");
    WriteWav(AddNoise(clean, noise, snr_db, cfg), out_dir / rel);
    e.vad_path = std::filesystem::absolute(e.path);
    e.path = rel;
  });
  for (auto& e : out.entries)
    if (!roles.count(e.role)) e.path = std::filesystem::absolute(e.path);
  WriteFileAtomic(out_dir / "manifest.csv", SerializeManifest(out));
  for (auto& e : out.entries)
    if (roles.count(e.role)) e.path = out_dir / e.path;
  return out;
}

// ---------------------------------------------------------------------------
// Training

inline double ResolveGamma(const PipelineConfig& cfg, const Matrix& training, std::size_t dim) {
  switch (cfg.gamma_mode) {
    case GammaMode::kFixed: return cfg.gamma_value;
    case GammaMode::kAuto: return 1.0 / static_cast<double>(std::max<std::size_t>(dim, 1));
    case GammaMode::kScale: {
      double sum = 0.0, sq = 0.0;
      for (double v : training.data()) {
        sum += v;
        sq += v * v;
      }
      const double n = static_cast<double>(training.data().size());
      const double var = n > 0 ? sq / n - (sum / n) * (sum / n) : 0.0;
      return 1.0 / (static_cast<double>(std::max<std::size_t>(dim, 1)) * (var > 0.0 ? var : 1.0));
    }
  }
  return 1.0;
}

inline Matrix StackRows(const std::vector<const Matrix*>& parts, std::size_t cols) {
  Matrix out(0, cols);
  for (const Matrix* p : parts)
    for (std::size_t r = 0; r < p->rows(); ++r) out.AppendRow(p->row(r));
  return out;
}

/// In-memory training from per-utterance features: enroll utterances keyed
/// by speaker plus the pooled background cohort.
struct TrainingSet {
  std::map<std::string, std::vector<FeatureMatrix>> enroll;
  std::vector<FeatureMatrix> background;
};

struct TrainedSystem {
  std::optional<FeatureScaler> scaler;
  std::optional<PcaTransform> pca;
  double gamma = 0.0;
  std::map<std::string, SpeakerModel> models;
};

/// Global standardization and PCA fitted on pooled enroll + background
/// frames (each when enabled), then one SVM per enrolled speaker against the
/// background cohort.
inline TrainedSystem TrainSystem(const TrainingSet& set, const PipelineConfig& cfg) {
  if (set.enroll.empty()) Fail(ErrorCode::kEmptyClass, "no enrolled speakers");
  if (set.background.empty()) Fail(ErrorCode::kEmptyClass, "no background speakers");
  std::size_t input_dim = set.background.front().dim();
  std::string layout;
  for (std::size_t j = 0; j < set.background.front().labels.size(); ++j)
    layout += (j ? "," : "") + set.background.front().labels[j];

  std::vector<const Matrix*> pool;
  for (const auto& [spk, utts] : set.enroll)
    for (const auto& u : utts) pool.push_back(&u.data);
  for (const auto& u : set.background) pool.push_back(&u.data);
  for (const Matrix* m : pool)
    if (m->cols() != input_dim) Fail(ErrorCode::kDimMismatch, "training features differ in dimension");

  TrainedSystem sys;
  auto to_space = [&](const Matrix& m) {
    Matrix x = sys.scaler ? sys.scaler->Apply(m) : m;
    return sys.pca ? Project(*sys.pca, x) : x;
  };
  const Matrix pooled = StackRows(pool, input_dim);
  if (cfg.standardize) sys.scaler = FitScaler(pooled);
  if (cfg.pca_enabled) {
    const PcaTransform full = FitPca(sys.scaler ? sys.scaler->Apply(pooled) : pooled);
    const std::size_t d = ChooseDimension(
        full.eigenvalues, cfg.pca_retention,
        cfg.pca_fixed_d > 0 ? std::optional<std::size_t>(cfg.pca_fixed_d) : std::nullopt);
    sys.pca = full.Truncated(d);
  }

  std::vector<const Matrix*> bg_parts;
  for (const auto& u : set.background) bg_parts.push_back(&u.data);
  const Matrix negatives = to_space(StackRows(bg_parts, input_dim));
  const std::size_t dim = negatives.cols();

  std::vector<std::string> speakers;
  std::vector<Matrix> positives;
  for (const auto& [spk, utts] : set.enroll) {
    std::vector<const Matrix*> parts;
    for (const auto& u : utts) parts.push_back(&u.data);
    speakers.push_back(spk);
    positives.push_back(to_space(StackRows(parts, input_dim)));
  }
  {
    Matrix all = negatives;
    for (const auto& p : positives)
      for (std::size_t r = 0; r < p.rows(); ++r) all.AppendRow(p.row(r));
    sys.gamma = ResolveGamma(cfg, all, dim);
  }

  std::vector<SpeakerModel> trained(speakers.size());
  ParallelFor(speakers.size(), cfg.jobs, [&](std::size_t i) {
    SvmTrainOptions opts;
    opts.kernel = cfg.kernel == KernelKind::kRbf ? KernelSpec::Rbf(sys.gamma) : KernelSpec::Polynomial();
    opts.C = cfg.svm_c;
    opts.tol = cfg.svm_tol;
    opts.neg_ratio = cfg.neg_ratio;
    opts.max_iterations = cfg.max_iterations;
    opts.seed = MixSeed(cfg.seed, i + 1);
    SpeakerModel m = TrainSvm(positives[i], negatives, opts);
    m.speaker_id = speakers[i];
    m.scaler = sys.scaler;
    m.pca = sys.pca;
    m.cms = cfg.front_end.cms;
    m.input_dim = input_dim;
    m.feature_layout = FeatureKindName(cfg.features);
    trained[i] = std::move(m);
  });
  for (std::size_t i = 0; i < speakers.size(); ++i) sys.models[speakers[i]] = std::move(trained[i]);
  return sys;
}

inline TrainingSet LoadTrainingSet(const CorpusManifest& manifest, const std::filesystem::path& feat_dir) {
  TrainingSet set;
  for (const auto& e : manifest.entries) {
    if (e.role != Role::kEnroll && e.role != Role::kBackground) continue;
    const auto path = FeaturePath(feat_dir, e);
    if (!std::filesystem::exists(path))
      Fail(ErrorCode::kMissingFeatures, "no features for " + e.speaker_id + "/" + e.utterance_id +
                                            " at " + path.string());
    FeatureMatrix f = ReadFeatures(path);
    if (e.role == Role::kEnroll) set.enroll[e.speaker_id].push_back(std::move(f));
    else set.background.push_back(std::move(f));
  }
  return set;
}

inline std::filesystem::path ModelPath(const std::filesystem::path& dir, const std::string& speaker) {
  return dir / (speaker + ".model");
}

// ---------------------------------------------------------------------------
// Evaluation

struct TrialUtterance {
  std::string speaker_id;
  Role role = Role::kTest;
  FeatureMatrix features;
};

/// Genuine trials: each test utterance against its own speaker's model.
/// Impostor trials: each impostor utterance against every model.
inline std::vector<TrialScore> ScoreTrials(const std::map<std::string, SpeakerModel>& models,
                                           const std::vector<TrialUtterance>& utts, int jobs = 1) {
  struct Pending {
    const SpeakerModel* model;
    const TrialUtterance* utt;
    bool target;
  };
  std::vector<Pending> pending;
  for (const auto& u : utts) {
    if (u.role == Role::kTest) {
      auto it = models.find(u.speaker_id);
      if (it == models.end()) Fail(ErrorCode::kMissingModel, "no model for test speaker " + u.speaker_id);
      pending.push_back({&it->second, &u, true});
    } else if (u.role == Role::kImpostor) {
      for (const auto& [id, m] : models) pending.push_back({&m, &u, false});
    }
  }
  std::vector<TrialScore> trials(pending.size());
  ParallelFor(pending.size(), jobs, [&](std::size_t i) {
    const Pending& p = pending[i];
    trials[i] = {p.model->speaker_id, p.target, ScoreFeatures(*p.model, p.utt->features)};
  });
  return trials;
}

}  // namespace spkver

#endif  // SPKVER_PIPELINE_HPP_
