// tools/spkver_cli.cpp

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


// Command-line driver: corpus generation, feature extraction, noise mixing,
// enrollment, verification and evaluation.
//
// Exit codes: 0 success / accept, 1 reject, 2 usage or data error.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "spkver/pipeline.hpp"

namespace spkver {
namespace {

namespace fs = std::filesystem;

struct GlobalOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
  std::vector<std::string> overrides;  // key=value
};

PipelineConfig ResolveConfig(const GlobalOptions& g) {
  PipelineConfig cfg = g.config_path.empty() ? PipelineConfig{} : LoadConfig(g.config_path);
  for (const auto& kv : g.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) Fail(ErrorCode::kConfigError, "--set expects key=value, got '" + kv + "'");
    SetConfigValue(cfg, Trim(kv.substr(0, eq)), Trim(kv.substr(eq + 1)));
  }
  if (g.seed) SetConfigValue(cfg, "seed", std::to_string(*g.seed));
  if (g.jobs) SetConfigValue(cfg, "jobs", std::to_string(*g.jobs));
  return cfg;
}

// ---------------------------------------------------------------------------

struct GenCorpusArgs {
  std::string out;
  CorpusSpec spec;
  double duration_s = 1.0;
};

int GenCorpus(const GenCorpusArgs& a, const PipelineConfig& cfg) {
  CorpusSpec spec = a.spec;
  spec.seed = cfg.seed;
  spec.utterance.duration_s = a.duration_s;
  const GeneratedCorpus corpus = GenerateCorpus(spec);
  WriteCorpus(corpus, a.out);
  std::printf("wrote %zu utterances from %zu speakers to %s\n", corpus.clips.size(),
              corpus.profiles.size(), a.out.c_str());
  return 0;
}

struct ExtractArgs {
  std::string manifest, out, features;
};

int Extract(const ExtractArgs& a, PipelineConfig cfg) {
  if (!a.features.empty()) cfg.features = ParseFeatureKind(a.features);
  const CorpusManifest m = ReadManifest(a.manifest);
  const ExtractReport rep = ExtractCorpus(m, cfg, a.out);
  for (const auto& f : rep.failures) std::fprintf(stderr, "ERROR: %s\n", f.c_str());
  std::printf("extracted %zu of %zu utterances (%s, dims=%d)\n", rep.written, m.entries.size(),
              FeatureKindName(cfg.features),
              FeatureDim(cfg.features, cfg.front_end.cepstra, cfg.front_end.lpc_order));
  return rep.failures.empty() ? 0 : 2;
}

struct MixArgs {
  std::string in, out, manifest, noise = "babble", noise_wav;
  double snr_db = 0.0;
  std::vector<std::string> roles{"test", "impostor"};
};

int MixNoise(const MixArgs& a, const PipelineConfig& cfg) {
  if (a.in.empty() == a.manifest.empty())
    Fail(ErrorCode::kInvalidArgument, "give exactly one of --in or --manifest");
  const int rate = a.in.empty() ? 16000 : ReadWav(a.in).sample_rate_hz;
  const AudioClip noise =
      a.noise_wav.empty() ? ConditionNoise(ParseNoiseKind(a.noise), cfg.seed, rate) : ReadWav(a.noise_wav);
  if (!a.in.empty()) {
    WriteWav(AddNoise(ReadWav(a.in), noise, a.snr_db, cfg), a.out);
    return 0;
  }
  std::set<Role> roles;
  for (const auto& r : a.roles) roles.insert(ParseRole(r));
  const CorpusManifest noisy = MixNoiseIntoManifest(ReadManifest(a.manifest), noise, a.snr_db, roles, cfg, a.out);
  std::size_t mixed = 0;
  for (const auto& e : noisy.entries) mixed += roles.count(e.role);
  std::printf("mixed %zu utterances at %g dB into %s\n", mixed, a.snr_db, a.out.c_str());
  return 0;
}

struct TrainArgs {
  std::string manifest, features, out;
};

int Train(const TrainArgs& a, const PipelineConfig& cfg) {
  const CorpusManifest m = ReadManifest(a.manifest);
  const TrainedSystem sys = TrainSystem(LoadTrainingSet(m, a.features), cfg);
  fs::create_directories(a.out);
  for (const auto& [spk, model] : sys.models) WriteModel(model, ModelPath(a.out, spk));
  WriteFileAtomic(fs::path(a.out) / "train.cfg", EmitConfig(cfg));
  std::size_t unconverged = 0;
  for (const auto& [spk, model] : sys.models) unconverged += !model.converged;
  std::printf("trained %zu models (dim=%zu, gamma=%.6g)\n", sys.models.size(),
              sys.models.begin()->second.dim(), sys.gamma);
  if (unconverged) std::fprintf(stderr, "WARNING: %zu models hit the SMO iteration cap\n", unconverged);
  return 0;
}

struct VerifyArgs {
  std::string model, features;
  std::optional<double> threshold;
};

int Verify(const VerifyArgs& a) {
  const SpeakerModel model = ReadModel(a.model);
  const double score = ScoreFeatures(model, ReadFeatures(a.features));
  std::printf("%.6f\n", score);
  if (!a.threshold) return 0;
  const bool accept = score >= *a.threshold;
  std::printf("%s\n", accept ? "accept" : "reject");
  return accept ? 0 : 1;
}

struct EvaluateArgs {
  std::string manifest, models, features, out, label;
};

int Evaluate(const EvaluateArgs& a, const PipelineConfig& cfg) {
  const CorpusManifest m = ReadManifest(a.manifest);
  std::map<std::string, SpeakerModel> models;
  for (const auto& spk : m.SpeakersWithRole(Role::kEnroll)) {
    const fs::path p = ModelPath(a.models, spk);
    if (!fs::exists(p)) Fail(ErrorCode::kMissingModel, "no model for " + spk + " at " + p.string());
    models[spk] = ReadModel(p);
  }
  if (models.empty()) Fail(ErrorCode::kMissingModel, "manifest has no enrolled speakers");
  std::vector<TrialUtterance> utts;
  for (const auto& e : m.entries)
    if (e.role == Role::kTest || e.role == Role::kImpostor)
      utts.push_back({e.speaker_id, e.role, ReadFeatures(FeaturePath(a.features, e))});
  const std::vector<TrialScore> trials = ScoreTrials(models, utts, cfg.jobs);
  const DetCurve curve = EvaluateTrials(trials);

  const std::string prefix = a.out;
  WriteFileAtomic(prefix + ".trials.csv", SerializeTrials(trials));
  WriteFileAtomic(prefix + ".det.csv", SerializeDetCsv(curve));
  WriteDetSvg({{a.label.empty() ? std::string(FeatureKindName(cfg.features)) : a.label, curve}},
              prefix + ".det.svg");
  std::size_t n_target = 0;
  for (const auto& t : trials) n_target += t.is_target;
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "trials = %zu\ntarget_trials = %zu\nimpostor_trials = %zu\neer_percent = %.4f\n"
                "eer_threshold = %.6f\n",
                trials.size(), n_target, trials.size() - n_target, 100.0 * curve.eer, curve.eer_threshold);
  WriteFileAtomic(prefix + ".summary.txt", buf);
  std::printf("EER = %.4f%% over %zu trials\n", 100.0 * curve.eer, trials.size());
  return 0;
}

int Main(int argc, char** argv) {
  CLI::App app{"spkver: text-independent speaker verification toolkit"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  GlobalOptions g;
  app.add_option("--config", g.config_path, "key = value config file")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "random seed (overrides config)");
  app.add_option("--jobs", g.jobs, "worker threads (overrides config)")->check(CLI::Range(1, 256));
  app.add_option("--set", g.overrides, "config override key=value (repeatable)");

  GenCorpusArgs gen;
  auto* gen_cmd = app.add_subcommand("gen-corpus", "write a synthetic corpus and its manifest");
  gen_cmd->add_option("--out", gen.out, "output directory")->required();
  gen_cmd->add_option("--speakers", gen.spec.n_speakers, "enrolled target speakers")->capture_default_str();
  gen_cmd->add_option("--utts", gen.spec.utts_per_speaker, "utterances per target")->capture_default_str();
  gen_cmd->add_option("--test-per-speaker", gen.spec.test_per_speaker, "held-out test utterances per target")
      ->capture_default_str();
  gen.spec.n_background = 5;
  gen.spec.n_impostors = 5;
  gen_cmd->add_option("--background", gen.spec.n_background, "background cohort speakers")->capture_default_str();
  gen_cmd->add_option("--impostors", gen.spec.n_impostors, "impostor speakers")->capture_default_str();
  gen_cmd->add_option("--other-utts", gen.spec.utts_per_other, "utterances per background/impostor speaker")
      ->capture_default_str();
  gen_cmd->add_option("--duration", gen.duration_s, "utterance length in seconds")
      ->check(CLI::Range(0.1, 60.0))
      ->capture_default_str();

  ExtractArgs ext;
  auto* ext_cmd = app.add_subcommand("extract", "write one feature file per manifest entry");
  ext_cmd->add_option("--manifest", ext.manifest)->required()->check(CLI::ExistingFile);
  ext_cmd->add_option("--out", ext.out, "feature directory")->required();
  ext_cmd->add_option("--features", ext.features, "mfcc | lsf | fused (overrides config)");

  MixArgs mix;
  auto* mix_cmd = app.add_subcommand("mix-noise", "add noise at a target SNR to a file or a manifest");
  mix_cmd->add_option("--in", mix.in, "clean wav")->check(CLI::ExistingFile);
  mix_cmd->add_option("--manifest", mix.manifest, "clean manifest")->check(CLI::ExistingFile);
  mix_cmd->add_option("--out", mix.out, "output wav (file mode) or directory (manifest mode)")->required();
  mix_cmd->add_option("--snr", mix.snr_db, "target SNR in dB")->required();
  mix_cmd->add_option("--noise", mix.noise, "babble | subway | white")->capture_default_str();
  mix_cmd->add_option("--noise-wav", mix.noise_wav, "use this recording instead")->check(CLI::ExistingFile);
  mix_cmd->add_option("--roles", mix.roles, "manifest roles to corrupt")->capture_default_str();

  TrainArgs tr;
  auto* tr_cmd = app.add_subcommand("train", "enroll one model per target speaker");
  tr_cmd->add_option("--manifest", tr.manifest)->required()->check(CLI::ExistingFile);
  tr_cmd->add_option("--features", tr.features, "feature directory")->required();
  tr_cmd->add_option("--out", tr.out, "model directory")->required();

  VerifyArgs ver;
  auto* ver_cmd = app.add_subcommand("verify", "score one feature file against one model");
  ver_cmd->add_option("--model", ver.model)->required();
  ver_cmd->add_option("--features", ver.features, "feature file")->required();
  ver_cmd->add_option("--threshold", ver.threshold, "accept when score >= threshold");

  EvaluateArgs ev;
  auto* ev_cmd = app.add_subcommand("evaluate", "score all trials, write trials/DET/SVG/summary");
  ev_cmd->add_option("--manifest", ev.manifest)->required()->check(CLI::ExistingFile);
  ev_cmd->add_option("--models", ev.models, "model directory")->required();
  ev_cmd->add_option("--features", ev.features, "feature directory")->required();
  ev_cmd->add_option("--out", ev.out, "output prefix")->required();
  ev_cmd->add_option("--label", ev.label, "curve name in the DET plot");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    const PipelineConfig cfg = ResolveConfig(g);
    if (*gen_cmd) return GenCorpus(gen, cfg);
    if (*ext_cmd) return Extract(ext, cfg);
    if (*mix_cmd) return MixNoise(mix, cfg);
    if (*tr_cmd) return Train(tr, cfg);
    if (*ver_cmd) return Verify(ver);
    if (*ev_cmd) return Evaluate(ev, cfg);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "ERROR: %s\n", e.what());
    return 2;
  }
  return 2;
}

}  // namespace
}  // namespace spkver

int main(int argc, char** argv) { return spkver::Main(argc, argv); }
