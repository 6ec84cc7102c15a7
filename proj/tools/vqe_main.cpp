// Copyright 2026 The VQE Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>

#include "vqe/checkpoint.hpp"
#include "vqe/eval.hpp"
#include "vqe/kv_config.hpp"
#include "vqe/manifest.hpp"
#include "vqe/resample.hpp"
#include "vqe/split.hpp"
#include "vqe/svm.hpp"
#include "vqe/synth.hpp"
#include "vqe/train.hpp"
#include "vqe/warp.hpp"

namespace {

using namespace vqe;

KvConfig make_registry() {
  KvConfig cfg;
  cfg.register_key("data.manifest", "", "input manifest (split, embed)");
  cfg.register_key("data.train_manifest", "", "training-split manifest (train, finetune, eval svm fit)");
  cfg.register_key("data.val_manifest", "", "validation manifest (eval)");

  cfg.register_key("synth.n_speakers", "200", "synthetic corpus size");
  cfg.register_key("synth.seed", "0", "synthesis seed");
  cfg.register_key("synth.banks", "false", "also write ir/ and noise/ fixture banks");
  cfg.register_key("synth.n_irs", "8", "impulse responses when synth.banks");
  cfg.register_key("synth.n_noises", "6", "noise beds when synth.banks");

  cfg.register_key("split.train_fraction", "0.7", "speaker fraction on the train side");
  cfg.register_key("split.seed", "0", "split shuffle seed");

  cfg.register_key("warp.ir_dir", "", "directory of impulse-response WAVs");
  cfg.register_key("warp.noise_dir", "", "directory of noise WAVs");
  cfg.register_key("warp.partition_seed", "0", "train/eval bank partition seed");
  cfg.register_key("warp.skip_prob", "0.5", "per-method skip probability");
  cfg.register_key("warp.snr_low", "0", "additive-noise SNR range low (dB)");
  cfg.register_key("warp.snr_high", "15", "additive-noise SNR range high (dB)");
  cfg.register_key("warp.pitch_low", "-200", "pitch-shift range low (cents)");
  cfg.register_key("warp.pitch_high", "200", "pitch-shift range high (cents)");

  cfg.register_key("model.total_layers", "15", "residual layers N");
  cfg.register_key("model.blocks", "5", "residual blocks m (N divisible by m)");
  cfg.register_key("model.channels", "32", "residual channels");
  cfg.register_key("model.embedding_dim", "256", "embedding dimension");
  cfg.register_key("model.classifier_hidden", "128", "classifier hidden width");
  cfg.register_key("model.leaky_slope", "0.4", "leaky-ReLU negative slope");

  cfg.register_key("train.M", "16", "samples per class per batch");
  cfg.register_key("train.steps", "50000", "training steps");
  cfg.register_key("train.lr", "0.001", "SGD learning rate");
  cfg.register_key("train.lambda", "0.5", "classification-loss weight in the combined loss");
  cfg.register_key("train.seed", "250", "training seed");
  cfg.register_key("train.data_warping", "true", "DW ablation flag");
  cfg.register_key("train.classification_loss", "true", "CLL ablation flag");
  cfg.register_key("train.contrastive_loss", "true", "CNL ablation flag");
  cfg.register_key("train.checkpoint_interval", "1000", "steps between checkpoints");
  cfg.register_key("train.threads", "0", "worker threads (0 = hardware)");
  cfg.register_key("train.ge2e_exclude_self", "false", "classic GE2E centroid variant");

  cfg.register_key("finetune.checkpoint", "", "checkpoint to fine-tune");
  cfg.register_key("finetune.steps", "2500", "fine-tuning steps");

  cfg.register_key("eval.checkpoint", "", "checkpoint to evaluate");
  cfg.register_key("eval.kmeans_seed", "0", "k-means seed");
  cfg.register_key("eval.kmeans_restarts", "10", "k-means restarts");
  cfg.register_key("eval.average_probabilities", "false",
                   "average probabilities instead of log-probabilities");
  cfg.register_key("eval.degradation_seed", "0", "degradation draw seed");
  cfg.register_key("eval.an_snr_db", "10", "SNR of the additive-noise condition");

  cfg.register_key("embed.checkpoint", "", "checkpoint for embedding export");
  cfg.register_key("preview.input", "", "input WAV for warp-preview");
  cfg.register_key("preview.seed", "0", "warp-preview seed");
  return cfg;
}

EncoderConfig encoder_from(const KvConfig& cfg) {
  EncoderConfig model;
  model.total_layers = int(cfg.get_int("model.total_layers"));
  model.block_count = int(cfg.get_int("model.blocks"));
  model.residual_channels = int(cfg.get_int("model.channels"));
  model.embedding_dim = int(cfg.get_int("model.embedding_dim"));
  model.classifier_hidden = int(cfg.get_int("model.classifier_hidden"));
  model.leaky_slope = cfg.get_double("model.leaky_slope");
  return model;
}

WarpPolicy policy_from(const KvConfig& cfg) {
  WarpPolicy policy;
  policy.skip_prob = cfg.get_double("warp.skip_prob");
  policy.snr_range_db[0] = cfg.get_double("warp.snr_low");
  policy.snr_range_db[1] = cfg.get_double("warp.snr_high");
  policy.pitch_range_cents[0] = cfg.get_double("warp.pitch_low");
  policy.pitch_range_cents[1] = cfg.get_double("warp.pitch_high");
  return policy;
}

TrainConfig train_config_from(const KvConfig& cfg) {
  TrainConfig tc;
  tc.model = encoder_from(cfg);
  tc.warp = policy_from(cfg);
  tc.samples_per_class = int(cfg.get_int("train.M"));
  tc.steps = cfg.get_uint("train.steps");
  tc.learning_rate = cfg.get_double("train.lr");
  tc.lambda = cfg.get_double("train.lambda");
  tc.seed = cfg.get_uint("train.seed");
  tc.ablation.data_warping = cfg.get_bool("train.data_warping");
  tc.ablation.classification_loss = cfg.get_bool("train.classification_loss");
  tc.ablation.contrastive_loss = cfg.get_bool("train.contrastive_loss");
  tc.checkpoint_interval = cfg.get_uint("train.checkpoint_interval");
  tc.threads = int(cfg.get_int("train.threads"));
  tc.ge2e_exclude_self = cfg.get_bool("train.ge2e_exclude_self");
  return tc;
}

WarpBank bank_from(const KvConfig& cfg, bool required) {
  const std::string ir_dir = cfg.get("warp.ir_dir");
  const std::string noise_dir = cfg.get("warp.noise_dir");
  if (ir_dir.empty() || noise_dir.empty()) {
    if (required)
      throw std::runtime_error("warp.ir_dir and warp.noise_dir must be set for this command");
    return {};
  }
  return make_warp_bank(ir_dir, noise_dir, cfg.get_uint("warp.partition_seed"), kWorkingRate);
}

std::string require(const KvConfig& cfg, const std::string& key) {
  const std::string v = cfg.get(key);
  if (v.empty()) throw std::runtime_error("config key '" + key + "' must be set");
  return v;
}

SvmClassifier fit_fallback(const Model<float>& model, const KvConfig& cfg,
                           const PredictOptions& popt) {
  const std::filesystem::path train_manifest = require(cfg, "data.train_manifest");
  const auto records = load_manifest(train_manifest);
  std::vector<std::vector<float>> embeddings;
  std::vector<Label> labels;
  PredictOptions emb_opt = popt;
  emb_opt.mode = PredictionMode::logprob_mean;  // embeddings only; no classifier needed
  for (const auto& r : records) {
    const AudioClip clip = resample(read_wav(resolve_audio_path(train_manifest, r)));
    embeddings.push_back(predict_recording(model, clip, emb_opt).embedding);
    labels.push_back(r.label);
  }
  return fit_embedding_classifier(embeddings, labels);
}

int run_synth(const KvConfig& cfg, const std::filesystem::path& out_dir) {
  const int n = int(cfg.get_int("synth.n_speakers"));
  const uint64_t seed = cfg.get_uint("synth.seed");
  const auto records = build_synthetic_corpus(n, out_dir, seed);
  std::cout << "synth: wrote " << records.size() << " recordings under " << out_dir.string()
            << " (manifest.jsonl)\n";
  if (cfg.get_bool("synth.banks")) {
    build_warp_bank_fixtures(out_dir, int(cfg.get_int("synth.n_irs")),
                             int(cfg.get_int("synth.n_noises")), derive_seed(seed, 0xBA17),
                             kWorkingRate);
    std::cout << "synth: wrote warp banks under " << (out_dir / "ir").string() << " and "
              << (out_dir / "noise").string() << "\n";
  }
  return 0;
}

int run_split(const KvConfig& cfg, const std::filesystem::path& out_dir) {
  const std::filesystem::path manifest = require(cfg, "data.manifest");
  const auto records = load_manifest(manifest);
  SplitSpec spec;
  spec.train_fraction = cfg.get_double("split.train_fraction");
  spec.seed = cfg.get_uint("split.seed");
  auto [train_side, val_side] = split_speaker_disjoint(records, spec);

  // Keep audio paths valid from the new manifest location.
  const auto base = std::filesystem::absolute(manifest).parent_path();
  auto absolutize = [&](std::vector<ManifestRecord>& recs) {
    for (auto& r : recs)
      if (!std::filesystem::path(r.path).is_absolute()) r.path = (base / r.path).string();
  };
  absolutize(train_side);
  absolutize(val_side);

  std::filesystem::create_directories(out_dir);
  save_manifest(out_dir / "train_manifest.jsonl", train_side,
                {"speaker-disjoint split, train side; fraction " +
                 std::to_string(spec.train_fraction) + ", seed " + std::to_string(spec.seed)});
  save_manifest(out_dir / "val_manifest.jsonl", val_side,
                {"speaker-disjoint split, validation side; fraction " +
                 std::to_string(spec.train_fraction) + ", seed " + std::to_string(spec.seed)});
  std::cout << "split: " << train_side.size() << " train / " << val_side.size()
            << " validation records -> " << out_dir.string() << "\n";
  return 0;
}

int run_train(const KvConfig& cfg, const std::filesystem::path& out_dir) {
  const std::filesystem::path manifest = require(cfg, "data.train_manifest");
  const TrainConfig tc = train_config_from(cfg);
  const auto records = load_manifest(manifest);
  const TrainDataset data = TrainDataset::from_manifest(manifest, records);
  const WarpBank bank = bank_from(cfg, tc.ablation.data_warping);

  std::filesystem::create_directories(out_dir);
  if (!bank.ir_train.empty() || !bank.noise_train.empty()) save_bank_partition(out_dir, bank);
  std::ofstream log(out_dir / "train_log.csv", std::ios::trunc);
  log << "step,ge2e,nll,combined,omega,bias\n";
  TrainHooks hooks;
  hooks.log = &log;
  hooks.checkpoint_dir = out_dir;
  const Checkpoint final_ckpt = train(data, bank, tc, hooks);
  std::cout << "train: finished at step " << final_ckpt.step << "; final checkpoint "
            << (out_dir / "final.ckpt").string() << "\n";
  return 0;
}

int run_finetune(const KvConfig& cfg, const std::filesystem::path& out_dir) {
  const Checkpoint ckpt = load_checkpoint(require(cfg, "finetune.checkpoint"));
  const std::filesystem::path manifest = require(cfg, "data.train_manifest");
  const auto records = load_manifest(manifest);
  const TrainDataset data = TrainDataset::from_manifest(manifest, records);
  const WarpBank bank = bank_from(cfg, ckpt.config.ablation.data_warping);

  std::filesystem::create_directories(out_dir);
  std::ofstream log(out_dir / "train_log.csv", std::ios::trunc);
  log << "step,ge2e,nll,combined,omega,bias\n";
  TrainHooks hooks;
  hooks.log = &log;
  hooks.checkpoint_dir = out_dir;
  const Checkpoint out = fine_tune(ckpt, data, bank, cfg.get_uint("finetune.steps"), hooks);
  std::cout << "finetune: finished at step " << out.step << "; final checkpoint "
            << (out_dir / "final.ckpt").string() << "\n";
  return 0;
}

int run_eval(const KvConfig& cfg, const std::filesystem::path& out_dir,
             const std::vector<std::string>& conditions, const std::string& mode) {
  const Checkpoint ckpt = load_checkpoint(require(cfg, "eval.checkpoint"));
  const Model<float> model(ckpt.config.model, ckpt.params);
  const std::filesystem::path manifest = require(cfg, "data.val_manifest");
  const auto records = load_manifest(manifest);

  EvaluateOptions opt;
  opt.predict.mode =
      mode == "embedding_mean" ? PredictionMode::embedding_mean : PredictionMode::logprob_mean;
  opt.predict.average_probabilities = cfg.get_bool("eval.average_probabilities");
  opt.degradation_seed = cfg.get_uint("eval.degradation_seed");
  opt.kmeans_seed = cfg.get_uint("eval.kmeans_seed");
  opt.kmeans_restarts = int(cfg.get_int("eval.kmeans_restarts"));
  opt.an_snr_db = cfg.get_double("eval.an_snr_db");

  std::optional<SvmClassifier> fallback;
  if (opt.predict.mode == PredictionMode::embedding_mean)
    fallback = fit_fallback(model, cfg, opt.predict);

  const bool needs_bank =
      std::any_of(conditions.begin(), conditions.end(), [](const std::string& c) {
        return c != "clean";
      });
  const WarpBank bank = bank_from(cfg, needs_bank);

  std::filesystem::create_directories(out_dir);
  for (const auto& cond_name : conditions) {
    const EvalCondition cond = eval_condition_from_string(cond_name);
    std::vector<std::vector<float>> embeddings;
    std::vector<DegradationLogEntry> dlog;
    const EvalReport report =
        evaluate_corpus(model, manifest, records, bank, cond, opt,
                        fallback ? &*fallback : nullptr, &embeddings, &dlog);
    {
      std::ofstream os(out_dir / ("report_" + cond_name + ".json"), std::ios::trunc);
      write_report(os, report);
    }
    if (cond != EvalCondition::clean) {
      std::ofstream os(out_dir / ("degradation_" + cond_name + ".csv"), std::ios::trunc);
      write_degradation_log(os, dlog);
    }
    std::cout << "eval[" << cond_name << "]: balanced_accuracy=" << report.balanced_accuracy
              << " ami=" << report.ami << " n=" << report.n_recordings << "\n";
  }
  return 0;
}

int run_embed(const KvConfig& cfg, const std::filesystem::path& out_dir) {
  const Checkpoint ckpt = load_checkpoint(require(cfg, "embed.checkpoint"));
  const Model<float> model(ckpt.config.model, ckpt.params);
  const std::filesystem::path manifest = require(cfg, "data.manifest");
  const auto records = load_manifest(manifest);

  std::vector<std::vector<float>> embeddings;
  for (const auto& r : records) {
    const AudioClip clip = resample(read_wav(resolve_audio_path(manifest, r)));
    embeddings.push_back(predict_recording(model, clip).embedding);
  }
  std::filesystem::create_directories(out_dir);
  export_embeddings(embeddings, records, out_dir / "embeddings.csv");
  const auto proj = project_2d(embeddings);
  std::ofstream os(out_dir / "projection.csv", std::ios::trunc);
  os << "speaker_id,label,gender,x,y\n";
  for (size_t i = 0; i < records.size(); ++i) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), ",%.9g,%.9g", proj[i][0], proj[i][1]);
    os << records[i].speaker_id << "," << to_string(records[i].label) << ","
       << to_string(records[i].gender) << buf << "\n";
  }
  std::cout << "embed: wrote " << (out_dir / "embeddings.csv").string() << " and projection.csv ("
            << records.size() << " rows)\n";
  return 0;
}

int run_warp_preview(const KvConfig& cfg, const std::filesystem::path& out_dir) {
  const AudioClip input = resample(read_wav(require(cfg, "preview.input")));
  const WarpBank bank = bank_from(cfg, true);
  Rng rng(cfg.get_uint("preview.seed"));
  WarpLogEntry entry;
  const AudioClip warped = apply_random_warps(input, bank, policy_from(cfg), rng, &entry);

  std::filesystem::create_directories(out_dir);
  write_wav(out_dir / "warped.wav", warped);
  std::ofstream os(out_dir / "warp_log.csv", std::ios::trunc);
  os << "ir_file,gaussian_snr_db,noise_file,noise_snr_db,noise_offset,pitch_cents\n";
  os << entry.ir_file.value_or("") << ",";
  if (entry.gaussian_snr_db) os << *entry.gaussian_snr_db;
  os << "," << entry.noise_file.value_or("") << ",";
  if (entry.noise_snr_db) os << *entry.noise_snr_db;
  os << "," << entry.noise_offset << ",";
  if (entry.pitch_cents) os << *entry.pitch_cents;
  os << "\n";
  std::cout << "warp-preview: wrote " << (out_dir / "warped.wav").string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"vqe: vocal-quality embeddings for dysphonic voice detection"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "out", mode = "logprob_mean";
  std::vector<std::string> overrides, conditions;
  std::optional<int64_t> seed;

  app.add_option("--config", config_path, "key = value config file")->expected(1);
  app.add_option("--set", overrides, "override a config key (repeatable), key=value");
  app.add_option("--seed", seed, "override the active command's seed");
  app.add_option("--out-dir", out_dir, "output directory");

  auto* synth = app.add_subcommand("synth", "build the synthetic phonation corpus");
  auto* split = app.add_subcommand("split", "speaker-disjoint train/validation split");
  auto* train_cmd = app.add_subcommand("train", "train a model");
  auto* finetune = app.add_subcommand("finetune", "continue a checkpoint on a new corpus");
  auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint");
  auto* embed = app.add_subcommand("embed", "export embeddings and a 2-D projection");
  auto* preview = app.add_subcommand("warp-preview", "write one warped copy of an input");

  eval_cmd->add_option("--condition", conditions, "clean|an|ir|an_ir (repeatable)")
      ->check(CLI::IsMember({"clean", "an", "ir", "an_ir"}));
  eval_cmd->add_option("--mode", mode, "logprob_mean|embedding_mean")
      ->check(CLI::IsMember({"logprob_mean", "embedding_mean"}));

  CLI11_PARSE(app, argc, argv);

  try {
    KvConfig cfg = make_registry();
    if (!config_path.empty()) cfg.load_file(config_path);
    cfg.apply_overrides(overrides);
    if (seed) {
      const std::string s = std::to_string(*seed);
      if (synth->parsed()) cfg.set("synth.seed", s);
      if (split->parsed()) cfg.set("split.seed", s);
      if (train_cmd->parsed() || finetune->parsed()) cfg.set("train.seed", s);
      if (eval_cmd->parsed()) cfg.set("eval.degradation_seed", s);
      if (preview->parsed()) cfg.set("preview.seed", s);
    }
    if (conditions.empty()) conditions = {"clean"};

    if (synth->parsed()) return run_synth(cfg, out_dir);
    if (split->parsed()) return run_split(cfg, out_dir);
    if (train_cmd->parsed()) return run_train(cfg, out_dir);
    if (finetune->parsed()) return run_finetune(cfg, out_dir);
    if (eval_cmd->parsed()) return run_eval(cfg, out_dir, conditions, mode);
    if (embed->parsed()) return run_embed(cfg, out_dir);
    if (preview->parsed()) return run_warp_preview(cfg, out_dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
