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

#include "vqe/train.hpp"

#include <omp.h>

#include <cmath>
#include <iostream>
#include <limits>
#include <stdexcept>

#include "vqe/resample.hpp"

namespace vqe {

std::vector<std::string> TrainConfig::validate() const {
  model.validate();
  warp.validate();
  if (samples_per_class < 1) throw std::invalid_argument("TrainConfig: M must be >= 1");
  if (!(learning_rate > 0.0))
    throw std::invalid_argument("TrainConfig: learning_rate must be > 0");
  if (lambda < 0.0 || lambda > 1.0)
    throw std::invalid_argument("TrainConfig: lambda must be in [0, 1]");
  if (!ablation.classification_loss && !ablation.contrastive_loss)
    throw std::invalid_argument(
        "TrainConfig: at least one of classification_loss/contrastive_loss must be enabled");
  std::vector<std::string> warnings;
  if (model.block_count < 3)
    warnings.push_back("block_count " + std::to_string(model.block_count) +
                       " is below the recommended minimum of 3");
  return warnings;
}

TrainDataset TrainDataset::from_clips(std::vector<ManifestRecord> records,
                                      std::vector<AudioClip> clips) {
  if (records.size() != clips.size())
    throw std::invalid_argument("TrainDataset: records/clips length mismatch");
  TrainDataset data;
  data.records = std::move(records);
  data.clips = std::move(clips);
  for (size_t i = 0; i < data.records.size(); ++i) {
    if (data.clips[i].sample_rate != kWorkingRate) data.clips[i] = resample(data.clips[i]);
    const auto& r = data.records[i];
    data.groups[size_t(r.gender) * 2 + size_t(r.label)].push_back(i);
  }
  return data;
}

TrainDataset TrainDataset::from_manifest(const std::filesystem::path& manifest_path,
                                         const std::vector<ManifestRecord>& records) {
  std::vector<AudioClip> clips;
  clips.reserve(records.size());
  for (const auto& r : records) clips.push_back(read_wav(resolve_audio_path(manifest_path, r)));
  return from_clips(records, std::move(clips));
}

BatchIndices sample_batch(const TrainDataset& data, int samples_per_class, Rng& rng) {
  if (samples_per_class < 1) throw std::invalid_argument("sample_batch: M must be >= 1");
  const size_t m = size_t(samples_per_class);
  std::vector<Gender> candidates;
  for (Gender g : {Gender::female, Gender::male})
    if (data.group(g, Label::dysphonic).size() >= m && data.group(g, Label::healthy).size() >= m)
      candidates.push_back(g);
  if (candidates.empty())
    throw std::runtime_error(
        "sample_batch: no gender has at least M=" + std::to_string(samples_per_class) +
        " records of each label");
  const Gender gender =
      candidates.size() == 1 ? candidates[0] : candidates[size_t(rng.next_below(2))];

  auto draw = [&](Label l) {
    std::vector<size_t> pool = data.group(gender, l);
    // Partial Fisher-Yates: the first m entries are a uniform sample without
    // replacement.
    for (size_t i = 0; i < m; ++i) {
      const size_t j = i + size_t(rng.next_below(pool.size() - i));
      std::swap(pool[i], pool[j]);
    }
    pool.resize(m);
    return pool;
  };
  BatchIndices batch;
  batch.gender = gender;
  batch.dysphonic = draw(Label::dysphonic);
  batch.healthy = draw(Label::healthy);
  return batch;
}

namespace {

int resolve_threads(int requested) {
  return requested > 0 ? requested : omp_get_max_threads();
}

// Shared forward (and optional backward) over a prepared batch, ordered M
// dysphonic then M healthy. Per-patch gradients are reduced in patch order,
// so results do not depend on the thread count.
template <typename T>
StepStats batch_pass(const Model<T>& model, const std::vector<std::vector<T>>& patches, int bins,
                     const AblationFlags& flags, double lambda, bool exclude_self,
                     BatchWorkspace<T>& ws, int threads, bool with_gradients) {
  const size_t n = patches.size();
  if (n == 0 || n % 2 != 0)
    throw std::invalid_argument("batch_pass: need an even patch count (M per class)");
  const size_t m = n / 2;
  const size_t pcount = model.param_count();
  const int dim = model.config().embedding_dim;

  ws.caches.resize(n);
  if (with_gradients) {
    ws.grad_bufs.resize(n);
    for (auto& g : ws.grad_bufs) g.assign(pcount, T(0));
    ws.grads.assign(pcount, T(0));
  }

  const int nt = std::max(1, std::min<int>(resolve_threads(threads), int(n)));
  std::exception_ptr error;
#pragma omp parallel for schedule(static) num_threads(nt)
  for (size_t i = 0; i < n; ++i) {
    try {
      model.encode(patches[i].data(), kPatchFrames, bins, ws.caches[i]);
      if (flags.classification_loss)
        model.classify(std::span<const T>(ws.caches[i].embedding), ws.caches[i]);
    } catch (...) {
#pragma omp critical
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);

  StepStats stats;
  stats.omega = model.omega();
  stats.sim_bias = model.sim_bias();
  stats.ge2e = std::numeric_limits<double>::quiet_NaN();
  stats.nll = std::numeric_limits<double>::quiet_NaN();

  const SimilarityParams sp{model.omega(), model.sim_bias()};
  const Ge2eOptions opt{exclude_self};

  BatchEmbeddings batch;
  Ge2eGradients gg;
  if (flags.contrastive_loss) {
    batch.group_size = m;
    batch.dim = size_t(dim);
    batch.dysphonic.resize(m * size_t(dim));
    batch.healthy.resize(m * size_t(dim));
    for (size_t i = 0; i < m; ++i)
      for (int k = 0; k < dim; ++k) {
        batch.dysphonic[i * size_t(dim) + size_t(k)] = double(ws.caches[i].embedding[size_t(k)]);
        batch.healthy[i * size_t(dim) + size_t(k)] =
            double(ws.caches[m + i].embedding[size_t(k)]);
      }
    if (with_gradients) {
      gg = ge2e_loss_gradients(batch, sp, opt);
      stats.ge2e = gg.value;
    } else {
      stats.ge2e = ge2e_loss(batch, sp, opt);
    }
  }

  // Labels by construction: first half dysphonic (1), second half healthy (0).
  std::vector<int> labels(n);
  for (size_t i = 0; i < n; ++i) labels[i] = i < m ? 1 : 0;
  std::vector<double> logp(2 * n, 0.0), dlogp;
  if (flags.classification_loss) {
    for (size_t i = 0; i < n; ++i) {
      logp[2 * i] = double(ws.caches[i].logp[0]);
      logp[2 * i + 1] = double(ws.caches[i].logp[1]);
    }
    stats.nll = nll_loss(logp, labels);
    if (with_gradients) {
      dlogp.resize(2 * n);
      nll_loss_backward(logp, labels, dlogp);
    }
  }

  const bool both = flags.contrastive_loss && flags.classification_loss;
  const double w_ge2e = both ? (1.0 - lambda) : (flags.contrastive_loss ? 1.0 : 0.0);
  const double w_nll = both ? lambda : (flags.classification_loss ? 1.0 : 0.0);
  stats.combined = both ? combined_loss(stats.ge2e, stats.nll, lambda)
                        : (flags.contrastive_loss ? stats.ge2e : stats.nll);

  if (!with_gradients) return stats;

#pragma omp parallel for schedule(static) num_threads(nt)
  for (size_t i = 0; i < n; ++i) {
    try {
      std::vector<T> d_emb(size_t(dim), T(0));
      if (flags.contrastive_loss) {
        const double* src = i < m ? gg.d_dysphonic.data() + i * size_t(dim)
                                  : gg.d_healthy.data() + (i - m) * size_t(dim);
        for (int k = 0; k < dim; ++k) d_emb[size_t(k)] = T(w_ge2e * src[k]);
      }
      if (flags.classification_loss) {
        const T dl[2] = {T(w_nll * dlogp[2 * i]), T(w_nll * dlogp[2 * i + 1])};
        model.classify_backward(ws.caches[i], std::span<const T>(dl, 2), ws.grad_bufs[i],
                                d_emb);
      }
      model.encode_backward(ws.caches[i], d_emb, ws.grad_bufs[i]);
    } catch (...) {
#pragma omp critical
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);

  for (size_t i = 0; i < n; ++i) {
    const auto& g = ws.grad_bufs[i];
    for (size_t k = 0; k < pcount; ++k) ws.grads[k] += g[k];
  }
  if (flags.contrastive_loss) {
    ws.grads[model.layout().omega] += T(w_ge2e * gg.d_omega);
    ws.grads[model.layout().sim_bias] += T(w_ge2e * gg.d_bias);
  }
  return stats;
}

}  // namespace

template <typename T>
StepStats compute_batch_loss(const Model<T>& model, const std::vector<std::vector<T>>& patches,
                             int bins, const AblationFlags& flags, double lambda,
                             bool ge2e_exclude_self, BatchWorkspace<T>& ws, int threads) {
  return batch_pass(model, patches, bins, flags, lambda, ge2e_exclude_self, ws, threads, false);
}

template <typename T>
StepStats compute_loss_and_gradients(const Model<T>& model,
                                     const std::vector<std::vector<T>>& patches, int bins,
                                     const AblationFlags& flags, double lambda,
                                     bool ge2e_exclude_self, BatchWorkspace<T>& ws, int threads) {
  return batch_pass(model, patches, bins, flags, lambda, ge2e_exclude_self, ws, threads, true);
}

template StepStats compute_batch_loss<float>(const Model<float>&,
                                             const std::vector<std::vector<float>>&, int,
                                             const AblationFlags&, double, bool,
                                             BatchWorkspace<float>&, int);
template StepStats compute_batch_loss<double>(const Model<double>&,
                                              const std::vector<std::vector<double>>&, int,
                                              const AblationFlags&, double, bool,
                                              BatchWorkspace<double>&, int);
template StepStats compute_loss_and_gradients<float>(const Model<float>&,
                                                     const std::vector<std::vector<float>>&, int,
                                                     const AblationFlags&, double, bool,
                                                     BatchWorkspace<float>&, int);
template StepStats compute_loss_and_gradients<double>(const Model<double>&,
                                                      const std::vector<std::vector<double>>&,
                                                      int, const AblationFlags&, double, bool,
                                                      BatchWorkspace<double>&, int);

TrainState::TrainState(const Checkpoint& ckpt)
    : model(ckpt.config.model, ckpt.params),
      step(ckpt.step),
      rng(0),
      loss_sum(ckpt.loss_sum),
      loss_count(ckpt.loss_count) {
  rng.deserialize(ckpt.rng_state);
}

Checkpoint TrainState::to_checkpoint(const TrainConfig& cfg) const {
  Checkpoint ckpt;
  ckpt.config = cfg;
  ckpt.step = step;
  ckpt.params = model.params();
  ckpt.rng_state = rng.serialize();
  ckpt.loss_sum = loss_sum;
  ckpt.loss_count = loss_count;
  return ckpt;
}

StepStats train_step(TrainState& state, const std::vector<std::vector<float>>& patches, int bins,
                     const TrainConfig& cfg, BatchWorkspace<float>& ws) {
  const StepStats stats =
      compute_loss_and_gradients(state.model, patches, bins, cfg.ablation, cfg.lambda,
                                 cfg.ge2e_exclude_self, ws, cfg.threads);
  if (!std::isfinite(stats.combined))
    throw std::runtime_error("train_step: non-finite loss at step " + std::to_string(state.step) +
                             " (ge2e=" + std::to_string(stats.ge2e) +
                             ", nll=" + std::to_string(stats.nll) + ")");
  auto& params = state.model.params();
  const double lr = cfg.learning_rate;
  for (size_t k = 0; k < params.size(); ++k)
    params[k] = float(double(params[k]) - lr * double(ws.grads[k]));
  state.model.clamp_omega();
  state.step += 1;
  StepStats out = stats;
  out.omega = state.model.omega();
  out.sim_bias = state.model.sim_bias();
  return out;
}

namespace {

// sample -> (warp) -> spectrogram -> crop, parallel across clips with
// per-clip derived rngs so results do not depend on the thread count.
void prepare_batch(const TrainDataset& data, const WarpBank& bank, const TrainConfig& cfg,
                   Rng& rng, std::vector<std::vector<float>>& patches, int& bins_out) {
  const BatchIndices batch = sample_batch(data, cfg.samples_per_class, rng);
  const size_t n = 2 * size_t(cfg.samples_per_class);
  std::vector<size_t> order(n);
  for (size_t i = 0; i < size_t(cfg.samples_per_class); ++i) {
    order[i] = batch.dysphonic[i];
    order[size_t(cfg.samples_per_class) + i] = batch.healthy[i];
  }
  std::vector<uint64_t> seeds(n);
  for (auto& s : seeds) s = rng.next_u64();

  const SpectrogramConfig spec_cfg;
  bins_out = spec_cfg.bins();
  patches.resize(n);

  const int nt = std::max(1, std::min<int>(resolve_threads(cfg.threads), int(n)));
  std::exception_ptr error;
#pragma omp parallel for schedule(static) num_threads(nt)
  for (size_t i = 0; i < n; ++i) {
    try {
      Rng clip_rng(seeds[i]);
      const AudioClip* clip = &data.clips[order[i]];
      AudioClip warped;
      if (cfg.ablation.data_warping) {
        warped = apply_random_warps(*clip, bank, cfg.warp, clip_rng);
        clip = &warped;
      }
      const Spectrogram spec = spectrogram(*clip, spec_cfg);
      SpectrogramPatch patch = random_crop(spec, clip_rng);
      patches[i] = std::move(patch.values);
    } catch (...) {
#pragma omp critical
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
}

Checkpoint run_loop(TrainState& state, const TrainDataset& data, const WarpBank& bank,
                    const TrainConfig& cfg, const TrainHooks& hooks) {
  BatchWorkspace<float> ws;
  std::vector<std::vector<float>> patches;
  if (hooks.checkpoint_dir) std::filesystem::create_directories(*hooks.checkpoint_dir);

  while (state.step < cfg.steps) {
    int bins = 0;
    prepare_batch(data, bank, cfg, state.rng, patches, bins);
    const StepStats stats = train_step(state, patches, bins, cfg, ws);
    state.loss_sum += stats.combined;
    state.loss_count += 1;
    if (hooks.log) {
      (*hooks.log) << state.step << "," << stats.ge2e << "," << stats.nll << ","
                   << stats.combined << "," << stats.omega << "," << stats.sim_bias << "\n";
    }
    if (hooks.on_step) hooks.on_step(state, stats);
    if (hooks.checkpoint_dir && cfg.checkpoint_interval > 0 &&
        state.step % cfg.checkpoint_interval == 0 && state.step < cfg.steps) {
      save_checkpoint(*hooks.checkpoint_dir / ("step_" + std::to_string(state.step) + ".ckpt"),
                      state.to_checkpoint(cfg));
    }
  }
  Checkpoint final_ckpt = state.to_checkpoint(cfg);
  if (hooks.checkpoint_dir) save_checkpoint(*hooks.checkpoint_dir / "final.ckpt", final_ckpt);
  return final_ckpt;
}

}  // namespace

Checkpoint train(const TrainDataset& data, const WarpBank& bank, const TrainConfig& cfg,
                 const TrainHooks& hooks) {
  for (const auto& w : cfg.validate()) std::cerr << "train: warning: " << w << "\n";
  TrainState state(cfg.model, cfg.seed);
  return run_loop(state, data, bank, cfg, hooks);
}

Checkpoint fine_tune(const Checkpoint& ckpt, const TrainDataset& data, const WarpBank& bank,
                     uint64_t extra_steps, const TrainHooks& hooks,
                     const std::optional<EncoderConfig>& expected_model) {
  if (expected_model && !(*expected_model == ckpt.config.model))
    throw std::invalid_argument(
        "fine_tune: checkpoint model config does not match the expected config (embedding_dim " +
        std::to_string(ckpt.config.model.embedding_dim) + " vs " +
        std::to_string(expected_model->embedding_dim) + ", total_layers " +
        std::to_string(ckpt.config.model.total_layers) + " vs " +
        std::to_string(expected_model->total_layers) + ")");
  TrainState state(ckpt);
  TrainConfig cfg = ckpt.config;
  cfg.steps = ckpt.step + extra_steps;
  return run_loop(state, data, bank, cfg, hooks);
}

Checkpoint resume_training(const Checkpoint& ckpt, const TrainDataset& data, const WarpBank& bank,
                           const TrainHooks& hooks) {
  TrainState state(ckpt);
  return run_loop(state, data, bank, ckpt.config, hooks);
}

}  // namespace vqe
