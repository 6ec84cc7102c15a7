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

#ifndef VQE_EVAL_HPP
#define VQE_EVAL_HPP

#include <array>
#include <limits>
#include <optional>
#include <ostream>

#include "vqe/manifest.hpp"
#include "vqe/model.hpp"
#include "vqe/svm.hpp"
#include "vqe/warp.hpp"

namespace vqe {

// Dysphonic is the positive class throughout.
struct ConfusionCounts {
  uint64_t tp = 0, fn = 0, tn = 0, fp = 0;

  uint64_t total() const { return tp + fn + tn + fp; }
  void add(Label truth, Label predicted);
};

// Mean of the two per-class recalls. Throws when either class is absent
// (recall undefined), never silently returns 0.
double balanced_accuracy(const ConfusionCounts& c);

enum class EvalCondition { clean, additive_noise, impulse_response, noise_plus_ir };
std::string to_string(EvalCondition c);
EvalCondition eval_condition_from_string(const std::string& s);

enum class PredictionMode { logprob_mean, embedding_mean };

struct PredictOptions {
  PredictionMode mode = PredictionMode::logprob_mean;
  // When set, per-window probabilities are averaged instead of
  // log-probabilities.
  bool average_probabilities = false;
  int hop_frames = 6;
};

struct Prediction {
  Label label = Label::healthy;
  std::vector<float> embedding;   // window-mean embedding, always filled
  double logp[2] = {0.0, 0.0};    // window-aggregated pair (logprob_mean mode)
};

// Sliding-window inference over the whole clip. logprob_mean averages the
// per-window log-probability pairs (ties go to dysphonic); embedding_mean
// classifies the window-mean embedding with the fallback classifier.
Prediction predict_recording(const Model<float>& model, const AudioClip& clip,
                             const PredictOptions& opt = {},
                             const SvmClassifier* fallback = nullptr);

// Lloyd's k-means, best of `restarts` distance-weighted seedings by
// within-cluster sum of squares. Deterministic given the seed.
std::vector<int> kmeans(const std::vector<std::vector<float>>& points, int k, uint64_t seed,
                        int restarts = 10);

// Adjusted mutual information under the permutation model, arithmetic-mean
// normalizer. Identical partitions (up to relabeling) give exactly 1.
double adjusted_mutual_information(std::span<const int> a, std::span<const int> b);

struct EvalReport {
  EvalCondition condition = EvalCondition::clean;
  ConfusionCounts confusion;
  double balanced_accuracy = 0.0;
  double ami = 0.0;
  uint64_t n_recordings = 0;
};

void write_report(std::ostream& os, const EvalReport& report);
EvalReport read_report(std::istream& is);

struct DegradationLogEntry {
  std::string record_id;  // speaker_id/session_id
  std::string ir_file;    // empty when no IR applied
  std::string noise_file;
  double realized_snr_db = std::numeric_limits<double>::quiet_NaN();
};

struct EvaluateOptions {
  PredictOptions predict;
  uint64_t degradation_seed = 0;
  uint64_t kmeans_seed = 0;
  int kmeans_restarts = 10;
  double an_snr_db = 10.0;  // fixed SNR of the additive-noise condition
};

// Evaluates every record under the condition. Degradations draw ONLY from
// the eval halves of the bank. Embeddings are returned in record order for
// export/projection.
EvalReport evaluate_corpus(const Model<float>& model, const std::filesystem::path& manifest_path,
                           const std::vector<ManifestRecord>& records, const WarpBank& bank,
                           EvalCondition condition, const EvaluateOptions& opt,
                           const SvmClassifier* fallback = nullptr,
                           std::vector<std::vector<float>>* embeddings_out = nullptr,
                           std::vector<DegradationLogEntry>* degradation_log = nullptr);

void write_degradation_log(std::ostream& os, const std::vector<DegradationLogEntry>& log);

// Delimited text: header row, then speaker_id,label,gender,corpus and the
// embedding columns. Row order follows the records.
void export_embeddings(const std::vector<std::vector<float>>& embeddings,
                       const std::vector<ManifestRecord>& records,
                       const std::filesystem::path& path);

// Top-2 principal components of mean-centered embeddings, n x 2, component
// variances non-increasing.
std::vector<std::array<double, 2>> project_2d(const std::vector<std::vector<float>>& embeddings);

}  // namespace vqe

#endif  // VQE_EVAL_HPP
