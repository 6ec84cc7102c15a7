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

#ifndef VQE_LOSS_HPP
#define VQE_LOSS_HPP

#include <span>
#include <vector>

namespace vqe {

// Learnable scale/bias of the scaled cosine similarity.
struct SimilarityParams {
  double omega = 10.0;
  double bias = -5.0;

  void validate() const;
};

// One batch of grouped embeddings: M dysphonic and M healthy vectors.
struct BatchEmbeddings {
  size_t group_size = 0;  // M
  size_t dim = 0;
  std::vector<double> dysphonic;  // M x dim, row-major
  std::vector<double> healthy;    // M x dim

  std::span<const double> dys(size_t i) const { return {dysphonic.data() + i * dim, dim}; }
  std::span<const double> hea(size_t i) const { return {healthy.data() + i * dim, dim}; }
  void validate() const;  // equal counts, nonzero vectors
};

struct Ge2eOptions {
  // The batch centroid includes the sample itself; the classic variant that
  // excludes it is kept for study.
  bool exclude_self = false;
};

// omega * cos(e, c) + bias. Throws on zero vectors.
double scaled_cosine(std::span<const double> e, std::span<const double> c,
                     const SimilarityParams& sp);

// Per-group arithmetic-mean centroids (c_dysphonic, c_healthy).
std::pair<std::vector<double>, std::vector<double>> group_centroids(const BatchEmbeddings& batch);

// Sum over samples of 1 - sigmoid(S(e, own centroid)) + sigmoid(S(e, other
// centroid)); bounded by (0, 4M).
double ge2e_loss(const BatchEmbeddings& batch, const SimilarityParams& sp, Ge2eOptions opt = {});

struct Ge2eGradients {
  double value = 0.0;
  std::vector<double> d_dysphonic;  // M x dim
  std::vector<double> d_healthy;    // M x dim
  double d_omega = 0.0;
  double d_bias = 0.0;
};

Ge2eGradients ge2e_loss_gradients(const BatchEmbeddings& batch, const SimilarityParams& sp,
                                  Ge2eOptions opt = {});

// Mean over the batch of -logp[label]; logp holds n rows of 2 log
// probabilities, labels holds 0 (healthy) / 1 (dysphonic).
double nll_loss(std::span<const double> logp, std::span<const int> labels);

// d(mean NLL)/d logp, written to d_logp (n x 2).
void nll_loss_backward(std::span<const double> logp, std::span<const int> labels,
                       std::span<double> d_logp);

// (1 - lambda) * ge2e + lambda * nll.
double combined_loss(double ge2e, double nll, double lambda);

double stable_sigmoid_d(double x);

}  // namespace vqe

#endif  // VQE_LOSS_HPP
