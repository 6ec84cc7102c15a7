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

#ifndef VQE_SVM_HPP
#define VQE_SVM_HPP

#include <span>
#include <vector>

#include "vqe/manifest.hpp"

namespace vqe {

// RBF-kernel max-margin classifier trained by a deterministic SMO
// (most-violating-pair selection, no randomized index choices).
// Hyperparameters follow the common library defaults: C = 1,
// gamma = 1 / (dim * variance of all feature values), tolerance 1e-3.
class SvmClassifier {
 public:
  double decision(std::span<const float> x) const;
  // decision >= 0 maps to dysphonic.
  Label predict(std::span<const float> x) const;

  size_t support_count() const { return coeff_.size(); }
  double gamma() const { return gamma_; }
  double bias() const { return bias_; }

 private:
  friend SvmClassifier fit_embedding_classifier(const std::vector<std::vector<float>>&,
                                                const std::vector<Label>&);
  int dim_ = 0;
  double gamma_ = 0.0;
  double bias_ = 0.0;
  std::vector<std::vector<float>> support_;
  std::vector<double> coeff_;  // alpha_i * y_i
};

// Both classes must be present. Deterministic given the data.
SvmClassifier fit_embedding_classifier(const std::vector<std::vector<float>>& embeddings,
                                       const std::vector<Label>& labels);

}  // namespace vqe

#endif  // VQE_SVM_HPP
