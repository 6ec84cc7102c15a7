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

#include "vqe/svm.hpp"

#include <cmath>
#include <stdexcept>

namespace vqe {

namespace {

constexpr double kC = 1.0;
constexpr double kTol = 1e-3;

double rbf(std::span<const float> a, std::span<const float> b, double gamma) {
  double acc = 0.0;
  for (size_t k = 0; k < a.size(); ++k) {
    const double d = double(a[k]) - double(b[k]);
    acc += d * d;
  }
  return std::exp(-gamma * acc);
}

}  // namespace

double SvmClassifier::decision(std::span<const float> x) const {
  if (int(x.size()) != dim_)
    throw std::invalid_argument("SvmClassifier: input dim " + std::to_string(x.size()) +
                                " != " + std::to_string(dim_));
  double acc = bias_;
  for (size_t i = 0; i < support_.size(); ++i) acc += coeff_[i] * rbf(support_[i], x, gamma_);
  return acc;
}

Label SvmClassifier::predict(std::span<const float> x) const {
  return decision(x) >= 0.0 ? Label::dysphonic : Label::healthy;
}

SvmClassifier fit_embedding_classifier(const std::vector<std::vector<float>>& embeddings,
                                       const std::vector<Label>& labels) {
  const size_t n = embeddings.size();
  if (n != labels.size())
    throw std::invalid_argument("fit_embedding_classifier: embeddings/labels length mismatch");
  if (n < 2) throw std::invalid_argument("fit_embedding_classifier: need at least 2 samples");
  const size_t dim = embeddings[0].size();
  for (const auto& e : embeddings)
    if (e.size() != dim)
      throw std::invalid_argument("fit_embedding_classifier: inconsistent embedding dims");

  bool has_pos = false, has_neg = false;
  std::vector<double> y(n);
  for (size_t i = 0; i < n; ++i) {
    y[i] = labels[i] == Label::dysphonic ? 1.0 : -1.0;
    (labels[i] == Label::dysphonic ? has_pos : has_neg) = true;
  }
  if (!has_pos || !has_neg)
    throw std::invalid_argument("fit_embedding_classifier: both classes must be present");

  // gamma = 1 / (dim * var) over the flattened feature matrix.
  double mean = 0.0;
  for (const auto& e : embeddings)
    for (float v : e) mean += double(v);
  mean /= double(n * dim);
  double var = 0.0;
  for (const auto& e : embeddings)
    for (float v : e) var += (double(v) - mean) * (double(v) - mean);
  var /= double(n * dim);
  const double gamma = var > 0.0 ? 1.0 / (double(dim) * var) : 1.0;

  std::vector<double> kmat(n * n);
  for (size_t i = 0; i < n; ++i)
    for (size_t j = i; j < n; ++j) {
      const double k = rbf(embeddings[i], embeddings[j], gamma);
      kmat[i * n + j] = k;
      kmat[j * n + i] = k;
    }

  std::vector<double> alpha(n, 0.0);
  std::vector<double> f(n, 0.0);  // decision value without bias

  const size_t max_iter = 20000 + 200 * n;
  for (size_t iter = 0; iter < max_iter; ++iter) {
    // Most-violating pair over v_t = y_t - f_t.
    int i1 = -1, i2 = -1;
    double v_up = -1e300, v_low = 1e300;
    for (size_t t = 0; t < n; ++t) {
      const double v = y[t] - f[t];
      const bool in_up = (y[t] > 0 && alpha[t] < kC) || (y[t] < 0 && alpha[t] > 0);
      const bool in_low = (y[t] < 0 && alpha[t] < kC) || (y[t] > 0 && alpha[t] > 0);
      if (in_up && v > v_up) {
        v_up = v;
        i1 = int(t);
      }
      if (in_low && v < v_low) {
        v_low = v;
        i2 = int(t);
      }
    }
    if (i1 < 0 || i2 < 0 || v_up - v_low <= kTol) break;

    const size_t a = size_t(i1), b = size_t(i2);
    const double s = y[a] * y[b];
    double lo, hi;
    if (s < 0) {
      lo = std::max(0.0, alpha[b] - alpha[a]);
      hi = std::min(kC, kC + alpha[b] - alpha[a]);
    } else {
      lo = std::max(0.0, alpha[a] + alpha[b] - kC);
      hi = std::min(kC, alpha[a] + alpha[b]);
    }
    // Duplicate points give eta ~ 0; the floor turns that into a bound step.
    const double eta = std::max(kmat[a * n + a] + kmat[b * n + b] - 2.0 * kmat[a * n + b], 1e-12);

    const double e1 = f[a] - y[a], e2 = f[b] - y[b];
    double a2 = alpha[b] + y[b] * (e1 - e2) / eta;
    a2 = std::min(hi, std::max(lo, a2));
    const double a1 = alpha[a] + s * (alpha[b] - a2);
    const double d1 = a1 - alpha[a], d2 = a2 - alpha[b];
    if (std::fabs(d1) < 1e-12 && std::fabs(d2) < 1e-12) break;
    alpha[a] = a1;
    alpha[b] = a2;
    for (size_t t = 0; t < n; ++t)
      f[t] += y[a] * d1 * kmat[a * n + t] + y[b] * d2 * kmat[b * n + t];
  }

  // Bias from free support vectors, or the midpoint of the violating bounds.
  double bsum = 0.0;
  size_t bcount = 0;
  for (size_t t = 0; t < n; ++t) {
    if (alpha[t] > 1e-9 && alpha[t] < kC - 1e-9) {
      bsum += y[t] - f[t];
      ++bcount;
    }
  }
  double bias;
  if (bcount > 0) {
    bias = bsum / double(bcount);
  } else {
    double v_up = -1e300, v_low = 1e300;
    for (size_t t = 0; t < n; ++t) {
      const double v = y[t] - f[t];
      const bool in_up = (y[t] > 0 && alpha[t] < kC) || (y[t] < 0 && alpha[t] > 0);
      const bool in_low = (y[t] < 0 && alpha[t] < kC) || (y[t] > 0 && alpha[t] > 0);
      if (in_up) v_up = std::max(v_up, v);
      if (in_low) v_low = std::min(v_low, v);
    }
    bias = 0.5 * (v_up + v_low);
  }

  SvmClassifier model;
  model.dim_ = int(dim);
  model.gamma_ = gamma;
  model.bias_ = bias;
  for (size_t t = 0; t < n; ++t) {
    if (alpha[t] > 1e-9) {
      model.support_.push_back(embeddings[t]);
      model.coeff_.push_back(alpha[t] * y[t]);
    }
  }
  return model;
}

}  // namespace vqe
