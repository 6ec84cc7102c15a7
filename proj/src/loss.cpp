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

#include "vqe/loss.hpp"

#include <cmath>
#include <stdexcept>

namespace vqe {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

}  // namespace

double stable_sigmoid_d(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

void SimilarityParams::validate() const {
  if (!(omega > 0.0)) throw std::invalid_argument("SimilarityParams: omega must be positive");
  if (!std::isfinite(omega) || !std::isfinite(bias))
    throw std::invalid_argument("SimilarityParams: non-finite value");
}

void BatchEmbeddings::validate() const {
  if (group_size == 0) throw std::invalid_argument("BatchEmbeddings: M must be >= 1");
  if (dim == 0) throw std::invalid_argument("BatchEmbeddings: dim must be >= 1");
  if (dysphonic.size() != group_size * dim || healthy.size() != group_size * dim)
    throw std::invalid_argument("BatchEmbeddings: group sizes do not match M x dim");
  for (size_t i = 0; i < group_size; ++i) {
    if (norm(dys(i)) == 0.0 || norm(hea(i)) == 0.0)
      throw std::invalid_argument("BatchEmbeddings: zero embedding (cosine undefined)");
  }
}

double scaled_cosine(std::span<const double> e, std::span<const double> c,
                     const SimilarityParams& sp) {
  if (e.size() != c.size()) throw std::invalid_argument("scaled_cosine: length mismatch");
  const double ne = norm(e), nc = norm(c);
  if (ne == 0.0 || nc == 0.0) throw std::invalid_argument("scaled_cosine: zero vector");
  return sp.omega * dot(e, c) / (ne * nc) + sp.bias;
}

std::pair<std::vector<double>, std::vector<double>> group_centroids(const BatchEmbeddings& batch) {
  batch.validate();
  std::vector<double> cd(batch.dim, 0.0), ch(batch.dim, 0.0);
  for (size_t i = 0; i < batch.group_size; ++i)
    for (size_t k = 0; k < batch.dim; ++k) {
      cd[k] += batch.dysphonic[i * batch.dim + k];
      ch[k] += batch.healthy[i * batch.dim + k];
    }
  const double inv = 1.0 / double(batch.group_size);
  for (size_t k = 0; k < batch.dim; ++k) {
    cd[k] *= inv;
    ch[k] *= inv;
  }
  return {std::move(cd), std::move(ch)};
}

namespace {

// Per-sample mean of the group with the sample excluded (classic variant).
std::vector<double> mean_excluding(const std::vector<double>& group, size_t m, size_t dim,
                                   size_t skip) {
  std::vector<double> c(dim, 0.0);
  for (size_t i = 0; i < m; ++i) {
    if (i == skip) continue;
    for (size_t k = 0; k < dim; ++k) c[k] += group[i * dim + k];
  }
  for (size_t k = 0; k < dim; ++k) c[k] /= double(m - 1);
  return c;
}

}  // namespace

double ge2e_loss(const BatchEmbeddings& batch, const SimilarityParams& sp, Ge2eOptions opt) {
  batch.validate();
  sp.validate();
  if (opt.exclude_self && batch.group_size < 2)
    throw std::invalid_argument("ge2e_loss: exclude_self needs M >= 2");
  const auto [cd, ch] = group_centroids(batch);

  double loss = 0.0;
  for (size_t i = 0; i < batch.group_size; ++i) {
    const auto own_d = opt.exclude_self
                           ? mean_excluding(batch.dysphonic, batch.group_size, batch.dim, i)
                           : cd;
    const auto own_h =
        opt.exclude_self ? mean_excluding(batch.healthy, batch.group_size, batch.dim, i) : ch;
    loss += 1.0 - stable_sigmoid_d(scaled_cosine(batch.dys(i), own_d, sp)) +
            stable_sigmoid_d(scaled_cosine(batch.dys(i), ch, sp));
    loss += 1.0 - stable_sigmoid_d(scaled_cosine(batch.hea(i), own_h, sp)) +
            stable_sigmoid_d(scaled_cosine(batch.hea(i), cd, sp));
  }
  return loss;
}

namespace {

// Accumulates the gradient of +/- sigmoid(omega*cos(e, c) + b) into de, dc,
// and the similarity parameters.
struct TermAccumulator {
  const SimilarityParams& sp;
  double d_omega = 0.0, d_bias = 0.0;

  explicit TermAccumulator(const SimilarityParams& p) : sp(p) {}

  double add(std::span<const double> e, std::span<const double> c, double sign,
             std::span<double> de, std::span<double> dc) {
    const double ne = norm(e), nc = norm(c);
    const double d = dot(e, c);
    const double cosv = d / (ne * nc);
    const double s = stable_sigmoid_d(sp.omega * cosv + sp.bias);
    const double dsig = sign * s * (1.0 - s);
    d_omega += dsig * cosv;
    d_bias += dsig;
    const double dcos = dsig * sp.omega;
    for (size_t k = 0; k < e.size(); ++k) {
      de[k] += dcos * (c[k] / (ne * nc) - cosv * e[k] / (ne * ne));
      dc[k] += dcos * (e[k] / (ne * nc) - cosv * c[k] / (nc * nc));
    }
    return sign > 0.0 ? s : 1.0 - s;
  }
};

}  // namespace

Ge2eGradients ge2e_loss_gradients(const BatchEmbeddings& batch, const SimilarityParams& sp,
                                  Ge2eOptions opt) {
  batch.validate();
  sp.validate();
  if (opt.exclude_self && batch.group_size < 2)
    throw std::invalid_argument("ge2e_loss_gradients: exclude_self needs M >= 2");
  const size_t m = batch.group_size, dim = batch.dim;
  const auto [cd, ch] = group_centroids(batch);

  Ge2eGradients g;
  g.d_dysphonic.assign(m * dim, 0.0);
  g.d_healthy.assign(m * dim, 0.0);
  std::vector<double> dcd(dim, 0.0), dch(dim, 0.0);
  // Per-sample centroid gradients for the exclude-self variant are scattered
  // immediately; the shared-centroid ones are folded in afterwards.
  TermAccumulator acc(sp);
  double loss = 0.0;

  for (size_t i = 0; i < m; ++i) {
    std::span<double> ddi(g.d_dysphonic.data() + i * dim, dim);
    std::span<double> dhi(g.d_healthy.data() + i * dim, dim);

    if (!opt.exclude_self) {
      // dysphonic sample: 1 - sigma(S(e, c_d)) + sigma(S(e, c_h))
      loss += acc.add(batch.dys(i), cd, -1.0, ddi, dcd);
      loss += acc.add(batch.dys(i), ch, +1.0, ddi, dch);
      // healthy sample: 1 - sigma(S(e, c_h)) + sigma(S(e, c_d))
      loss += acc.add(batch.hea(i), ch, -1.0, dhi, dch);
      loss += acc.add(batch.hea(i), cd, +1.0, dhi, dcd);
    } else {
      const auto own_d = mean_excluding(batch.dysphonic, m, dim, i);
      const auto own_h = mean_excluding(batch.healthy, m, dim, i);
      std::vector<double> d_own_d(dim, 0.0), d_own_h(dim, 0.0);
      loss += acc.add(batch.dys(i), own_d, -1.0, ddi, d_own_d);
      loss += acc.add(batch.dys(i), ch, +1.0, ddi, dch);
      loss += acc.add(batch.hea(i), own_h, -1.0, dhi, d_own_h);
      loss += acc.add(batch.hea(i), cd, +1.0, dhi, dcd);
      const double inv = 1.0 / double(m - 1);
      for (size_t j = 0; j < m; ++j) {
        if (j == i) continue;
        for (size_t k = 0; k < dim; ++k) {
          g.d_dysphonic[j * dim + k] += inv * d_own_d[k];
          g.d_healthy[j * dim + k] += inv * d_own_h[k];
        }
      }
    }
  }

  const double inv_m = 1.0 / double(m);
  for (size_t j = 0; j < m; ++j)
    for (size_t k = 0; k < dim; ++k) {
      g.d_dysphonic[j * dim + k] += inv_m * dcd[k];
      g.d_healthy[j * dim + k] += inv_m * dch[k];
    }

  g.value = loss;
  g.d_omega = acc.d_omega;
  g.d_bias = acc.d_bias;
  return g;
}

double nll_loss(std::span<const double> logp, std::span<const int> labels) {
  const size_t n = labels.size();
  if (n == 0) throw std::invalid_argument("nll_loss: empty batch");
  if (logp.size() != 2 * n) throw std::invalid_argument("nll_loss: logp/labels length mismatch");
  double acc = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const int lab = labels[i];
    if (lab != 0 && lab != 1) throw std::invalid_argument("nll_loss: label must be 0 or 1");
    acc -= logp[2 * i + size_t(lab)];
  }
  return acc / double(n);
}

void nll_loss_backward(std::span<const double> logp, std::span<const int> labels,
                       std::span<double> d_logp) {
  const size_t n = labels.size();
  if (logp.size() != 2 * n || d_logp.size() != 2 * n)
    throw std::invalid_argument("nll_loss_backward: length mismatch");
  const double inv = 1.0 / double(n);
  for (size_t i = 0; i < 2 * n; ++i) d_logp[i] = 0.0;
  for (size_t i = 0; i < n; ++i) d_logp[2 * i + size_t(labels[i])] = -inv;
}

double combined_loss(double ge2e, double nll, double lambda) {
  if (lambda < 0.0 || lambda > 1.0)
    throw std::invalid_argument("combined_loss: lambda must be in [0, 1]");
  return (1.0 - lambda) * ge2e + lambda * nll;
}

}  // namespace vqe
