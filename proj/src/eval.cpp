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

#include "vqe/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <stdexcept>

#include <json.hpp>

#include "vqe/features.hpp"
#include "vqe/resample.hpp"

namespace vqe {

void ConfusionCounts::add(Label truth, Label predicted) {
  if (truth == Label::dysphonic)
    (predicted == Label::dysphonic ? tp : fn) += 1;
  else
    (predicted == Label::healthy ? tn : fp) += 1;
}

double balanced_accuracy(const ConfusionCounts& c) {
  if (c.tp + c.fn == 0)
    throw std::invalid_argument("balanced_accuracy: no dysphonic recordings (recall undefined)");
  if (c.tn + c.fp == 0)
    throw std::invalid_argument("balanced_accuracy: no healthy recordings (recall undefined)");
  const double recall_pos = double(c.tp) / double(c.tp + c.fn);
  const double recall_neg = double(c.tn) / double(c.tn + c.fp);
  return 0.5 * (recall_pos + recall_neg);
}

std::string to_string(EvalCondition c) {
  switch (c) {
    case EvalCondition::clean: return "clean";
    case EvalCondition::additive_noise: return "an";
    case EvalCondition::impulse_response: return "ir";
    case EvalCondition::noise_plus_ir: return "an_ir";
  }
  return "clean";
}

EvalCondition eval_condition_from_string(const std::string& s) {
  if (s == "clean") return EvalCondition::clean;
  if (s == "an") return EvalCondition::additive_noise;
  if (s == "ir") return EvalCondition::impulse_response;
  if (s == "an_ir" || s == "an+ir") return EvalCondition::noise_plus_ir;
  throw std::invalid_argument("unknown eval condition '" + s + "' (clean|an|ir|an_ir)");
}

Prediction predict_recording(const Model<float>& model, const AudioClip& clip,
                             const PredictOptions& opt, const SvmClassifier* fallback) {
  if (opt.mode == PredictionMode::embedding_mean && fallback == nullptr)
    throw std::invalid_argument("predict_recording: embedding_mean mode needs a fitted classifier");

  const Spectrogram spec = spectrogram(clip);
  const auto windows = sliding_windows(spec, opt.hop_frames);
  const int dim = model.config().embedding_dim;

  Prediction pred;
  pred.embedding.assign(size_t(dim), 0.0f);
  std::vector<double> emb_sum(size_t(dim), 0.0);
  double agg[2] = {0.0, 0.0};

  Model<float>::Cache cache;
  for (const auto& win : windows) {
    model.encode(win, cache);
    for (int k = 0; k < dim; ++k) emb_sum[size_t(k)] += double(cache.embedding[size_t(k)]);
    if (opt.mode == PredictionMode::logprob_mean) {
      model.classify(std::span<const float>(cache.embedding), cache);
      if (opt.average_probabilities) {
        agg[0] += std::exp(double(cache.logp[0]));
        agg[1] += std::exp(double(cache.logp[1]));
      } else {
        agg[0] += double(cache.logp[0]);
        agg[1] += double(cache.logp[1]);
      }
    }
  }
  const double inv = 1.0 / double(windows.size());
  for (int k = 0; k < dim; ++k) pred.embedding[size_t(k)] = float(emb_sum[size_t(k)] * inv);

  if (opt.mode == PredictionMode::logprob_mean) {
    pred.logp[0] = agg[0] * inv;
    pred.logp[1] = agg[1] * inv;
    // Ties go to dysphonic: screening favors sensitivity.
    pred.label = pred.logp[1] >= pred.logp[0] ? Label::dysphonic : Label::healthy;
  } else {
    pred.label = fallback->predict(pred.embedding);
  }
  return pred;
}

std::vector<int> kmeans(const std::vector<std::vector<float>>& points, int k, uint64_t seed,
                        int restarts) {
  const size_t n = points.size();
  if (k < 1) throw std::invalid_argument("kmeans: k must be >= 1");
  if (n < size_t(k))
    throw std::invalid_argument("kmeans: fewer points (" + std::to_string(n) + ") than k");
  if (restarts < 1) throw std::invalid_argument("kmeans: restarts must be >= 1");
  const size_t dim = points[0].size();

  auto dist2 = [&](const std::vector<float>& a, const std::vector<double>& c) {
    double acc = 0.0;
    for (size_t i = 0; i < dim; ++i) {
      const double d = double(a[i]) - c[i];
      acc += d * d;
    }
    return acc;
  };

  std::vector<int> best_assign(n, 0);
  double best_wcss = std::numeric_limits<double>::infinity();

  for (int r = 0; r < restarts; ++r) {
    Rng rng(derive_seed(seed, uint64_t(r)));
    // Distance-weighted seeding.
    std::vector<std::vector<double>> centers;
    {
      const size_t first = size_t(rng.next_below(n));
      centers.emplace_back(points[first].begin(), points[first].end());
      std::vector<double> d2(n);
      while (centers.size() < size_t(k)) {
        double total = 0.0;
        for (size_t i = 0; i < n; ++i) {
          double m = std::numeric_limits<double>::infinity();
          for (const auto& c : centers) m = std::min(m, dist2(points[i], c));
          d2[i] = m;
          total += m;
        }
        size_t pick = 0;
        if (total > 0.0) {
          const double u = rng.next_double() * total;
          double acc = 0.0;
          for (size_t i = 0; i < n; ++i) {
            acc += d2[i];
            if (u < acc) {
              pick = i;
              break;
            }
          }
        } else {
          pick = size_t(rng.next_below(n));
        }
        centers.emplace_back(points[pick].begin(), points[pick].end());
      }
    }

    std::vector<int> assign(n, -1);
    for (int iter = 0; iter < 300; ++iter) {
      bool changed = false;
      for (size_t i = 0; i < n; ++i) {
        int arg = 0;
        double m = dist2(points[i], centers[0]);
        for (int c = 1; c < k; ++c) {
          const double d = dist2(points[i], centers[size_t(c)]);
          if (d < m) {
            m = d;
            arg = c;
          }
        }
        if (assign[i] != arg) {
          assign[i] = arg;
          changed = true;
        }
      }
      if (!changed) break;
      for (int c = 0; c < k; ++c) {
        std::vector<double> mean(dim, 0.0);
        size_t count = 0;
        for (size_t i = 0; i < n; ++i)
          if (assign[i] == c) {
            for (size_t j = 0; j < dim; ++j) mean[j] += double(points[i][j]);
            ++count;
          }
        if (count > 0) {
          for (size_t j = 0; j < dim; ++j) mean[j] /= double(count);
          centers[size_t(c)] = std::move(mean);
        }
        // An emptied cluster keeps its previous center.
      }
    }

    double wcss = 0.0;
    for (size_t i = 0; i < n; ++i) wcss += dist2(points[i], centers[size_t(assign[i])]);
    if (wcss < best_wcss) {
      best_wcss = wcss;
      best_assign = assign;
    }
  }
  return best_assign;
}

namespace {

// Contingency table with compacted cluster ids.
struct Contingency {
  size_t n = 0;
  std::vector<uint64_t> counts;  // ra x cb
  std::vector<uint64_t> row_sums, col_sums;
  size_t rows = 0, cols = 0;
};

Contingency contingency_table(std::span<const int> a, std::span<const int> b) {
  Contingency t;
  t.n = a.size();
  std::map<int, size_t> ra, cb;
  for (int v : a) ra.emplace(v, 0);
  for (int v : b) cb.emplace(v, 0);
  size_t idx = 0;
  for (auto& [_, i] : ra) i = idx++;
  idx = 0;
  for (auto& [_, i] : cb) i = idx++;
  t.rows = ra.size();
  t.cols = cb.size();
  t.counts.assign(t.rows * t.cols, 0);
  t.row_sums.assign(t.rows, 0);
  t.col_sums.assign(t.cols, 0);
  for (size_t i = 0; i < a.size(); ++i) {
    const size_t r = ra[a[i]], c = cb[b[i]];
    t.counts[r * t.cols + c] += 1;
    t.row_sums[r] += 1;
    t.col_sums[c] += 1;
  }
  return t;
}

double entropy_of(const std::vector<uint64_t>& sums, size_t n) {
  double h = 0.0;
  for (uint64_t s : sums) {
    if (s == 0) continue;
    const double p = double(s) / double(n);
    h -= p * std::log(p);
  }
  return h;
}

// True when every row and every column has exactly one nonzero cell: the
// partitions are identical up to relabeling.
bool is_permutation_table(const Contingency& t) {
  for (size_t r = 0; r < t.rows; ++r) {
    size_t nz = 0;
    for (size_t c = 0; c < t.cols; ++c) nz += t.counts[r * t.cols + c] != 0;
    if (nz != 1) return false;
  }
  for (size_t c = 0; c < t.cols; ++c) {
    size_t nz = 0;
    for (size_t r = 0; r < t.rows; ++r) nz += t.counts[r * t.cols + c] != 0;
    if (nz != 1) return false;
  }
  return true;
}

}  // namespace

double adjusted_mutual_information(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size())
    throw std::invalid_argument("adjusted_mutual_information: length mismatch");
  if (a.size() < 2) throw std::invalid_argument("adjusted_mutual_information: need >= 2 items");
  const Contingency t = contingency_table(a, b);
  if (is_permutation_table(t)) return 1.0;

  const double n = double(t.n);
  double mi = 0.0;
  for (size_t r = 0; r < t.rows; ++r)
    for (size_t c = 0; c < t.cols; ++c) {
      const uint64_t nij = t.counts[r * t.cols + c];
      if (nij == 0) continue;
      const double p = double(nij) / n;
      mi += p * std::log(n * double(nij) / (double(t.row_sums[r]) * double(t.col_sums[c])));
    }

  // Expected MI under the permutation (hypergeometric) model. The
  // hypergeometric weights are built by a log-space recurrence over nij.
  double emi = 0.0;
  for (size_t r = 0; r < t.rows; ++r) {
    const double ai = double(t.row_sums[r]);
    for (size_t c = 0; c < t.cols; ++c) {
      const double bj = double(t.col_sums[c]);
      const int64_t lo = std::max<int64_t>(1, int64_t(t.row_sums[r] + t.col_sums[c]) - int64_t(t.n));
      const int64_t hi = int64_t(std::min(t.row_sums[r], t.col_sums[c]));
      if (lo > hi) continue;
      // log P(nij = lo) from falling factorials.
      double logp = std::lgamma(ai + 1) - std::lgamma(double(lo) + 1) -
                    std::lgamma(ai - double(lo) + 1) + std::lgamma(n - ai + 1) -
                    std::lgamma(bj - double(lo) + 1) -
                    std::lgamma(n - ai - bj + double(lo) + 1) - std::lgamma(n + 1) +
                    std::lgamma(bj + 1) + std::lgamma(n - bj + 1);
      for (int64_t nij = lo; nij <= hi; ++nij) {
        const double dn = double(nij);
        emi += std::exp(logp) * (dn / n) * std::log(n * dn / (ai * bj));
        if (nij < hi) {
          // P(nij+1)/P(nij) = (ai-nij)(bj-nij) / ((nij+1)(n-ai-bj+nij+1))
          logp += std::log((ai - dn) * (bj - dn)) -
                  std::log((dn + 1.0) * (n - ai - bj + dn + 1.0));
        }
      }
    }
  }

  const double ha = entropy_of(t.row_sums, t.n);
  const double hb = entropy_of(t.col_sums, t.n);
  const double denom = 0.5 * (ha + hb) - emi;
  if (std::fabs(denom) < 1e-15) return 1.0;  // constant partition paired with itself
  return (mi - emi) / denom;
}

void write_report(std::ostream& os, const EvalReport& r) {
  nlohmann::json j;
  j["condition"] = to_string(r.condition);
  j["confusion"] = {{"tp", r.confusion.tp}, {"fn", r.confusion.fn}, {"tn", r.confusion.tn},
                    {"fp", r.confusion.fp}};
  j["balanced_accuracy"] = r.balanced_accuracy;
  j["ami"] = r.ami;
  j["n_recordings"] = r.n_recordings;
  os << j.dump(2) << "\n";
}

EvalReport read_report(std::istream& is) {
  nlohmann::json j = nlohmann::json::parse(is);
  EvalReport r;
  r.condition = eval_condition_from_string(j.at("condition").get<std::string>());
  r.confusion.tp = j.at("confusion").at("tp").get<uint64_t>();
  r.confusion.fn = j.at("confusion").at("fn").get<uint64_t>();
  r.confusion.tn = j.at("confusion").at("tn").get<uint64_t>();
  r.confusion.fp = j.at("confusion").at("fp").get<uint64_t>();
  r.balanced_accuracy = j.at("balanced_accuracy").get<double>();
  r.ami = j.at("ami").get<double>();
  r.n_recordings = j.at("n_recordings").get<uint64_t>();
  return r;
}

EvalReport evaluate_corpus(const Model<float>& model, const std::filesystem::path& manifest_path,
                           const std::vector<ManifestRecord>& records, const WarpBank& bank,
                           EvalCondition condition, const EvaluateOptions& opt,
                           const SvmClassifier* fallback,
                           std::vector<std::vector<float>>* embeddings_out,
                           std::vector<DegradationLogEntry>* degradation_log) {
  if (records.empty()) throw std::invalid_argument("evaluate_corpus: no records");
  const bool wants_ir = condition == EvalCondition::impulse_response ||
                        condition == EvalCondition::noise_plus_ir;
  const bool wants_noise = condition == EvalCondition::additive_noise ||
                           condition == EvalCondition::noise_plus_ir;
  if (wants_ir && bank.ir_eval.empty())
    throw std::invalid_argument("evaluate_corpus: eval IR bank is empty for condition " +
                                to_string(condition));
  if (wants_noise && bank.noise_eval.empty())
    throw std::invalid_argument("evaluate_corpus: eval noise bank is empty for condition " +
                                to_string(condition));

  EvalReport report;
  report.condition = condition;
  report.n_recordings = records.size();

  std::vector<std::vector<float>> embeddings;
  std::vector<int> truth;
  embeddings.reserve(records.size());

  for (size_t i = 0; i < records.size(); ++i) {
    const auto& rec = records[i];
    AudioClip clip = resample(read_wav(resolve_audio_path(manifest_path, rec)));

    DegradationLogEntry entry;
    entry.record_id = rec.speaker_id + "/" + rec.session_id;
    // Per-record degradation stream: stable under record-order slicing.
    Rng rng(derive_seed(opt.degradation_seed, uint64_t(i)));
    if (wants_ir) {
      const auto& ir = bank.ir_eval[size_t(rng.next_below(bank.ir_eval.size()))];
      clip = convolve_ir(clip, ir.clip);
      entry.ir_file = ir.name;
    }
    if (wants_noise) {
      const auto& noise = bank.noise_eval[size_t(rng.next_below(bank.noise_eval.size()))];
      if (noise.clip.samples.size() < clip.samples.size())
        throw std::runtime_error("evaluate_corpus: noise file '" + noise.name +
                                 "' shorter than clip " + entry.record_id);
      const size_t max_off = noise.clip.samples.size() - clip.samples.size();
      const size_t offset = max_off == 0 ? 0 : size_t(rng.next_below(max_off + 1));
      const AudioClip degraded = add_noise(clip, noise.clip, opt.an_snr_db, offset);
      // Realized SNR, measured, goes to the log.
      double noise_pow = 0.0, sig_pow = 0.0;
      for (size_t s = 0; s < clip.samples.size(); ++s) {
        const double d = double(degraded.samples[s]) - double(clip.samples[s]);
        noise_pow += d * d;
        sig_pow += double(clip.samples[s]) * double(clip.samples[s]);
      }
      entry.noise_file = noise.name;
      entry.realized_snr_db = 10.0 * std::log10(sig_pow / noise_pow);
      clip = degraded;
    }
    if (degradation_log) degradation_log->push_back(entry);

    const Prediction pred = predict_recording(model, clip, opt.predict, fallback);
    report.confusion.add(rec.label, pred.label);
    truth.push_back(rec.label == Label::dysphonic ? 1 : 0);
    embeddings.push_back(pred.embedding);
  }

  report.balanced_accuracy = balanced_accuracy(report.confusion);
  const std::vector<int> clusters =
      kmeans(embeddings, 2, opt.kmeans_seed, opt.kmeans_restarts);
  report.ami = adjusted_mutual_information(clusters, truth);

  if (embeddings_out) *embeddings_out = std::move(embeddings);
  return report;
}

void write_degradation_log(std::ostream& os, const std::vector<DegradationLogEntry>& log) {
  os << "record_id,ir_file,noise_file,realized_snr_db\n";
  for (const auto& e : log) {
    os << e.record_id << "," << e.ir_file << "," << e.noise_file << ",";
    if (std::isfinite(e.realized_snr_db)) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%.4f", e.realized_snr_db);
      os << buf;
    }
    os << "\n";
  }
}

void export_embeddings(const std::vector<std::vector<float>>& embeddings,
                       const std::vector<ManifestRecord>& records,
                       const std::filesystem::path& path) {
  if (embeddings.size() != records.size())
    throw std::invalid_argument("export_embeddings: embeddings/records count mismatch");
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("export_embeddings: cannot open " + path.string());
  const size_t dim = embeddings.empty() ? 0 : embeddings[0].size();
  os << "speaker_id,label,gender,corpus";
  for (size_t k = 0; k < dim; ++k) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), ",e%03zu", k);
    os << buf;
  }
  os << "\n";
  for (size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    os << r.speaker_id << "," << to_string(r.label) << "," << to_string(r.gender) << ","
       << r.corpus;
    for (size_t k = 0; k < dim; ++k) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), ",%.9g", double(embeddings[i][k]));
      os << buf;
    }
    os << "\n";
  }
  if (!os) throw std::runtime_error("export_embeddings: write failed for " + path.string());
}

std::vector<std::array<double, 2>> project_2d(const std::vector<std::vector<float>>& embeddings) {
  const size_t n = embeddings.size();
  if (n < 2) throw std::invalid_argument("project_2d: need at least 2 points");
  const size_t dim = embeddings[0].size();

  std::vector<double> mean(dim, 0.0);
  for (const auto& e : embeddings)
    for (size_t k = 0; k < dim; ++k) mean[k] += double(e[k]);
  for (auto& v : mean) v /= double(n);

  std::vector<double> cov(dim * dim, 0.0);
  for (const auto& e : embeddings)
    for (size_t r = 0; r < dim; ++r) {
      const double xr = double(e[r]) - mean[r];
      for (size_t c = r; c < dim; ++c) cov[r * dim + c] += xr * (double(e[c]) - mean[c]);
    }
  for (size_t r = 0; r < dim; ++r)
    for (size_t c = r; c < dim; ++c) {
      cov[r * dim + c] /= double(n);
      cov[c * dim + r] = cov[r * dim + c];
    }

  // Cyclic Jacobi eigensolver; plenty for embedding dimensions.
  std::vector<double> v(dim * dim, 0.0);
  for (size_t i = 0; i < dim; ++i) v[i * dim + i] = 1.0;
  for (int sweep = 0; sweep < 64; ++sweep) {
    double off = 0.0;
    for (size_t p = 0; p < dim; ++p)
      for (size_t q = p + 1; q < dim; ++q) off += cov[p * dim + q] * cov[p * dim + q];
    if (off < 1e-22) break;
    for (size_t p = 0; p < dim; ++p)
      for (size_t q = p + 1; q < dim; ++q) {
        const double apq = cov[p * dim + q];
        if (std::fabs(apq) < 1e-300) continue;
        const double app = cov[p * dim + p], aqq = cov[q * dim + q];
        const double theta = 0.5 * (aqq - app) / apq;
        const double sign = theta >= 0.0 ? 1.0 : -1.0;
        const double tv = sign / (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        const double cth = 1.0 / std::sqrt(tv * tv + 1.0);
        const double sth = tv * cth;
        for (size_t k = 0; k < dim; ++k) {
          const double akp = cov[k * dim + p], akq = cov[k * dim + q];
          cov[k * dim + p] = cth * akp - sth * akq;
          cov[k * dim + q] = sth * akp + cth * akq;
        }
        for (size_t k = 0; k < dim; ++k) {
          const double apk = cov[p * dim + k], aqk = cov[q * dim + k];
          cov[p * dim + k] = cth * apk - sth * aqk;
          cov[q * dim + k] = sth * apk + cth * aqk;
        }
        for (size_t k = 0; k < dim; ++k) {
          const double vkp = v[k * dim + p], vkq = v[k * dim + q];
          v[k * dim + p] = cth * vkp - sth * vkq;
          v[k * dim + q] = sth * vkp + cth * vkq;
        }
      }
  }

  // Two largest eigenvalues, with a deterministic sign convention.
  std::vector<std::pair<double, size_t>> eig(dim);
  for (size_t i = 0; i < dim; ++i) eig[i] = {cov[i * dim + i], i};
  std::sort(eig.begin(), eig.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });
  std::array<std::vector<double>, 2> axes;
  for (int c = 0; c < 2; ++c) {
    axes[size_t(c)].resize(dim);
    const size_t col = eig[size_t(c)].second;
    double max_abs = 0.0;
    size_t arg = 0;
    for (size_t k = 0; k < dim; ++k) {
      axes[size_t(c)][k] = v[k * dim + col];
      if (std::fabs(axes[size_t(c)][k]) > max_abs) {
        max_abs = std::fabs(axes[size_t(c)][k]);
        arg = k;
      }
    }
    if (axes[size_t(c)][arg] < 0.0)
      for (auto& x : axes[size_t(c)]) x = -x;
  }

  std::vector<std::array<double, 2>> out(n);
  for (size_t i = 0; i < n; ++i)
    for (int c = 0; c < 2; ++c) {
      double acc = 0.0;
      for (size_t k = 0; k < dim; ++k) acc += (double(embeddings[i][k]) - mean[k]) * axes[size_t(c)][k];
      out[i][size_t(c)] = acc;
    }
  return out;
}

}  // namespace vqe
