// Copyright 2026 The OpenFSP Authors.
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

#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "openfsp/embedding.hpp"
#include "openfsp/errors.hpp"

namespace openfsp {

// (text, label name) training pair.
using LabeledText = std::pair<std::string, std::string>;

// The per-domain classification head: a linear layer whose softmax gives the
// label probabilities. These are the only parameters trained when a domain
// is added.
struct Head {
  std::vector<std::string> labels;  // row order of weights/bias
  int dim = 0;
  std::vector<std::vector<double>> weights;  // |labels| x dim
  std::vector<double> bias;                  // |labels|
  std::string provider_fingerprint;

  int label_index(const std::string& name) const {
    auto it = std::find(labels.begin(), labels.end(), name);
    return it == labels.end() ? -1 : static_cast<int>(it - labels.begin());
  }

  json to_json() const {
    return json{{"labels", labels},
                {"dim", dim},
                {"weights", weights},
                {"bias", bias},
                {"provider_fingerprint", provider_fingerprint}};
  }

  static Head from_json(const json& j) {
    Head h;
    h.labels = j.at("labels").get<std::vector<std::string>>();
    h.dim = j.at("dim").get<int>();
    h.weights = j.at("weights").get<std::vector<std::vector<double>>>();
    h.bias = j.at("bias").get<std::vector<double>>();
    h.provider_fingerprint = j.at("provider_fingerprint").get<std::string>();
    if (h.weights.size() != h.labels.size() || h.bias.size() != h.labels.size()) {
      throw SchemaError("head weights/bias rows do not match labels");
    }
    return h;
  }

  friend bool operator==(const Head&, const Head&) = default;
};

struct TrainConfig {
  double learning_rate = 0.1;
  int epochs = 200;
  double l2 = 1e-4;
  uint64_t seed = 0;  // sampling upstream only; the optimizer itself is RNG-free

  void validate() const {
    if (learning_rate <= 0) throw DegenerateData("learning_rate must be > 0");
    if (epochs < 1) throw DegenerateData("epochs must be >= 1");
    if (l2 < 0) throw DegenerateData("l2 must be >= 0");
  }
};

inline std::vector<double> predict_logits(const EmbeddingVector& x, const Head& head) {
  if (static_cast<int>(x.size()) != head.dim) {
    throw DimensionMismatch("embedding dimension " + std::to_string(x.size()) +
                            " does not match head dimension " + std::to_string(head.dim));
  }
  std::vector<double> z(head.labels.size(), 0.0);
  for (size_t i = 0; i < head.labels.size(); ++i) {
    double acc = head.bias[i];
    const auto& row = head.weights[i];
    for (int d = 0; d < head.dim; ++d) acc += row[d] * x[d];
    z[i] = acc;
  }
  return z;
}

// Softmax with max-subtraction.
inline std::vector<double> softmax(std::vector<double> z) {
  const double zmax = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (double& v : z) {
    v = std::exp(v - zmax);
    sum += v;
  }
  for (double& v : z) v /= sum;
  return z;
}

namespace detail {

struct HeadGradients {
  std::vector<std::vector<double>> weights;
  std::vector<double> bias;
  double loss = 0.0;
};

// Average cross-entropy over the batch plus (l2/2)|W|^2, with its analytic
// gradient. Batch entries are (embedding, label row index).
inline HeadGradients head_gradients(const Head& head,
                                    const std::vector<std::pair<EmbeddingVector, int>>& batch,
                                    double l2) {
  const size_t rows = head.labels.size();
  HeadGradients g;
  g.weights.assign(rows, std::vector<double>(head.dim, 0.0));
  g.bias.assign(rows, 0.0);
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  for (const auto& [x, y] : batch) {
    std::vector<double> p = softmax(predict_logits(x, head));
    g.loss -= std::log(p[y]) * inv_n;
    for (size_t i = 0; i < rows; ++i) {
      const double delta = (p[i] - (static_cast<int>(i) == y ? 1.0 : 0.0)) * inv_n;
      g.bias[i] += delta;
      auto& row = g.weights[i];
      for (int d = 0; d < head.dim; ++d) row[d] += delta * x[d];
    }
  }
  if (l2 > 0.0) {
    double reg = 0.0;
    for (size_t i = 0; i < rows; ++i) {
      for (int d = 0; d < head.dim; ++d) {
        g.weights[i][d] += l2 * head.weights[i][d];
        reg += head.weights[i][d] * head.weights[i][d];
      }
    }
    g.loss += 0.5 * l2 * reg;
  }
  return g;
}

}  // namespace detail

// Full-batch gradient descent from zero initialization on the regularized
// cross-entropy. Examples are order-normalized by sorted (label, text) first,
// so corpus shuffling cannot change the result; with a fixed provider the
// returned head is bit-identical across runs.
inline Head train_head(std::vector<LabeledText> examples, const TrainConfig& cfg,
                       EmbeddingProvider& provider, std::vector<double>* loss_trace = nullptr) {
  cfg.validate();
  if (examples.empty()) throw DegenerateData("no training examples");
  for (const auto& [text, label] : examples) {
    if (text.empty()) throw DegenerateData("empty example text for label " + label);
  }
  std::sort(examples.begin(), examples.end(),
            [](const LabeledText& a, const LabeledText& b) {
              return std::tie(a.second, a.first) < std::tie(b.second, b.first);
            });

  std::set<std::string> distinct;
  for (const auto& e : examples) distinct.insert(e.second);
  if (distinct.size() < 2) {
    throw DegenerateData("head training needs at least 2 labels, got " +
                         std::to_string(distinct.size()));
  }

  Head head;
  head.labels.assign(distinct.begin(), distinct.end());
  head.dim = provider.dim();
  head.weights.assign(head.labels.size(), std::vector<double>(head.dim, 0.0));
  head.bias.assign(head.labels.size(), 0.0);
  head.provider_fingerprint = provider.fingerprint();

  MemoProvider memo(provider);
  std::vector<std::pair<EmbeddingVector, int>> batch;
  batch.reserve(examples.size());
  for (const auto& [text, label] : examples) {
    batch.emplace_back(memo.embed(text), head.label_index(label));
  }

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    detail::HeadGradients g = detail::head_gradients(head, batch, cfg.l2);
    if (loss_trace) loss_trace->push_back(g.loss);
    for (size_t i = 0; i < head.labels.size(); ++i) {
      for (int d = 0; d < head.dim; ++d) {
        head.weights[i][d] -= cfg.learning_rate * g.weights[i][d];
      }
      head.bias[i] -= cfg.learning_rate * g.bias[i];
    }
  }
  return head;
}

inline std::vector<double> predict_proba_from_vec(const EmbeddingVector& x, const Head& head) {
  return softmax(predict_logits(x, head));
}

// Label distribution for a text, aligned with head.labels.
inline std::vector<double> predict_proba(const std::string& text, const Head& head,
                                         EmbeddingProvider& provider) {
  if (provider.fingerprint() != head.provider_fingerprint) {
    throw ProviderMismatch("head was trained with provider '" + head.provider_fingerprint +
                           "', got '" + provider.fingerprint() + "'");
  }
  return predict_proba_from_vec(provider.embed(text), head);
}

// Compares the analytic gradient of the regularized objective to central
// finite differences on randomly chosen coordinates; returns the maximum
// relative error observed.
inline double gradient_check(const Head& head, const std::vector<LabeledText>& raw_batch,
                             EmbeddingProvider& provider, double l2, int coords = 24,
                             uint64_t seed = 12345, double step = 1e-5) {
  if (raw_batch.empty()) throw DegenerateData("gradient_check needs a nonempty batch");
  MemoProvider memo(provider);
  std::vector<std::pair<EmbeddingVector, int>> batch;
  for (const auto& [text, label] : raw_batch) {
    const int y = head.label_index(label);
    if (y < 0) throw UnknownLabel("label " + label + " not in head");
    batch.emplace_back(memo.embed(text), y);
  }

  const detail::HeadGradients analytic = detail::head_gradients(head, batch, l2);
  const size_t rows = head.labels.size();
  const size_t n_params = rows * static_cast<size_t>(head.dim) + rows;

  Head probe = head;
  auto loss_at = [&]() { return detail::head_gradients(probe, batch, l2).loss; };

  std::mt19937_64 rng(seed);
  double max_rel = 0.0;
  for (int c = 0; c < coords; ++c) {
    const size_t flat = rng() % n_params;
    double* param;
    double analytic_g;
    if (flat < rows * static_cast<size_t>(head.dim)) {
      const size_t i = flat / head.dim, d = flat % head.dim;
      param = &probe.weights[i][d];
      analytic_g = analytic.weights[i][d];
    } else {
      const size_t i = flat - rows * static_cast<size_t>(head.dim);
      param = &probe.bias[i];
      analytic_g = analytic.bias[i];
    }
    const double saved = *param;
    *param = saved + step;
    const double up = loss_at();
    *param = saved - step;
    const double down = loss_at();
    *param = saved;
    const double numeric_g = (up - down) / (2.0 * step);
    const double denom = std::max({std::fabs(analytic_g), std::fabs(numeric_g), 1e-4});
    max_rel = std::max(max_rel, std::fabs(analytic_g - numeric_g) / denom);
  }
  return max_rel;
}

}  // namespace openfsp
