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

#include "openfsp/head.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "support/synthetic_providers.hpp"

namespace openfsp {
namespace {

Head zero_head(std::vector<std::string> labels, int dim, const std::string& fp) {
  Head h;
  h.labels = std::move(labels);
  h.dim = dim;
  h.weights.assign(h.labels.size(), std::vector<double>(dim, 0.0));
  h.bias.assign(h.labels.size(), 0.0);
  h.provider_fingerprint = fp;
  return h;
}

TEST(Softmax, ZeroLogitsAreUniform) {
  test::FixedProvider provider(8);
  const Head head = zero_head({"A", "B", "C", "D"}, 8, provider.fingerprint());
  const std::vector<double> p = predict_proba("anything", head, provider);
  ASSERT_EQ(p.size(), 4u);
  for (double x : p) EXPECT_DOUBLE_EQ(x, 0.25);
}

TEST(Softmax, ClosedFormTwoLogits) {
  const std::vector<double> p = softmax({std::log(2.0), 0.0});
  EXPECT_NEAR(p[0], 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(p[1], 1.0 / 3.0, 1e-15);
}

TEST(Softmax, ShiftInvariance) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> z(5);
    for (double& v : z) v = static_cast<double>(rng() % 1000) / 100.0 - 5.0;
    std::vector<double> shifted = z;
    for (double& v : shifted) v += 17.25;
    const std::vector<double> p = softmax(z), q = softmax(shifted);
    for (size_t i = 0; i < p.size(); ++i) EXPECT_NEAR(p[i], q[i], 1e-12);
  }
}

TEST(Softmax, SumsToOneOnRandomLogits) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> z(3 + rng() % 10);
    for (double& v : z) v = static_cast<double>(rng() % 20000) / 100.0 - 100.0;
    const std::vector<double> p = softmax(z);
    double sum = 0.0;
    for (double x : p) {
      EXPECT_GE(x, 0.0);
      sum += x;
    }
    EXPECT_NEAR(sum, 1.0, 1e-9);
  }
}

// Two tight clusters on different axes: the convex fit must separate them.
std::vector<LabeledText> separable_examples(test::FixedProvider& provider) {
  std::vector<LabeledText> examples;
  for (int i = 0; i < 5; ++i) {
    const std::string a = "alpha " + std::to_string(i);
    const std::string b = "beta " + std::to_string(i);
    provider.set_axis(a, 0, 2 + i % 3, 0.1);
    provider.set_axis(b, 1, 2 + i % 3, 0.1);
    examples.emplace_back(a, "LBL:A");
    examples.emplace_back(b, "LBL:B");
  }
  return examples;
}

TEST(TrainHead, SeparableDataFitsPerfectly) {
  test::FixedProvider provider(8);
  const auto examples = separable_examples(provider);
  const Head head = train_head(examples, TrainConfig{}, provider);
  int correct = 0;
  for (const auto& [text, label] : examples) {
    const std::vector<double> p = predict_proba(text, head, provider);
    const size_t argmax = std::max_element(p.begin(), p.end()) - p.begin();
    correct += head.labels[argmax] == label;
  }
  EXPECT_EQ(correct, static_cast<int>(examples.size()));
}

TEST(TrainHead, DeterministicAndOrderInvariant) {
  test::FixedProvider provider(8);
  auto examples = separable_examples(provider);
  const Head first = train_head(examples, TrainConfig{}, provider);
  std::reverse(examples.begin(), examples.end());
  const Head second = train_head(examples, TrainConfig{}, provider);
  EXPECT_EQ(first, second);
  EXPECT_EQ(first.to_json().dump(), second.to_json().dump());
}

TEST(TrainHead, LossDecreasesOnConvexObjective) {
  test::FixedProvider provider(8);
  const auto examples = separable_examples(provider);
  std::vector<double> trace;
  TrainConfig cfg;
  cfg.epochs = 60;
  train_head(examples, cfg, provider, &trace);
  ASSERT_EQ(trace.size(), 60u);
  for (size_t i = 1; i < 10; ++i) EXPECT_LT(trace[i], trace[i - 1]);
  for (size_t i = 1; i < trace.size(); ++i) EXPECT_LE(trace[i], trace[i - 1] + 1e-9);
}

TEST(TrainHead, LossDecreasesOnHashedTexts) {
  HashedProvider provider(64);
  std::vector<LabeledText> examples = {
      {"wake me at six", "IN:CREATE_ALARM"}, {"set an alarm for dawn", "IN:CREATE_ALARM"},
      {"alarm at 6 am please", "IN:CREATE_ALARM"}, {"delete my alarm", "IN:DELETE_ALARM"},
      {"remove the alarm", "IN:DELETE_ALARM"},  {"cancel alarms today", "IN:DELETE_ALARM"},
      {"tomorrow morning", "SL:DATE_TIME"},     {"at 6 am", "SL:DATE_TIME"},
      {"next tuesday", "SL:DATE_TIME"},         {"in twenty minutes", "SL:DATE_TIME"},
  };
  std::vector<double> trace;
  TrainConfig cfg;
  cfg.epochs = 40;
  train_head(examples, cfg, provider, &trace);
  for (size_t i = 1; i < 10; ++i) EXPECT_LT(trace[i], trace[i - 1]);
  for (size_t i = 1; i < trace.size(); ++i) EXPECT_LE(trace[i], trace[i - 1] + 1e-9);
}

TEST(TrainHead, RejectsDegenerateData) {
  test::FixedProvider provider(8);
  EXPECT_THROW(train_head({}, TrainConfig{}, provider), DegenerateData);
  EXPECT_THROW(train_head({{"a", "LBL:A"}, {"b", "LBL:A"}}, TrainConfig{}, provider),
               DegenerateData);
  EXPECT_THROW(train_head({{"", "LBL:A"}, {"b", "LBL:B"}}, TrainConfig{}, provider),
               DegenerateData);
  TrainConfig bad;
  bad.epochs = 0;
  EXPECT_THROW(train_head({{"a", "LBL:A"}, {"b", "LBL:B"}}, bad, provider), DegenerateData);
}

TEST(PredictProba, ProviderMismatchThrows) {
  test::FixedProvider provider(8);
  Head head = zero_head({"A", "B"}, 8, "some-other-provider:d8");
  EXPECT_THROW(predict_proba("x", head, provider), ProviderMismatch);
}

TEST(GradientCheck, ClosedFormAtZeroWeights) {
  test::FixedProvider provider(4);
  provider.set("x", {1.0, 0.0, 0.0, 0.0});
  const Head head = zero_head({"A", "B", "C"}, 4, provider.fingerprint());
  const std::vector<std::pair<EmbeddingVector, int>> batch = {{provider.embed("x"), 1}};
  const auto g = detail::head_gradients(head, batch, 0.0);
  // softmax of zeros is uniform; bias gradient is softmax minus onehot.
  EXPECT_DOUBLE_EQ(g.bias[0], 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(g.bias[1], 1.0 / 3.0 - 1.0);
  EXPECT_DOUBLE_EQ(g.bias[2], 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(g.weights[0][0], 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(g.weights[1][0], 1.0 / 3.0 - 1.0);
  EXPECT_DOUBLE_EQ(g.weights[0][1], 0.0);
}

TEST(GradientCheck, L2AddsExactlyL2TimesWeights) {
  test::FixedProvider provider(4);
  provider.set("x", {0.5, 0.5, 0.5, 0.5});
  provider.set("y", {-0.5, 0.5, -0.5, 0.5});
  Head head = zero_head({"A", "B"}, 4, provider.fingerprint());
  std::mt19937_64 rng(5);
  for (auto& row : head.weights) {
    for (double& w : row) w = static_cast<double>(rng() % 100) / 50.0 - 1.0;
  }
  const std::vector<std::pair<EmbeddingVector, int>> batch = {{provider.embed("x"), 0},
                                                              {provider.embed("y"), 1}};
  const double l2 = 0.3;
  const auto g0 = detail::head_gradients(head, batch, 0.0);
  const auto g1 = detail::head_gradients(head, batch, l2);
  for (size_t i = 0; i < head.weights.size(); ++i) {
    for (int d = 0; d < head.dim; ++d) {
      EXPECT_EQ(g1.weights[i][d], g0.weights[i][d] + l2 * head.weights[i][d]);
    }
    EXPECT_EQ(g1.bias[i], g0.bias[i]);  // bias is not regularized
  }
}

TEST(GradientCheck, MatchesFiniteDifferences) {
  test::FixedProvider provider(6);
  std::mt19937_64 rng(17);
  std::vector<LabeledText> batch;
  for (int i = 0; i < 8; ++i) {
    const std::string text = "t" + std::to_string(i);
    EmbeddingVector v(6);
    double norm2 = 0.0;
    for (double& x : v) {
      x = static_cast<double>(rng() % 200) / 100.0 - 1.0;
      norm2 += x * x;
    }
    for (double& x : v) x /= std::sqrt(norm2);
    provider.set(text, v);
    batch.emplace_back(text, i % 2 ? "LBL:A" : "LBL:B");
  }
  Head head = zero_head({"LBL:A", "LBL:B", "LBL:C"}, 6, provider.fingerprint());
  for (auto& row : head.weights) {
    for (double& w : row) w = static_cast<double>(rng() % 100) / 100.0 - 0.5;
  }
  for (double& b : head.bias) b = static_cast<double>(rng() % 100) / 100.0 - 0.5;
  batch.emplace_back("t0", "LBL:C");

  EXPECT_LT(gradient_check(head, batch, provider, 1e-4, 30), 1e-4);
  EXPECT_LT(gradient_check(head, batch, provider, 0.0, 30), 1e-4);
}

TEST(HeadPersistence, JsonRoundTripIsExact) {
  test::FixedProvider provider(8);
  const Head head = train_head(separable_examples(provider), TrainConfig{}, provider);
  const Head reloaded = Head::from_json(json::parse(head.to_json().dump()));
  EXPECT_EQ(head, reloaded);
}

TEST(HeadPersistence, TrainedToyHeadPredictsItsExamples) {
  test::FixedProvider provider(8);
  const auto examples = separable_examples(provider);
  const Head head = train_head(examples, TrainConfig{}, provider);
  const std::vector<double> p = predict_proba(examples[0].first, head, provider);
  EXPECT_EQ(head.labels[std::max_element(p.begin(), p.end()) - p.begin()], examples[0].second);
}

}  // namespace
}  // namespace openfsp
