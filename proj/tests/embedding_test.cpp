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

#include "openfsp/embedding.hpp"

#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>
#include <random>
#include <thread>

#include "embedding_golden.inc"
#include "support/test_util.hpp"

namespace openfsp {
namespace {

uint64_t bits_of(double x) {
  uint64_t b;
  std::memcpy(&b, &x, sizeof(b));
  return b;
}

TEST(HashedEmbedding, EmptyTextIsZeroVector) {
  const EmbeddingVector v = hashed_embedding("");
  EXPECT_EQ(v.size(), 256u);
  for (double x : v) EXPECT_EQ(x, 0.0);
}

TEST(HashedEmbedding, CaseFoldingMakesEqualVectors) {
  const EmbeddingVector a = hashed_embedding("Noon Tomorrow");
  const EmbeddingVector b = hashed_embedding("noon tomorrow");
  ASSERT_EQ(a.size(), b.size());
  for (size_t i = 0; i < a.size(); ++i) EXPECT_EQ(bits_of(a[i]), bits_of(b[i]));
}

TEST(HashedEmbedding, GoldenVectorBitwise) {
  const EmbeddingVector v = hashed_embedding("set an alarm");
  ASSERT_EQ(v.size(), 256u);
  for (size_t i = 0; i < v.size(); ++i) {
    EXPECT_EQ(bits_of(v[i]), kGoldenSetAnAlarmBits[i]) << "component " << i;
  }
}

TEST(HashedEmbedding, PureFunction) {
  const std::string text = "Wake me at 6 am tomorrow, please!";
  const EmbeddingVector a = hashed_embedding(text);
  const EmbeddingVector b = hashed_embedding(text);
  for (size_t i = 0; i < a.size(); ++i) EXPECT_EQ(bits_of(a[i]), bits_of(b[i]));
}

TEST(HashedEmbedding, NormIsZeroOrOne) {
  std::mt19937_64 rng(7);
  const std::string alphabet = "abcdefgh XYZ0123,.!";
  for (int trial = 0; trial < 500; ++trial) {
    std::string text;
    const size_t len = rng() % 24;
    for (size_t i = 0; i < len; ++i) text += alphabet[rng() % alphabet.size()];
    const EmbeddingVector v = hashed_embedding(text);
    double norm2 = 0.0;
    for (double x : v) norm2 += x * x;
    const double norm = std::sqrt(norm2);
    EXPECT_TRUE(norm == 0.0 || std::fabs(norm - 1.0) <= 1e-9) << "text=\"" << text << "\"";
  }
}

TEST(HashedEmbedding, RejectsTinyDimension) {
  EXPECT_THROW(hashed_embedding("x", 4), DimensionMismatch);
}

TEST(Cosine, ClosedForms) {
  const EmbeddingVector v = hashed_embedding("order a latte");
  EXPECT_NEAR(cosine(v, v), 1.0, 1e-12);
  EmbeddingVector neg = v;
  for (double& x : neg) x = -x;
  EXPECT_NEAR(cosine(v, neg), -1.0, 1e-12);

  EmbeddingVector e1(8, 0.0), e2(8, 0.0);
  e1[0] = 1.0;
  e2[1] = 1.0;
  EXPECT_EQ(cosine(e1, e2), 0.0);
}

TEST(Cosine, ZeroNormGivesZero) {
  const EmbeddingVector z(16, 0.0);
  EmbeddingVector v(16, 0.0);
  v[3] = 2.0;
  EXPECT_EQ(cosine(z, v), 0.0);
  EXPECT_EQ(cosine(z, z), 0.0);
}

TEST(Cosine, DimensionMismatchThrows) {
  EXPECT_THROW(cosine(EmbeddingVector(8, 0.0), EmbeddingVector(16, 0.0)), DimensionMismatch);
}

TEST(Cache, SecondCallHitsAndMatches) {
  test::TempDir tmp;
  ProviderConfig cfg;
  cfg.kind = ProviderKind::Cached;
  cfg.cache_path = (tmp.path() / "cache.jsonl").string();

  const EmbeddingVector direct = hashed_embedding("wake me up");
  const EmbeddingVector first = embed_cached("wake me up", cfg);
  const EmbeddingVector second = embed_cached("wake me up", cfg);
  for (size_t i = 0; i < direct.size(); ++i) {
    EXPECT_EQ(bits_of(first[i]), bits_of(direct[i]));
    EXPECT_EQ(bits_of(second[i]), bits_of(direct[i]));
  }
  EXPECT_TRUE(std::filesystem::exists(cfg.cache_path));
}

TEST(Cache, DeletedFileRecomputesIdentically) {
  test::TempDir tmp;
  ProviderConfig cfg;
  cfg.kind = ProviderKind::Cached;
  cfg.cache_path = (tmp.path() / "cache.jsonl").string();

  const EmbeddingVector first = embed_cached("at 6 am", cfg);
  std::filesystem::remove(cfg.cache_path);
  const EmbeddingVector second = embed_cached("at 6 am", cfg);
  for (size_t i = 0; i < first.size(); ++i) EXPECT_EQ(bits_of(first[i]), bits_of(second[i]));
}

TEST(Cache, RoundTripIsBitwise) {
  test::TempDir tmp;
  EmbeddingCache cache(tmp.path() / "cache.jsonl", 256);
  const EmbeddingVector v = hashed_embedding("Play some jazz");
  cache.store("Play some jazz", v);

  EmbeddingCache reloaded(tmp.path() / "cache.jsonl", 256);
  const auto hit = reloaded.lookup("Play some jazz");
  ASSERT_TRUE(hit.has_value());
  for (size_t i = 0; i < v.size(); ++i) EXPECT_EQ(bits_of((*hit)[i]), bits_of(v[i]));
}

TEST(Cache, CorruptRecordThrows) {
  test::TempDir tmp;
  const auto path = tmp.path() / "cache.jsonl";
  test::write_file(path, "{\"text_sha256\":\"ab\",\"dim\":256,\"values\":[1.0,2.0]}\n");
  EXPECT_THROW(EmbeddingCache(path, 256), CacheCorrupt);
  test::write_file(path, "not json at all\n");
  EXPECT_THROW(EmbeddingCache(path, 256), CacheCorrupt);
}

TEST(ProviderConfig, Validation) {
  ProviderConfig cfg;
  cfg.dimension = 4;
  EXPECT_THROW(cfg.validate(), DimensionMismatch);
  cfg.dimension = 64;
  cfg.kind = ProviderKind::External;
  EXPECT_THROW(cfg.validate(), ProviderUnavailable);
  cfg.endpoint = "http://localhost:1/embed";
  EXPECT_NO_THROW(cfg.validate());
  EXPECT_EQ(cfg.fingerprint(), "external:http://localhost:1/embed:d64");
  ProviderConfig hashed;
  EXPECT_EQ(hashed.fingerprint(), "hashed:d256");
}

class ExternalProviderTest : public ::testing::Test {
 protected:
  void SetUp() override {
    server_.Post("/embed", [](const httplib::Request& req, httplib::Response& res) {
      const json body = json::parse(req.body);
      const std::string text = body["texts"][0].get<std::string>();
      const int dim = text == "wrong-dim" ? 7 : 16;
      EmbeddingVector v(dim, 0.0);
      if (!text.empty()) v[text.size() % dim] = 2.0;  // deliberately unnormalized
      res.set_content(json{{"vectors", json::array({v})}}.dump(), "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  void TearDown() override {
    server_.stop();
    thread_.join();
  }

  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
};

TEST_F(ExternalProviderTest, FetchesAndNormalizes) {
  ExternalProvider provider("http://127.0.0.1:" + std::to_string(port_) + "/embed", 16);
  const EmbeddingVector v = provider.embed("hello");
  ASSERT_EQ(v.size(), 16u);
  double norm2 = 0.0;
  for (double x : v) norm2 += x * x;
  EXPECT_NEAR(std::sqrt(norm2), 1.0, 1e-9);
  EXPECT_EQ(v[5], 1.0);  // "hello" has 5 chars
}

TEST_F(ExternalProviderTest, WrongDimensionThrows) {
  ExternalProvider provider("http://127.0.0.1:" + std::to_string(port_) + "/embed", 16);
  EXPECT_THROW(provider.embed("wrong-dim"), DimensionMismatch);
}

TEST(ExternalProvider, UnreachableEndpointThrows) {
  ExternalProvider provider("http://127.0.0.1:1/embed", 16);
  EXPECT_THROW(provider.embed("hello"), ProviderUnavailable);
}

TEST(MakeProvider, CacheIsTransparent) {
  test::TempDir tmp;
  ProviderConfig cfg;
  cfg.kind = ProviderKind::Hashed;
  cfg.cache_path = (tmp.path() / "c.jsonl").string();
  auto provider = make_provider(cfg);
  EXPECT_EQ(provider->fingerprint(), "hashed:d256");
  provider->embed("abc");
  EXPECT_TRUE(std::filesystem::exists(cfg.cache_path));
}

}  // namespace
}  // namespace openfsp
