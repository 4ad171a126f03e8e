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

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <httplib.h>
#include <json.hpp>
#include <openssl/evp.h>

#include "openfsp/errors.hpp"
#include "openfsp/text.hpp"

namespace openfsp {

using json = nlohmann::ordered_json;

// Unit-norm (or all-zero) sentence vector.
using EmbeddingVector = std::vector<double>;

inline constexpr int kDefaultDim = 256;

inline std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr);
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xf];
  }
  return out;
}

// The built-in sentence encoder: signed feature hashing over lowercased word
// unigrams and character trigrams of the boundary-padded string ("^"+s+"$"),
// FNV-1a 64-bit, sign from bit 63, index h mod dim, then L2 normalization.
// Pure and bit-exact across platforms; empty input gives the zero vector.
inline EmbeddingVector hashed_embedding(const std::string& text, int dim = kDefaultDim) {
  if (dim < 8) throw DimensionMismatch("embedding dimension must be >= 8");
  EmbeddingVector v(static_cast<size_t>(dim), 0.0);
  const std::string lower = to_lower(text);
  auto add = [&](std::string_view feature) {
    const uint64_t h = fnv1a64(feature);
    const double sign = (h >> 63) ? -1.0 : 1.0;
    v[h % static_cast<uint64_t>(dim)] += sign;
  };
  for (const std::string& w : tokenize(lower)) add(w);
  if (!lower.empty()) {
    const std::string padded = "^" + lower + "$";
    for (size_t i = 0; i + 3 <= padded.size(); ++i) {
      add(std::string_view(padded).substr(i, 3));
    }
  }
  double norm2 = 0.0;
  for (double x : v) norm2 += x * x;
  if (norm2 > 0.0) {
    const double norm = std::sqrt(norm2);
    for (double& x : v) x /= norm;
  }
  return v;
}

// dot(u,v) / (|u||v|); 0 when either vector has zero norm.
inline double cosine(const EmbeddingVector& u, const EmbeddingVector& v) {
  if (u.size() != v.size()) {
    throw DimensionMismatch("cosine over vectors of dimension " + std::to_string(u.size()) +
                            " and " + std::to_string(v.size()));
  }
  double dot = 0.0, nu = 0.0, nv = 0.0;
  for (size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    nu += u[i] * u[i];
    nv += v[i] * v[i];
  }
  if (nu == 0.0 || nv == 0.0) return 0.0;
  return dot / (std::sqrt(nu) * std::sqrt(nv));
}

// ---------------------------------------------------------------------------
// Providers.
// ---------------------------------------------------------------------------

enum class ProviderKind { Hashed, Cached, External };

inline std::string provider_kind_name(ProviderKind k) {
  switch (k) {
    case ProviderKind::Hashed: return "hashed";
    case ProviderKind::Cached: return "cached";
    case ProviderKind::External: return "external";
  }
  return "hashed";
}

struct ProviderConfig {
  ProviderKind kind = ProviderKind::Hashed;
  int dimension = kDefaultDim;
  std::string cache_path;  // required for Cached
  std::string endpoint;    // required for External

  void validate() const {
    if (dimension < 8) throw DimensionMismatch("provider dimension must be >= 8");
    if (kind == ProviderKind::External && endpoint.empty()) {
      throw ProviderUnavailable("external provider requires an endpoint");
    }
    if (kind == ProviderKind::Cached && cache_path.empty()) {
      throw CacheCorrupt("cached provider requires a cache path");
    }
  }

  // Identifies which encoder produced a vector. Heads trained against one
  // fingerprint refuse to serve another. Caching is transparent and does not
  // change the fingerprint.
  std::string fingerprint() const {
    if (kind == ProviderKind::External) {
      return "external:" + endpoint + ":d" + std::to_string(dimension);
    }
    return "hashed:d" + std::to_string(dimension);
  }
};

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual EmbeddingVector embed(const std::string& text) = 0;
  virtual int dim() const = 0;
  virtual std::string fingerprint() const = 0;
};

class HashedProvider final : public EmbeddingProvider {
 public:
  explicit HashedProvider(int dim = kDefaultDim) : dim_(dim) {}
  EmbeddingVector embed(const std::string& text) override { return hashed_embedding(text, dim_); }
  int dim() const override { return dim_; }
  std::string fingerprint() const override { return "hashed:d" + std::to_string(dim_); }

 private:
  int dim_;
};

// Speaks the wire protocol: POST {"texts":[...]} -> {"vectors":[[...]]}.
// Returned vectors are L2-normalized locally so the unit-norm invariant
// holds no matter what the endpoint serves.
class ExternalProvider final : public EmbeddingProvider {
 public:
  ExternalProvider(std::string endpoint, int dim = kDefaultDim)
      : endpoint_(std::move(endpoint)), dim_(dim) {
    const auto scheme_end = endpoint_.find("://");
    std::string rest = scheme_end == std::string::npos ? endpoint_ : endpoint_.substr(scheme_end + 3);
    const auto slash = rest.find('/');
    host_ = "http://" + (slash == std::string::npos ? rest : rest.substr(0, slash));
    path_ = slash == std::string::npos ? "/" : rest.substr(slash);
  }

  EmbeddingVector embed(const std::string& text) override {
    httplib::Client client(host_);
    client.set_connection_timeout(5);
    const json request{{"texts", json::array({text})}};
    auto res = client.Post(path_, request.dump(), "application/json");
    if (!res || res->status != 200) {
      throw ProviderUnavailable("embedding endpoint " + endpoint_ + " unreachable or failed");
    }
    json body = json::parse(res->body, nullptr, false);
    if (body.is_discarded() || !body.contains("vectors") || !body["vectors"].is_array() ||
        body["vectors"].empty()) {
      throw ProviderUnavailable("embedding endpoint returned malformed payload");
    }
    EmbeddingVector v = body["vectors"][0].get<EmbeddingVector>();
    if (static_cast<int>(v.size()) != dim_) {
      throw DimensionMismatch("endpoint returned dimension " + std::to_string(v.size()) +
                              ", expected " + std::to_string(dim_));
    }
    double norm2 = 0.0;
    for (double x : v) norm2 += x * x;
    if (norm2 > 0.0) {
      const double norm = std::sqrt(norm2);
      for (double& x : v) x /= norm;
    }
    return v;
  }

  int dim() const override { return dim_; }
  std::string fingerprint() const override {
    return "external:" + endpoint_ + ":d" + std::to_string(dim_);
  }

 private:
  std::string endpoint_;
  std::string host_;
  std::string path_;
  int dim_;
};

// Persistent JSONL cache, one {"text_sha256","dim","values"} record per line.
// Reads are in-memory after load; writes append.
class EmbeddingCache {
 public:
  EmbeddingCache(std::filesystem::path path, int dim) : path_(std::move(path)), dim_(dim) {
    if (!std::filesystem::exists(path_)) return;
    std::ifstream in(path_);
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      json rec = json::parse(line, nullptr, false);
      if (rec.is_discarded() || !rec.contains("text_sha256") || !rec.contains("dim") ||
          !rec.contains("values") || !rec["values"].is_array()) {
        throw CacheCorrupt("bad cache record at " + path_.string() + ":" + std::to_string(lineno));
      }
      if (rec["dim"].get<int>() != dim_ ||
          rec["values"].size() != static_cast<size_t>(dim_)) {
        throw CacheCorrupt("cache record dimension mismatch at " + path_.string() + ":" +
                           std::to_string(lineno));
      }
      entries_[rec["text_sha256"].get<std::string>()] = rec["values"].get<EmbeddingVector>();
    }
  }

  std::optional<EmbeddingVector> lookup(const std::string& text) const {
    auto it = entries_.find(sha256_hex(text));
    if (it == entries_.end()) return std::nullopt;
    return it->second;
  }

  void store(const std::string& text, const EmbeddingVector& v) {
    const std::string key = sha256_hex(text);
    if (entries_.count(key)) return;
    entries_[key] = v;
    std::ofstream out(path_, std::ios::app);
    json rec{{"text_sha256", key}, {"dim", dim_}, {"values", v}};
    out << rec.dump() << "\n";
  }

  size_t size() const { return entries_.size(); }

 private:
  std::filesystem::path path_;
  int dim_;
  std::unordered_map<std::string, EmbeddingVector> entries_;
};

class CachedProvider final : public EmbeddingProvider {
 public:
  CachedProvider(std::unique_ptr<EmbeddingProvider> inner, std::filesystem::path cache_path)
      : inner_(std::move(inner)), cache_(std::move(cache_path), inner_->dim()) {}

  EmbeddingVector embed(const std::string& text) override {
    if (auto hit = cache_.lookup(text)) return *hit;
    EmbeddingVector v = inner_->embed(text);
    cache_.store(text, v);
    return v;
  }

  int dim() const override { return inner_->dim(); }
  std::string fingerprint() const override { return inner_->fingerprint(); }

 private:
  std::unique_ptr<EmbeddingProvider> inner_;
  EmbeddingCache cache_;
};

// In-memory memoization, used when the same texts are embedded repeatedly
// within one process. Transparent like the file cache.
class MemoProvider final : public EmbeddingProvider {
 public:
  explicit MemoProvider(EmbeddingProvider& inner) : inner_(inner) {}

  EmbeddingVector embed(const std::string& text) override {
    auto it = memo_.find(text);
    if (it != memo_.end()) return it->second;
    EmbeddingVector v = inner_.embed(text);
    memo_.emplace(text, v);
    return v;
  }

  int dim() const override { return inner_.dim(); }
  std::string fingerprint() const override { return inner_.fingerprint(); }

 private:
  EmbeddingProvider& inner_;
  std::unordered_map<std::string, EmbeddingVector> memo_;
};

inline std::unique_ptr<EmbeddingProvider> make_provider(const ProviderConfig& cfg) {
  cfg.validate();
  std::unique_ptr<EmbeddingProvider> base;
  if (cfg.kind == ProviderKind::External) {
    base = std::make_unique<ExternalProvider>(cfg.endpoint, cfg.dimension);
  } else {
    base = std::make_unique<HashedProvider>(cfg.dimension);
  }
  if (!cfg.cache_path.empty()) {
    return std::make_unique<CachedProvider>(std::move(base), cfg.cache_path);
  }
  return base;
}

// Convenience form: look up or compute-and-persist through a configured
// provider. Output is identical to embedding directly.
inline EmbeddingVector embed_cached(const std::string& text, const ProviderConfig& cfg) {
  return make_provider(cfg)->embed(text);
}

}  // namespace openfsp
