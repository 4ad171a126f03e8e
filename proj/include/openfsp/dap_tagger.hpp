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

#include <fstream>
#include <map>
#include <random>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "openfsp/dataset.hpp"
#include "openfsp/errors.hpp"
#include "openfsp/ontology.hpp"
#include "openfsp/text.hpp"

namespace openfsp {

inline constexpr std::string_view kBoundaryBefore = "<s>";
inline constexpr std::string_view kBoundaryAfter = "</s>";

// BIO tag set over the eight agnostic slot types: O plus B-/I- per type.
inline std::vector<std::string> agnostic_tag_set() {
  std::vector<std::string> tags = {"O"};
  for (auto slot : kAgnosticSlots) {
    tags.push_back("B-" + std::string(slot));
    tags.push_back("I-" + std::string(slot));
  }
  return tags;
}

// Tag set derived from the slot labels present in a record set; used when
// training a fully supervised tagger over domain-specific labels.
inline std::vector<std::string> tag_set_from_records(const std::vector<const Record*>& records) {
  std::set<std::string> labels;
  for (const Record* r : records) {
    for (const Span& s : r->frame.slots) labels.insert(s.label);
  }
  std::vector<std::string> tags = {"O"};
  for (const std::string& l : labels) {
    tags.push_back("B-" + l);
    tags.push_back("I-" + l);
  }
  return tags;
}

// Per-token features: surface form, shape, affixes, immediate neighbors,
// previous predicted tag, digit flag. Order is fixed; scoring sums in this
// order so decoding is bit-deterministic.
inline std::vector<std::string> featurize(const std::vector<std::string>& tokens, size_t position,
                                          const std::string& prev_tag) {
  const std::string w = to_lower(tokens[position]);
  std::vector<std::string> feats;
  feats.reserve(12);
  feats.push_back("w=" + w);
  feats.push_back("shape=" + word_shape(tokens[position]));
  for (size_t n = 1; n <= 3 && n <= w.size(); ++n) {
    feats.push_back("pre" + std::to_string(n) + "=" + w.substr(0, n));
    feats.push_back("suf" + std::to_string(n) + "=" + w.substr(w.size() - n));
  }
  feats.push_back("prev=" + (position == 0 ? std::string(kBoundaryBefore)
                                           : to_lower(tokens[position - 1])));
  feats.push_back("next=" + (position + 1 == tokens.size() ? std::string(kBoundaryAfter)
                                                           : to_lower(tokens[position + 1])));
  feats.push_back("ptag=" + prev_tag);
  feats.push_back(std::string("isdigit=") + (is_all_digits(tokens[position]) ? "true" : "false"));
  return feats;
}

// Gold BIO sequence for a frame over n tokens.
inline std::vector<std::string> bio_tags_for(const Frame& frame, size_t n) {
  std::vector<std::string> tags(n, "O");
  for (const Span& s : frame.slots) {
    for (int i = s.start; i < s.end; ++i) {
      tags[i] = (i == s.start ? "B-" : "I-") + s.label;
    }
  }
  return tags;
}

// Orphan I-t (no preceding B-t/I-t of the same type) becomes B-t. Leaves
// the number of contiguous labeled runs unchanged.
inline std::vector<std::string> bio_repair(std::vector<std::string> tags) {
  for (size_t i = 0; i < tags.size(); ++i) {
    if (!tags[i].starts_with("I-")) continue;
    const std::string type = tags[i].substr(2);
    const bool continues = i > 0 && (tags[i - 1] == "B-" + type || tags[i - 1] == "I-" + type);
    if (!continues) tags[i] = "B-" + type;
  }
  return tags;
}

// Contiguous B/I runs of a repaired tag sequence become slot spans; the
// intent span always covers the whole utterance.
inline Frame spans_from_tags(const std::vector<std::string>& tags) {
  Frame frame;
  frame.domain = "agnostic";
  frame.intent = {0, static_cast<int>(tags.size()), std::string(kIntentSentinel)};
  for (size_t i = 0; i < tags.size(); ++i) {
    if (!tags[i].starts_with("B-")) continue;
    const std::string type = tags[i].substr(2);
    size_t end = i + 1;
    while (end < tags.size() && tags[end] == "I-" + type) ++end;
    frame.slots.push_back({static_cast<int>(i), static_cast<int>(end), type});
    i = end - 1;
  }
  return frame;
}

struct TaggerModel {
  std::vector<std::string> tags;
  std::unordered_map<std::string, std::vector<double>> weights;  // feature -> per-tag weight
  int epochs = 0;
  uint64_t seed = 0;

  int tag_index(const std::string& tag) const {
    for (size_t i = 0; i < tags.size(); ++i) {
      if (tags[i] == tag) return static_cast<int>(i);
    }
    return -1;
  }

  void save(std::ostream& out) const {
    out << json{{"version", 1}, {"tags", tags}, {"epochs", epochs}, {"seed", seed}}.dump() << "\n";
    std::vector<const std::string*> feats;
    feats.reserve(weights.size());
    for (const auto& [f, _] : weights) feats.push_back(&f);
    std::sort(feats.begin(), feats.end(),
              [](const std::string* a, const std::string* b) { return *a < *b; });
    for (const std::string* f : feats) {
      const auto& row = weights.at(*f);
      for (size_t t = 0; t < row.size(); ++t) {
        if (row[t] == 0.0) continue;
        out << json::array({*f, tags[t], row[t]}).dump() << "\n";
      }
    }
  }

  void save_file(const std::filesystem::path& path) const {
    std::ofstream out(path);
    save(out);
  }

  static TaggerModel load(std::istream& in) {
    TaggerModel model;
    std::string line;
    if (!std::getline(in, line)) throw SchemaError("empty tagger model");
    json header = json::parse(line, nullptr, false);
    if (header.is_discarded() || !header.contains("tags")) {
      throw SchemaError("bad tagger model header");
    }
    model.tags = header["tags"].get<std::vector<std::string>>();
    model.epochs = header.value("epochs", 0);
    model.seed = header.value("seed", uint64_t{0});
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      json triple = json::parse(line, nullptr, false);
      if (triple.is_discarded() || !triple.is_array() || triple.size() != 3) {
        throw SchemaError("bad tagger model entry: " + line);
      }
      const int t = model.tag_index(triple[1].get<std::string>());
      if (t < 0) throw SchemaError("unknown tag in model: " + triple[1].get<std::string>());
      auto& row = model.weights[triple[0].get<std::string>()];
      if (row.empty()) row.assign(model.tags.size(), 0.0);
      row[t] = triple[2].get<double>();
    }
    return model;
  }

  static TaggerModel load_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot open tagger model: " + path.string());
    return load(in);
  }
};

namespace detail {

inline int argmax_tag(const std::unordered_map<std::string, std::vector<double>>& weights,
                      const std::vector<std::string>& feats, size_t n_tags) {
  std::vector<double> scores(n_tags, 0.0);
  for (const std::string& f : feats) {
    auto it = weights.find(f);
    if (it == weights.end()) continue;
    for (size_t t = 0; t < n_tags; ++t) scores[t] += it->second[t];
  }
  int best = 0;
  for (size_t t = 1; t < n_tags; ++t) {
    if (scores[t] > scores[best]) best = static_cast<int>(t);
  }
  return best;
}

// Averaged-perceptron accumulators with lazy timestamp updates.
struct AveragedWeights {
  size_t n_tags = 0;
  std::unordered_map<std::string, std::vector<double>> w;
  std::unordered_map<std::string, std::vector<double>> acc;
  std::unordered_map<std::string, std::vector<uint64_t>> stamp;
  uint64_t step = 0;

  void update(const std::string& feature, int tag, double delta) {
    auto& row = w[feature];
    if (row.empty()) {
      row.assign(n_tags, 0.0);
      acc[feature].assign(n_tags, 0.0);
      stamp[feature].assign(n_tags, 0);
    }
    auto& a = acc[feature];
    auto& s = stamp[feature];
    a[tag] += static_cast<double>(step - s[tag]) * row[tag];
    s[tag] = step;
    row[tag] += delta;
  }

  std::unordered_map<std::string, std::vector<double>> finalize() {
    std::unordered_map<std::string, std::vector<double>> averaged;
    const double total = static_cast<double>(step == 0 ? 1 : step);
    for (auto& [f, row] : w) {
      auto& a = acc[f];
      auto& s = stamp[f];
      std::vector<double> avg(n_tags, 0.0);
      for (size_t t = 0; t < n_tags; ++t) {
        a[t] += static_cast<double>(step - s[t]) * row[t];
        s[t] = step;
        if (a[t] != 0.0) avg[t] = a[t] / total;
      }
      averaged[f] = std::move(avg);
    }
    return averaged;
  }
};

}  // namespace detail

// Standard averaged perceptron: greedy left-to-right decoding with the
// current weights, an update on every mistaken tag, final weights averaged
// over all steps. Epoch shuffling is the only randomness and is seeded.
inline TaggerModel train_tagger(const std::vector<const Record*>& records, int epochs = 5,
                                uint64_t seed = 1,
                                std::vector<std::string> tags = agnostic_tag_set()) {
  if (epochs < 1) throw EmptyTrainingSet("epochs must be >= 1");
  if (records.empty()) throw EmptyTrainingSet("no training records");

  TaggerModel model;
  model.tags = std::move(tags);
  model.epochs = epochs;
  model.seed = seed;

  detail::AveragedWeights avg;
  avg.n_tags = model.tags.size();

  std::vector<size_t> order(records.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::mt19937_64 rng(seed);

  for (int epoch = 0; epoch < epochs; ++epoch) {
    for (size_t i = 0; i + 1 < order.size(); ++i) {
      const size_t j = i + rng() % (order.size() - i);
      std::swap(order[i], order[j]);
    }
    for (size_t idx : order) {
      const Record& rec = *records[idx];
      const auto& tokens = rec.utterance.tokens;
      const std::vector<std::string> gold = bio_tags_for(rec.frame, tokens.size());
      ++avg.step;
      std::string prev_tag = std::string(kBoundaryBefore);
      for (size_t pos = 0; pos < tokens.size(); ++pos) {
        const std::vector<std::string> feats = featurize(tokens, pos, prev_tag);
        const int pred = detail::argmax_tag(avg.w, feats, avg.n_tags);
        const int gold_t = model.tag_index(gold[pos]);
        if (gold_t < 0) throw UnknownLabel("tag outside model tag set: " + gold[pos]);
        if (pred != gold_t) {
          for (const std::string& f : feats) {
            avg.update(f, gold_t, 1.0);
            avg.update(f, pred, -1.0);
          }
        }
        prev_tag = model.tags[pred];
      }
    }
  }
  model.weights = avg.finalize();
  return model;
}

inline std::vector<std::string> decode_tags(const std::vector<std::string>& tokens,
                                            const TaggerModel& model) {
  std::vector<std::string> tags;
  tags.reserve(tokens.size());
  std::string prev_tag = std::string(kBoundaryBefore);
  for (size_t pos = 0; pos < tokens.size(); ++pos) {
    const std::vector<std::string> feats = featurize(tokens, pos, prev_tag);
    const int t = detail::argmax_tag(model.weights, feats, model.tags.size());
    tags.push_back(model.tags[t]);
    prev_tag = model.tags[t];
  }
  return bio_repair(std::move(tags));
}

// The DAP: utterance in, agnostic frame out.
inline Frame tag(const Utterance& utterance, const TaggerModel& model) {
  return spans_from_tags(decode_tags(utterance.tokens, model));
}

// "Golden parse" mode: the agnostic frame obtained by projecting the gold
// annotation, i.e. a parser that never errs.
inline Frame golden_parse(const Record& rec, const OntologyMap& map) {
  return project_agnostic(rec, map).frame;
}

}  // namespace openfsp
