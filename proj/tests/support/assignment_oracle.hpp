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
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "openfsp/matcher.hpp"

namespace openfsp::test {

// Exhaustive-permutation reference for the similarity score: enumerates all
// bijections between template slots and query spans, keeps the
// type-preserving ones, and recomputes the canonical mean (intent first,
// then template slots in storage order) for the best. Independent of the
// blockwise implementation it checks.
inline std::optional<double> oracle_sim(const FrameTemplate& tmpl, const Frame& query,
                                        const LabelProbFn& prob, const OntologyMap& map,
                                        const Utterance& utterance) {
  const size_t m = tmpl.slot_labels.size();
  if (m != query.slots.size()) return std::nullopt;
  std::vector<int> perm(m);
  std::iota(perm.begin(), perm.end(), 0);
  std::optional<double> best;
  do {
    bool typed = true;
    for (size_t t = 0; t < m && typed; ++t) {
      typed = map.map_slot(tmpl.slot_labels[t]) == query.slots[perm[t]].label;
    }
    if (!typed) continue;
    double sum = prob(utterance.text, tmpl.intent);
    for (size_t t = 0; t < m; ++t) {
      sum += prob(utterance.span_text(query.slots[perm[t]]), tmpl.slot_labels[t]);
    }
    const double score = sum / static_cast<double>(m + 1);
    if (!best || score > *best) best = score;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

// One random matcher instance: a template and query with slot blocks of
// bounded size per agnostic type, plus a random probability table.
struct RandomInstance {
  FrameTemplate tmpl;
  Frame query;
  Utterance utterance;
  OntologyMap map;
  LabelProbFn prob;
};

inline RandomInstance make_random_instance(std::mt19937_64& rng, size_t max_block = 5,
                                           size_t max_types = 3) {
  RandomInstance inst;
  const size_t n_types = 1 + rng() % max_types;
  std::vector<std::string> tmpl_labels;
  std::vector<std::string> query_types;
  int label_id = 0;
  for (size_t ty = 0; ty < n_types; ++ty) {
    const std::string type = std::string(kAgnosticSlots[ty]);
    const size_t block = 1 + rng() % max_block;
    for (size_t b = 0; b < block; ++b) {
      const std::string label = "SL:L" + std::to_string(label_id++);
      inst.map.insert(label, type);
      tmpl_labels.push_back(label);
      query_types.push_back(type);
    }
  }
  // Independent shuffles so template storage order and query span order are
  // unrelated to block structure.
  for (size_t i = 0; i + 1 < tmpl_labels.size(); ++i) {
    std::swap(tmpl_labels[i], tmpl_labels[i + rng() % (tmpl_labels.size() - i)]);
  }
  for (size_t i = 0; i + 1 < query_types.size(); ++i) {
    std::swap(query_types[i], query_types[i + rng() % (query_types.size() - i)]);
  }

  std::vector<std::string> tokens;
  inst.query.domain = "agnostic";
  for (size_t q = 0; q < query_types.size(); ++q) {
    tokens.push_back("w" + std::to_string(q));
    inst.query.slots.push_back({static_cast<int>(q), static_cast<int>(q + 1), query_types[q]});
  }
  inst.utterance = Utterance::from_tokens(tokens);
  inst.query.intent = {0, static_cast<int>(tokens.size()), std::string(kIntentSentinel)};
  inst.tmpl = FrameTemplate::make("IN:T", tmpl_labels, "toy");

  auto table = std::make_shared<std::map<std::pair<std::string, std::string>, double>>();
  auto uniform = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  (*table)[{inst.utterance.text, "IN:T"}] = uniform();
  for (const Span& s : inst.query.slots) {
    for (const std::string& l : tmpl_labels) {
      (*table)[{inst.utterance.span_text(s), l}] = uniform();
    }
  }
  inst.prob = [table](const std::string& text, const std::string& label) {
    return table->at({text, label});
  };
  return inst;
}

}  // namespace openfsp::test
