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
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <numeric>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "openfsp/dap_tagger.hpp"
#include "openfsp/embedding.hpp"
#include "openfsp/errors.hpp"
#include "openfsp/head.hpp"
#include "openfsp/ontology.hpp"

namespace openfsp {

// A frame shape from the target space: an intent plus a slot-label multiset,
// no span geometry. slot_labels is kept sorted as the canonical multiset
// form.
struct FrameTemplate {
  std::string intent;
  std::vector<std::string> slot_labels;
  std::string domain;

  static FrameTemplate make(std::string intent, std::vector<std::string> slots,
                            std::string domain) {
    std::sort(slots.begin(), slots.end());
    return {std::move(intent), std::move(slots), std::move(domain)};
  }

  json to_json() const {
    return json{{"intent", intent}, {"slots", slot_labels}, {"domain", domain}};
  }
  static FrameTemplate from_json(const json& j) {
    return make(j.at("intent").get<std::string>(),
                j.at("slots").get<std::vector<std::string>>(),
                j.value("domain", std::string{}));
  }

  friend bool operator==(const FrameTemplate&, const FrameTemplate&) = default;
  // Content-based order; used as the deterministic ranking tie-break.
  friend auto operator<=>(const FrameTemplate&, const FrameTemplate&) = default;
};

// The gold template of an annotated record.
inline FrameTemplate template_of(const Record& rec) {
  std::vector<std::string> slots;
  slots.reserve(rec.frame.slots.size());
  for (const Span& s : rec.frame.slots) slots.push_back(s.label);
  return FrameTemplate::make(rec.frame.intent.label, std::move(slots), rec.domain);
}

// Probability of a label given a text, however that probability is produced
// (trained head, cosine fallback, test oracle).
using LabelProbFn = std::function<double(const std::string& text, const std::string& label)>;

// Eq. 1 scorer backed by a trained head. Distributions are cached per text.
inline LabelProbFn make_head_scorer(const Head& head, EmbeddingProvider& provider) {
  if (provider.fingerprint() != head.provider_fingerprint) {
    throw ProviderMismatch("head was trained with provider '" + head.provider_fingerprint +
                           "', got '" + provider.fingerprint() + "'");
  }
  auto cache = std::make_shared<std::unordered_map<std::string, std::vector<double>>>();
  const Head* h = &head;
  EmbeddingProvider* p = &provider;
  return [cache, h, p](const std::string& text, const std::string& label) {
    auto it = cache->find(text);
    if (it == cache->end()) {
      it = cache->emplace(text, predict_proba_from_vec(p->embed(text), *h)).first;
    }
    const int idx = h->label_index(label);
    if (idx < 0) throw UnknownLabel("label " + label + " not in head");
    return it->second[idx];
  };
}

// Overload keeping the head alive inside the closure.
inline LabelProbFn make_head_scorer(std::shared_ptr<const Head> head,
                                    EmbeddingProvider& provider) {
  if (provider.fingerprint() != head->provider_fingerprint) {
    throw ProviderMismatch("head was trained with provider '" + head->provider_fingerprint +
                           "', got '" + provider.fingerprint() + "'");
  }
  auto cache = std::make_shared<std::unordered_map<std::string, std::vector<double>>>();
  EmbeddingProvider* p = &provider;
  return [cache, head, p](const std::string& text, const std::string& label) {
    auto it = cache->find(text);
    if (it == cache->end()) {
      it = cache->emplace(text, predict_proba_from_vec(p->embed(text), *head)).first;
    }
    const int idx = head->label_index(label);
    if (idx < 0) throw UnknownLabel("label " + label + " not in head");
    return it->second[idx];
  };
}

// Headless scorer: max cosine similarity against the label's example texts,
// rescaled from [-1,1] to [0,1] via (c+1)/2.
inline LabelProbFn make_cosine_scorer(const std::map<std::string, std::vector<std::string>>& examples,
                                      EmbeddingProvider& provider) {
  auto example_vecs =
      std::make_shared<std::map<std::string, std::vector<EmbeddingVector>>>();
  for (const auto& [label, texts] : examples) {
    for (const std::string& t : texts) (*example_vecs)[label].push_back(provider.embed(t));
  }
  auto cache = std::make_shared<std::unordered_map<std::string, EmbeddingVector>>();
  EmbeddingProvider* p = &provider;
  return [example_vecs, cache, p](const std::string& text, const std::string& label) {
    auto ex = example_vecs->find(label);
    if (ex == example_vecs->end()) {
      throw UnknownLabel("no simple-label examples for " + label);
    }
    auto it = cache->find(text);
    if (it == cache->end()) it = cache->emplace(text, p->embed(text)).first;
    double best = -1.0;
    for (const EmbeddingVector& v : ex->second) best = std::max(best, cosine(it->second, v));
    return (best + 1.0) / 2.0;
  };
}

// ---------------------------------------------------------------------------
// Eligibility and scoring.
// ---------------------------------------------------------------------------

// Type constraint: the template passes iff its psi-image multiset equals the
// query's agnostic label multiset (which also forces equal arity). Intents
// always type-match.
inline bool eligible(const FrameTemplate& tmpl, const Frame& query, const OntologyMap& map) {
  if (tmpl.slot_labels.size() != query.slots.size()) return false;
  std::map<std::string, int> want;
  for (const Span& s : query.slots) ++want[s.label];
  for (const std::string& l : tmpl.slot_labels) {
    auto it = want.find(map.map_slot(l));
    if (it == want.end() || it->second == 0) return false;
    --it->second;
  }
  return true;
}

namespace detail {

// Maximum-sum square assignment (Hungarian with potentials, O(n^3)).
// Returns the chosen column per row.
inline std::vector<int> max_assignment(const std::vector<std::vector<double>>& score) {
  const int n = static_cast<int>(score.size());
  const double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, kInf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      int j1 = -1;
      double delta = kInf;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = -score[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  std::vector<int> row_to_col(n, -1);
  for (int j = 1; j <= n; ++j) {
    if (p[j] > 0) row_to_col[p[j] - 1] = j - 1;
  }
  return row_to_col;
}

// Best bijection within one block: exhaustive for small blocks (first
// lexicographic maximizer wins), assignment algorithm above that.
inline constexpr size_t kExhaustiveBlockLimit = 6;

inline std::vector<int> best_block_assignment(const std::vector<std::vector<double>>& score) {
  const size_t n = score.size();
  if (n <= kExhaustiveBlockLimit) {
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<int> best = perm;
    double best_sum = 0.0;
    bool first = true;
    do {
      double sum = 0.0;
      for (size_t i = 0; i < n; ++i) sum += score[i][perm[i]];
      if (first || sum > best_sum) {
        best_sum = sum;
        best = perm;
        first = false;
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
  }
  return max_assignment(score);
}

}  // namespace detail

// One candidate with its similarity score and the slot assignment realizing
// it: assignment[i] is the label given to the i-th query span.
struct ScoredTemplate {
  FrameTemplate tmpl;
  double score = 0.0;
  std::vector<std::string> assignment;

  json to_json() const {
    return json{{"template", tmpl.to_json()}, {"score", score}, {"assignment", assignment}};
  }
};

struct MatchResult {
  std::vector<ScoredTemplate> ranked;
  Frame query;
  size_t eligible_count = 0;  // candidates surviving the type filter

  json to_json() const {
    json slots = json::array();
    for (const Span& s : query.slots) {
      slots.push_back(json{{"start", s.start}, {"end", s.end}, {"label", s.label}});
    }
    json ranked_json = json::array();
    for (const ScoredTemplate& st : ranked) ranked_json.push_back(st.to_json());
    return json{{"query", json{{"intent", query.intent.label}, {"slots", slots}}},
                {"eligible", eligible_count},
                {"ranked", ranked_json}};
  }
};

namespace detail {

// Shared similarity core. Blocks are the agnostic-type groups when the type
// constraint is on, or one all-slots block when only arity is enforced (the
// headless+typeless baseline). The final score is recomputed in canonical
// order (intent first, then template slots by index) so equal assignments
// give bit-equal scores regardless of how the maximizer found them.
inline ScoredTemplate score_template(const FrameTemplate& tmpl, const Frame& query,
                                     const LabelProbFn& prob, const OntologyMap& map,
                                     const Utterance& utterance, bool type_constrained) {
  const size_t m = tmpl.slot_labels.size();
  std::vector<int> tmpl_to_query(m, -1);

  if (m > 0) {
    std::map<std::string, std::vector<int>> tmpl_blocks;
    std::map<std::string, std::vector<int>> query_blocks;
    if (type_constrained) {
      for (size_t t = 0; t < m; ++t) {
        tmpl_blocks[map.map_slot(tmpl.slot_labels[t])].push_back(static_cast<int>(t));
      }
      for (size_t q = 0; q < query.slots.size(); ++q) {
        query_blocks[query.slots[q].label].push_back(static_cast<int>(q));
      }
    } else {
      for (size_t t = 0; t < m; ++t) tmpl_blocks["*"].push_back(static_cast<int>(t));
      for (size_t q = 0; q < query.slots.size(); ++q) {
        query_blocks["*"].push_back(static_cast<int>(q));
      }
    }
    for (const auto& [type, t_idx] : tmpl_blocks) {
      const auto& q_idx = query_blocks.at(type);
      std::vector<std::vector<double>> block(t_idx.size(),
                                             std::vector<double>(q_idx.size(), 0.0));
      for (size_t a = 0; a < t_idx.size(); ++a) {
        for (size_t b = 0; b < q_idx.size(); ++b) {
          block[a][b] =
              prob(utterance.span_text(query.slots[q_idx[b]]), tmpl.slot_labels[t_idx[a]]);
        }
      }
      const std::vector<int> chosen = best_block_assignment(block);
      for (size_t a = 0; a < t_idx.size(); ++a) tmpl_to_query[t_idx[a]] = q_idx[chosen[a]];
    }
  }

  double sum = prob(utterance.text, tmpl.intent);
  for (size_t t = 0; t < m; ++t) {
    sum += prob(utterance.span_text(query.slots[tmpl_to_query[t]]), tmpl.slot_labels[t]);
  }

  ScoredTemplate out;
  out.tmpl = tmpl;
  out.score = sum / static_cast<double>(m + 1);
  out.assignment.assign(query.slots.size(), "");
  for (size_t t = 0; t < m; ++t) out.assignment[tmpl_to_query[t]] = tmpl.slot_labels[t];
  return out;
}

inline bool ranked_before(const ScoredTemplate& a, const ScoredTemplate& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.tmpl < b.tmpl;
}

}  // namespace detail

// Similarity of an eligible template to the query frame: the best mean of
// the intent probability and one probability per slot, maximized over
// type-preserving bijections between template labels and query spans.
inline ScoredTemplate sim(const FrameTemplate& tmpl, const Frame& query, const LabelProbFn& prob,
                          const OntologyMap& map, const Utterance& utterance) {
  if (!eligible(tmpl, query, map)) {
    throw Ineligible("template " + tmpl.intent + " does not type-match the query");
  }
  return detail::score_template(tmpl, query, prob, map, utterance, /*type_constrained=*/true);
}

// Arity-only variant used by the typeless baseline: any bijection between
// template labels and query spans is allowed.
inline ScoredTemplate sim_arity_only(const FrameTemplate& tmpl, const Frame& query,
                                     const LabelProbFn& prob, const OntologyMap& map,
                                     const Utterance& utterance) {
  if (tmpl.slot_labels.size() != query.slots.size()) {
    throw Ineligible("template arity differs from query arity");
  }
  return detail::score_template(tmpl, query, prob, map, utterance, /*type_constrained=*/false);
}

enum class FilterMode { Typed, ArityOnly };

// Filters the inventory, scores the survivors, sorts by descending score
// with a content-based tie-break, and keeps the top k (k <= 0 keeps all).
inline MatchResult rank(const Frame& query, const std::vector<FrameTemplate>& inventory,
                        const LabelProbFn& prob, const OntologyMap& map,
                        const Utterance& utterance, int k,
                        FilterMode mode = FilterMode::Typed) {
  if (inventory.empty()) throw NoEligibleFrame("empty template inventory");
  MatchResult result;
  result.query = query;
  for (const FrameTemplate& tmpl : inventory) {
    const bool ok = mode == FilterMode::Typed
                        ? eligible(tmpl, query, map)
                        : tmpl.slot_labels.size() == query.slots.size();
    if (!ok) continue;
    result.ranked.push_back(
        detail::score_template(tmpl, query, prob, map, utterance, mode == FilterMode::Typed));
  }
  result.eligible_count = result.ranked.size();
  if (result.ranked.empty()) {
    throw NoEligibleFrame("no template matches the query's type signature");
  }
  std::sort(result.ranked.begin(), result.ranked.end(), detail::ranked_before);
  if (k > 0 && result.ranked.size() > static_cast<size_t>(k)) result.ranked.resize(k);
  return result;
}

// One registered domain as served to the matcher.
struct DomainBundle {
  std::string domain;
  std::vector<FrameTemplate> inventory;
  Head head;
};

// End-to-end pipeline: tag the utterance, then rank the union of all
// registered inventories, each scored with its own domain head.
inline MatchResult parse(const Utterance& utterance, const TaggerModel& model,
                         const std::vector<DomainBundle>& domains, const OntologyMap& map,
                         EmbeddingProvider& provider, int k) {
  if (domains.empty()) throw NoEligibleFrame("no domains registered");
  const Frame query = tag(utterance, model);
  MatchResult result;
  result.query = query;
  for (const DomainBundle& bundle : domains) {
    const LabelProbFn prob = make_head_scorer(bundle.head, provider);
    for (const FrameTemplate& tmpl : bundle.inventory) {
      if (!eligible(tmpl, query, map)) continue;
      result.ranked.push_back(detail::score_template(tmpl, query, prob, map, utterance, true));
    }
  }
  result.eligible_count = result.ranked.size();
  if (result.ranked.empty()) {
    throw NoEligibleFrame("no registered template matches the query's type signature");
  }
  std::sort(result.ranked.begin(), result.ranked.end(), detail::ranked_before);
  if (k > 0 && result.ranked.size() > static_cast<size_t>(k)) result.ranked.resize(k);
  return result;
}

}  // namespace openfsp
