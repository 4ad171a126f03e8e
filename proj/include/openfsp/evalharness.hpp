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
#include <cstdio>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "openfsp/dap_tagger.hpp"
#include "openfsp/dataset.hpp"
#include "openfsp/errors.hpp"
#include "openfsp/head.hpp"
#include "openfsp/matcher.hpp"
#include "openfsp/ontology.hpp"
#include "openfsp/registry.hpp"

namespace openfsp {

// Which frame source the pipeline evaluates: the trained parser (standard)
// or gold agnostic frames (golden-parse). The recall@3 and intent-accuracy
// settings run the standard pipeline; they exist so reports can be keyed by
// the metric they headline.
enum class Setting { Standard, GoldenParse, RecallAt3, IntentAcc };

enum class EvalBaseline { Proposed, MajorityVote, WoHead, WoHeadType, FullySupervised };

inline std::string setting_name(Setting s) {
  switch (s) {
    case Setting::Standard: return "standard";
    case Setting::GoldenParse: return "golden-parse";
    case Setting::RecallAt3: return "recall-at-3";
    case Setting::IntentAcc: return "intent-acc";
  }
  return "standard";
}

inline Setting setting_from_name(const std::string& name) {
  if (name == "standard") return Setting::Standard;
  if (name == "golden-parse") return Setting::GoldenParse;
  if (name == "recall-at-3") return Setting::RecallAt3;
  if (name == "intent-acc") return Setting::IntentAcc;
  throw SchemaError("unknown setting: " + name);
}

inline std::string baseline_name(EvalBaseline b) {
  switch (b) {
    case EvalBaseline::Proposed: return "proposed";
    case EvalBaseline::MajorityVote: return "majority-vote";
    case EvalBaseline::WoHead: return "wo-head";
    case EvalBaseline::WoHeadType: return "wo-head-type";
    case EvalBaseline::FullySupervised: return "fully-supervised";
  }
  return "proposed";
}

inline EvalBaseline baseline_from_name(const std::string& name) {
  if (name == "proposed") return EvalBaseline::Proposed;
  if (name == "majority-vote") return EvalBaseline::MajorityVote;
  if (name == "wo-head") return EvalBaseline::WoHead;
  if (name == "wo-head-type") return EvalBaseline::WoHeadType;
  if (name == "fully-supervised") return EvalBaseline::FullySupervised;
  throw SchemaError("unknown baseline: " + name);
}

struct EvalConfig {
  int examples_per_label = 50;
  std::vector<uint64_t> seeds = {1, 2, 3};
  Setting setting = Setting::Standard;
  EvalBaseline baseline = EvalBaseline::Proposed;
  int tagger_epochs = 5;
  TrainConfig head_cfg{};
  std::vector<std::string> domains;  // empty = every domain in the corpus

  void validate() const {
    if (seeds.empty()) throw SchemaError("at least one seed is required");
    if (examples_per_label < 1) throw SchemaError("examples_per_label must be >= 1");
    head_cfg.validate();
  }
};

// ---------------------------------------------------------------------------
// Metrics.
// ---------------------------------------------------------------------------

inline bool frames_equal(const Frame& a, const Frame& b) {
  if (a.intent.label != b.intent.label) return false;
  std::vector<Span> sa = a.slots, sb = b.slots;
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  return sa == sb;
}

// Exact-match frame accuracy. Defined only for nonempty, aligned lists.
inline double metric_frame_accuracy(const std::vector<Frame>& predictions,
                                    const std::vector<Frame>& golds) {
  if (golds.empty() || predictions.size() != golds.size()) {
    throw LengthMismatch("frame accuracy needs nonempty aligned prediction/gold lists");
  }
  size_t hits = 0;
  for (size_t i = 0; i < golds.size(); ++i) {
    if (frames_equal(predictions[i], golds[i])) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(golds.size());
}

// 1-based rank of the gold template in a ranked result, if present.
inline std::optional<size_t> gold_rank(const MatchResult& result, const FrameTemplate& gold) {
  for (size_t i = 0; i < result.ranked.size(); ++i) {
    if (result.ranked[i].tmpl.intent == gold.intent &&
        result.ranked[i].tmpl.slot_labels == gold.slot_labels) {
      return i + 1;
    }
  }
  return std::nullopt;
}

inline double metric_recall_at_k(const std::vector<MatchResult>& results,
                                 const std::vector<FrameTemplate>& golds, int k) {
  if (k < 1) throw LengthMismatch("recall@k needs k >= 1");
  if (golds.empty() || results.size() != golds.size()) {
    throw LengthMismatch("recall@k needs nonempty aligned result/gold lists");
  }
  size_t hits = 0;
  for (size_t i = 0; i < golds.size(); ++i) {
    auto r = gold_rank(results[i], golds[i]);
    if (r && *r <= static_cast<size_t>(k)) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(golds.size());
}

// Mean reciprocal rank of the gold template, 0 when absent from the ranking.
inline double metric_mrr(const std::vector<MatchResult>& results,
                         const std::vector<FrameTemplate>& golds) {
  if (golds.empty() || results.size() != golds.size()) {
    throw LengthMismatch("MRR needs nonempty aligned result/gold lists");
  }
  double sum = 0.0;
  for (size_t i = 0; i < golds.size(); ++i) {
    auto r = gold_rank(results[i], golds[i]);
    if (r) sum += 1.0 / static_cast<double>(*r);
  }
  return sum / static_cast<double>(golds.size());
}

// ---------------------------------------------------------------------------
// Baselines.
// ---------------------------------------------------------------------------

// Template frequencies from a domain's full train data, bucketed by arity
// for the |F| = |F_A| condition.
struct MajorityStats {
  std::map<size_t, std::vector<std::pair<FrameTemplate, size_t>>> by_arity;

  static MajorityStats from_records(const std::vector<const Record*>& records) {
    std::map<std::pair<std::string, std::vector<std::string>>, size_t> counts;
    std::string domain;
    for (const Record* rec : records) {
      FrameTemplate t = template_of(*rec);
      domain = t.domain;
      ++counts[{t.intent, t.slot_labels}];
    }
    MajorityStats stats;
    for (const auto& [key, count] : counts) {
      stats.by_arity[key.second.size()].push_back(
          {FrameTemplate{key.first, key.second, domain}, count});
    }
    return stats;
  }
};

// The most frequent template whose arity matches the query's; ties resolve
// lexicographically. The map iteration above already yields candidates in
// template order, so the first strict maximum wins.
inline FrameTemplate baseline_majority_vote(const Frame& query, const MajorityStats& stats) {
  auto it = stats.by_arity.find(query.slots.size());
  if (it == stats.by_arity.end() || it->second.empty()) {
    throw NoEligibleFrame("no training template with arity " +
                          std::to_string(query.slots.size()));
  }
  const FrameTemplate* best = nullptr;
  size_t best_count = 0;
  for (const auto& [tmpl, count] : it->second) {
    if (!best || count > best_count) {
      best = &tmpl;
      best_count = count;
    }
  }
  return *best;
}

// Headless scoring with the type constraint kept.
inline MatchResult baseline_wo_head(const Frame& query, const std::vector<FrameTemplate>& inventory,
                                    const std::map<std::string, std::vector<std::string>>& examples,
                                    EmbeddingProvider& provider, const OntologyMap& map,
                                    const Utterance& utterance, int k = 0) {
  return rank(query, inventory, make_cosine_scorer(examples, provider), map, utterance, k,
              FilterMode::Typed);
}

// Headless scoring with the type constraint dropped; only the arity filter
// remains (a mean over mismatched arities stays undefined).
inline MatchResult baseline_wo_head_type(const Frame& query,
                                         const std::vector<FrameTemplate>& inventory,
                                         const std::map<std::string, std::vector<std::string>>& examples,
                                         EmbeddingProvider& provider, const OntologyMap& map,
                                         const Utterance& utterance, int k = 0) {
  return rank(query, inventory, make_cosine_scorer(examples, provider), map, utterance, k,
              FilterMode::ArityOnly);
}

// ---------------------------------------------------------------------------
// Reports.
// ---------------------------------------------------------------------------

struct MetricStats {
  double mean = 0.0;
  double stddev = 0.0;  // population standard deviation over seeds

  json to_json() const { return json{{"mean", mean}, {"stddev", stddev}}; }
};

struct DomainReport {
  MetricStats frame_accuracy;
  MetricStats recall_at_1;
  MetricStats recall_at_3;
  MetricStats intent_accuracy;
  MetricStats mrr;
  MetricStats candidate_reduction;
  std::map<std::string, size_t> errors;  // taxonomy counts summed over seeds

  json to_json() const {
    json err = json::object();
    for (const auto& [k, v] : errors) err[k] = v;
    return json{{"frame_accuracy", frame_accuracy.to_json()},
                {"recall_at_1", recall_at_1.to_json()},
                {"recall_at_3", recall_at_3.to_json()},
                {"intent_accuracy", intent_accuracy.to_json()},
                {"mrr", mrr.to_json()},
                {"candidate_reduction", candidate_reduction.to_json()},
                {"errors", err}};
  }
};

struct EvalReport {
  std::string setting;
  std::string baseline;
  int examples_per_label = 0;
  std::vector<uint64_t> seeds;
  std::map<std::string, DomainReport> per_domain;
  DomainReport average;

  json to_json() const {
    json domains = json::object();
    for (const auto& [name, rep] : per_domain) domains[name] = rep.to_json();
    return json{{"setting", setting},
                {"baseline", baseline},
                {"examples_per_label", examples_per_label},
                {"seeds", seeds},
                {"per_domain", domains},
                {"average", average.to_json()}};
  }

  std::string to_table() const {
    auto cell = [](const MetricStats& m) {
      char buf[40];
      std::snprintf(buf, sizeof(buf), "%5.1f±%-4.1f", 100.0 * m.mean, 100.0 * m.stddev);
      return std::string(buf);
    };
    std::vector<std::pair<std::string, const MetricStats DomainReport::*>> rows = {
        {"frame accuracy", &DomainReport::frame_accuracy},
        {"recall@3", &DomainReport::recall_at_3},
        {"intent accuracy", &DomainReport::intent_accuracy},
        {"mrr", &DomainReport::mrr},
        {"cand. reduction", &DomainReport::candidate_reduction},
    };
    std::string out = "setting=" + setting + " baseline=" + baseline +
                      " examples/label=" + std::to_string(examples_per_label) + "\n";
    out += "metric            ";
    for (const auto& [name, _] : per_domain) out += " | " + name;
    out += " | avg.\n";
    for (const auto& [label, member] : rows) {
      char head[40];
      std::snprintf(head, sizeof(head), "%-18s", label.c_str());
      out += head;
      for (const auto& [_, rep] : per_domain) out += " | " + cell(rep.*member);
      out += " | " + cell(average.*member) + "\n";
    }
    return out;
  }

  std::string to_csv() const {
    std::string out;
    auto row = [&](const std::string& domain, const DomainReport& rep) {
      char buf[160];
      std::snprintf(buf, sizeof(buf), "%s,%s,%d,%s,%.6f,%.6f\n", baseline.c_str(),
                    setting.c_str(), examples_per_label, domain.c_str(),
                    rep.frame_accuracy.mean, rep.frame_accuracy.stddev);
      out += buf;
    };
    for (const auto& [name, rep] : per_domain) row(name, rep);
    row("average", average);
    return out;
  }

  static std::string csv_header() {
    return "baseline,setting,examples_per_label,domain,frame_accuracy_mean,frame_accuracy_stddev\n";
  }
};

namespace detail {

struct RunMetrics {
  double frame_accuracy = 0.0;
  double recall_at_1 = 0.0;
  double recall_at_3 = 0.0;
  double intent_accuracy = 0.0;
  double mrr = 0.0;
  double candidate_reduction = 0.0;
  std::map<std::string, size_t> errors;
};

inline MetricStats stats_over(const std::vector<double>& xs) {
  MetricStats s;
  if (xs.empty()) return s;
  for (double x : xs) s.mean += x;
  s.mean /= static_cast<double>(xs.size());
  double var = 0.0;
  for (double x : xs) var += (x - s.mean) * (x - s.mean);
  s.stddev = std::sqrt(var / static_cast<double>(xs.size()));
  return s;
}

inline DomainReport aggregate(const std::vector<RunMetrics>& runs) {
  DomainReport rep;
  auto collect = [&](double RunMetrics::*member) {
    std::vector<double> xs;
    xs.reserve(runs.size());
    for (const RunMetrics& r : runs) xs.push_back(r.*member);
    return stats_over(xs);
  };
  rep.frame_accuracy = collect(&RunMetrics::frame_accuracy);
  rep.recall_at_1 = collect(&RunMetrics::recall_at_1);
  rep.recall_at_3 = collect(&RunMetrics::recall_at_3);
  rep.intent_accuracy = collect(&RunMetrics::intent_accuracy);
  rep.mrr = collect(&RunMetrics::mrr);
  rep.candidate_reduction = collect(&RunMetrics::candidate_reduction);
  for (const RunMetrics& r : runs) {
    for (const auto& [k, v] : r.errors) rep.errors[k] += v;
  }
  return rep;
}

// Mirrors the error breakdown used in the paper-style analysis: slot-count
// mistakes (parsing), intent mistakes, then slot label/boundary mistakes.
inline std::string classify_error(const Frame& predicted, const Frame& gold) {
  if (predicted.slots.size() != gold.slots.size()) return "wrong_slot_count";
  if (predicted.intent.label != gold.intent.label) return "wrong_intent";
  return "wrong_slot_label";
}

inline std::string classify_template_error(const FrameTemplate& predicted,
                                           const FrameTemplate& gold) {
  if (predicted.slot_labels.size() != gold.slot_labels.size()) return "wrong_slot_count";
  if (predicted.intent != gold.intent) return "wrong_intent";
  return "wrong_slot_label";
}

// Fully supervised artifacts, trained once per seed on the whole train set.
struct FullySupervisedModel {
  TaggerModel tagger;
  Head intent_head;
};

inline FullySupervisedModel train_fully_supervised(const std::vector<const Record*>& train,
                                                   const EvalConfig& cfg,
                                                   EmbeddingProvider& provider, uint64_t seed) {
  if (train.empty()) throw EmptyTrainingSet("fully supervised baseline needs train data");
  FullySupervisedModel model;
  model.tagger = train_tagger(train, cfg.tagger_epochs, seed, tag_set_from_records(train));
  std::vector<LabeledText> intent_examples;
  intent_examples.reserve(train.size());
  for (const Record* rec : train) {
    intent_examples.emplace_back(rec->utterance.text, rec->frame.intent.label);
  }
  TrainConfig head_cfg = cfg.head_cfg;
  head_cfg.seed = seed;
  model.intent_head = train_head(std::move(intent_examples), head_cfg, provider);
  return model;
}

}  // namespace detail

// Checks the rank-metric identities every report must satisfy; throws on
// violation. Used by the test suites after each harness run.
inline void check_report_invariants(const EvalReport& report) {
  auto check = [&](const std::string& where, const DomainReport& rep) {
    auto in01 = [&](const char* name, const MetricStats& m) {
      if (m.mean < 0.0 || m.mean > 1.0) {
        throw LengthMismatch(where + ": " + name + " outside [0,1]");
      }
    };
    in01("frame_accuracy", rep.frame_accuracy);
    in01("recall_at_1", rep.recall_at_1);
    in01("recall_at_3", rep.recall_at_3);
    in01("intent_accuracy", rep.intent_accuracy);
    in01("mrr", rep.mrr);
    in01("candidate_reduction", rep.candidate_reduction);
    if (rep.recall_at_3.mean < rep.recall_at_1.mean - 1e-12) {
      throw LengthMismatch(where + ": recall@3 < recall@1");
    }
    if (rep.mrr.mean < rep.recall_at_1.mean - 1e-12) {
      throw LengthMismatch(where + ": MRR < recall@1");
    }
  };
  for (const auto& [name, rep] : report.per_domain) check(name, rep);
  check("average", report.average);
}

// Optional audit hook: receives every ranked result the harness produces,
// with the query it answered. Used by tests to verify filter soundness on
// whole runs.
using AuditSink = std::function<void(const std::string& domain, const MatchResult&)>;

// Leave-one-domain-out evaluation. For each held-out domain: the tagger is
// trained on the remaining domains' agnostic projections, simple labels are
// sampled from the held-out train split, the head is trained on them, the
// inventory is extracted from the held-out train split, and the held-out
// test split is scored. Results are averaged across domains and seeds.
inline EvalReport run_loo(const EvalConfig& cfg, const Corpus& corpus,
                          EmbeddingProvider& provider,
                          const OntologyMap& map = load_builtin_map(),
                          const AuditSink& audit = nullptr) {
  cfg.validate();
  std::vector<std::string> domains = cfg.domains.empty() ? corpus.domains() : cfg.domains;
  if (domains.empty()) throw MissingDomain("corpus has no domains");
  {
    const auto present = corpus.domains();
    for (const std::string& d : domains) {
      if (std::find(present.begin(), present.end(), d) == present.end()) {
        throw MissingDomain("domain " + d + " not present in corpus");
      }
    }
  }
  if (cfg.baseline != EvalBaseline::FullySupervised && domains.size() < 2) {
    throw MissingDomain("leave-one-out needs at least 2 domains");
  }

  MemoProvider memo(provider);
  const bool golden = cfg.setting == Setting::GoldenParse;

  // domain -> one RunMetrics per seed; plus the across-domain average per seed.
  std::map<std::string, std::vector<detail::RunMetrics>> per_domain_runs;
  std::vector<detail::RunMetrics> average_runs;

  for (uint64_t seed : cfg.seeds) {
    std::optional<detail::FullySupervisedModel> fs;
    if (cfg.baseline == EvalBaseline::FullySupervised) {
      std::vector<const Record*> train;
      for (const std::string& d : domains) {
        for (const Record* r : corpus.select(d, Split::Train)) train.push_back(r);
      }
      fs = detail::train_fully_supervised(train, cfg, memo, seed);
    }

    detail::RunMetrics seed_average;
    for (const std::string& held_out : domains) {
      const auto test = corpus.select(held_out, Split::Test);
      if (test.empty()) throw MissingDomain("domain " + held_out + " has no test records");
      const auto train = corpus.select(held_out, Split::Train);
      if (train.empty()) throw MissingDomain("domain " + held_out + " has no train records");

      const std::vector<FrameTemplate> inventory = build_inventory_from_corpus(held_out, train);

      // The domain-agnostic parser for this round, unless gold frames or a
      // fully supervised parse replace it.
      std::optional<TaggerModel> dap;
      if (!golden && cfg.baseline != EvalBaseline::FullySupervised) {
        std::vector<Record> projected;
        for (const std::string& other : domains) {
          if (other == held_out) continue;
          for (const Record* r : corpus.select(other, Split::Train)) {
            projected.push_back(project_agnostic(*r, map));
          }
        }
        std::vector<const Record*> ptrs;
        ptrs.reserve(projected.size());
        for (const Record& r : projected) ptrs.push_back(&r);
        dap = train_tagger(ptrs, cfg.tagger_epochs, seed);
      }

      LabelProbFn scorer;
      std::optional<MajorityStats> majority;
      if (cfg.baseline == EvalBaseline::Proposed) {
        const SimpleLabelSet labels = sample_simple_labels(train, cfg.examples_per_label, seed);
        std::vector<LabeledText> examples;
        for (const auto& [label, texts] : labels.examples) {
          for (const std::string& t : texts) examples.emplace_back(t, label);
        }
        TrainConfig head_cfg = cfg.head_cfg;
        head_cfg.seed = seed;
        auto head = std::make_shared<const Head>(train_head(std::move(examples), head_cfg, memo));
        scorer = make_head_scorer(std::move(head), memo);
      } else if (cfg.baseline == EvalBaseline::WoHead ||
                 cfg.baseline == EvalBaseline::WoHeadType) {
        const SimpleLabelSet labels = sample_simple_labels(train, cfg.examples_per_label, seed);
        scorer = make_cosine_scorer(labels.examples, memo);
      } else if (cfg.baseline == EvalBaseline::MajorityVote) {
        majority = MajorityStats::from_records(train);
      }

      detail::RunMetrics m;
      const double n = static_cast<double>(test.size());
      for (const Record* rec : test) {
        const FrameTemplate gold_template = template_of(*rec);

        Frame predicted_frame;
        FrameTemplate predicted_template;
        bool have_prediction = false;
        bool template_level_only = false;
        std::optional<size_t> rank_of_gold;
        double reduction = 1.0;  // a fully filtered-out query reduces to zero candidates

        if (cfg.baseline == EvalBaseline::FullySupervised) {
          predicted_frame = tag(rec->utterance, fs->tagger);
          const std::vector<double> p =
              predict_proba_from_vec(memo.embed(rec->utterance.text), fs->intent_head);
          size_t best = 0;
          for (size_t i = 1; i < p.size(); ++i) {
            if (p[i] > p[best]) best = i;
          }
          predicted_frame.intent.label = fs->intent_head.labels[best];
          predicted_frame.domain = held_out;
          std::vector<std::string> slot_labels;
          for (const Span& s : predicted_frame.slots) slot_labels.push_back(s.label);
          predicted_template =
              FrameTemplate::make(predicted_frame.intent.label, slot_labels, held_out);
          have_prediction = true;
          reduction = 0.0;  // no candidate filtering happens in this baseline
          if (predicted_template.intent == gold_template.intent &&
              predicted_template.slot_labels == gold_template.slot_labels) {
            rank_of_gold = 1;
          }
        } else {
          const Frame query = golden ? golden_parse(*rec, map) : tag(rec->utterance, *dap);
          if (cfg.baseline == EvalBaseline::MajorityVote) {
            template_level_only = true;
            try {
              predicted_template = baseline_majority_vote(query, *majority);
              have_prediction = true;
              const size_t arity_bucket =
                  majority->by_arity.count(query.slots.size())
                      ? majority->by_arity.at(query.slots.size()).size()
                      : 0;
              reduction = 1.0 - static_cast<double>(arity_bucket) /
                                    static_cast<double>(inventory.size());
              if (predicted_template.intent == gold_template.intent &&
                  predicted_template.slot_labels == gold_template.slot_labels) {
                rank_of_gold = 1;
              }
            } catch (const NoEligibleFrame&) {
              ++m.errors["no_eligible"];
            }
          } else {
            const FilterMode mode = cfg.baseline == EvalBaseline::WoHeadType
                                        ? FilterMode::ArityOnly
                                        : FilterMode::Typed;
            try {
              const MatchResult result = rank(query, inventory, scorer, map,
                                              rec->utterance, /*k=*/0, mode);
              if (audit) audit(held_out, result);
              const ScoredTemplate& top = result.ranked.front();
              predicted_template = top.tmpl;
              predicted_frame.intent = {0, static_cast<int>(rec->utterance.size()),
                                        top.tmpl.intent};
              predicted_frame.domain = held_out;
              for (size_t q = 0; q < query.slots.size(); ++q) {
                predicted_frame.slots.push_back(
                    {query.slots[q].start, query.slots[q].end, top.assignment[q]});
              }
              have_prediction = true;
              rank_of_gold = gold_rank(result, gold_template);
              reduction = 1.0 - static_cast<double>(result.eligible_count) /
                                    static_cast<double>(inventory.size());
            } catch (const NoEligibleFrame&) {
              ++m.errors["no_eligible"];
            }
          }
        }

        m.candidate_reduction += reduction / n;
        if (!have_prediction) continue;

        bool frame_correct;
        if (template_level_only) {
          frame_correct = predicted_template.intent == gold_template.intent &&
                          predicted_template.slot_labels == gold_template.slot_labels;
          if (frame_correct) {
            m.frame_accuracy += 1.0 / n;
          } else {
            ++m.errors[detail::classify_template_error(predicted_template, gold_template)];
          }
          if (predicted_template.intent == gold_template.intent) m.intent_accuracy += 1.0 / n;
        } else {
          frame_correct = frames_equal(predicted_frame, rec->frame);
          if (frame_correct) {
            m.frame_accuracy += 1.0 / n;
          } else {
            ++m.errors[detail::classify_error(predicted_frame, rec->frame)];
          }
          if (predicted_frame.intent.label == rec->frame.intent.label) {
            m.intent_accuracy += 1.0 / n;
          }
        }
        if (rank_of_gold) {
          if (*rank_of_gold == 1) m.recall_at_1 += 1.0 / n;
          if (*rank_of_gold <= 3) m.recall_at_3 += 1.0 / n;
          m.mrr += 1.0 / static_cast<double>(*rank_of_gold) / n;
        }
      }

      per_domain_runs[held_out].push_back(m);
      seed_average.frame_accuracy += m.frame_accuracy / domains.size();
      seed_average.recall_at_1 += m.recall_at_1 / domains.size();
      seed_average.recall_at_3 += m.recall_at_3 / domains.size();
      seed_average.intent_accuracy += m.intent_accuracy / domains.size();
      seed_average.mrr += m.mrr / domains.size();
      seed_average.candidate_reduction += m.candidate_reduction / domains.size();
      for (const auto& [k, v] : m.errors) seed_average.errors[k] += v;
    }
    average_runs.push_back(seed_average);
  }

  EvalReport report;
  report.setting = setting_name(cfg.setting);
  report.baseline = baseline_name(cfg.baseline);
  report.examples_per_label = cfg.examples_per_label;
  report.seeds = cfg.seeds;
  for (const auto& [name, runs] : per_domain_runs) report.per_domain[name] = detail::aggregate(runs);
  report.average = detail::aggregate(average_runs);
  check_report_invariants(report);
  return report;
}

// The dashed-line upper bound: the same tagger architecture trained on the
// full domain-specific data with a head-based intent classifier. Constant
// in examples_per_label.
inline EvalReport baseline_fully_supervised(const Corpus& corpus, EmbeddingProvider& provider,
                                            EvalConfig cfg = {},
                                            const OntologyMap& map = load_builtin_map()) {
  cfg.baseline = EvalBaseline::FullySupervised;
  return run_loo(cfg, corpus, provider, map);
}

}  // namespace openfsp
