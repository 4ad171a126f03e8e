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

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "openfsp/errors.hpp"
#include "openfsp/ontology.hpp"
#include "openfsp/text.hpp"

namespace openfsp {

enum class Split { Train, Eval, Test };

inline std::string split_name(Split s) {
  switch (s) {
    case Split::Train: return "train";
    case Split::Eval: return "eval";
    case Split::Test: return "test";
  }
  return "train";
}

// One annotated utterance.
struct Record {
  Utterance utterance;
  Frame frame;
  std::string domain;
  Split split = Split::Train;
};

// Parses one bracketed TOP record, e.g.
//   [IN:CREATE_ALARM wake me [SL:DATE_TIME at 6 am ] ]
// Token indices count the plain (non-bracket) tokens. A second intent
// bracket anywhere raises NestedIntent, which callers treat as a filtered
// record rather than a failure; structural problems raise MalformedTree.
inline Record parse_top_record(const std::string& line) {
  const std::vector<std::string> toks = tokenize(line);
  if (toks.empty() || !toks[0].starts_with("[IN:")) {
    throw MalformedTree("record must start with an intent bracket");
  }
  const std::string intent_label = toks[0].substr(1);
  if (!is_intent_name(intent_label)) throw MalformedTree("bad intent label: " + intent_label);

  std::vector<std::string> words;
  std::vector<Span> slots;
  std::optional<int> open_slot_start;
  std::string open_slot_label;
  int depth = 1;

  for (size_t i = 1; i < toks.size(); ++i) {
    const std::string& t = toks[i];
    if (t.starts_with("[IN:")) {
      throw NestedIntent("record contains more than one intent bracket");
    } else if (t.starts_with("[SL:")) {
      if (open_slot_start) throw MalformedTree("nested slot bracket");
      const std::string label = t.substr(1);
      if (!is_slot_name(label)) throw MalformedTree("bad slot label: " + label);
      open_slot_label = label;
      open_slot_start = static_cast<int>(words.size());
      ++depth;
    } else if (t == "]") {
      --depth;
      if (depth < 0) throw MalformedTree("unbalanced closing bracket");
      if (open_slot_start) {
        if (*open_slot_start == static_cast<int>(words.size())) {
          throw MalformedTree("empty slot span");
        }
        slots.push_back({*open_slot_start, static_cast<int>(words.size()), open_slot_label});
        open_slot_start.reset();
      } else if (i + 1 != toks.size()) {
        throw MalformedTree("tokens after the intent closes");
      }
    } else if (t.starts_with("[")) {
      throw MalformedTree("unknown bracket token: " + t);
    } else {
      words.push_back(t);
    }
  }
  if (depth != 0) throw MalformedTree("unbalanced brackets");
  if (words.empty()) throw MalformedTree("utterance has no tokens");

  Record rec;
  rec.utterance = Utterance::from_tokens(words);
  rec.frame.intent = {0, static_cast<int>(words.size()), intent_label};
  rec.frame.slots = std::move(slots);
  validate_frame(rec.frame, rec.utterance.size());
  return rec;
}

// Serializes back to a bracketing equivalent to the parsed input.
inline std::string to_top_string(const Record& rec) {
  std::vector<Span> slots = rec.frame.slots;
  std::sort(slots.begin(), slots.end());
  std::string out = "[" + rec.frame.intent.label;
  size_t next_slot = 0;
  for (size_t i = 0; i < rec.utterance.tokens.size(); ++i) {
    if (next_slot < slots.size() && static_cast<int>(i) == slots[next_slot].start) {
      out += " [" + slots[next_slot].label;
    }
    out += " " + rec.utterance.tokens[i];
    if (next_slot < slots.size() && static_cast<int>(i) + 1 == slots[next_slot].end) {
      out += " ]";
      ++next_slot;
    }
  }
  out += " ]";
  return out;
}

struct SplitStats {
  size_t train = 0;
  size_t eval = 0;
  size_t test = 0;
  size_t dropped_unsupported = 0;
  size_t dropped_nested = 0;
  size_t dropped_malformed = 0;

  size_t kept() const { return train + eval + test; }

  json to_json() const {
    return json{{"train", train},
                {"eval", eval},
                {"test", test},
                {"dropped_unsupported", dropped_unsupported},
                {"dropped_nested", dropped_nested},
                {"dropped_malformed", dropped_malformed}};
  }
};

inline bool is_unsupported_intent(std::string_view intent) {
  return intent.starts_with("IN:UNSUPPORTED");
}

// Drops records whose intent is IN:UNSUPPORTED* (multi-intent records never
// survive parsing) and fills per-split counts. Drops are counted, not fatal.
inline SplitStats filter_and_split(std::vector<Record>& records) {
  SplitStats stats;
  std::vector<Record> kept;
  kept.reserve(records.size());
  for (Record& rec : records) {
    if (is_unsupported_intent(rec.frame.intent.label)) {
      ++stats.dropped_unsupported;
      continue;
    }
    switch (rec.split) {
      case Split::Train: ++stats.train; break;
      case Split::Eval: ++stats.eval; break;
      case Split::Test: ++stats.test; break;
    }
    kept.push_back(std::move(rec));
  }
  records = std::move(kept);
  return stats;
}

struct Corpus {
  std::vector<Record> records;
  SplitStats stats;

  std::vector<std::string> domains() const {
    std::set<std::string> names;
    for (const Record& r : records) names.insert(r.domain);
    return {names.begin(), names.end()};
  }

  std::vector<const Record*> select(std::string_view domain, Split split) const {
    std::vector<const Record*> out;
    for (const Record& r : records) {
      if (r.domain == domain && r.split == split) out.push_back(&r);
    }
    return out;
  }

  std::vector<const Record*> split_records(Split split) const {
    std::vector<const Record*> out;
    for (const Record& r : records) {
      if (r.split == split) out.push_back(&r);
    }
    return out;
  }
};

// Loads a directory in the TopV2 layout: one file per (domain, split) named
// <domain>_<train|eval|test>.<tsv|txt>, one bracketed record per line. TSV
// lines keep only the last field (the semantic parse); header lines and
// records that fail to parse are counted and skipped.
inline Corpus load_topv2_dir(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw MissingDomain("data directory not found: " + dir.string());
  }
  static const std::pair<std::string, Split> kSuffixes[] = {
      {"_train", Split::Train}, {"_eval", Split::Eval}, {"_test", Split::Test}};

  Corpus corpus;
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file()) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());

  for (const auto& path : files) {
    const std::string stem = path.stem().string();
    const std::string ext = path.extension().string();
    if (ext != ".tsv" && ext != ".txt") continue;
    std::string domain;
    std::optional<Split> split;
    for (const auto& [suffix, s] : kSuffixes) {
      if (stem.ends_with(suffix)) {
        domain = stem.substr(0, stem.size() - suffix.size());
        split = s;
        break;
      }
    }
    if (!split || domain.empty()) continue;

    std::ifstream in(path);
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      const auto tab = line.rfind('\t');
      std::string tree = tab == std::string::npos ? line : line.substr(tab + 1);
      if (tree.empty()) continue;
      if (tree.find('[') == std::string::npos) continue;  // header line
      try {
        Record rec = parse_top_record(tree);
        rec.domain = domain;
        rec.frame.domain = domain;
        rec.split = *split;
        corpus.records.push_back(std::move(rec));
      } catch (const NestedIntent&) {
        ++corpus.stats.dropped_nested;
      } catch (const MalformedTree&) {
        ++corpus.stats.dropped_malformed;
      }
    }
  }

  SplitStats filtered = filter_and_split(corpus.records);
  filtered.dropped_nested = corpus.stats.dropped_nested;
  filtered.dropped_malformed = corpus.stats.dropped_malformed;
  corpus.stats = filtered;
  return corpus;
}

// Replaces every label by its agnostic image; span geometry is untouched.
// The record keeps its source domain, the frame becomes agnostic.
inline Record project_agnostic(const Record& rec, const OntologyMap& map) {
  Record out = rec;
  out.frame.domain = "agnostic";
  out.frame.intent.label = std::string(kIntentSentinel);
  for (Span& s : out.frame.slots) s.label = map.map_slot(s.label);
  return out;
}

// ---------------------------------------------------------------------------
// Simple-label sampling.
// ---------------------------------------------------------------------------

struct SimpleLabelSet {
  // label name -> example texts; intents carry full utterances, slots carry
  // span texts with original casing.
  std::map<std::string, std::vector<std::string>> examples;
  std::vector<std::string> warnings;  // labels with fewer than k distinct texts
};

namespace detail {

// Distinct texts for one label, deduplicated case-insensitively (first
// casing wins) and put in a platform-stable order.
inline std::vector<std::string> distinct_texts(const std::vector<std::string>& texts) {
  std::set<std::string> seen;
  std::vector<std::string> distinct;
  for (const std::string& t : texts) {
    if (seen.insert(to_lower(t)).second) distinct.push_back(t);
  }
  std::sort(distinct.begin(), distinct.end(), [](const std::string& a, const std::string& b) {
    const std::string la = to_lower(a), lb = to_lower(b);
    return la != lb ? la < lb : a < b;
  });
  return distinct;
}

inline std::vector<std::string> sample_up_to_k(std::vector<std::string> pool, int k,
                                               uint64_t stream_seed) {
  if (static_cast<int>(pool.size()) <= k) return pool;
  std::mt19937_64 rng(stream_seed);
  for (int i = 0; i < k; ++i) {
    const size_t j = i + rng() % (pool.size() - i);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  return pool;
}

}  // namespace detail

// Draws up to k distinct example texts per label of the domain, from its
// train split only. Pure in (records, k, seed): per-label RNG streams keep
// the draw independent of corpus or label iteration order.
inline SimpleLabelSet sample_simple_labels(const std::vector<const Record*>& domain_train,
                                           int k, uint64_t seed) {
  if (k < 1) throw DegenerateData("examples per label must be >= 1");
  std::map<std::string, std::vector<std::string>> texts_by_label;
  for (const Record* rec : domain_train) {
    texts_by_label[rec->frame.intent.label].push_back(rec->utterance.text);
    for (const Span& s : rec->frame.slots) {
      texts_by_label[s.label].push_back(rec->utterance.span_text(s));
    }
  }
  SimpleLabelSet out;
  for (auto& [label, texts] : texts_by_label) {
    std::vector<std::string> pool = detail::distinct_texts(texts);
    if (static_cast<int>(pool.size()) < k) {
      out.warnings.push_back(label + ": only " + std::to_string(pool.size()) +
                             " distinct examples available (requested " + std::to_string(k) + ")");
    }
    out.examples[label] = detail::sample_up_to_k(std::move(pool), k, mix_seed(seed, label));
  }
  return out;
}

inline SimpleLabelSet sample_simple_labels(const Corpus& corpus, const std::string& domain,
                                           int k, uint64_t seed) {
  auto train = corpus.select(domain, Split::Train);
  if (train.empty()) throw MissingDomain("domain " + domain + " has no train records");
  return sample_simple_labels(train, k, seed);
}

// ---------------------------------------------------------------------------
// Canonical JSONL.
// ---------------------------------------------------------------------------

inline json record_to_json(const Record& rec) {
  json slots = json::array();
  for (const Span& s : rec.frame.slots) {
    slots.push_back(json{{"start", s.start}, {"end", s.end}, {"label", s.label}});
  }
  return json{{"text", rec.utterance.text},
              {"domain", rec.domain},
              {"intent", rec.frame.intent.label},
              {"slots", slots}};
}

inline Record record_from_json(const json& j, Split split = Split::Train) {
  Record rec;
  rec.utterance = Utterance::from_text(j.at("text").get<std::string>());
  rec.domain = j.at("domain").get<std::string>();
  rec.frame.domain = rec.domain;
  rec.frame.intent = {0, static_cast<int>(rec.utterance.size()), j.at("intent").get<std::string>()};
  for (const auto& s : j.at("slots")) {
    rec.frame.slots.push_back(
        {s.at("start").get<int>(), s.at("end").get<int>(), s.at("label").get<std::string>()});
  }
  rec.split = split;
  validate_frame(rec.frame, rec.utterance.size());
  return rec;
}

inline void write_jsonl(const std::vector<const Record*>& records, std::ostream& out) {
  for (const Record* rec : records) out << record_to_json(*rec).dump() << "\n";
}

}  // namespace openfsp
