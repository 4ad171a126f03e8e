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
#include <array>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "openfsp/errors.hpp"
#include "openfsp/text.hpp"

namespace openfsp {

using json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Label spaces.
//
// Domain-specific labels follow the TopV2 convention: slot names begin with
// "SL:", intent names with "IN:". The domain-agnostic side is a fixed set of
// eight coarse slot types plus a single intent sentinel.
// ---------------------------------------------------------------------------

inline constexpr std::string_view kIntentSentinel = "IN:INTENT";

inline constexpr std::array<std::string_view, 8> kAgnosticSlots = {
    "SL:DELIVERABLE",     "SL:RECIPIENT", "SL:SCOPE_TEMPORAL", "SL:SCOPE_LOC",
    "SL:SCOPE_DISAM",     "SL:OTHER_OPEN_TEXT", "SL:NUMS",     "SL:PROPER_NAME",
};

inline bool is_agnostic_slot(std::string_view name) {
  for (auto s : kAgnosticSlots) {
    if (s == name) return true;
  }
  return false;
}

inline bool is_slot_name(std::string_view name) { return name.starts_with("SL:") && name.size() > 3; }
inline bool is_intent_name(std::string_view name) { return name.starts_with("IN:") && name.size() > 3; }

enum class LabelKind { Intent, Slot };

struct Label {
  LabelKind kind = LabelKind::Slot;
  std::string name;    // "IN:..." or "SL:..."
  std::string domain;  // e.g. "alarm", or "agnostic"

  static Label intent(std::string name, std::string domain) {
    if (!is_intent_name(name)) throw UnknownLabel("not an intent name: " + name);
    return {LabelKind::Intent, std::move(name), std::move(domain)};
  }
  static Label slot(std::string name, std::string domain) {
    if (!is_slot_name(name)) throw UnknownLabel("not a slot name: " + name);
    return {LabelKind::Slot, std::move(name), std::move(domain)};
  }

  friend bool operator==(const Label&, const Label&) = default;
};

// ---------------------------------------------------------------------------
// Spans, utterances, frames.
// ---------------------------------------------------------------------------

// Token-index span, start inclusive, end exclusive. The label is the span's
// label name; for an intent span it covers the whole utterance.
struct Span {
  int start = 0;
  int end = 0;
  std::string label;

  friend bool operator==(const Span&, const Span&) = default;
  friend auto operator<=>(const Span&, const Span&) = default;
};

struct Utterance {
  std::string text;
  std::vector<std::string> tokens;

  static Utterance from_text(std::string_view text) {
    Utterance u;
    u.text = std::string(text);
    u.tokens = tokenize(text);
    return u;
  }
  static Utterance from_tokens(std::vector<std::string> tokens) {
    Utterance u;
    u.text = join(tokens);
    u.tokens = std::move(tokens);
    return u;
  }

  size_t size() const { return tokens.size(); }

  // Span text with original casing, tokens joined by single spaces.
  std::string span_text(const Span& s) const {
    std::string out;
    for (int i = s.start; i < s.end && i < static_cast<int>(tokens.size()); ++i) {
      if (i > s.start) out += ' ';
      out += tokens[i];
    }
    return out;
  }
};

// An intent plus non-overlapping labeled slot spans. The intent is modeled
// as one more span covering [0, n).
struct Frame {
  Span intent;
  std::vector<Span> slots;
  std::string domain;

  friend bool operator==(const Frame&, const Frame&) = default;
};

// Checks span bounds, the full-cover intent convention, and pairwise
// non-overlap of slots. Throws MalformedTree naming the violation.
inline void validate_frame(const Frame& frame, size_t n_tokens) {
  const int n = static_cast<int>(n_tokens);
  if (frame.intent.start != 0 || frame.intent.end != n) {
    throw MalformedTree("intent span must cover the whole utterance");
  }
  if (n == 0) throw MalformedTree("utterance has no tokens");
  std::vector<Span> sorted = frame.slots;
  std::sort(sorted.begin(), sorted.end());
  int prev_end = 0;
  for (const Span& s : sorted) {
    if (s.start < 0 || s.start >= s.end || s.end > n) {
      throw MalformedTree("slot span out of bounds");
    }
    if (s.start < prev_end) throw MalformedTree("overlapping slot spans");
    prev_end = s.end;
  }
}

// ---------------------------------------------------------------------------
// The many-to-one mapping from domain-specific labels to agnostic labels.
// ---------------------------------------------------------------------------

// A duplicate key seen while building a map; the first occurrence wins.
struct MapConflict {
  std::string label;
  std::string kept;
  std::string dropped;

  friend bool operator==(const MapConflict&, const MapConflict&) = default;
};

class OntologyMap {
 public:
  // Returns false and records a conflict when the key is already present.
  bool insert(const std::string& slot, const std::string& agnostic) {
    if (!is_slot_name(slot)) throw UnknownLabel("not a slot name: " + slot);
    if (!is_agnostic_slot(agnostic)) {
      throw UnknownAgnosticType("not an agnostic slot type: " + agnostic);
    }
    auto [it, inserted] = slots_.emplace(slot, agnostic);
    if (!inserted) conflicts_.push_back({slot, it->second, agnostic});
    return inserted;
  }

  bool contains(std::string_view slot) const { return slots_.find(std::string(slot)) != slots_.end(); }

  // psi for a slot name. Throws UnknownLabel when the slot has no entry.
  const std::string& map_slot(const std::string& slot) const {
    auto it = slots_.find(slot);
    if (it == slots_.end()) throw UnknownLabel("no agnostic mapping for " + slot);
    return it->second;
  }

  // psi for any label name: intents always map to the intent sentinel.
  std::string map_label_name(const std::string& name) const {
    if (is_intent_name(name)) return std::string(kIntentSentinel);
    return map_slot(name);
  }

  std::string map_label(const Label& label) const {
    if (label.kind == LabelKind::Intent) return std::string(kIntentSentinel);
    return map_slot(label.name);
  }

  // Adds entries from another domain's extension. An existing key mapped to
  // a different type is a conflict and is rejected wholesale.
  void merge(const std::map<std::string, std::string>& entries) {
    for (const auto& [slot, agnostic] : entries) {
      auto it = slots_.find(slot);
      if (it != slots_.end() && it->second != agnostic) {
        throw SchemaError("slot " + slot + " already mapped to " + it->second +
                          ", cannot remap to " + agnostic);
      }
    }
    for (const auto& [slot, agnostic] : entries) insert(slot, agnostic);
  }

  const std::map<std::string, std::string>& slots() const { return slots_; }
  const std::vector<MapConflict>& conflicts() const { return conflicts_; }
  size_t size() const { return slots_.size(); }

  json to_json() const {
    json slots = json::object();
    for (const auto& [k, v] : slots_) slots[k] = v;
    return json{{"version", 1}, {"slots", slots}};
  }

  static OntologyMap from_json(const json& j) {
    if (!j.is_object() || !j.contains("slots") || !j["slots"].is_object()) {
      throw SchemaError("ontology map JSON must be {\"version\":1,\"slots\":{...}}");
    }
    OntologyMap map;
    for (const auto& [k, v] : j["slots"].items()) {
      if (!v.is_string()) throw SchemaError("ontology map values must be strings");
      map.insert(k, v.get<std::string>());
    }
    return map;
  }

 private:
  std::map<std::string, std::string> slots_;
  std::vector<MapConflict> conflicts_;
};

namespace detail {

// (domain-specific slot, agnostic slot) pairs in source-table order. A few
// specific slots are listed under more than one agnostic type; the first
// occurrence wins and the rest are recorded as conflicts.
inline constexpr std::pair<std::string_view, std::string_view> kBuiltinSlotTable[] = {
    {"SL:TYPE_REACTION", "SL:DELIVERABLE"},
    {"SL:TODO", "SL:DELIVERABLE"},
    {"SL:TODO_NEW", "SL:DELIVERABLE"},
    {"SL:METHOD_TIMER", "SL:DELIVERABLE"},
    {"SL:TIMER_NAME", "SL:DELIVERABLE"},
    {"SL:ALARM_NAME", "SL:DELIVERABLE"},

    {"SL:RECIPIENT", "SL:RECIPIENT"},
    {"SL:PERSON_REMINDED_ADDED", "SL:RECIPIENT"},
    {"SL:PERSON_REMINDED_REMOVED", "SL:RECIPIENT"},
    {"SL:PERSON_REMINDED", "SL:RECIPIENT"},
    {"SL:ATTENDEE_REMOVED", "SL:RECIPIENT"},
    {"SL:ATTENDEE_ADDED", "SL:RECIPIENT"},

    {"SL:DATE_TIME", "SL:SCOPE_TEMPORAL"},
    {"SL:DATE_TIME_RECURRING", "SL:SCOPE_TEMPORAL"},
    {"SL:DURATION", "SL:SCOPE_TEMPORAL"},
    {"SL:PERIOD", "SL:SCOPE_TEMPORAL"},
    {"SL:RECURRING_DATE_TIME", "SL:SCOPE_TEMPORAL"},
    {"SL:TIME_ZONE", "SL:SCOPE_TEMPORAL"},
    {"SL:DATE_TIME_DEPARTURE", "SL:SCOPE_TEMPORAL"},
    {"SL:DATE_TIME_ARRIVAL", "SL:SCOPE_TEMPORAL"},
    {"SL:FREQUENCY", "SL:SCOPE_TEMPORAL"},
    {"SL:RECURRING_DATE_TIME_NEW", "SL:SCOPE_TEMPORAL"},
    {"SL:DATE_TIME_NEW", "SL:SCOPE_TEMPORAL"},
    {"SL:SCOPE_TEMPORAL_RECURRING", "SL:SCOPE_TEMPORAL"},

    {"SL:LOCATION", "SL:SCOPE_LOC"},
    {"SL:POINT_ON_MAP", "SL:SCOPE_LOC"},
    {"SL:LOCATION_HOME", "SL:SCOPE_LOC"},
    {"SL:LOCATION_USER", "SL:SCOPE_LOC"},
    {"SL:LOCATION_MODIFIER", "SL:SCOPE_LOC"},
    {"SL:WAYPOINT_ADDED", "SL:SCOPE_LOC"},
    {"SL:LOCATION_WORK", "SL:SCOPE_LOC"},

    {"SL:ORDINAL", "SL:SCOPE_DISAM"},
    {"SL:TYPE_CONTENT", "SL:SCOPE_DISAM"},
    {"SL:GROUP", "SL:SCOPE_DISAM"},
    {"SL:RESOURCE", "SL:SCOPE_DISAM"},
    {"SL:CONTENT_EMOJI", "SL:SCOPE_DISAM"},
    {"SL:TYPE_CONTACT", "SL:SCOPE_DISAM"},
    {"SL:MUTUAL_EMPLOYER", "SL:SCOPE_DISAM"},
    {"SL:MUTUAL_SCHOOL", "SL:SCOPE_DISAM"},
    {"SL:TYPE_INFO", "SL:SCOPE_DISAM"},
    {"SL:MUTUAL_LOCATION", "SL:SCOPE_DISAM"},
    {"SL:CONTACT_RELATED", "SL:SCOPE_DISAM"},
    {"SL:MUSIC_GENRE", "SL:SCOPE_DISAM"},
    {"SL:UNIT_DISTANCE", "SL:SCOPE_DISAM"},
    {"SL:WEATHER_TEMPERATURE_UNIT", "SL:SCOPE_DISAM"},
    {"SL:MEASUREMENT_UNIT", "SL:SCOPE_DISAM"},
    {"SL:METHOD_RETRIEVAL_REMINDER", "SL:SCOPE_DISAM"},

    {"SL:CATEGORY_EVENT", "SL:OTHER_OPEN_TEXT"},
    {"SL:SEARCH_RADIUS", "SL:OTHER_OPEN_TEXT"},
    {"SL:ATTRIBUTE_EVENT", "SL:OTHER_OPEN_TEXT"},
    {"SL:CATEGORY_LOCATION", "SL:OTHER_OPEN_TEXT"},
    {"SL:NAME_EVENT", "SL:OTHER_OPEN_TEXT"},
    {"SL:ATTENDEE", "SL:OTHER_OPEN_TEXT"},
    {"SL:ATTENDEE_EVENT", "SL:OTHER_OPEN_TEXT"},
    {"SL:TYPE_RELATION", "SL:OTHER_OPEN_TEXT"},
    {"SL:ORGANIZER_EVENT", "SL:OTHER_OPEN_TEXT"},
    {"SL:TAG_MESSAGE", "SL:OTHER_OPEN_TEXT"},
    {"SL:CONTENT_EXACT", "SL:OTHER_OPEN_TEXT"},
    {"SL:MUSIC_TYPE", "SL:OTHER_OPEN_TEXT"},
    {"SL:MUSIC_TRACK_TITLE", "SL:OTHER_OPEN_TEXT"},
    {"SL:MUSIC_ALBUM_TITLE", "SL:OTHER_OPEN_TEXT"},
    {"SL:MUSIC_PLAYLIST_TITLE", "SL:OTHER_OPEN_TEXT"},
    {"SL:MUSIC_RADIO_ID", "SL:OTHER_OPEN_TEXT"},
    {"SL:METHOD_TRAVEL", "SL:OTHER_OPEN_TEXT"},
    {"SL:JOB", "SL:OTHER_OPEN_TEXT"},
    {"SL:WEATHER_ATTRIBUTE", "SL:OTHER_OPEN_TEXT"},
    {"SL:OBSTRUCTION_AVOID", "SL:OTHER_OPEN_TEXT"},
    {"SL:ROAD_CONDITION_AVOID", "SL:OTHER_OPEN_TEXT"},
    {"SL:ROAD_CONDITION", "SL:OTHER_OPEN_TEXT"},

    {"SL:AMOUNT", "SL:NUMS"},
    {"SL:AGE", "SL:NUMS"},

    {"SL:NAME_EVENT", "SL:PROPER_NAME"},
    {"SL:CONTACT", "SL:PROPER_NAME"},
    {"SL:ORGANIZER_EVENT", "SL:PROPER_NAME"},
    {"SL:SENDER", "SL:PROPER_NAME"},
    {"SL:MUSIC_TRACK_TITLE", "SL:PROPER_NAME"},
    {"SL:MUSIC_PROVIDER_NAME", "SL:PROPER_NAME"},
    {"SL:MUSIC_ALBUM_TITLE", "SL:PROPER_NAME"},
    {"SL:MUSIC_ARTIST_NAME", "SL:PROPER_NAME"},
    {"SL:SOURCE", "SL:PROPER_NAME"},
    {"SL:DESTINATION", "SL:PROPER_NAME"},
    {"SL:PATH", "SL:PROPER_NAME"},
    {"SL:PATH_AVOID", "SL:PROPER_NAME"},
    {"SL:WAYPOINT_AVOID", "SL:PROPER_NAME"},
    {"SL:LOCATION_CURRENT", "SL:PROPER_NAME"},
    {"SL:PATH_AVOID", "SL:PROPER_NAME"},
    {"SL:WAYPOINT_AVOID", "SL:PROPER_NAME"},
    {"SL:LOCATION_CURRENT", "SL:PROPER_NAME"},
    {"SL:WAYPOINT", "SL:PROPER_NAME"},
    {"SL:ATTENDEE", "SL:PROPER_NAME"},
    {"SL:NAME_APP", "SL:PROPER_NAME"},
};

}  // namespace detail

// The built-in TopV2 -> agnostic slot mapping. Duplicate rows resolve to
// their first occurrence; the dropped readings stay visible in conflicts().
inline OntologyMap load_builtin_map() {
  OntologyMap map;
  for (const auto& [slot, agnostic] : detail::kBuiltinSlotTable) {
    map.insert(std::string(slot), std::string(agnostic));
  }
  return map;
}

// Multiset of agnostic labels over the frame's slots. The intent is always
// the sentinel and is excluded.
inline std::map<std::string, int> frame_signature(const Frame& frame, const OntologyMap& map) {
  std::map<std::string, int> sig;
  for (const Span& s : frame.slots) {
    ++sig[is_agnostic_slot(s.label) ? s.label : map.map_slot(s.label)];
  }
  return sig;
}

}  // namespace openfsp
