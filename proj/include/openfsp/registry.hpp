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
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "openfsp/dataset.hpp"
#include "openfsp/errors.hpp"
#include "openfsp/head.hpp"
#include "openfsp/matcher.hpp"
#include "openfsp/ontology.hpp"

namespace openfsp {

inline constexpr int kRegistrySchemaVersion = 1;

// A registered domain: its contribution to the target space, its psi
// extension, the developer's simple labels, and (after finalize) the head.
struct DomainSpec {
  std::string name;
  std::vector<FrameTemplate> templates;
  std::map<std::string, std::string> psi_extension;            // slot -> agnostic type
  std::map<std::string, std::vector<std::string>> simple_labels;  // label -> example texts
  std::optional<Head> head;

  json to_json() const {
    json templates_json = json::array();
    for (const FrameTemplate& t : templates) templates_json.push_back(t.to_json());
    json psi = json::object();
    for (const auto& [k, v] : psi_extension) psi[k] = v;
    json labels = json::object();
    for (const auto& [k, v] : simple_labels) labels[k] = v;
    json j{{"schema_version", kRegistrySchemaVersion},
           {"name", name},
           {"templates", templates_json},
           {"psi", psi},
           {"simple_labels", labels}};
    j["head"] = head ? head->to_json() : json(nullptr);
    return j;
  }

  static DomainSpec from_json(const json& j) {
    DomainSpec spec;
    spec.name = j.at("name").get<std::string>();
    for (const auto& t : j.at("templates")) spec.templates.push_back(FrameTemplate::from_json(t));
    for (const auto& [k, v] : j.at("psi").items()) spec.psi_extension[k] = v.get<std::string>();
    for (const auto& [k, v] : j.at("simple_labels").items()) {
      spec.simple_labels[k] = v.get<std::vector<std::string>>();
    }
    if (j.contains("head") && !j["head"].is_null()) spec.head = Head::from_json(j["head"]);
    return spec;
  }

  friend bool operator==(const DomainSpec&, const DomainSpec&) = default;
};

namespace detail {

inline const json& require(const json& j, const char* field, const std::string& where) {
  if (!j.is_object() || !j.contains(field)) {
    throw SchemaError(where + " is missing required field \"" + field + "\"");
  }
  return j[field];
}

inline std::vector<std::string> string_list(const json& j, const std::string& where) {
  if (!j.is_array()) throw SchemaError(where + " must be an array of strings");
  std::vector<std::string> out;
  for (const auto& v : j) {
    if (!v.is_string()) throw SchemaError(where + " must be an array of strings");
    out.push_back(v.get<std::string>());
  }
  return out;
}

}  // namespace detail

// Parses and validates a developer domain spec:
//   {"name":..., "intents":[{"name":..., "examples":[...],
//     "slots":[{"name":..., "agnostic_type":..., "examples":[...],
//               "required":bool}]}]}
// Templates are generated as intent x all subsets of its optional slots,
// with required slots always present.
inline DomainSpec parse_domain_spec(const json& j) {
  DomainSpec spec;
  spec.name = detail::require(j, "name", "domain spec").get<std::string>();
  if (spec.name.empty()) throw SchemaError("domain name must be nonempty");
  const json& intents = detail::require(j, "intents", "domain spec");
  if (!intents.is_array() || intents.empty()) {
    throw SchemaError("domain spec needs a nonempty \"intents\" array");
  }

  std::set<std::pair<std::string, std::vector<std::string>>> seen_templates;
  for (const auto& intent_json : intents) {
    const std::string intent_name =
        detail::require(intent_json, "name", "intent").get<std::string>();
    if (!is_intent_name(intent_name)) {
      throw SchemaError("intent name must start with IN:, got \"" + intent_name + "\"");
    }
    auto examples = detail::string_list(detail::require(intent_json, "examples", intent_name),
                                        intent_name + ".examples");
    auto& intent_examples = spec.simple_labels[intent_name];
    intent_examples.insert(intent_examples.end(), examples.begin(), examples.end());

    std::vector<std::string> required;
    std::vector<std::string> optional;
    if (intent_json.contains("slots")) {
      for (const auto& slot_json : intent_json["slots"]) {
        const std::string slot_name =
            detail::require(slot_json, "name", intent_name + " slot").get<std::string>();
        if (!is_slot_name(slot_name)) {
          throw SchemaError("slot name must start with SL:, got \"" + slot_name + "\"");
        }
        const std::string agnostic =
            detail::require(slot_json, "agnostic_type", slot_name).get<std::string>();
        if (!is_agnostic_slot(agnostic)) {
          throw UnknownAgnosticType(slot_name + " maps to unknown agnostic type \"" + agnostic +
                                    "\"");
        }
        auto it = spec.psi_extension.find(slot_name);
        if (it != spec.psi_extension.end() && it->second != agnostic) {
          throw SchemaError(slot_name + " declared with conflicting agnostic types " +
                            it->second + " and " + agnostic);
        }
        spec.psi_extension[slot_name] = agnostic;
        auto slot_examples = detail::string_list(
            detail::require(slot_json, "examples", slot_name), slot_name + ".examples");
        auto& pool = spec.simple_labels[slot_name];
        pool.insert(pool.end(), slot_examples.begin(), slot_examples.end());
        (slot_json.value("required", true) ? required : optional).push_back(slot_name);
      }
    }
    if (optional.size() > 16) {
      throw SchemaError(intent_name + " has too many optional slots (max 16)");
    }
    for (uint32_t mask = 0; mask < (1u << optional.size()); ++mask) {
      std::vector<std::string> slots = required;
      for (size_t b = 0; b < optional.size(); ++b) {
        if (mask & (1u << b)) slots.push_back(optional[b]);
      }
      FrameTemplate tmpl = FrameTemplate::make(intent_name, std::move(slots), spec.name);
      if (!seen_templates.insert({tmpl.intent, tmpl.slot_labels}).second) {
        throw DuplicateTemplate("duplicate template for " + tmpl.intent);
      }
      spec.templates.push_back(std::move(tmpl));
    }
  }

  // Case-insensitive dedup of example texts, first casing wins.
  for (auto& [label, texts] : spec.simple_labels) {
    std::set<std::string> seen;
    std::vector<std::string> unique;
    for (const std::string& t : texts) {
      if (t.empty()) throw SchemaError(label + " has an empty example text");
      if (seen.insert(to_lower(t)).second) unique.push_back(t);
    }
    texts = std::move(unique);
  }
  return spec;
}

// Unique (intent, slot-label multiset) shapes occurring in a record set, in
// deterministic order.
inline std::vector<FrameTemplate> build_inventory_from_corpus(
    const std::string& domain, const std::vector<const Record*>& records) {
  std::set<std::pair<std::string, std::vector<std::string>>> shapes;
  for (const Record* rec : records) {
    FrameTemplate t = template_of(*rec);
    shapes.insert({t.intent, t.slot_labels});
  }
  std::vector<FrameTemplate> inventory;
  inventory.reserve(shapes.size());
  for (const auto& [intent, slots] : shapes) inventory.push_back({intent, slots, domain});
  return inventory;
}

// Trains the domain head on the simple labels and stores it, making the
// spec servable. Every label used by a template must have examples.
inline DomainSpec finalize_domain(DomainSpec spec, const TrainConfig& cfg,
                                  EmbeddingProvider& provider) {
  std::set<std::string> needed;
  for (const FrameTemplate& t : spec.templates) {
    needed.insert(t.intent);
    for (const std::string& s : t.slot_labels) needed.insert(s);
  }
  std::vector<LabeledText> examples;
  for (const std::string& label : needed) {
    auto it = spec.simple_labels.find(label);
    if (it == spec.simple_labels.end() || it->second.empty()) {
      throw SchemaError("no simple-label examples for " + label);
    }
    for (const std::string& text : it->second) examples.emplace_back(text, label);
  }
  spec.head = train_head(std::move(examples), cfg, provider);
  return spec;
}

// Directory-backed registry: one JSON file per domain plus a manifest.
// Registration is additive; re-registering a domain replaces it atomically.
class Registry {
 public:
  explicit Registry(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
  }

  const std::filesystem::path& dir() const { return dir_; }

  std::vector<std::string> domain_names() const {
    const auto manifest = load_manifest();
    return manifest.value("domains", std::vector<std::string>{});
  }

  // Validates the spec file, checks its psi extension against the builtin
  // map and all other registered domains, and persists it.
  DomainSpec register_domain(const std::filesystem::path& spec_file) {
    std::ifstream in(spec_file);
    if (!in) throw SchemaError("cannot open spec file: " + spec_file.string());
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded()) throw SchemaError("spec file is not valid JSON: " + spec_file.string());
    DomainSpec spec = parse_domain_spec(j);

    OntologyMap global = load_builtin_map();
    for (const std::string& other : domain_names()) {
      if (other == spec.name) continue;
      global.merge(load_domain(other).psi_extension);
    }
    global.merge(spec.psi_extension);  // throws SchemaError on conflicts

    save_domain(spec);
    return spec;
  }

  DomainSpec load_domain(const std::string& name) const {
    std::ifstream in(domain_path(name));
    if (!in) throw MissingDomain("domain not registered: " + name);
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded()) throw SchemaError("corrupt registry file for domain " + name);
    return DomainSpec::from_json(j);
  }

  DomainSpec finalize_domain(const std::string& name, const TrainConfig& cfg,
                             EmbeddingProvider& provider) {
    DomainSpec spec = openfsp::finalize_domain(load_domain(name), cfg, provider);
    save_domain(spec);
    return spec;
  }

  // The builtin psi map extended with every registered domain.
  OntologyMap global_map() const {
    OntologyMap map = load_builtin_map();
    for (const std::string& name : domain_names()) map.merge(load_domain(name).psi_extension);
    return map;
  }

  // All finalized domains, packaged for matcher::parse.
  std::vector<DomainBundle> servable() const {
    std::vector<DomainBundle> bundles;
    for (const std::string& name : domain_names()) {
      DomainSpec spec = load_domain(name);
      if (!spec.head) continue;
      bundles.push_back({spec.name, spec.templates, *spec.head});
    }
    return bundles;
  }

 private:
  std::filesystem::path domain_path(const std::string& name) const {
    return dir_ / (name + ".json");
  }
  std::filesystem::path manifest_path() const { return dir_ / "registry.json"; }

  json load_manifest() const {
    std::ifstream in(manifest_path());
    if (!in) return json{{"schema_version", kRegistrySchemaVersion}, {"domains", json::array()}};
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded()) throw SchemaError("corrupt registry manifest");
    return j;
  }

  static void atomic_write(const std::filesystem::path& path, const std::string& content) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
      std::ofstream out(tmp);
      out << content;
    }
    std::filesystem::rename(tmp, path);
  }

  void save_domain(const DomainSpec& spec) {
    atomic_write(domain_path(spec.name), spec.to_json().dump(2) + "\n");
    json manifest = load_manifest();
    auto domains = manifest.value("domains", std::vector<std::string>{});
    if (std::find(domains.begin(), domains.end(), spec.name) == domains.end()) {
      domains.push_back(spec.name);
      std::sort(domains.begin(), domains.end());
    }
    manifest["domains"] = domains;
    manifest["schema_version"] = kRegistrySchemaVersion;
    atomic_write(manifest_path(), manifest.dump(2) + "\n");
  }

  std::filesystem::path dir_;
};

}  // namespace openfsp
