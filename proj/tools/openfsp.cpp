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
//
// openfsp command line: ingestion, parser training, domain registration,
// parsing, and evaluation. Results go to stdout, logs and errors to stderr.
// Exit codes: 0 success, 1 domain errors, 2 usage errors.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "openfsp/openfsp.hpp"

namespace {

using namespace openfsp;

struct ProviderFlags {
  std::string provider = "hashed";
  int dim = kDefaultDim;
  std::string cache;
  std::string endpoint;

  void attach(CLI::App* cmd) {
    cmd->add_option("--provider", provider, "Embedding provider: hashed, cached or external")
        ->check(CLI::IsMember({"hashed", "cached", "external"}));
    cmd->add_option("--dim", dim, "Embedding dimension");
    cmd->add_option("--cache", cache, "Embedding cache file (JSONL)");
    cmd->add_option("--endpoint", endpoint, "External embedding endpoint URL");
  }

  ProviderConfig config() const {
    ProviderConfig cfg;
    if (provider == "cached") cfg.kind = ProviderKind::Cached;
    if (provider == "external") cfg.kind = ProviderKind::External;
    cfg.dimension = dim;
    cfg.cache_path = cache;
    cfg.endpoint = endpoint;
    cfg.validate();
    return cfg;
  }
};

std::vector<uint64_t> parse_seed_list(const std::string& s) {
  std::vector<uint64_t> seeds;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) seeds.push_back(std::stoull(item));
  }
  if (seeds.empty()) throw SchemaError("--seeds must name at least one seed");
  return seeds;
}

int run(int argc, char** argv) {
  CLI::App app{"OpenFSP: two-stage frame semantic parsing with simple labels"};
  app.require_subcommand(1);
  bool json_output = false;
  app.add_flag("--json", json_output, "Machine-readable output and errors");

  // --- ingest ---------------------------------------------------------
  auto* ingest = app.add_subcommand("ingest", "Load a TOP-format data directory and report splits");
  std::string data_dir, ingest_out;
  ingest->add_option("--data-dir", data_dir, "Directory of <domain>_<split>.tsv files")->required();
  ingest->add_option("--out", ingest_out, "Write canonical JSONL splits to this directory");

  // --- train-dap ------------------------------------------------------
  auto* train_dap = app.add_subcommand("train-dap", "Train the domain-agnostic BIO tagger");
  std::string dap_data_dir, dap_out;
  std::vector<std::string> exclude;
  int dap_epochs = 5;
  uint64_t dap_seed = 1;
  train_dap->add_option("--data-dir", dap_data_dir)->required();
  train_dap->add_option("--out", dap_out, "Model output path (JSONL)")->required();
  train_dap->add_option("--exclude-domain", exclude, "Domains to hold out");
  train_dap->add_option("--epochs", dap_epochs);
  train_dap->add_option("--seed", dap_seed);

  // --- register -------------------------------------------------------
  auto* reg = app.add_subcommand("register", "Register a domain spec file");
  std::string registry_dir, spec_file;
  reg->add_option("--registry", registry_dir, "Registry directory")->required();
  reg->add_option("spec", spec_file, "Domain spec JSON file")->required();

  // --- finalize -------------------------------------------------------
  auto* fin = app.add_subcommand("finalize", "Train a registered domain's head");
  std::string fin_registry, fin_domain;
  ProviderFlags fin_provider;
  double fin_lr = 0.1, fin_l2 = 1e-4;
  int fin_epochs = 200;
  uint64_t fin_seed = 0;
  fin->add_option("--registry", fin_registry)->required();
  fin->add_option("--domain", fin_domain)->required();
  fin->add_option("--lr", fin_lr, "Head learning rate");
  fin->add_option("--epochs", fin_epochs, "Head training epochs");
  fin->add_option("--l2", fin_l2, "Head L2 regularization");
  fin->add_option("--seed", fin_seed);
  fin_provider.attach(fin);

  // --- parse ----------------------------------------------------------
  auto* parse_cmd = app.add_subcommand("parse", "Parse one utterance against the registry");
  std::string parse_text, parse_registry, parse_model, parse_top;
  ProviderFlags parse_provider;
  int parse_k = 3;
  bool goldenated = false;
  parse_cmd->add_option("--text", parse_text, "Utterance text")->required();
  parse_cmd->add_option("--registry", parse_registry)->required();
  parse_cmd->add_option("--model", parse_model, "Trained DAP model path");
  parse_cmd->add_option("--top", parse_top, "Gold bracketed record for --golden-parse");
  parse_cmd->add_option("--k", parse_k, "Number of ranked candidates to return");
  parse_cmd->add_flag("--golden-parse", goldenated, "Use the gold agnostic frame from --top");
  parse_provider.attach(parse_cmd);

  // --- evaluate -------------------------------------------------------
  auto* eval_cmd = app.add_subcommand("evaluate", "Run the leave-one-domain-out evaluation");
  std::string eval_data_dir, eval_seeds = "1,2,3", eval_setting = "standard",
              eval_baseline = "proposed", eval_out;
  std::vector<std::string> eval_domains;
  ProviderFlags eval_provider;
  int eval_examples = 50, eval_tagger_epochs = 5, eval_head_epochs = 200;
  double eval_lr = 0.1, eval_l2 = 1e-4;
  eval_cmd->add_option("--data-dir", eval_data_dir)->required();
  eval_cmd->add_option("--examples-per-label", eval_examples);
  eval_cmd->add_option("--seeds", eval_seeds, "Comma-separated seed list");
  eval_cmd->add_option("--setting", eval_setting)
      ->check(CLI::IsMember({"standard", "golden-parse", "recall-at-3", "intent-acc"}));
  eval_cmd->add_option("--baseline", eval_baseline)
      ->check(CLI::IsMember(
          {"proposed", "majority-vote", "wo-head", "wo-head-type", "fully-supervised"}));
  eval_cmd->add_option("--domains", eval_domains, "Restrict to these domains");
  eval_cmd->add_option("--tagger-epochs", eval_tagger_epochs);
  eval_cmd->add_option("--head-epochs", eval_head_epochs);
  eval_cmd->add_option("--lr", eval_lr);
  eval_cmd->add_option("--l2", eval_l2);
  eval_cmd->add_option("--out", eval_out, "Also write the JSON report to this file");
  eval_provider.attach(eval_cmd);

  // --- report ---------------------------------------------------------
  auto* report_cmd = app.add_subcommand("report", "Format stored evaluation reports");
  std::vector<std::string> report_in;
  bool report_csv = false;
  report_cmd->add_option("--in", report_in, "Report JSON files")->required();
  report_cmd->add_flag("--csv", report_csv, "Emit CSV rows for accuracy curves");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*ingest) {
      Corpus corpus = load_topv2_dir(data_dir);
      if (!ingest_out.empty()) {
        std::filesystem::create_directories(ingest_out);
        for (Split split : {Split::Train, Split::Eval, Split::Test}) {
          std::ofstream out(std::filesystem::path(ingest_out) / (split_name(split) + ".jsonl"));
          write_jsonl(corpus.split_records(split), out);
        }
      }
      json summary = corpus.stats.to_json();
      summary["domains"] = corpus.domains();
      if (json_output) {
        std::cout << summary.dump() << "\n";
      } else {
        std::cout << "train " << corpus.stats.train << " / eval " << corpus.stats.eval
                  << " / test " << corpus.stats.test << "\n"
                  << "dropped: unsupported " << corpus.stats.dropped_unsupported << ", nested "
                  << corpus.stats.dropped_nested << ", malformed "
                  << corpus.stats.dropped_malformed << "\n";
      }
    } else if (*train_dap) {
      Corpus corpus = load_topv2_dir(dap_data_dir);
      const OntologyMap map = load_builtin_map();
      std::vector<Record> projected;
      for (const std::string& domain : corpus.domains()) {
        if (std::find(exclude.begin(), exclude.end(), domain) != exclude.end()) continue;
        for (const Record* r : corpus.select(domain, Split::Train)) {
          projected.push_back(project_agnostic(*r, map));
        }
      }
      std::vector<const Record*> ptrs;
      for (const Record& r : projected) ptrs.push_back(&r);
      TaggerModel model = train_tagger(ptrs, dap_epochs, dap_seed);
      model.save_file(dap_out);
      json summary{{"records", ptrs.size()},
                   {"features", model.weights.size()},
                   {"tags", model.tags.size()},
                   {"model", dap_out}};
      std::cout << (json_output ? summary.dump() : summary.dump(2)) << "\n";
    } else if (*reg) {
      Registry registry(registry_dir);
      DomainSpec spec = registry.register_domain(spec_file);
      json summary{{"domain", spec.name},
                   {"templates", spec.templates.size()},
                   {"labels", spec.simple_labels.size()}};
      std::cout << (json_output ? summary.dump() : summary.dump(2)) << "\n";
    } else if (*fin) {
      Registry registry(fin_registry);
      auto provider = make_provider(fin_provider.config());
      TrainConfig cfg{fin_lr, fin_epochs, fin_l2, fin_seed};
      DomainSpec spec = registry.finalize_domain(fin_domain, cfg, *provider);
      json summary{{"domain", spec.name},
                   {"head_labels", spec.head->labels.size()},
                   {"dim", spec.head->dim}};
      std::cout << (json_output ? summary.dump() : summary.dump(2)) << "\n";
    } else if (*parse_cmd) {
      Registry registry(parse_registry);
      auto provider = make_provider(parse_provider.config());
      const OntologyMap map = registry.global_map();
      const auto domains = registry.servable();
      const Utterance utterance = Utterance::from_text(parse_text);

      MatchResult result;
      if (goldenated) {
        if (parse_top.empty()) throw SchemaError("--golden-parse requires --top");
        Record gold = parse_top_record(parse_top);
        const Frame query = golden_parse(gold, map);
        result.query = query;
        for (const DomainBundle& bundle : domains) {
          const LabelProbFn prob = make_head_scorer(bundle.head, *provider);
          for (const FrameTemplate& tmpl : bundle.inventory) {
            if (!eligible(tmpl, query, map)) continue;
            result.ranked.push_back(sim(tmpl, query, prob, map, gold.utterance));
          }
        }
        result.eligible_count = result.ranked.size();
        if (result.ranked.empty()) throw NoEligibleFrame("no template matches the gold frame");
        std::sort(result.ranked.begin(), result.ranked.end(),
                  [](const ScoredTemplate& a, const ScoredTemplate& b) {
                    return a.score != b.score ? a.score > b.score : a.tmpl < b.tmpl;
                  });
        if (parse_k > 0 && result.ranked.size() > static_cast<size_t>(parse_k)) {
          result.ranked.resize(parse_k);
        }
      } else {
        if (parse_model.empty()) throw SchemaError("parse requires --model (or --golden-parse)");
        TaggerModel model = TaggerModel::load_file(parse_model);
        result = parse(utterance, model, domains, map, *provider, parse_k);
      }
      std::cout << result.to_json().dump() << "\n";
    } else if (*eval_cmd) {
      Corpus corpus = load_topv2_dir(eval_data_dir);
      auto provider = make_provider(eval_provider.config());
      EvalConfig cfg;
      cfg.examples_per_label = eval_examples;
      cfg.seeds = parse_seed_list(eval_seeds);
      cfg.setting = setting_from_name(eval_setting);
      cfg.baseline = baseline_from_name(eval_baseline);
      cfg.tagger_epochs = eval_tagger_epochs;
      cfg.head_cfg.learning_rate = eval_lr;
      cfg.head_cfg.epochs = eval_head_epochs;
      cfg.head_cfg.l2 = eval_l2;
      cfg.domains = eval_domains;
      EvalReport report = run_loo(cfg, corpus, *provider);
      const std::string dump = report.to_json().dump();
      if (!eval_out.empty()) {
        std::ofstream out(eval_out);
        out << dump << "\n";
      }
      if (json_output) {
        std::cout << dump << "\n";
      } else {
        std::cout << report.to_table();
      }
    } else if (*report_cmd) {
      if (report_csv) std::cout << EvalReport::csv_header();
      for (const std::string& file : report_in) {
        std::ifstream in(file);
        if (!in) throw SchemaError("cannot open report: " + file);
        json j = json::parse(in, nullptr, false);
        if (j.is_discarded()) throw SchemaError("report is not valid JSON: " + file);
        EvalReport report;
        report.setting = j.value("setting", "standard");
        report.baseline = j.value("baseline", "proposed");
        report.examples_per_label = j.value("examples_per_label", 0);
        report.seeds = j.value("seeds", std::vector<uint64_t>{});
        auto stats_from = [](const json& m) {
          return MetricStats{m.value("mean", 0.0), m.value("stddev", 0.0)};
        };
        auto domain_from = [&](const json& d) {
          DomainReport rep;
          rep.frame_accuracy = stats_from(d.at("frame_accuracy"));
          rep.recall_at_1 = stats_from(d.at("recall_at_1"));
          rep.recall_at_3 = stats_from(d.at("recall_at_3"));
          rep.intent_accuracy = stats_from(d.at("intent_accuracy"));
          rep.mrr = stats_from(d.at("mrr"));
          rep.candidate_reduction = stats_from(d.at("candidate_reduction"));
          return rep;
        };
        for (const auto& [name, d] : j.at("per_domain").items()) {
          report.per_domain[name] = domain_from(d);
        }
        report.average = domain_from(j.at("average"));
        std::cout << (report_csv ? report.to_csv() : report.to_table());
      }
    }
    return 0;
  } catch (const Error& e) {
    if (json_output) {
      std::cerr << json{{"error", {{"type", e.kind()}, {"message", e.what()}}}}.dump() << "\n";
    } else {
      std::cerr << "error (" << e.kind() << "): " << e.what() << "\n";
    }
    return 1;
  } catch (const std::exception& e) {
    if (json_output) {
      std::cerr << json{{"error", {{"type", "Internal"}, {"message", e.what()}}}}.dump() << "\n";
    } else {
      std::cerr << "error: " << e.what() << "\n";
    }
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) { return run(argc, argv); }
