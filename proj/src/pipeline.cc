// Copyright 2026 The NKGE Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "nkge/pipeline.h"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <memory>

#include "nkge/checkpoint.h"
#include "nkge/errors.h"
#include "nkge/evaluator.h"
#include "nkge/model.h"
#include "nkge/neighbors.h"
#include "nkge/trainer.h"

namespace nkge {

namespace fs = std::filesystem;

fs::path Artifacts::neighbor_cache() const {
  if (!neighbor_cache_override.empty()) return neighbor_cache_override;
  return dir / ("neighbors-" + neighbor_hash + ".tsv");
}
fs::path Artifacts::neighbor_stats() const {
  return dir / ("neighbors-" + neighbor_hash + ".stats.json");
}
fs::path Artifacts::pretrain_checkpoint() const {
  return dir / ("pretrain-" + pretrain_hash + ".ckpt");
}
fs::path Artifacts::pretrain_log() const {
  return dir / ("pretrain-" + pretrain_hash + ".log.jsonl");
}
fs::path Artifacts::model_checkpoint() const {
  return dir / ("model-" + train_hash + ".ckpt");
}
fs::path Artifacts::train_log() const {
  return dir / ("train-" + train_hash + ".log.jsonl");
}
fs::path Artifacts::metrics(const std::string& split, bool filtered) const {
  return dir / ("metrics-" + train_hash + "-" + split +
                (filtered ? "" : "-raw") + ".json");
}
fs::path Artifacts::stats() const {
  return dir / ("stats-" + neighbor_hash + ".json");
}
fs::path Artifacts::resolved_config(const std::string& stage,
                                    const std::string& hash) const {
  return dir / (stage + "-" + hash + ".config");
}

Artifacts artifacts_for(const RunConfig& config) {
  Artifacts a;
  a.dir = config.output;
  a.neighbor_hash = stage_hash(config, Stage::kNeighbors);
  a.pretrain_hash = stage_hash(config, Stage::kPretrain);
  a.train_hash = stage_hash(config, Stage::kTrain);
  a.neighbor_cache_override = config.neighbor_cache;
  return a;
}

OutputLock::OutputLock(const fs::path& dir) : path_(dir / ".nkge.lock") {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    throw ConfigError("cannot create output directory " + dir.string() +
                      ": " + ec.message());
  }
  std::FILE* f = std::fopen(path_.c_str(), "wx");
  if (!f) {
    throw ConfigError("output directory is in use (" + path_.string() +
                      " exists); remove the lock if no other run is active");
  }
  std::fclose(f);
}

OutputLock::~OutputLock() {
  std::error_code ec;
  fs::remove(path_, ec);
}

namespace {

using Clock = std::chrono::steady_clock;

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw DataError("cannot write " + path.string());
}

void require(const fs::path& path, const std::string& what,
             const std::string& hint) {
  if (!fs::exists(path)) {
    throw DataError("missing " + what + ": " + path.string() + " (" + hint +
                    ")");
  }
}

const std::vector<Triple>& split_of(const KnowledgeGraph& kg,
                                    const std::string& split) {
  if (split == "train") return kg.train;
  if (split == "valid") return kg.valid;
  return kg.test;
}

DescriptionCorpus load_corpus(const RunConfig& config, const KnowledgeGraph& kg,
                              std::ostream& out) {
  if (config.descriptions.empty() || !fs::exists(config.descriptions)) {
    if (config.train.neighbor_mode != NeighborMode::kTopological) {
      out << "warning: no description file"
          << (config.descriptions.empty() ? "" : " at " + config.descriptions)
          << "; semantic neighbor sets are empty\n";
    }
    return empty_corpus(kg);
  }
  std::optional<fs::path> names;
  if (!config.names.empty()) names = config.names;
  DescriptionCorpus corpus = load_descriptions(config.descriptions, kg, names);
  if (corpus.skipped_unknown > 0) {
    out << "warning: skipped " << corpus.skipped_unknown
        << " description lines for unknown entities\n";
  }
  return corpus;
}

std::shared_ptr<const NeighborTable> load_neighbors(const RunConfig& config,
                                                    const Artifacts& a,
                                                    const KnowledgeGraph& kg) {
  if (config.train.encoder == EncoderKind::kNone) return nullptr;
  require(a.neighbor_cache(), "neighbor cache", "run `nkge preprocess` first");
  auto table =
      std::make_shared<NeighborTable>(read_neighbor_cache(a.neighbor_cache()));
  if (table->k() != config.train.neighbors ||
      table->mode() != config.train.neighbor_mode ||
      table->entity_count() != kg.entity_count()) {
    throw ConfigError("neighbor cache " + a.neighbor_cache().string() +
                      " does not match the config (K, mode or entity count)");
  }
  return table;
}

class JsonLines {
 public:
  explicit JsonLines(const fs::path& path) : out_(path, std::ios::binary) {
    if (!out_) throw DataError("cannot write " + path.string());
  }
  void operator()(const EpochRecord& record) {
    out_ << to_json(record).dump() << "\n";
    out_.flush();
  }

 private:
  std::ofstream out_;
};

void print_metrics(std::ostream& out, const EvalResult& r) {
  out << std::left << std::setw(10) << "side" << std::right << std::setw(10)
      << "MR" << std::setw(10) << "MRR" << std::setw(10) << "Hits@1"
      << std::setw(10) << "Hits@3" << std::setw(10) << "Hits@10" << "\n";
  auto row = [&](const char* name, const Metrics& m) {
    out << std::left << std::setw(10) << name << std::right << std::fixed
        << std::setprecision(1) << std::setw(10) << m.mr
        << std::setprecision(4) << std::setw(10) << m.mrr << std::setw(10)
        << m.hits1 << std::setw(10) << m.hits3 << std::setw(10) << m.hits10
        << "\n";
  };
  row("head", r.head);
  row("tail", r.tail);
  row("combined", r.combined);
  out << std::defaultfloat;
}

}  // namespace

KnowledgeGraph load_graph(const RunConfig& config) {
  if (config.dataset.empty()) throw ConfigError("config key dataset is unset");
  KnowledgeGraph kg = load_dataset(config.dataset);
  if (config.subsample_entities > 0) {
    kg = subsample_by_degree(kg, config.subsample_entities);
  }
  return kg;
}

void cmd_preprocess(const RunConfig& config, std::ostream& out) {
  const Artifacts a = artifacts_for(config);
  OutputLock lock(a.dir);
  const KnowledgeGraph kg = load_graph(config);
  const DescriptionCorpus corpus = load_corpus(config, kg, out);
  NeighborSets sets;
  sets.topological = extract_topological(kg);
  SemanticReport report;
  sets.semantic = extract_semantic(corpus, &report);
  const NeighborFrequencies freqs = neighbor_frequency(sets);
  const std::size_t k = config.train.neighbors;

  nlohmann::json stats{{"dataset", kg.name},
                       {"config_hash", a.neighbor_hash},
                       {"K", k},
                       {"mode", to_string(config.train.neighbor_mode)},
                       {"entities", kg.entity_count()},
                       {"missing_descriptions", corpus.missing_descriptions()},
                       {"excluded_short_names", report.excluded_short_names}};
  for (NeighborMode mode : {NeighborMode::kBoth, NeighborMode::kTopological,
                            NeighborMode::kSemantic}) {
    const NeighborTable table = select_neighbors(sets, freqs, k, mode);
    stats["histogram"][std::string(to_string(mode))] =
        neighbor_histogram(table);
    std::size_t by_flag[3] = {0, 0, 0};
    for (std::size_t e = 0; e < table.entity_count(); ++e) {
      for (Provenance p : table.flags(static_cast<EntityId>(e))) {
        ++by_flag[static_cast<int>(p)];
      }
    }
    stats["provenance"][std::string(to_string(mode))] = {
        {"both", by_flag[0]},
        {"topological", by_flag[1]},
        {"semantic", by_flag[2]}};
    if (mode == config.train.neighbor_mode) {
      write_neighbor_cache(a.neighbor_cache(), table);
    }
  }
  write_text(a.neighbor_stats(), stats.dump(2) + "\n");
  write_text(a.resolved_config("preprocess", a.neighbor_hash),
             format_config(config));
  out << "wrote " << a.neighbor_cache().string() << " (" << kg.entity_count()
      << " rows)\n";
}

void cmd_pretrain(const RunConfig& config, std::ostream& out) {
  const Artifacts a = artifacts_for(config);
  OutputLock lock(a.dir);
  const KnowledgeGraph kg = load_graph(config);
  const TrainConfig pc = pretrain_config(config.train);
  NkgeModel<float> model(pc.model_config(kg), nullptr);
  model.initialize(pc.seed);
  JsonLines log(a.pretrain_log());
  FitOptions options;
  options.on_epoch = [&](const EpochRecord& r) { log(r); };
  const TrainResult result = pretrain_transe(model, kg, config.train, options);
  save_checkpoint(a.pretrain_checkpoint(), model.params(), a.pretrain_hash);
  write_text(a.resolved_config("pretrain", a.pretrain_hash),
             format_config(config));
  out << "pretrained " << result.epochs_run << " epochs, best valid MRR "
      << result.best_valid_mrr << " at epoch " << result.best_epoch
      << "; wrote " << a.pretrain_checkpoint().string() << "\n";
}

namespace {

NkgeModel<float> build_model(const RunConfig& config, const Artifacts& a,
                             const KnowledgeGraph& kg) {
  return NkgeModel<float>(config.train.model_config(kg),
                          load_neighbors(config, a, kg));
}

}  // namespace

void cmd_train(const RunConfig& config, std::ostream& out) {
  const Artifacts a = artifacts_for(config);
  OutputLock lock(a.dir);
  const KnowledgeGraph kg = load_graph(config);
  NkgeModel<float> model = build_model(config, a, kg);
  model.initialize(config.train.seed);
  if (config.train.warm_start) {
    require(a.pretrain_checkpoint(), "pretraining checkpoint",
            "run `nkge pretrain` first or set warm_start = false");
    const Checkpoint ck = load_checkpoint(a.pretrain_checkpoint());
    const auto restored = restore_matching(ck, model.params());
    out << "warm start restored:";
    for (const auto& n : restored) out << " " << n;
    out << "\n";
    model.project();
  }
  JsonLines log(a.train_log());
  FitOptions options;
  options.on_epoch = [&](const EpochRecord& r) { log(r); };
  const TrainResult result = fit(model, kg, config.train, options);
  save_checkpoint(a.model_checkpoint(), model.params(), a.train_hash);
  write_text(a.resolved_config("train", a.train_hash), format_config(config));
  out << "trained " << result.epochs_run << " epochs"
      << (result.early_stopped ? " (early stop)" : "") << ", best valid MRR "
      << result.best_valid_mrr << " at epoch " << result.best_epoch
      << "; wrote " << a.model_checkpoint().string() << "\n";
}

nlohmann::json cmd_eval(const RunConfig& config, std::ostream& out,
                        bool filtered) {
  const Artifacts a = artifacts_for(config);
  OutputLock lock(a.dir);
  require(a.model_checkpoint(), "model checkpoint", "run `nkge train` first");
  const KnowledgeGraph kg = load_graph(config);
  NkgeModel<float> model = build_model(config, a, kg);
  const Checkpoint ck = load_checkpoint(a.model_checkpoint());
  if (ck.tag != a.train_hash) {
    throw ConfigError("checkpoint " + a.model_checkpoint().string() +
                      " was written by config " + ck.tag);
  }
  const auto restored = restore_matching(ck, model.params());
  if (restored.size() != model.params().size()) {
    throw DataError("checkpoint does not cover every model parameter");
  }
  const auto start = Clock::now();
  ModelRanker<float> ranker(model);
  const EvalResult result =
      evaluate(ranker, kg, split_of(kg, config.eval_split),
               {.filtered = filtered, .threads = config.train.threads});
  const double wall =
      std::chrono::duration<double>(Clock::now() - start).count();
  const nlohmann::json j = metrics_json(result, kg.name, a.train_hash,
                                        config.eval_split, filtered, wall);
  write_text(a.metrics(config.eval_split, filtered), j.dump(2) + "\n");
  write_text(a.resolved_config("eval", a.train_hash), format_config(config));
  out << kg.name << " " << config.eval_split << " ("
      << (filtered ? "filtered" : "raw") << ")\n";
  print_metrics(out, result);
  return j;
}

nlohmann::json cmd_stats(const RunConfig& config, std::ostream& out) {
  const Artifacts a = artifacts_for(config);
  OutputLock lock(a.dir);
  const KnowledgeGraph kg = load_graph(config);
  nlohmann::json j{{"dataset", kg.name},
                   {"config_hash", a.neighbor_hash},
                   {"entities", kg.entity_count()},
                   {"relations", kg.relation_count()},
                   {"train", kg.train.size()},
                   {"valid", kg.valid.size()},
                   {"test", kg.test.size()}};
  if (fs::exists(a.neighbor_cache())) {
    const NeighborTable table = read_neighbor_cache(a.neighbor_cache());
    j["neighbors"] = {
        {"K", table.k()},
        {"histogram",
         {{std::string(to_string(table.mode())), neighbor_histogram(table)}}}};
  }
  write_text(a.stats(), j.dump(2) + "\n");
  out << j.dump(2) << "\n";
  return j;
}

}  // namespace nkge
