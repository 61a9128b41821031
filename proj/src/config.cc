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

#include "nkge/config.h"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <vector>

#include "nkge/errors.h"

namespace nkge {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

const std::set<std::string>& path_keys() {
  static const std::set<std::string> keys{"dataset", "descriptions", "names",
                                          "output", "neighbor_cache"};
  return keys;
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

template <typename Int>
Int parse_int(const std::string& key, const std::string& v) {
  Int out{};
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size()) {
    throw ConfigError("invalid integer for " + key + ": '" + v + "'");
  }
  return out;
}

double parse_real(const std::string& key, const std::string& v) {
  double out{};
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size()) {
    throw ConfigError("invalid number for " + key + ": '" + v + "'");
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError("invalid boolean for " + key + ": '" + v + "'");
}

OptimizerRule parse_optimizer(const std::string& v) {
  if (v == "sgd") return OptimizerRule::kSgd;
  if (v == "adam") return OptimizerRule::kAdam;
  throw ConfigError("unknown optimizer: " + v);
}

}  // namespace

KeyValues parse_key_values(std::string_view text, std::string_view source) {
  KeyValues out;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{}
                                        : text.substr(nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(std::string(source) + ":" + std::to_string(line_no) +
                        ": expected key=value");
    }
    const std::string key(trim(line.substr(0, eq)));
    if (key.empty()) {
      throw ConfigError(std::string(source) + ":" + std::to_string(line_no) +
                        ": empty key");
    }
    out[key] = std::string(trim(line.substr(eq + 1)));
  }
  return out;
}

KeyValues read_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file: " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  KeyValues kv = parse_key_values(buf.str(), path.string());
  const auto base = std::filesystem::absolute(path).parent_path();
  for (auto& [key, value] : kv) {
    if (path_keys().count(key) && !value.empty() &&
        std::filesystem::path(value).is_relative()) {
      value = (base / value).lexically_normal().string();
    }
  }
  return kv;
}

RunConfig resolve_config(const KeyValues& kv) {
  RunConfig c;
  Variant variant = Variant::kTransE;
  if (auto it = kv.find("variant"); it != kv.end()) {
    variant = parse_variant(it->second);
  }
  c.train = variant == Variant::kConvE ? TrainConfig::conve_defaults()
                                       : TrainConfig::transe_defaults();
  TrainConfig& t = c.train;
  for (const auto& [key, v] : kv) {
    if (key == "variant") {
      t.variant = parse_variant(v);
    } else if (key == "dataset") {
      c.dataset = v;
    } else if (key == "descriptions") {
      c.descriptions = v;
    } else if (key == "names") {
      c.names = v;
    } else if (key == "output") {
      c.output = v;
    } else if (key == "neighbor_cache") {
      c.neighbor_cache = v;
    } else if (key == "subsample_entities") {
      c.subsample_entities = parse_int<std::size_t>(key, v);
    } else if (key == "eval_split") {
      if (v != "valid" && v != "test" && v != "train") {
        throw ConfigError("eval_split must be train, valid or test");
      }
      c.eval_split = v;
    } else if (key == "encoder") {
      t.encoder = parse_encoder(v);
    } else if (key == "neighbor_mode") {
      t.neighbor_mode = parse_neighbor_mode(v);
    } else if (key == "neighbors") {
      t.neighbors = parse_int<std::size_t>(key, v);
    } else if (key == "dim") {
      t.dim = parse_int<std::size_t>(key, v);
    } else if (key == "layers") {
      t.layers = parse_int<std::size_t>(key, v);
    } else if (key == "tie_layers") {
      t.tie_layers = parse_bool(key, v);
    } else if (key == "dissimilarity") {
      t.dissimilarity = parse_dissimilarity(v);
    } else if (key == "margin") {
      t.margin = parse_real(key, v);
    } else if (key == "l2") {
      t.l2 = parse_real(key, v);
    } else if (key == "learning_rate") {
      t.learning_rate = parse_real(key, v);
    } else if (key == "optimizer") {
      t.optimizer = parse_optimizer(v);
    } else if (key == "batch_size") {
      t.batch_size = parse_int<std::size_t>(key, v);
    } else if (key == "max_epochs") {
      t.max_epochs = parse_int<std::size_t>(key, v);
    } else if (key == "eval_every") {
      t.eval_every = parse_int<std::size_t>(key, v);
    } else if (key == "patience") {
      t.patience = parse_int<std::size_t>(key, v);
    } else if (key == "negatives") {
      t.negatives = parse_int<std::size_t>(key, v);
    } else if (key == "label_smoothing") {
      t.label_smoothing = parse_real(key, v);
    } else if (key == "reshape_height") {
      t.conve.reshape_height = parse_int<std::size_t>(key, v);
    } else if (key == "reshape_width") {
      t.conve.reshape_width = parse_int<std::size_t>(key, v);
    } else if (key == "filters") {
      t.conve.filters = parse_int<std::size_t>(key, v);
    } else if (key == "kernel") {
      t.conve.kernel = parse_int<std::size_t>(key, v);
    } else if (key == "input_dropout") {
      t.conve.input_dropout = parse_real(key, v);
    } else if (key == "feature_dropout") {
      t.conve.feature_dropout = parse_real(key, v);
    } else if (key == "hidden_dropout") {
      t.conve.hidden_dropout = parse_real(key, v);
    } else if (key == "init_range") {
      t.init_range = parse_real(key, v);
    } else if (key == "warm_start") {
      t.warm_start = parse_bool(key, v);
    } else if (key == "pretrain_epochs") {
      t.pretrain_epochs = parse_int<std::size_t>(key, v);
    } else if (key == "pretrain_learning_rate") {
      t.pretrain_learning_rate = parse_real(key, v);
    } else if (key == "seed") {
      t.seed = parse_int<std::uint64_t>(key, v);
    } else if (key == "threads") {
      t.threads = parse_int<std::size_t>(key, v);
    } else {
      throw ConfigError("unknown config key: " + key);
    }
  }
  if (t.learning_rate <= 0 || t.pretrain_learning_rate <= 0) {
    throw ConfigError("learning rates must be > 0");
  }
  if (t.l2 < 0) throw ConfigError("l2 must be >= 0");
  if (t.margin <= 0) throw ConfigError("margin must be > 0");
  if (t.dim == 0 || t.batch_size == 0 || t.eval_every == 0 ||
      t.negatives == 0) {
    throw ConfigError("dim, batch_size, eval_every and negatives must be > 0");
  }
  if (t.encoder == EncoderKind::kDmn && t.layers == 0) {
    throw ConfigError("the dmn encoder needs layers >= 1");
  }
  if (t.variant == Variant::kConvE &&
      t.conve.reshape_height * t.conve.reshape_width != t.dim) {
    throw ConfigError("reshape_height * reshape_width must equal dim");
  }
  t.conve.dim = t.dim;
  return c;
}

KeyValues to_key_values(const RunConfig& c) {
  const TrainConfig& t = c.train;
  return {
      {"dataset", c.dataset},
      {"descriptions", c.descriptions},
      {"names", c.names},
      {"output", c.output},
      {"neighbor_cache", c.neighbor_cache},
      {"subsample_entities", std::to_string(c.subsample_entities)},
      {"eval_split", c.eval_split},
      {"variant", std::string(to_string(t.variant))},
      {"encoder", std::string(to_string(t.encoder))},
      {"neighbor_mode", std::string(to_string(t.neighbor_mode))},
      {"neighbors", std::to_string(t.neighbors)},
      {"dim", std::to_string(t.dim)},
      {"layers", std::to_string(t.layers)},
      {"tie_layers", t.tie_layers ? "true" : "false"},
      {"dissimilarity", std::string(to_string(t.dissimilarity))},
      {"margin", format_double(t.margin)},
      {"l2", format_double(t.l2)},
      {"learning_rate", format_double(t.learning_rate)},
      {"optimizer", t.optimizer == OptimizerRule::kSgd ? "sgd" : "adam"},
      {"batch_size", std::to_string(t.batch_size)},
      {"max_epochs", std::to_string(t.max_epochs)},
      {"eval_every", std::to_string(t.eval_every)},
      {"patience", std::to_string(t.patience)},
      {"negatives", std::to_string(t.negatives)},
      {"label_smoothing", format_double(t.label_smoothing)},
      {"reshape_height", std::to_string(t.conve.reshape_height)},
      {"reshape_width", std::to_string(t.conve.reshape_width)},
      {"filters", std::to_string(t.conve.filters)},
      {"kernel", std::to_string(t.conve.kernel)},
      {"input_dropout", format_double(t.conve.input_dropout)},
      {"feature_dropout", format_double(t.conve.feature_dropout)},
      {"hidden_dropout", format_double(t.conve.hidden_dropout)},
      {"init_range", format_double(t.init_range)},
      {"warm_start", t.warm_start ? "true" : "false"},
      {"pretrain_epochs", std::to_string(t.pretrain_epochs)},
      {"pretrain_learning_rate", format_double(t.pretrain_learning_rate)},
      {"seed", std::to_string(t.seed)},
      {"threads", std::to_string(t.threads)},
  };
}

std::string format_config(const RunConfig& config) {
  std::string out;
  for (const auto& [k, v] : to_key_values(config)) {
    out += k + " = " + v + "\n";
  }
  return out;
}

std::string stage_hash(const RunConfig& config, Stage stage) {
  static const std::vector<std::string> neighbor_keys{
      "dataset", "descriptions", "names", "subsample_entities",
      "neighbors", "neighbor_mode"};
  static const std::vector<std::string> pretrain_keys{
      "dataset", "subsample_entities", "dim", "dissimilarity", "margin", "l2",
      "batch_size", "negatives", "pretrain_epochs", "pretrain_learning_rate",
      "eval_every", "patience", "seed"};
  static const std::set<std::string> untracked{"output", "threads",
                                               "eval_split", "neighbor_cache"};
  KeyValues kv = to_key_values(config);
  if (stage == Stage::kPretrain) {
    kv["batch_size"] =
        std::to_string(pretrain_config(config.train).batch_size);
  }
  std::string canonical;
  auto add = [&](const std::string& key) {
    canonical += key + "=" + kv.at(key) + "\n";
  };
  switch (stage) {
    case Stage::kNeighbors:
      for (const auto& k : neighbor_keys) add(k);
      break;
    case Stage::kPretrain:
      for (const auto& k : pretrain_keys) add(k);
      break;
    case Stage::kTrain:
      for (const auto& [k, v] : kv) {
        if (!untracked.count(k)) add(k);
      }
      break;
  }
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : canonical) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace nkge
