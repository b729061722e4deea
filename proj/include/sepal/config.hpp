// Copyright 2026 the sepal authors
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

#include <array>
#include <cstdint>
#include <fstream>
#include <string>

#include <json.hpp>

#include "sepal/error.hpp"

namespace sepal {

// Pipeline configuration. Defaults are a small-graph profile; propagate.T = 0
// means "derive from the graph" (2.5x the sampled mean shortest path length,
// rounded up).
struct PipelineConfig {
  std::string input;
  std::string format = "tab";  // tab | whitespace
  std::string out_dir = "out";
  unsigned threads = 1;

  struct Core {
    std::string strategy = "hybrid";  // degree | hybrid
    double eta_n = 0.3;
    double eta_e = 0.05;
  } core;

  struct Blocs {
    double h = 0.8;
    std::size_t m = 40000;
  } blocs;

  struct Train {
    std::string op = "distmult";  // distmult | transe | rotate
    std::size_t d = 100;
    std::size_t n_epoch = 75;
    std::size_t b = 512;
    std::size_t p = 100;
    double lr = 1e-3;
    std::uint64_t seed = 0;
  } train;

  struct Propagate {
    std::size_t T = 0;  // 0 = auto
    double alpha = 1.0;
  } propagate;

  struct Eval {
    bool enabled = false;
    std::array<double, 3> ratios = {0.9, 0.05, 0.05};
    std::size_t n_negatives = 10000;
  } eval;
};

namespace detail {

inline void config_check(bool ok, const std::string& field, const std::string& what) {
  if (!ok) throw ConfigError("config field " + field + ": " + what);
}

template <typename T>
T json_field(const nlohmann::json& obj, const std::string& path, const char* key, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError("config field " + path + key + ": wrong type");
  }
}

inline void reject_unknown_keys(const nlohmann::json& obj, const std::string& path,
                                std::initializer_list<const char*> known) {
  for (const auto& [key, value] : obj.items()) {
    bool found = false;
    for (const char* k : known)
      if (key == k) found = true;
    if (!found) throw ConfigError("config field " + path + key + ": unknown field");
  }
}

inline nlohmann::json json_section(const nlohmann::json& obj, const std::string& path,
                                   const char* key) {
  if (!obj.contains(key)) return nlohmann::json::object();
  const auto& s = obj.at(key);
  if (!s.is_object()) throw ConfigError("config field " + path + key + ": must be an object");
  return s;
}

}  // namespace detail

inline void validate_config_core(const PipelineConfig& c) {
  using detail::config_check;
  config_check(c.core.strategy == "degree" || c.core.strategy == "hybrid", "core.strategy",
               "must be degree or hybrid");
  config_check(c.core.eta_n > 0.0 && c.core.eta_n <= 1.0, "core.eta_n", "must be in (0, 1]");
  config_check(c.core.eta_e >= 0.0 && c.core.eta_e <= 1.0, "core.eta_e", "must be in [0, 1]");
}

inline void validate_config_blocs(const PipelineConfig& c) {
  using detail::config_check;
  config_check(c.blocs.h > 0.0 && c.blocs.h < 1.0, "blocs.h", "must be in (0, 1)");
  config_check(c.blocs.m >= 2, "blocs.m", "must be >= 2");
}

inline void validate_config_train(const PipelineConfig& c) {
  using detail::config_check;
  config_check(c.train.op == "distmult" || c.train.op == "transe" || c.train.op == "rotate",
               "train.operator", "must be distmult, transe, or rotate");
  config_check(c.train.d >= 1, "train.d", "must be >= 1");
  config_check(!(c.train.op == "rotate" && c.train.d % 2 != 0), "train.d",
               "must be even for rotate");
  config_check(c.train.b >= 1, "train.b", "must be >= 1");
  config_check(c.train.p >= 1, "train.p", "must be >= 1");
  config_check(c.train.lr > 0.0, "train.lr", "must be > 0");
}

inline void validate_config_eval(const PipelineConfig& c) {
  using detail::config_check;
  double ratio_sum = 0.0;
  for (double r : c.eval.ratios) ratio_sum += r;
  config_check(c.eval.ratios[0] > 0.0, "eval.ratios", "train ratio must be > 0");
  config_check(c.eval.ratios[1] >= 0.0 && c.eval.ratios[2] >= 0.0, "eval.ratios",
               "ratios must be non-negative");
  config_check(ratio_sum > 1.0 - 1e-9 && ratio_sum < 1.0 + 1e-9, "eval.ratios",
               "ratios must sum to 1");
  config_check(c.eval.n_negatives >= 1, "eval.n_negatives", "must be >= 1");
}

inline void validate_config(const PipelineConfig& c) {
  using detail::config_check;
  config_check(!c.input.empty(), "input", "required");
  config_check(c.format == "tab" || c.format == "whitespace", "format",
               "must be tab or whitespace");
  config_check(!c.out_dir.empty(), "out_dir", "required");
  config_check(c.threads >= 1, "threads", "must be >= 1");
  validate_config_core(c);
  validate_config_blocs(c);
  validate_config_train(c);
  config_check(c.propagate.alpha > 0.0, "propagate.alpha", "must be > 0");
  validate_config_eval(c);
}

inline PipelineConfig config_from_json(const nlohmann::json& j) {
  using detail::json_field;
  using detail::json_section;
  using detail::reject_unknown_keys;
  if (!j.is_object()) throw ConfigError("config root must be an object");
  reject_unknown_keys(j, "", {"input", "format", "out_dir", "threads", "core", "blocs", "train",
                              "propagate", "eval"});
  PipelineConfig c;
  c.input = json_field<std::string>(j, "", "input", c.input);
  c.format = json_field<std::string>(j, "", "format", c.format);
  c.out_dir = json_field<std::string>(j, "", "out_dir", c.out_dir);
  c.threads = json_field<unsigned>(j, "", "threads", c.threads);

  const auto core = json_section(j, "", "core");
  reject_unknown_keys(core, "core.", {"strategy", "eta_n", "eta_e"});
  c.core.strategy = json_field<std::string>(core, "core.", "strategy", c.core.strategy);
  c.core.eta_n = json_field<double>(core, "core.", "eta_n", c.core.eta_n);
  c.core.eta_e = json_field<double>(core, "core.", "eta_e", c.core.eta_e);

  const auto blocs = json_section(j, "", "blocs");
  reject_unknown_keys(blocs, "blocs.", {"h", "m"});
  c.blocs.h = json_field<double>(blocs, "blocs.", "h", c.blocs.h);
  c.blocs.m = json_field<std::size_t>(blocs, "blocs.", "m", c.blocs.m);

  const auto train = json_section(j, "", "train");
  reject_unknown_keys(train, "train.", {"operator", "d", "n_epoch", "b", "p", "lr", "seed"});
  c.train.op = json_field<std::string>(train, "train.", "operator", c.train.op);
  c.train.d = json_field<std::size_t>(train, "train.", "d", c.train.d);
  c.train.n_epoch = json_field<std::size_t>(train, "train.", "n_epoch", c.train.n_epoch);
  c.train.b = json_field<std::size_t>(train, "train.", "b", c.train.b);
  c.train.p = json_field<std::size_t>(train, "train.", "p", c.train.p);
  c.train.lr = json_field<double>(train, "train.", "lr", c.train.lr);
  c.train.seed = json_field<std::uint64_t>(train, "train.", "seed", c.train.seed);

  const auto prop = json_section(j, "", "propagate");
  reject_unknown_keys(prop, "propagate.", {"T", "alpha"});
  c.propagate.T = json_field<std::size_t>(prop, "propagate.", "T", c.propagate.T);
  if (prop.contains("T") && c.propagate.T < 1)
    throw ConfigError("config field propagate.T: must be >= 1");
  c.propagate.alpha = json_field<double>(prop, "propagate.", "alpha", c.propagate.alpha);

  const auto eval = json_section(j, "", "eval");
  reject_unknown_keys(eval, "eval.", {"enabled", "ratios", "n_negatives"});
  c.eval.enabled = json_field<bool>(eval, "eval.", "enabled", c.eval.enabled);
  c.eval.ratios = json_field<std::array<double, 3>>(eval, "eval.", "ratios", c.eval.ratios);
  c.eval.n_negatives = json_field<std::size_t>(eval, "eval.", "n_negatives", c.eval.n_negatives);

  validate_config(c);
  return c;
}

inline nlohmann::json config_to_json(const PipelineConfig& c) {
  nlohmann::json j;
  j["input"] = c.input;
  j["format"] = c.format;
  j["out_dir"] = c.out_dir;
  j["threads"] = c.threads;
  j["core"] = {{"strategy", c.core.strategy}, {"eta_n", c.core.eta_n}, {"eta_e", c.core.eta_e}};
  j["blocs"] = {{"h", c.blocs.h}, {"m", c.blocs.m}};
  j["train"] = {{"operator", c.train.op}, {"d", c.train.d},   {"n_epoch", c.train.n_epoch},
                {"b", c.train.b},         {"p", c.train.p},   {"lr", c.train.lr},
                {"seed", c.train.seed}};
  j["propagate"] = nlohmann::json::object();
  if (c.propagate.T >= 1) j["propagate"]["T"] = c.propagate.T;
  j["propagate"]["alpha"] = c.propagate.alpha;
  j["eval"] = {{"enabled", c.eval.enabled},
               {"ratios", c.eval.ratios},
               {"n_negatives", c.eval.n_negatives}};
  return j;
}

inline PipelineConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config parse error in " + path + ": " + e.what());
  }
  return config_from_json(j);
}

inline void save_config(const std::string& path, const PipelineConfig& c) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open for writing: " + path);
  out << config_to_json(c).dump(2) << '\n';
}

}  // namespace sepal
