#pragma once

#include <cstdint>
#include <fstream>
#include <set>
#include <string>

#include <json.hpp>

#include "hok/classify.hpp"
#include "hok/errors.hpp"
#include "hok/pooling.hpp"
#include "hok/synth.hpp"

namespace hok {

// Run configuration shared by the CLI commands. Every field has a default;
// the JSON schema rejects unknown keys and out-of-range values up front.
struct RunConfig {
  DescriptorKind descriptor = DescriptorKind::hok;
  HokConfig hok;
  int score_pivot_count = 48;
  int temporal_pivot_count = 5;
  double sigma_t = 0.1;
  int gmm_max_iters = 100;
  double second_sigma = 0.1;
  double second_epsilon = 1e-6;
  double classifier_lambda = 1e-3;
  int classifier_epochs = 300;
  int folds = 3;
  SynthSpec synth;
  std::uint64_t seed = 42;
  int threads = 1;
  std::string output;

  void validate() const {
    hok.validate();
    synth.validate();
    if (score_pivot_count < 1)
      throw ValidationError("config: pivots.k_f must be >= 1");
    if (temporal_pivot_count < 1)
      throw ValidationError("config: pivots.k_t must be >= 1");
    if (!(sigma_t > 0.0)) throw ValidationError("config: pivots.sigma_t must be > 0");
    if (gmm_max_iters < 1) throw ValidationError("config: pivots.gmm_max_iters must be >= 1");
    if (!(second_sigma > 0.0)) throw ValidationError("config: second_order.sigma must be > 0");
    if (!(second_epsilon > 0.0))
      throw ValidationError("config: second_order.epsilon must be > 0");
    if (classifier_lambda < 0.0)
      throw ValidationError("config: classifier.lambda must be >= 0");
    if (classifier_epochs < 1) throw ValidationError("config: classifier.epochs must be >= 1");
    if (folds < 2) throw ValidationError("config: eval.folds must be >= 2");
    if (threads < 1) throw ValidationError("config: threads must be >= 1");
  }

  PipelineOptions pipeline() const {
    PipelineOptions p;
    p.pooling.descriptor = descriptor;
    p.pooling.hok = hok;
    p.pooling.second_sigma = second_sigma;
    p.pooling.second_epsilon = second_epsilon;
    p.score_pivot_count = score_pivot_count;
    p.temporal_pivot_count = temporal_pivot_count;
    p.sigma_t = sigma_t;
    p.gmm.max_iters = gmm_max_iters;
    p.lambda = classifier_lambda;
    p.epochs = classifier_epochs;
    p.threads = threads;
    return p;
  }
};

namespace detail {

inline void check_keys(const nlohmann::json& j, const std::set<std::string>& allowed,
                       const std::string& context) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key()))
      throw ValidationError("config: unknown key '" + it.key() + "' in " + context);
}

template <typename T>
void read_field(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) {
    try {
      out = j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(std::string("config: bad value for '") + key + "': " + e.what());
    }
  }
}

}  // namespace detail

inline RunConfig parse_run_config(const nlohmann::json& j) {
  RunConfig cfg;
  detail::check_keys(j,
                     {"descriptor", "hok", "pivots", "second_order", "classifier", "eval",
                      "synth", "seed", "threads", "output"},
                     "top level");
  if (j.contains("descriptor"))
    cfg.descriptor = descriptor_kind_from_string(j.at("descriptor").get<std::string>());
  if (j.contains("hok")) {
    const auto& h = j.at("hok");
    detail::check_keys(h, {"r", "zeta1", "zeta2", "alpha", "lambda_mode", "truncation_rank"},
                       "hok");
    detail::read_field(h, "r", cfg.hok.order);
    detail::read_field(h, "zeta1", cfg.hok.zeta1);
    detail::read_field(h, "zeta2", cfg.hok.zeta2);
    detail::read_field(h, "alpha", cfg.hok.alpha);
    if (h.contains("lambda_mode"))
      cfg.hok.lambda_mode = lambda_mode_from_string(h.at("lambda_mode").get<std::string>());
    detail::read_field(h, "truncation_rank", cfg.hok.truncation_rank);
  }
  if (j.contains("pivots")) {
    const auto& p = j.at("pivots");
    detail::check_keys(p, {"k_f", "k_t", "sigma_t", "gmm_max_iters"}, "pivots");
    detail::read_field(p, "k_f", cfg.score_pivot_count);
    detail::read_field(p, "k_t", cfg.temporal_pivot_count);
    detail::read_field(p, "sigma_t", cfg.sigma_t);
    detail::read_field(p, "gmm_max_iters", cfg.gmm_max_iters);
  }
  if (j.contains("second_order")) {
    const auto& s = j.at("second_order");
    detail::check_keys(s, {"sigma", "epsilon"}, "second_order");
    detail::read_field(s, "sigma", cfg.second_sigma);
    detail::read_field(s, "epsilon", cfg.second_epsilon);
  }
  if (j.contains("classifier")) {
    const auto& c = j.at("classifier");
    detail::check_keys(c, {"lambda", "epochs"}, "classifier");
    detail::read_field(c, "lambda", cfg.classifier_lambda);
    detail::read_field(c, "epochs", cfg.classifier_epochs);
  }
  if (j.contains("eval")) {
    const auto& e = j.at("eval");
    detail::check_keys(e, {"folds"}, "eval");
    detail::read_field(e, "folds", cfg.folds);
  }
  if (j.contains("synth")) {
    const auto& s = j.at("synth");
    detail::check_keys(s,
                       {"classes", "sequences_per_class", "min_length", "max_length",
                        "noise", "modes_per_class", "dim"},
                       "synth");
    detail::read_field(s, "classes", cfg.synth.classes);
    detail::read_field(s, "sequences_per_class", cfg.synth.sequences_per_class);
    detail::read_field(s, "min_length", cfg.synth.min_length);
    detail::read_field(s, "max_length", cfg.synth.max_length);
    detail::read_field(s, "noise", cfg.synth.noise);
    detail::read_field(s, "modes_per_class", cfg.synth.modes_per_class);
    detail::read_field(s, "dim", cfg.synth.dim);
  }
  detail::read_field(j, "seed", cfg.seed);
  detail::read_field(j, "threads", cfg.threads);
  detail::read_field(j, "output", cfg.output);
  try {
    cfg.validate();
  } catch (const Error& e) {
    throw ValidationError(e.what());
  }
  return cfg;
}

inline RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("config '" + path + "': " + e.what());
  }
  return parse_run_config(j);
}

inline nlohmann::json run_config_to_json(const RunConfig& cfg) {
  nlohmann::json j;
  j["descriptor"] = to_string(cfg.descriptor);
  j["hok"] = {{"r", cfg.hok.order},
              {"zeta1", cfg.hok.zeta1},
              {"zeta2", cfg.hok.zeta2},
              {"alpha", cfg.hok.alpha},
              {"lambda_mode", to_string(cfg.hok.lambda_mode)},
              {"truncation_rank", cfg.hok.truncation_rank}};
  j["pivots"] = {{"k_f", cfg.score_pivot_count},
                 {"k_t", cfg.temporal_pivot_count},
                 {"sigma_t", cfg.sigma_t},
                 {"gmm_max_iters", cfg.gmm_max_iters}};
  j["second_order"] = {{"sigma", cfg.second_sigma}, {"epsilon", cfg.second_epsilon}};
  j["classifier"] = {{"lambda", cfg.classifier_lambda}, {"epochs", cfg.classifier_epochs}};
  j["eval"] = {{"folds", cfg.folds}};
  j["synth"] = {{"classes", cfg.synth.classes},
                {"sequences_per_class", cfg.synth.sequences_per_class},
                {"min_length", cfg.synth.min_length},
                {"max_length", cfg.synth.max_length},
                {"noise", cfg.synth.noise},
                {"modes_per_class", cfg.synth.modes_per_class},
                {"dim", cfg.synth.dim}};
  j["seed"] = cfg.seed;
  j["threads"] = cfg.threads;
  if (!cfg.output.empty()) j["output"] = cfg.output;
  return j;
}

}  // namespace hok
