// Command-line front end: synthetic data generation, pivot learning, pooling,
// training, cross-validated evaluation, and hyper-parameter sweeps.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hok/hok.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::string out;
};

hok::RunConfig resolve_config(const CommonArgs& args) {
  hok::RunConfig cfg;
  if (!args.config_path.empty()) cfg = hok::load_run_config(args.config_path);
  if (args.seed) cfg.seed = *args.seed;
  if (args.threads) cfg.threads = *args.threads;
  if (!args.out.empty()) cfg.output = args.out;
  cfg.validate();
  return cfg;
}

std::string require_output(const hok::RunConfig& cfg) {
  if (cfg.output.empty())
    throw hok::InvalidParameterError("no output path: pass --out or set \"output\" in the config");
  return cfg.output;
}

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "run configuration JSON");
  cmd->add_option("--seed", args.seed, "seed override");
  cmd->add_option("--threads", args.threads, "worker threads for batch pooling");
  cmd->add_option("--out", args.out, "output path");
}

nlohmann::json descriptors_to_json(const hok::Dataset& ds,
                                   const std::vector<hok::Descriptor>& descs) {
  nlohmann::json j;
  j["kind"] = hok::to_string(descs.empty() ? hok::DescriptorKind::average : descs.front().kind);
  j["config_hash"] = descs.empty() ? "" : descs.front().config_hash;
  j["length"] = descs.empty() ? 0 : descs.front().values.size();
  j["classes"] = ds.classes;
  auto& arr = j["descriptors"] = nlohmann::json::array();
  for (std::size_t i = 0; i < descs.size(); ++i) {
    nlohmann::json e;
    e["id"] = descs[i].sequence_id;
    e["label"] = ds.sequences[i].label;
    e["values"] = descs[i].values;
    arr.push_back(std::move(e));
  }
  return j;
}

int cmd_synth(const CommonArgs& args) {
  const auto cfg = resolve_config(args);
  const auto ds = hok::synth_generate(cfg.synth, cfg.seed);
  hok::save_dataset(ds, require_output(cfg));
  std::cout << "wrote " << ds.sequences.size() << " sequences (" << ds.classes.size()
            << " classes, d=" << ds.dim << ") to " << cfg.output << "\n";
  return 0;
}

int cmd_pivots_learn(const CommonArgs& args, const std::string& data_path) {
  const auto cfg = resolve_config(args);
  const auto ds = hok::load_dataset(data_path);
  if (ds.sequences.empty()) throw hok::InvalidInputError("dataset has no sequences");
  int total = 0;
  for (const auto& s : ds.sequences) total += s.length();
  Eigen::MatrixXd frames(total, ds.dim);
  int row = 0;
  std::vector<int> all(ds.sequences.size());
  for (std::size_t i = 0; i < ds.sequences.size(); ++i) all[i] = static_cast<int>(i);
  for (const auto& s : ds.sequences) {
    frames.middleRows(row, s.length()) = s.scores;
    row += s.length();
  }
  hok::GmmOptions gmm;
  gmm.max_iters = cfg.gmm_max_iters;
  const auto score = hok::learn_score_pivots(frames, cfg.score_pivot_count, gmm, cfg.seed);
  const auto temporal =
      hok::equispaced_temporal_pivots(cfg.temporal_pivot_count, cfg.sigma_t);
  const auto pivots = hok::make_pivot_set(
      score, temporal, hok::pivot_provenance_hash(ds.sequences, all, cfg.seed));
  hok::atomic_write(require_output(cfg), hok::pivot_set_to_json(pivots).dump(2) + "\n");
  std::cout << "learned " << pivots.score_count() << " score pivots and "
            << pivots.temporal_count() << " temporal pivots -> " << cfg.output << "\n";
  return 0;
}

int cmd_pool(const CommonArgs& args, const std::string& mode, const std::string& data_path,
             const std::string& pivots_path) {
  const auto cfg = resolve_config(args);
  const auto ds = hok::load_dataset(data_path);
  hok::PoolingOptions opt = cfg.pipeline().pooling;
  if (mode == "hok") opt.descriptor = hok::DescriptorKind::hok;
  else if (mode == "second") opt.descriptor = hok::DescriptorKind::second_order;
  else if (mode == "avg") opt.descriptor = hok::DescriptorKind::average;
  else throw hok::InvalidParameterError("pool mode must be hok, second or avg");

  hok::PivotSet pivots;
  const bool needs_pivots = opt.descriptor == hok::DescriptorKind::hok;
  if (needs_pivots) {
    if (pivots_path.empty())
      throw hok::InvalidParameterError("pool hok requires --pivots");
    std::ifstream in(pivots_path);
    if (!in) throw hok::IoError("cannot open pivots '" + pivots_path + "'");
    nlohmann::json j;
    in >> j;
    pivots = hok::pivot_set_from_json(j);
  }
  const auto descs =
      hok::pool_all(ds.sequences, opt, needs_pivots ? &pivots : nullptr, cfg.threads);
  hok::atomic_write(require_output(cfg), descriptors_to_json(ds, descs).dump() + "\n");
  std::cout << "pooled " << descs.size() << " descriptors of length "
            << (descs.empty() ? 0 : descs.front().values.size()) << " -> " << cfg.output
            << "\n";
  return 0;
}

int cmd_train(const CommonArgs& args, const std::string& descriptors_path) {
  const auto cfg = resolve_config(args);
  std::ifstream in(descriptors_path);
  if (!in) throw hok::IoError("cannot open descriptors '" + descriptors_path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw hok::ValidationError(std::string("descriptor file: ") + e.what());
  }
  const auto classes = j.at("classes").get<std::vector<std::string>>();
  const auto& arr = j.at("descriptors");
  if (arr.empty()) throw hok::InvalidInputError("descriptor file has no entries");
  const std::size_t dim = arr.at(0).at("values").size();
  Eigen::MatrixXd x(arr.size(), dim);
  std::vector<int> labels;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const auto values = arr.at(i).at("values").get<std::vector<double>>();
    if (values.size() != dim)
      throw hok::DimensionError("descriptor file: inconsistent descriptor lengths");
    x.row(static_cast<Eigen::Index>(i)) =
        Eigen::Map<const Eigen::RowVectorXd>(values.data(), static_cast<Eigen::Index>(dim));
    labels.push_back(arr.at(i).at("label").get<int>());
  }
  const auto model = hok::train_linear(x, labels, static_cast<int>(classes.size()),
                                       cfg.classifier_lambda, cfg.classifier_epochs, cfg.seed);
  nlohmann::json out;
  out["classes"] = classes;
  out["lambda"] = model.lambda;
  out["epochs"] = model.epochs;
  out["final_objective"] = model.final_objective;
  out["biases"] = std::vector<double>(model.biases.begin(), model.biases.end());
  auto& w = out["weights"] = nlohmann::json::array();
  for (int c = 0; c < model.weights.rows(); ++c) {
    nlohmann::json row = nlohmann::json::array();
    for (int d = 0; d < model.weights.cols(); ++d) row.push_back(model.weights(c, d));
    w.push_back(std::move(row));
  }
  hok::atomic_write(require_output(cfg), out.dump() + "\n");
  std::cout << "trained " << classes.size() << "-class model on " << arr.size()
            << " descriptors (objective " << model.final_objective << ") -> " << cfg.output
            << "\n";
  return 0;
}

int cmd_eval_cv(const CommonArgs& args, const std::string& data_path) {
  const auto cfg = resolve_config(args);
  const auto ds = hok::load_dataset(data_path);
  const auto report = hok::cross_validate(ds.sequences, cfg.folds, cfg.pipeline(), cfg.seed);
  hok::atomic_write(require_output(cfg), hok::eval_report_to_json(report).dump(2) + "\n");
  std::cout << "descriptor=" << hok::to_string(cfg.descriptor) << " folds=" << cfg.folds
            << " mean_class_acc=" << report.mean_class_acc << " map=" << report.map
            << " -> " << cfg.output << "\n";
  return 0;
}

int cmd_sweep(const CommonArgs& args, const std::string& data_path, const std::string& param,
              const std::string& values_csv) {
  const auto cfg = resolve_config(args);
  const auto ds = hok::load_dataset(data_path);

  std::vector<double> values;
  if (!values_csv.empty()) {
    std::stringstream ss(values_csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) values.push_back(std::stod(tok));
  } else if (param == "alpha") {
    for (int i = 1; i <= 10; ++i) values.push_back(0.1 * i);
  } else if (param == "k_f") {
    values = {8, 16, 24, 32, 48, 64};
  } else if (param == "k_t") {
    values = {1, 5, 10, 15, 20, 25, 30};
  } else {
    throw hok::InvalidParameterError("sweep param must be alpha, k_f or k_t");
  }

  std::ostringstream csv;
  csv << "param,value,mean_class_acc,map\n";
  for (double v : values) {
    hok::RunConfig run = cfg;
    if (param == "alpha") run.hok.alpha = v;
    else if (param == "k_f") run.score_pivot_count = static_cast<int>(v);
    else if (param == "k_t") run.temporal_pivot_count = static_cast<int>(v);
    else throw hok::InvalidParameterError("sweep param must be alpha, k_f or k_t");
    run.validate();
    const auto report = hok::cross_validate(ds.sequences, run.folds, run.pipeline(), run.seed);
    csv << param << "," << v << "," << report.mean_class_acc << "," << report.map << "\n";
    std::cout << param << "=" << v << " mean_class_acc=" << report.mean_class_acc
              << " map=" << report.map << "\n";
  }
  hok::atomic_write(require_output(cfg), csv.str());
  std::cout << "sweep -> " << cfg.output << "\n";
  return 0;
}

void print_error_json(const std::string& code, const std::string& message) {
  nlohmann::json j;
  j["error"] = {{"code", code}, {"message", message}};
  std::cerr << j.dump() << std::endl;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"higher-order kernel pooling of classifier-score sequences"};
  app.require_subcommand(1);

  CommonArgs synth_args;
  auto* synth = app.add_subcommand("synth", "generate a synthetic benchmark dataset");
  add_common(synth, synth_args);

  CommonArgs pivots_args;
  std::string pivots_data;
  auto* pivots = app.add_subcommand("pivots", "pivot operations");
  pivots->require_subcommand(1);
  auto* pivots_learn = pivots->add_subcommand("learn", "learn score pivots with a GMM");
  add_common(pivots_learn, pivots_args);
  pivots_learn->add_option("--data", pivots_data, "dataset JSONL")->required();

  CommonArgs pool_args;
  std::string pool_mode, pool_data, pool_pivots;
  auto* pool = app.add_subcommand("pool", "compute per-sequence descriptors");
  add_common(pool, pool_args);
  pool->add_option("mode", pool_mode, "hok | second | avg")->required();
  pool->add_option("--data", pool_data, "dataset JSONL")->required();
  pool->add_option("--pivots", pool_pivots, "pivot JSON (required for hok)");

  CommonArgs train_args;
  std::string train_descs;
  auto* train = app.add_subcommand("train", "train a linear classifier on descriptors");
  add_common(train, train_args);
  train->add_option("--descriptors", train_descs, "descriptor JSON")->required();

  CommonArgs eval_args;
  std::string eval_data;
  auto* eval = app.add_subcommand("eval", "evaluation");
  eval->require_subcommand(1);
  auto* eval_cv = eval->add_subcommand("cv", "stratified cross-validated evaluation");
  add_common(eval_cv, eval_args);
  eval_cv->add_option("--data", eval_data, "dataset JSONL")->required();

  CommonArgs sweep_args;
  std::string sweep_data, sweep_param, sweep_values;
  auto* sweep = app.add_subcommand("sweep", "hyper-parameter sweep, CSV output");
  add_common(sweep, sweep_args);
  sweep->add_option("--data", sweep_data, "dataset JSONL")->required();
  sweep->add_option("--param", sweep_param, "alpha | k_f | k_t")->required();
  sweep->add_option("--values", sweep_values, "comma-separated override of the sweep grid");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error_json("cli_parse", e.what());
    return 2;
  }

  try {
    if (synth->parsed()) return cmd_synth(synth_args);
    if (pivots_learn->parsed()) return cmd_pivots_learn(pivots_args, pivots_data);
    if (pool->parsed()) return cmd_pool(pool_args, pool_mode, pool_data, pool_pivots);
    if (train->parsed()) return cmd_train(train_args, train_descs);
    if (eval_cv->parsed()) return cmd_eval_cv(eval_args, eval_data);
    if (sweep->parsed()) return cmd_sweep(sweep_args, sweep_data, sweep_param, sweep_values);
  } catch (const hok::Error& e) {
    print_error_json(hok::error_code_name(e.code()), e.what());
    return 1;
  } catch (const std::exception& e) {
    print_error_json("internal", e.what());
    return 1;
  }
  return 0;
}
