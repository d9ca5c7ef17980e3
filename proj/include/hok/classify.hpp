#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "hok/common.hpp"
#include "hok/errors.hpp"
#include "hok/pivots.hpp"
#include "hok/pooling.hpp"

namespace hok {

struct LinearModel {
  Eigen::MatrixXd weights;  // M x D
  Eigen::VectorXd biases;   // M
  double lambda = 0.0;
  int epochs = 0;
  double final_objective = 0.0;
  std::vector<double> objective_trace;

  int num_classes() const { return static_cast<int>(weights.rows()); }
  int feature_dim() const { return static_cast<int>(weights.cols()); }
};

// One-vs-rest L2-regularized logistic objective, averaged over samples. The
// bias is not regularized.
inline double ovr_logistic_objective(const Eigen::MatrixXd& x, const std::vector<int>& labels,
                                     const Eigen::MatrixXd& w, const Eigen::VectorXd& b,
                                     double lambda) {
  const int n = static_cast<int>(x.rows());
  const int m = static_cast<int>(w.rows());
  const Eigen::MatrixXd scores = (x * w.transpose()).rowwise() + b.transpose();
  double loss = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int c = 0; c < m; ++c) {
      const double y = labels[static_cast<std::size_t>(i)] == c ? 1.0 : -1.0;
      const double z = -y * scores(i, c);
      // log(1 + exp(z)) without overflow
      loss += z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
    }
  }
  return loss / n + 0.5 * lambda * w.squaredNorm();
}

inline void ovr_logistic_gradient(const Eigen::MatrixXd& x, const std::vector<int>& labels,
                                  const Eigen::MatrixXd& w, const Eigen::VectorXd& b,
                                  double lambda, Eigen::MatrixXd& grad_w,
                                  Eigen::VectorXd& grad_b) {
  const int n = static_cast<int>(x.rows());
  const int m = static_cast<int>(w.rows());
  const Eigen::MatrixXd scores = (x * w.transpose()).rowwise() + b.transpose();
  Eigen::MatrixXd dscore(n, m);  // d loss / d score, already averaged over n
  for (int i = 0; i < n; ++i) {
    for (int c = 0; c < m; ++c) {
      const double y = labels[static_cast<std::size_t>(i)] == c ? 1.0 : -1.0;
      const double z = y * scores(i, c);
      const double sig = z > 0.0 ? std::exp(-z) / (1.0 + std::exp(-z))
                                 : 1.0 / (1.0 + std::exp(z));
      dscore(i, c) = -y * sig / n;
    }
  }
  grad_w = dscore.transpose() * x + lambda * w;
  grad_b = dscore.colwise().sum().transpose();
}

// Full-batch gradient descent with the fixed step 1/L, where L bounds the
// Lipschitz constant of the gradient; the objective is therefore
// non-increasing by construction.
inline LinearModel train_linear(const Eigen::MatrixXd& x, const std::vector<int>& labels,
                                int num_classes, double lambda, int epochs,
                                std::uint64_t seed) {
  const int n = static_cast<int>(x.rows());
  if (n < 1 || static_cast<int>(labels.size()) != n)
    throw InvalidInputError("train_linear: sample/label count mismatch");
  if (!x.allFinite()) throw NumericError("train_linear: non-finite features");
  if (lambda < 0.0) throw InvalidParameterError("train_linear: lambda must be >= 0");
  if (epochs < 1) throw InvalidParameterError("train_linear: epochs must be >= 1");
  std::set<int> present(labels.begin(), labels.end());
  if (static_cast<int>(present.size()) < 2)
    throw InvalidInputError("train_linear: need at least 2 classes present");
  for (int c : present)
    if (c < 0 || c >= num_classes)
      throw InvalidInputError("train_linear: label outside [0, num_classes)");

  const int d = static_cast<int>(x.cols());
  LinearModel model;
  model.lambda = lambda;
  model.epochs = epochs;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  model.weights.resize(num_classes, d);
  for (int c = 0; c < num_classes; ++c)
    for (int j = 0; j < d; ++j) model.weights(c, j) = 0.01 * gauss(rng);
  model.biases = Eigen::VectorXd::Zero(num_classes);

  const double lip = 0.25 * (x.squaredNorm() / n + 1.0) + lambda;
  const double step = 1.0 / lip;

  Eigen::MatrixXd grad_w;
  Eigen::VectorXd grad_b;
  model.objective_trace.reserve(static_cast<std::size_t>(epochs) + 1);
  model.objective_trace.push_back(
      ovr_logistic_objective(x, labels, model.weights, model.biases, lambda));
  for (int e = 0; e < epochs; ++e) {
    ovr_logistic_gradient(x, labels, model.weights, model.biases, lambda, grad_w, grad_b);
    model.weights -= step * grad_w;
    model.biases -= step * grad_b;
    const double obj = ovr_logistic_objective(x, labels, model.weights, model.biases, lambda);
    if (!std::isfinite(obj))
      throw NumericError("train_linear: objective became non-finite at epoch " +
                         std::to_string(e) + " (step " + std::to_string(step) + ")");
    model.objective_trace.push_back(obj);
  }
  model.final_objective = model.objective_trace.back();
  return model;
}

inline Eigen::VectorXd predict_scores(const LinearModel& model, const Eigen::VectorXd& x) {
  if (x.size() != model.feature_dim())
    throw DimensionError("predict_scores: feature length mismatch");
  return model.weights * x + model.biases;
}

inline int predict_label(const LinearModel& model, const Eigen::VectorXd& x) {
  int best = 0;
  predict_scores(model, x).maxCoeff(&best);
  return best;
}

// Average precision with the precision-at-each-positive estimator; ties keep
// the stable input order.
inline double average_precision(const std::vector<double>& scores,
                                const std::vector<bool>& positives) {
  if (scores.size() != positives.size())
    throw DimensionError("average_precision: scores/positives length mismatch");
  const std::size_t n = scores.size();
  std::size_t num_pos = 0;
  for (bool p : positives) num_pos += p ? 1 : 0;
  if (num_pos == 0)
    throw UndefinedMetricError("average_precision: no positive examples");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  double sum = 0.0;
  std::size_t hits = 0;
  for (std::size_t rank = 0; rank < n; ++rank) {
    if (positives[order[rank]]) {
      ++hits;
      sum += static_cast<double>(hits) / static_cast<double>(rank + 1);
    }
  }
  return sum / static_cast<double>(num_pos);
}

// Stratified fold assignment: per class, indices are shuffled with the seed
// and dealt round-robin, so per-class fold sizes differ by at most one.
inline std::vector<std::vector<int>> stratified_folds(const std::vector<int>& labels,
                                                      int folds, std::uint64_t seed) {
  if (folds < 2) throw InvalidParameterError("stratified_folds: need k >= 2");
  int max_label = -1;
  for (int l : labels) max_label = std::max(max_label, l);
  std::vector<std::vector<int>> by_class(static_cast<std::size_t>(max_label + 1));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0) throw InvalidInputError("stratified_folds: negative label");
    by_class[static_cast<std::size_t>(labels[i])].push_back(static_cast<int>(i));
  }
  std::vector<std::vector<int>> out(static_cast<std::size_t>(folds));
  std::mt19937_64 rng(mix_seed(seed, 0xf01d));
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    auto& members = by_class[c];
    if (static_cast<int>(members.size()) < folds)
      throw StratificationError("class " + std::to_string(c) + " has " +
                                std::to_string(members.size()) + " members, fewer than " +
                                std::to_string(folds) + " folds");
    std::shuffle(members.begin(), members.end(), rng);
    for (std::size_t i = 0; i < members.size(); ++i)
      out[i % static_cast<std::size_t>(folds)].push_back(members[i]);
  }
  for (auto& f : out) std::sort(f.begin(), f.end());
  return out;
}

struct FoldResult {
  int fold = 0;
  std::vector<std::string> test_ids;
  std::vector<double> per_class_ap;
  double map = 0.0;
  std::vector<double> per_class_acc;
  double mean_class_acc = 0.0;
  std::vector<std::vector<int>> confusion;  // row: true class, col: predicted
  std::string pivot_provenance;
};

struct EvalReport {
  std::vector<double> per_class_ap;   // mean over folds
  double map = 0.0;                   // mean of fold mAPs
  std::vector<double> per_class_acc;  // mean over folds
  double mean_class_acc = 0.0;        // mean of fold means
  std::vector<std::vector<int>> confusion;  // summed over folds
  std::vector<FoldResult> folds;
};

struct PipelineOptions {
  PoolingOptions pooling;
  int score_pivot_count = 48;     // K_F
  int temporal_pivot_count = 5;   // K_T
  double sigma_t = 0.1;
  GmmOptions gmm;
  double lambda = 1e-3;
  int epochs = 300;
  int threads = 1;
};

// Hash over the sorted ids of the sequences the pivots are learned from; lets
// downstream checks verify that no test sequence leaked into pivot learning.
inline std::string pivot_provenance_hash(const std::vector<ScoreSequence>& data,
                                         const std::vector<int>& train_indices,
                                         std::uint64_t seed) {
  std::vector<std::string> ids;
  ids.reserve(train_indices.size());
  for (int i : train_indices) ids.push_back(data[static_cast<std::size_t>(i)].id);
  std::sort(ids.begin(), ids.end());
  std::uint64_t h = fnv1a("pivots|seed=" + std::to_string(seed) + "|");
  for (const auto& id : ids) h = fnv1a(id + "\n", h);
  return hash_hex(h);
}

inline PivotSet learn_fold_pivots(const std::vector<ScoreSequence>& data,
                                  const std::vector<int>& train_indices,
                                  const PipelineOptions& opt, std::uint64_t seed) {
  int total_frames = 0;
  for (int i : train_indices) total_frames += data[static_cast<std::size_t>(i)].length();
  const int d = data[static_cast<std::size_t>(train_indices.front())].dim();
  Eigen::MatrixXd frames(total_frames, d);
  int row = 0;
  for (int i : train_indices) {
    const auto& s = data[static_cast<std::size_t>(i)];
    frames.middleRows(row, s.length()) = s.scores;
    row += s.length();
  }
  ScorePivotResult score = learn_score_pivots(frames, opt.score_pivot_count, opt.gmm, seed);
  TemporalPivots temporal =
      equispaced_temporal_pivots(opt.temporal_pivot_count, opt.sigma_t);
  return make_pivot_set(score, temporal, pivot_provenance_hash(data, train_indices, seed));
}

namespace detail {

inline Eigen::MatrixXd descriptor_matrix(const std::vector<Descriptor>& descs) {
  if (descs.empty()) throw InvalidInputError("no descriptors");
  const std::size_t d = descs.front().values.size();
  Eigen::MatrixXd x(static_cast<Eigen::Index>(descs.size()), static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < descs.size(); ++i) {
    if (descs[i].values.size() != d)
      throw DimensionError("descriptors have inconsistent lengths");
    x.row(static_cast<Eigen::Index>(i)) = Eigen::Map<const Eigen::RowVectorXd>(
        descs[i].values.data(), static_cast<Eigen::Index>(d));
  }
  return x;
}

}  // namespace detail

// Stratified k-fold cross-validation of the full pipeline. Pivot learning and
// classifier training see only the training folds; descriptors of test
// sequences are computed with those training-fold pivots.
inline EvalReport cross_validate(const std::vector<ScoreSequence>& data, int folds,
                                 const PipelineOptions& opt, std::uint64_t seed) {
  if (data.empty()) throw InvalidInputError("cross_validate: empty dataset");
  std::vector<int> labels;
  labels.reserve(data.size());
  int num_classes = 0;
  for (const auto& s : data) {
    if (s.label < 0) throw InvalidInputError("cross_validate: unlabeled sequence " + s.id);
    labels.push_back(s.label);
    num_classes = std::max(num_classes, s.label + 1);
  }
  const auto fold_indices = stratified_folds(labels, folds, seed);

  const bool needs_pivots = opt.pooling.descriptor == DescriptorKind::hok ||
                            opt.pooling.descriptor == DescriptorKind::concat;
  EvalReport report;
  report.per_class_ap.assign(static_cast<std::size_t>(num_classes), 0.0);
  report.per_class_acc.assign(static_cast<std::size_t>(num_classes), 0.0);
  report.confusion.assign(static_cast<std::size_t>(num_classes),
                          std::vector<int>(static_cast<std::size_t>(num_classes), 0));

  for (int f = 0; f < folds; ++f) {
    const auto& test_idx = fold_indices[static_cast<std::size_t>(f)];
    std::vector<int> train_idx;
    for (int g = 0; g < folds; ++g)
      if (g != f)
        train_idx.insert(train_idx.end(), fold_indices[static_cast<std::size_t>(g)].begin(),
                         fold_indices[static_cast<std::size_t>(g)].end());
    std::sort(train_idx.begin(), train_idx.end());

    PivotSet pivots;
    const std::uint64_t fold_seed = mix_seed(seed, static_cast<std::uint64_t>(f));
    if (needs_pivots) pivots = learn_fold_pivots(data, train_idx, opt, fold_seed);

    auto subset = [&](const std::vector<int>& idx) {
      std::vector<ScoreSequence> s;
      s.reserve(idx.size());
      for (int i : idx) s.push_back(data[static_cast<std::size_t>(i)]);
      return s;
    };
    const auto train_seqs = subset(train_idx);
    const auto test_seqs = subset(test_idx);
    const auto train_descs =
        pool_all(train_seqs, opt.pooling, needs_pivots ? &pivots : nullptr, opt.threads);
    const auto test_descs =
        pool_all(test_seqs, opt.pooling, needs_pivots ? &pivots : nullptr, opt.threads);

    std::vector<int> train_labels, test_labels;
    for (const auto& s : train_seqs) train_labels.push_back(s.label);
    for (const auto& s : test_seqs) test_labels.push_back(s.label);

    const LinearModel model =
        train_linear(detail::descriptor_matrix(train_descs), train_labels, num_classes,
                     opt.lambda, opt.epochs, mix_seed(seed, 1000 + static_cast<std::uint64_t>(f)));

    const Eigen::MatrixXd xt = detail::descriptor_matrix(test_descs);
    const Eigen::MatrixXd scores =
        (xt * model.weights.transpose()).rowwise() + model.biases.transpose();

    FoldResult fr;
    fr.fold = f;
    for (const auto& s : test_seqs) fr.test_ids.push_back(s.id);
    fr.pivot_provenance = pivots.provenance;
    fr.confusion.assign(static_cast<std::size_t>(num_classes),
                        std::vector<int>(static_cast<std::size_t>(num_classes), 0));
    std::vector<int> class_total(static_cast<std::size_t>(num_classes), 0);
    std::vector<int> class_correct(static_cast<std::size_t>(num_classes), 0);
    for (int i = 0; i < scores.rows(); ++i) {
      int pred = 0;
      scores.row(i).maxCoeff(&pred);
      const int truth = test_labels[static_cast<std::size_t>(i)];
      fr.confusion[static_cast<std::size_t>(truth)][static_cast<std::size_t>(pred)] += 1;
      class_total[static_cast<std::size_t>(truth)] += 1;
      if (pred == truth) class_correct[static_cast<std::size_t>(truth)] += 1;
    }
    for (int c = 0; c < num_classes; ++c) {
      std::vector<double> col(static_cast<std::size_t>(scores.rows()));
      std::vector<bool> pos(static_cast<std::size_t>(scores.rows()));
      for (int i = 0; i < scores.rows(); ++i) {
        col[static_cast<std::size_t>(i)] = scores(i, c);
        pos[static_cast<std::size_t>(i)] = test_labels[static_cast<std::size_t>(i)] == c;
      }
      fr.per_class_ap.push_back(average_precision(col, pos));
      fr.per_class_acc.push_back(class_total[static_cast<std::size_t>(c)] > 0
                                     ? static_cast<double>(class_correct[static_cast<std::size_t>(c)]) /
                                           class_total[static_cast<std::size_t>(c)]
                                     : 0.0);
    }
    fr.map = std::accumulate(fr.per_class_ap.begin(), fr.per_class_ap.end(), 0.0) /
             num_classes;
    fr.mean_class_acc =
        std::accumulate(fr.per_class_acc.begin(), fr.per_class_acc.end(), 0.0) / num_classes;

    for (int c = 0; c < num_classes; ++c) {
      report.per_class_ap[static_cast<std::size_t>(c)] += fr.per_class_ap[static_cast<std::size_t>(c)];
      report.per_class_acc[static_cast<std::size_t>(c)] +=
          fr.per_class_acc[static_cast<std::size_t>(c)];
      for (int p = 0; p < num_classes; ++p)
        report.confusion[static_cast<std::size_t>(c)][static_cast<std::size_t>(p)] +=
            fr.confusion[static_cast<std::size_t>(c)][static_cast<std::size_t>(p)];
    }
    report.map += fr.map;
    report.mean_class_acc += fr.mean_class_acc;
    report.folds.push_back(std::move(fr));
  }

  const double inv_folds = 1.0 / folds;
  for (auto& v : report.per_class_ap) v *= inv_folds;
  for (auto& v : report.per_class_acc) v *= inv_folds;
  report.map *= inv_folds;
  report.mean_class_acc *= inv_folds;
  return report;
}

inline nlohmann::json eval_report_to_json(const EvalReport& r) {
  nlohmann::json j;
  j["per_class_ap"] = r.per_class_ap;
  j["map"] = r.map;
  j["per_class_acc"] = r.per_class_acc;
  j["mean_class_acc"] = r.mean_class_acc;
  j["confusion"] = r.confusion;
  auto& folds = j["folds"] = nlohmann::json::array();
  for (const auto& f : r.folds) {
    nlohmann::json jf;
    jf["fold"] = f.fold;
    jf["test_ids"] = f.test_ids;
    jf["per_class_ap"] = f.per_class_ap;
    jf["map"] = f.map;
    jf["per_class_acc"] = f.per_class_acc;
    jf["mean_class_acc"] = f.mean_class_acc;
    jf["confusion"] = f.confusion;
    jf["pivot_provenance"] = f.pivot_provenance;
    folds.push_back(std::move(jf));
  }
  return j;
}

}  // namespace hok
