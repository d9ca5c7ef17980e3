#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "hok/errors.hpp"
#include "hok/gmm.hpp"
#include "hok/kernels.hpp"

namespace hok {

struct ScorePivotResult {
  Eigen::MatrixXd pivots;      // GMM means, one per row
  Eigen::VectorXd bandwidths;  // sqrt of the mean diagonal variance per component
  GmmModel model;
};

struct TemporalPivots {
  std::vector<double> pivots;
  double bandwidth = 0.1;
};

namespace detail {

inline bool rows_on_simplex(const Eigen::MatrixXd& x, double tol = 1e-3) {
  if (x.minCoeff() < -1e-9) return false;
  return ((x.rowwise().sum().array() - 1.0).abs() <= tol).all();
}

}  // namespace detail

// Learns score pivots as the means of a diagonal GMM fitted to the frames.
// Each pivot's scalar bandwidth is the root of its mean diagonal variance.
// When the frames lie on the probability simplex the means are projected back
// onto it, so the pivots remain valid simplex anchors.
inline ScorePivotResult learn_score_pivots(const Eigen::MatrixXd& frames, int k,
                                           const GmmOptions& opt = {},
                                           std::uint64_t seed = 0) {
  ScorePivotResult r;
  r.model = fit_gmm(frames, k, opt, seed);
  r.pivots = r.model.means;
  if (detail::rows_on_simplex(frames)) {
    r.pivots = r.pivots.cwiseMax(0.0);
    for (int c = 0; c < r.pivots.rows(); ++c) {
      const double s = r.pivots.row(c).sum();
      if (s > 0.0) r.pivots.row(c) /= s;
    }
  }
  r.bandwidths = r.model.variances.rowwise().mean().array().sqrt();
  return r;
}

// k pivots at j/(k-1) on the normalized time axis; a single pivot sits at 0.5.
inline TemporalPivots equispaced_temporal_pivots(int k, double sigma_t) {
  if (k < 1) throw InvalidParameterError("temporal pivots: count must be >= 1");
  if (!(sigma_t > 0.0))
    throw InvalidParameterError("temporal pivots: bandwidth must be positive");
  TemporalPivots t;
  t.bandwidth = sigma_t;
  if (k == 1) {
    t.pivots = {0.5};
  } else {
    t.pivots.resize(static_cast<std::size_t>(k));
    for (int j = 0; j < k; ++j)
      t.pivots[static_cast<std::size_t>(j)] =
          static_cast<double>(j) / static_cast<double>(k - 1);
  }
  return t;
}

inline PivotSet make_pivot_set(const ScorePivotResult& score, const TemporalPivots& temporal,
                               std::string provenance = "") {
  PivotSet p;
  p.score_pivots = score.pivots;
  p.score_bandwidths = score.bandwidths;
  p.temporal_pivots = temporal.pivots;
  p.temporal_bandwidth = temporal.bandwidth;
  p.provenance = std::move(provenance);
  p.validate();
  return p;
}

inline nlohmann::json pivot_set_to_json(const PivotSet& p) {
  nlohmann::json j;
  auto& pivots = j["score_pivots"] = nlohmann::json::array();
  for (int r = 0; r < p.score_pivots.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (int c = 0; c < p.score_pivots.cols(); ++c) row.push_back(p.score_pivots(r, c));
    pivots.push_back(std::move(row));
  }
  j["sigma_f"] = std::vector<double>(p.score_bandwidths.begin(), p.score_bandwidths.end());
  j["temporal_pivots"] = p.temporal_pivots;
  j["sigma_t"] = p.temporal_bandwidth;
  if (!p.provenance.empty()) j["provenance"] = p.provenance;
  return j;
}

inline PivotSet pivot_set_from_json(const nlohmann::json& j) {
  try {
    PivotSet p;
    const auto& pivots = j.at("score_pivots");
    if (!pivots.is_array() || pivots.empty())
      throw ValidationError("pivot file: score_pivots must be a non-empty array");
    const int kf = static_cast<int>(pivots.size());
    const int d = static_cast<int>(pivots.at(0).size());
    p.score_pivots.resize(kf, d);
    for (int r = 0; r < kf; ++r) {
      if (static_cast<int>(pivots.at(r).size()) != d)
        throw ValidationError("pivot file: ragged score_pivots rows");
      for (int c = 0; c < d; ++c) p.score_pivots(r, c) = pivots.at(r).at(c).get<double>();
    }
    const auto sf = j.at("sigma_f").get<std::vector<double>>();
    p.score_bandwidths = Eigen::Map<const Eigen::VectorXd>(sf.data(),
                                                           static_cast<Eigen::Index>(sf.size()));
    p.temporal_pivots = j.at("temporal_pivots").get<std::vector<double>>();
    p.temporal_bandwidth = j.at("sigma_t").get<double>();
    if (j.contains("provenance")) p.provenance = j.at("provenance").get<std::string>();
    p.validate();
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("pivot file: ") + e.what());
  }
}

}  // namespace hok
