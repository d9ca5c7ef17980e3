#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <vector>

#include "hok/common.hpp"
#include "hok/errors.hpp"
#include "hok/sequence.hpp"

namespace hok {

// Anchor points for kernel linearization: score-space pivots with per-pivot
// bandwidths plus temporal pivots with one shared bandwidth.
struct PivotSet {
  Eigen::MatrixXd score_pivots;      // K_F x d
  Eigen::VectorXd score_bandwidths;  // sigma_F, one per score pivot
  std::vector<double> temporal_pivots;
  double temporal_bandwidth = 0.1;   // sigma_T
  std::string provenance;            // hash of the data the pivots were learned from

  int score_count() const { return static_cast<int>(score_pivots.rows()); }
  int score_dim() const { return static_cast<int>(score_pivots.cols()); }
  int temporal_count() const { return static_cast<int>(temporal_pivots.size()); }
  int feature_dim() const { return score_count() + temporal_count(); }

  void validate() const {
    if (score_count() < 1) throw InvariantError("pivot set: needs at least one score pivot");
    if (temporal_count() < 1)
      throw InvariantError("pivot set: needs at least one temporal pivot");
    if (score_bandwidths.size() != score_count())
      throw InvariantError("pivot set: one bandwidth per score pivot required");
    if ((score_bandwidths.array() <= 0.0).any())
      throw InvariantError("pivot set: score bandwidths must be positive");
    if (!(temporal_bandwidth > 0.0))
      throw InvariantError("pivot set: temporal bandwidth must be positive");
    for (std::size_t i = 1; i < temporal_pivots.size(); ++i)
      if (!(temporal_pivots[i] > temporal_pivots[i - 1]))
        throw InvariantError("pivot set: temporal pivots must be strictly increasing");
    if (!score_pivots.allFinite() || !score_bandwidths.allFinite())
      throw InvariantError("pivot set: non-finite values");
  }
};

// Parameters of the frame-similarity sequence kernel
//   K(S_i,S_j) = (1/Lambda) sum_{t,u} [zeta1 psi(x_t,x_u) + zeta2 psi(tbar,ubar)]^r.
struct SequenceKernelParams {
  double zeta1 = 0.5;
  double zeta2 = 0.5;
  double sigma_f = 0.5;  // bandwidth of the exact score kernel
  double sigma_t = 0.1;  // bandwidth of the exact temporal kernel
  int order = 3;         // r
  double lambda = 1.0;   // normalization Lambda

  void validate() const {
    if (zeta1 < 0.0 || zeta2 < 0.0 || std::abs(zeta1 + zeta2 - 1.0) > 1e-9)
      throw InvalidParameterError("sequence kernel: zeta1 + zeta2 must equal 1");
    if (!(sigma_f > 0.0) || !(sigma_t > 0.0))
      throw InvalidParameterError("sequence kernel: bandwidths must be positive");
    if (order < 1) throw InvalidParameterError("sequence kernel: order must be >= 1");
    if (!(lambda > 0.0)) throw InvalidParameterError("sequence kernel: lambda must be positive");
  }
};

// exp(-||x-y||^2 / (2 sigma^2)); note the 2 in the denominator, which the
// feature map below deliberately does not have.
inline double gaussian_kernel(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                              double sigma) {
  if (x.size() != y.size()) throw DimensionError("gaussian_kernel: length mismatch");
  if (!x.allFinite() || !y.allFinite())
    throw InvalidInputError("gaussian_kernel: non-finite input");
  if (!(sigma > 0.0)) throw InvalidParameterError("gaussian_kernel: sigma must be positive");
  return std::exp(-(x - y).squaredNorm() / (2.0 * sigma * sigma));
}

// Linearized feature map against a pivot set: entry k is
// exp(-||x-z_k||^2 / sigma_k^2). The exponent uses 1/sigma^2, not 1/(2 sigma^2);
// the two Gaussians of the product expansion each carry half of the distance.
inline Eigen::VectorXd feature_map(const Eigen::VectorXd& x,
                                   const Eigen::MatrixXd& pivots,
                                   const Eigen::VectorXd& bandwidths) {
  if (pivots.rows() == 0) throw InvalidParameterError("feature_map: empty pivot set");
  if (pivots.cols() != x.size())
    throw DimensionError("feature_map: pivot dimension does not match input");
  if (bandwidths.size() != pivots.rows())
    throw InvalidParameterError("feature_map: one bandwidth per pivot required");
  if (!x.allFinite()) throw InvalidInputError("feature_map: non-finite input");
  Eigen::VectorXd out(pivots.rows());
  for (int k = 0; k < pivots.rows(); ++k) {
    const double s = bandwidths[k];
    if (!(s > 0.0)) throw InvalidParameterError("feature_map: bandwidths must be positive");
    out[k] = std::exp(-(x - pivots.row(k).transpose()).squaredNorm() / (s * s));
  }
  return out;
}

// Scalar (temporal) variant with a shared bandwidth.
inline Eigen::VectorXd feature_map(double x, const std::vector<double>& pivots,
                                   double bandwidth) {
  if (pivots.empty()) throw InvalidParameterError("feature_map: empty pivot set");
  if (!(bandwidth > 0.0))
    throw InvalidParameterError("feature_map: bandwidth must be positive");
  if (!std::isfinite(x)) throw InvalidInputError("feature_map: non-finite input");
  Eigen::VectorXd out(static_cast<Eigen::Index>(pivots.size()));
  for (std::size_t k = 0; k < pivots.size(); ++k) {
    const double d = x - pivots[k];
    out[static_cast<Eigen::Index>(k)] = std::exp(-(d * d) / (bandwidth * bandwidth));
  }
  return out;
}

inline Eigen::VectorXd score_feature_map(const PivotSet& pivots, const Eigen::VectorXd& x) {
  return feature_map(x, pivots.score_pivots, pivots.score_bandwidths);
}

inline Eigen::VectorXd temporal_feature_map(const PivotSet& pivots, double tbar) {
  return feature_map(tbar, pivots.temporal_pivots, pivots.temporal_bandwidth);
}

// Per-frame concatenated map [sqrt(zeta1) Phi_F(x); sqrt(zeta2) Phi_T(tbar)].
inline Eigen::VectorXd frame_feature(const PivotSet& pivots, const Eigen::VectorXd& x,
                                     double tbar, double zeta1, double zeta2) {
  Eigen::VectorXd out(pivots.feature_dim());
  out.head(pivots.score_count()) = std::sqrt(zeta1) * score_feature_map(pivots, x);
  out.tail(pivots.temporal_count()) = std::sqrt(zeta2) * temporal_feature_map(pivots, tbar);
  return out;
}

namespace detail {

inline void check_kernel_inputs(const ScoreSequence& a, const ScoreSequence& b,
                                const char* op) {
  if (a.length() < 1 || b.length() < 1)
    throw InvalidInputError(std::string(op) + ": empty sequence");
  if (a.dim() != b.dim())
    throw DimensionError(std::string(op) + ": sequences have different score dimensions");
  if (!a.scores.allFinite() || !b.scores.allFinite())
    throw InvalidInputError(std::string(op) + ": non-finite scores");
}

}  // namespace detail

// Exact sequence-compatibility kernel, evaluated as the full double sum over
// frame pairs. Sequences of different lengths are handled by summing t over
// the first and u over the second; the caller chooses Lambda accordingly.
inline double sequence_kernel_exact(const ScoreSequence& a, const ScoreSequence& b,
                                    const SequenceKernelParams& p) {
  detail::check_kernel_inputs(a, b, "sequence_kernel_exact");
  p.validate();
  const int na = a.length(), nb = b.length();
  const double inv_2sf = 1.0 / (2.0 * p.sigma_f * p.sigma_f);
  const double inv_2st = 1.0 / (2.0 * p.sigma_t * p.sigma_t);
  double acc = 0.0;
  for (int t = 0; t < na; ++t) {
    const double tbar = normalized_time(t, na);
    for (int u = 0; u < nb; ++u) {
      const double ubar = normalized_time(u, nb);
      const double k_f = std::exp(-(a.scores.row(t) - b.scores.row(u)).squaredNorm() * inv_2sf);
      const double dt = tbar - ubar;
      const double k_t = std::exp(-dt * dt * inv_2st);
      acc += pow_int(p.zeta1 * k_f + p.zeta2 * k_t, p.order);
    }
  }
  return acc / p.lambda;
}

// Linearized counterpart of the exact kernel: every constituent kernel is
// replaced by the inner product of its pivot feature maps and the double sum
// is evaluated directly, without forming any tensor. score_scale and
// temporal_scale default to 1; convergence studies pass the quadrature
// weights of the pivot grids there.
inline double linearized_sequence_kernel(const ScoreSequence& a, const ScoreSequence& b,
                                         const PivotSet& pivots,
                                         const SequenceKernelParams& p,
                                         double score_scale = 1.0,
                                         double temporal_scale = 1.0) {
  detail::check_kernel_inputs(a, b, "linearized_sequence_kernel");
  p.validate();
  pivots.validate();
  if (pivots.score_dim() != a.dim())
    throw DimensionError("linearized_sequence_kernel: pivot dimension mismatch");

  const int na = a.length(), nb = b.length();
  Eigen::MatrixXd fa(na, pivots.score_count()), fb(nb, pivots.score_count());
  Eigen::MatrixXd ta(na, pivots.temporal_count()), tb(nb, pivots.temporal_count());
  for (int t = 0; t < na; ++t) {
    fa.row(t) = score_feature_map(pivots, a.scores.row(t).transpose()).transpose();
    ta.row(t) = temporal_feature_map(pivots, normalized_time(t, na)).transpose();
  }
  for (int u = 0; u < nb; ++u) {
    fb.row(u) = score_feature_map(pivots, b.scores.row(u).transpose()).transpose();
    tb.row(u) = temporal_feature_map(pivots, normalized_time(u, nb)).transpose();
  }
  const Eigen::MatrixXd gf = fa * fb.transpose();
  const Eigen::MatrixXd gt = ta * tb.transpose();

  const double wf = p.zeta1 * score_scale;
  const double wt = p.zeta2 * temporal_scale;
  double acc = 0.0;
  for (int t = 0; t < na; ++t)
    for (int u = 0; u < nb; ++u) acc += pow_int(wf * gf(t, u) + wt * gt(t, u), p.order);
  return acc / p.lambda;
}

}  // namespace hok
