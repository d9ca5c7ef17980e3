#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "hok/common.hpp"
#include "hok/errors.hpp"

namespace hok {

// Diagonal-covariance Gaussian mixture fitted by EM.
struct GmmModel {
  Eigen::MatrixXd means;      // K x d
  Eigen::MatrixXd variances;  // K x d, floored diagonal covariances
  Eigen::VectorXd weights;    // K, sums to 1
  std::vector<double> log_likelihood_trace;

  int components() const { return static_cast<int>(means.rows()); }
  int dim() const { return static_cast<int>(means.cols()); }
};

struct GmmOptions {
  int max_iters = 100;
  double tol = 1e-6;             // stop when the log-likelihood gain drops below this
  double variance_floor = 1e-4;  // keeps components from collapsing onto a point
  int kmeans_steps = 10;         // Lloyd refinements after k-means++ seeding
};

namespace detail {

inline int count_distinct_rows(const Eigen::MatrixXd& x) {
  std::vector<std::vector<double>> rows(static_cast<std::size_t>(x.rows()));
  for (int i = 0; i < x.rows(); ++i)
    rows[static_cast<std::size_t>(i)].assign(x.row(i).begin(), x.row(i).end());
  std::sort(rows.begin(), rows.end());
  return static_cast<int>(std::unique(rows.begin(), rows.end()) - rows.begin());
}

// k-means++ seeding followed by a few Lloyd steps; deterministic in the rng.
inline Eigen::MatrixXd kmeans_centers(const Eigen::MatrixXd& x, int k,
                                      std::mt19937_64& rng, int lloyd_steps) {
  const int n = static_cast<int>(x.rows());
  const int d = static_cast<int>(x.cols());
  Eigen::MatrixXd centers(k, d);
  centers.row(0) = x.row(uniform_int(rng, n));
  Eigen::VectorXd d2 = (x.rowwise() - centers.row(0)).rowwise().squaredNorm();
  for (int c = 1; c < k; ++c) {
    const double total = d2.sum();
    int pick = 0;
    if (total > 0.0) {
      double u = uniform_double(rng) * total;
      for (; pick < n - 1; ++pick) {
        u -= d2[pick];
        if (u <= 0.0) break;
      }
    } else {
      pick = uniform_int(rng, n);
    }
    centers.row(c) = x.row(pick);
    d2 = d2.cwiseMin((x.rowwise() - centers.row(c)).rowwise().squaredNorm());
  }

  std::vector<int> assign(static_cast<std::size_t>(n), 0);
  for (int step = 0; step < lloyd_steps; ++step) {
    for (int i = 0; i < n; ++i) {
      int best = 0;
      (centers.rowwise() - x.row(i)).rowwise().squaredNorm().minCoeff(&best);
      assign[static_cast<std::size_t>(i)] = best;
    }
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, d);
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(k);
    for (int i = 0; i < n; ++i) {
      sums.row(assign[static_cast<std::size_t>(i)]) += x.row(i);
      counts[assign[static_cast<std::size_t>(i)]] += 1.0;
    }
    for (int c = 0; c < k; ++c)
      if (counts[c] > 0.0) centers.row(c) = sums.row(c) / counts[c];
  }
  return centers;
}

}  // namespace detail

inline GmmModel fit_gmm(const Eigen::MatrixXd& points, int k, const GmmOptions& opt = {},
                        std::uint64_t seed = 0) {
  const int n = static_cast<int>(points.rows());
  const int d = static_cast<int>(points.cols());
  if (k < 1) throw InvalidParameterError("fit_gmm: component count must be >= 1");
  if (n < k) throw InvalidInputError("fit_gmm: fewer points than components");
  if (!points.allFinite()) throw InvalidInputError("fit_gmm: non-finite data");
  if (detail::count_distinct_rows(points) < k)
    throw DegenerateFitError("fit_gmm: fewer distinct points than components");

  std::mt19937_64 rng(seed);
  GmmModel m;
  m.means = detail::kmeans_centers(points, k, rng, opt.kmeans_steps);
  m.variances = Eigen::MatrixXd::Zero(k, d);
  m.weights = Eigen::VectorXd::Zero(k);

  // moment statistics of the k-means partition initialize the mixture
  {
    Eigen::RowVectorXd global_mean = points.colwise().mean();
    Eigen::RowVectorXd global_var =
        (points.rowwise() - global_mean).array().square().colwise().mean();
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, d);
    Eigen::MatrixXd sq_sums = Eigen::MatrixXd::Zero(k, d);
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(k);
    for (int i = 0; i < n; ++i) {
      int best = 0;
      (m.means.rowwise() - points.row(i)).rowwise().squaredNorm().minCoeff(&best);
      sums.row(best) += points.row(i);
      sq_sums.row(best) += points.row(i).array().square().matrix();
      counts[best] += 1.0;
    }
    for (int c = 0; c < k; ++c) {
      if (counts[c] > 0.0) {
        m.means.row(c) = sums.row(c) / counts[c];
        m.variances.row(c) =
            (sq_sums.row(c) / counts[c] - m.means.row(c).array().square().matrix());
      } else {
        m.variances.row(c) = global_var;
      }
      m.variances.row(c) = m.variances.row(c).cwiseMax(opt.variance_floor);
      m.weights[c] = std::max(counts[c] / static_cast<double>(n), 1e-12);
    }
    m.weights /= m.weights.sum();
  }

  const double log_2pi = std::log(2.0 * M_PI);
  Eigen::MatrixXd logp(n, k), resp(n, k);
  double prev_ll = 0.0;
  for (int iter = 0; iter < opt.max_iters; ++iter) {
    // E-step at the current parameters
    for (int c = 0; c < k; ++c) {
      const Eigen::RowVectorXd mu = m.means.row(c);
      const Eigen::RowVectorXd var = m.variances.row(c);
      const double base =
          std::log(m.weights[c]) -
          0.5 * (d * log_2pi + var.array().log().sum());
      logp.col(c) =
          Eigen::VectorXd::Constant(n, base) -
          0.5 * ((points.rowwise() - mu).array().square().rowwise() / var.array())
                    .rowwise()
                    .sum()
                    .matrix();
    }
    long double ll_acc = 0.0L;
    for (int i = 0; i < n; ++i) {
      const double mx = logp.row(i).maxCoeff();
      const double lse = mx + std::log((logp.row(i).array() - mx).exp().sum());
      resp.row(i) = (logp.row(i).array() - lse).exp();
      ll_acc += lse;
    }
    const double ll = static_cast<double>(ll_acc);
    m.log_likelihood_trace.push_back(ll);
    if (iter > 0 && ll - prev_ll < opt.tol) break;
    prev_ll = ll;

    // M-step
    const Eigen::VectorXd nk = resp.colwise().sum();
    for (int c = 0; c < k; ++c) {
      m.weights[c] = nk[c] / static_cast<double>(n);
      if (nk[c] < 1e-12) continue;  // starved component keeps its parameters
      const Eigen::RowVectorXd mu = (resp.col(c).transpose() * points) / nk[c];
      Eigen::RowVectorXd ex2 =
          (resp.col(c).transpose() * points.array().square().matrix()) / nk[c];
      m.means.row(c) = mu;
      m.variances.row(c) =
          (ex2 - mu.array().square().matrix()).cwiseMax(opt.variance_floor);
    }
  }
  return m;
}

}  // namespace hok
