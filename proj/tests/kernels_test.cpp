#include "hok/kernels.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "hok/pivots.hpp"
#include "hok/pooling.hpp"
#include "test_util.hpp"

using namespace hok;

namespace {

// Equispaced pivot grid over [lo, hi] with a shared bandwidth; 1-D variant
// also returned as a score pivot matrix.
PivotSet grid_pivots_1d(int k_f, double lo, double hi, double sigma_f, int k_t,
                        double t_lo, double t_hi, double sigma_t) {
  PivotSet p;
  p.score_pivots.resize(k_f, 1);
  for (int i = 0; i < k_f; ++i)
    p.score_pivots(i, 0) = lo + (hi - lo) * i / (k_f - 1);
  p.score_bandwidths = Eigen::VectorXd::Constant(k_f, sigma_f);
  p.temporal_pivots.resize(static_cast<std::size_t>(k_t));
  for (int i = 0; i < k_t; ++i)
    p.temporal_pivots[static_cast<std::size_t>(i)] = t_lo + (t_hi - t_lo) * i / (k_t - 1);
  p.temporal_bandwidth = sigma_t;
  return p;
}

ScoreSequence sequence_1d(std::mt19937_64& rng, const std::string& id, int n) {
  ScoreSequence s;
  s.id = id;
  s.scores.resize(n, 1);
  for (int t = 0; t < n; ++t) s.scores(t, 0) = uniform_double(rng);
  return s;
}

PivotSet random_simplex_pivots(std::mt19937_64& rng, int k_f, int d, int k_t,
                               double sigma_t) {
  PivotSet p;
  p.score_pivots.resize(k_f, d);
  for (int i = 0; i < k_f; ++i)
    p.score_pivots.row(i) = testutil::random_simplex_point(rng, d).transpose();
  p.score_bandwidths.resize(k_f);
  for (int i = 0; i < k_f; ++i) p.score_bandwidths[i] = 0.3 + 0.4 * uniform_double(rng);
  const auto t = equispaced_temporal_pivots(k_t, sigma_t);
  p.temporal_pivots = t.pivots;
  p.temporal_bandwidth = t.bandwidth;
  return p;
}

}  // namespace

TEST(GaussianKernel, IdenticalInputsGiveOne) {
  Eigen::VectorXd x(3);
  x << 0.1, 0.5, 0.4;
  EXPECT_DOUBLE_EQ(gaussian_kernel(x, x, 0.7), 1.0);
}

TEST(GaussianKernel, ClosedFormAtSigmaRootTwo) {
  // ||x - y|| = sigma * sqrt(2)  =>  k = exp(-1)
  const double sigma = 0.4;
  Eigen::VectorXd x(1), y(1);
  x << 0.0;
  y << sigma * std::sqrt(2.0);
  EXPECT_NEAR(gaussian_kernel(x, y, sigma), std::exp(-1.0), 1e-12);
}

TEST(GaussianKernel, SymmetricAndBounded) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 50; ++i) {
    const Eigen::VectorXd x = testutil::random_vector(rng, 4);
    const Eigen::VectorXd y = testutil::random_vector(rng, 4);
    const double kxy = gaussian_kernel(x, y, 0.6);
    EXPECT_DOUBLE_EQ(kxy, gaussian_kernel(y, x, 0.6));
    EXPECT_GT(kxy, 0.0);
    EXPECT_LE(kxy, 1.0);
  }
}

TEST(GaussianKernel, RejectsBadInput) {
  Eigen::VectorXd x(2), y(2), z(3);
  x << 0.0, 1.0;
  y << std::numeric_limits<double>::quiet_NaN(), 0.0;
  z << 0.0, 0.0, 0.0;
  EXPECT_THROW(gaussian_kernel(x, y, 1.0), InvalidInputError);
  EXPECT_THROW(gaussian_kernel(x, z, 1.0), DimensionError);
  Eigen::VectorXd w(2);
  w << 0.5, 0.5;
  EXPECT_THROW(gaussian_kernel(x, w, 0.0), InvalidParameterError);
}

TEST(FeatureMap, CoincidentPivotGivesOne) {
  Eigen::MatrixXd pivots(3, 2);
  pivots << 0.1, 0.9, 0.5, 0.5, 0.8, 0.2;
  const Eigen::VectorXd bw = Eigen::VectorXd::Constant(3, 0.5);
  const Eigen::VectorXd phi = feature_map(pivots.row(1).transpose(), pivots, bw);
  EXPECT_DOUBLE_EQ(phi[1], 1.0);
  for (int i = 0; i < 3; ++i) {
    EXPECT_GT(phi[i], 0.0);
    EXPECT_LE(phi[i], 1.0);
  }
}

TEST(FeatureMap, EmptyPivotsThrow) {
  Eigen::VectorXd x(2);
  x << 0.5, 0.5;
  EXPECT_THROW(feature_map(x, Eigen::MatrixXd(0, 2), Eigen::VectorXd()),
               InvalidParameterError);
  EXPECT_THROW(feature_map(0.5, std::vector<double>{}, 0.1), InvalidParameterError);
}

TEST(FeatureMap, GridInnerProductApproximatesKernel) {
  // 1-D check of the linear expansion: with quadrature weight
  // delta * sqrt(2/(pi sigma^2)), the feature-map inner product over a dense
  // grid approaches the exact kernel.
  const double sigma = 0.5;
  const int k = 64;
  const double lo = -3.0 * sigma, hi = 1.0 + 3.0 * sigma;
  Eigen::MatrixXd pivots(k, 1);
  for (int i = 0; i < k; ++i) pivots(i, 0) = lo + (hi - lo) * i / (k - 1);
  const Eigen::VectorXd bw = Eigen::VectorXd::Constant(k, sigma);
  const double delta = (hi - lo) / (k - 1);
  const double weight = delta * std::sqrt(2.0 / (M_PI * sigma * sigma));

  std::mt19937_64 rng(5);
  double max_err = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::VectorXd x(1), y(1);
    x << uniform_double(rng);
    y << uniform_double(rng);
    const double approx = weight * feature_map(x, pivots, bw).dot(feature_map(y, pivots, bw));
    const double exact = gaussian_kernel(x, y, sigma);
    max_err = std::max(max_err, std::abs(approx - exact));
  }
  EXPECT_LT(max_err, 1e-6);
}

TEST(SequenceKernelExact, SelfSimilarityOfSingleFrameIsOne) {
  ScoreSequence s;
  s.id = "a";
  s.scores.resize(1, 3);
  s.scores << 0.2, 0.3, 0.5;
  SequenceKernelParams p;
  p.zeta1 = 0.4;
  p.zeta2 = 0.6;
  p.order = 3;
  p.lambda = 1.0;
  EXPECT_NEAR(sequence_kernel_exact(s, s, p), 1.0, 1e-12);
}

TEST(SequenceKernelExact, HandComputedTwoFrameCase) {
  // r = 1: the double sum has four terms, written out explicitly below.
  ScoreSequence a, b;
  a.id = "a";
  b.id = "b";
  a.scores.resize(2, 2);
  a.scores << 1.0, 0.0, 0.0, 1.0;
  b.scores.resize(2, 2);
  b.scores << 0.5, 0.5, 0.25, 0.75;
  SequenceKernelParams p;
  p.zeta1 = 0.5;
  p.zeta2 = 0.5;
  p.sigma_f = 0.6;
  p.sigma_t = 0.4;
  p.order = 1;
  p.lambda = 4.0;

  auto psi = [](double sq, double sigma) { return std::exp(-sq / (2.0 * sigma * sigma)); };
  auto d2 = [&](int t, int u) { return (a.scores.row(t) - b.scores.row(u)).squaredNorm(); };
  // normalized times are 0 and 1 for both two-frame sequences
  const double expected =
      (0.5 * psi(d2(0, 0), 0.6) + 0.5 * psi(0.0, 0.4) +
       0.5 * psi(d2(0, 1), 0.6) + 0.5 * psi(1.0, 0.4) +
       0.5 * psi(d2(1, 0), 0.6) + 0.5 * psi(1.0, 0.4) +
       0.5 * psi(d2(1, 1), 0.6) + 0.5 * psi(0.0, 0.4)) /
      4.0;
  EXPECT_NEAR(sequence_kernel_exact(a, b, p), expected, 1e-12);
}

TEST(SequenceKernelExact, Symmetric) {
  std::mt19937_64 rng(7);
  SequenceKernelParams p;
  p.lambda = 1.0;
  for (int i = 0; i < 10; ++i) {
    const auto a = testutil::random_sequence(rng, "a", 4 + uniform_int(rng, 5), 3);
    const auto b = testutil::random_sequence(rng, "b", 4 + uniform_int(rng, 5), 3);
    EXPECT_NEAR(sequence_kernel_exact(a, b, p), sequence_kernel_exact(b, a, p), 1e-12);
  }
}

TEST(SequenceKernelExact, EmptySequenceThrows) {
  ScoreSequence a, b;
  a.scores.resize(0, 3);
  b.scores.resize(2, 3);
  b.scores << 0.2, 0.3, 0.5, 0.1, 0.1, 0.8;
  SequenceKernelParams p;
  EXPECT_THROW(sequence_kernel_exact(a, b, p), InvalidInputError);
}

TEST(LinearizedKernel, MatchesTensorInnerProduct) {
  // both routes computed independently: the double sum here, the summed outer
  // powers in hok_tensor
  std::mt19937_64 rng(11);
  HokConfig cfg;
  cfg.order = 3;
  cfg.zeta1 = 0.5;
  cfg.zeta2 = 0.5;
  for (int trial = 0; trial < 10; ++trial) {
    const int d = 4;
    const auto pivots = random_simplex_pivots(rng, 6, d, 4, 0.2);
    const auto a = testutil::random_sequence(rng, "a", 5 + uniform_int(rng, 10), d);
    const auto b = testutil::random_sequence(rng, "b", 5 + uniform_int(rng, 10), d);
    SequenceKernelParams p;
    p.zeta1 = cfg.zeta1;
    p.zeta2 = cfg.zeta2;
    p.order = cfg.order;
    p.lambda = static_cast<double>(a.length()) * b.length();
    const double via_sum = linearized_sequence_kernel(a, b, pivots, p);
    const double via_tensor = inner(hok_tensor(a, pivots, cfg), hok_tensor(b, pivots, cfg));
    EXPECT_LT(std::abs(via_sum - via_tensor) / std::abs(via_tensor), 1e-10);
  }
}

TEST(LinearizedKernel, MatchesDoubleSumWithApproximatedKernels) {
  // independent oracle: explicit loops over frames and pivots
  std::mt19937_64 rng(13);
  const int d = 3;
  const auto pivots = random_simplex_pivots(rng, 5, d, 3, 0.3);
  const auto a = testutil::random_sequence(rng, "a", 6, d);
  const auto b = testutil::random_sequence(rng, "b", 9, d);
  SequenceKernelParams p;
  p.zeta1 = 0.3;
  p.zeta2 = 0.7;
  p.order = 3;
  p.lambda = 54.0;

  double acc = 0.0;
  for (int t = 0; t < a.length(); ++t) {
    for (int u = 0; u < b.length(); ++u) {
      double k_f = 0.0;
      for (int z = 0; z < pivots.score_count(); ++z) {
        const double s2 = pivots.score_bandwidths[z] * pivots.score_bandwidths[z];
        const double da = (a.scores.row(t) - pivots.score_pivots.row(z)).squaredNorm();
        const double db = (b.scores.row(u) - pivots.score_pivots.row(z)).squaredNorm();
        k_f += std::exp(-da / s2) * std::exp(-db / s2);
      }
      double k_t = 0.0;
      for (double zt : pivots.temporal_pivots) {
        const double s2 = pivots.temporal_bandwidth * pivots.temporal_bandwidth;
        const double da = normalized_time(t, a.length()) - zt;
        const double db = normalized_time(u, b.length()) - zt;
        k_t += std::exp(-da * da / s2) * std::exp(-db * db / s2);
      }
      acc += pow_int(p.zeta1 * k_f + p.zeta2 * k_t, p.order);
    }
  }
  const double expected = acc / p.lambda;
  const double got = linearized_sequence_kernel(a, b, pivots, p);
  EXPECT_LT(std::abs(got - expected) / std::abs(expected), 1e-10);
}

TEST(LinearizedKernel, SelfKernelPositive) {
  std::mt19937_64 rng(17);
  const auto pivots = random_simplex_pivots(rng, 4, 3, 3, 0.2);
  SequenceKernelParams p;
  for (int i = 0; i < 10; ++i) {
    const auto a = testutil::random_sequence(rng, "a", 3 + uniform_int(rng, 6), 3);
    p.lambda = static_cast<double>(a.length()) * a.length();
    EXPECT_GT(linearized_sequence_kernel(a, a, pivots, p), 0.0);
  }
}

TEST(LinearizedKernel, ConvergesToExactOnDensifyingGrid) {
  // doubling the pivot grids drives the linearized kernel to the exact one
  std::mt19937_64 rng(19);
  const double sigma_f = 0.5, sigma_t = 0.25;
  SequenceKernelParams p;
  p.zeta1 = 0.5;
  p.zeta2 = 0.5;
  p.sigma_f = sigma_f;
  p.sigma_t = sigma_t;
  p.order = 3;

  std::vector<std::pair<ScoreSequence, ScoreSequence>> pairs;
  for (int i = 0; i < 20; ++i)
    pairs.emplace_back(sequence_1d(rng, "a", 5 + uniform_int(rng, 8)),
                       sequence_1d(rng, "b", 5 + uniform_int(rng, 8)));

  double prev = std::numeric_limits<double>::infinity();
  for (int k : {4, 8, 16, 32}) {
    const double f_lo = -3.0 * sigma_f, f_hi = 1.0 + 3.0 * sigma_f;
    const double t_lo = -3.0 * sigma_t, t_hi = 1.0 + 3.0 * sigma_t;
    const auto pivots = grid_pivots_1d(k, f_lo, f_hi, sigma_f, k, t_lo, t_hi, sigma_t);
    const double wf = (f_hi - f_lo) / (k - 1) * std::sqrt(2.0 / (M_PI * sigma_f * sigma_f));
    const double wt = (t_hi - t_lo) / (k - 1) * std::sqrt(2.0 / (M_PI * sigma_t * sigma_t));
    double max_err = 0.0;
    for (const auto& [a, b] : pairs) {
      p.lambda = static_cast<double>(a.length()) * b.length();
      const double approx = linearized_sequence_kernel(a, b, pivots, p, wf, wt);
      const double exact = sequence_kernel_exact(a, b, p);
      max_err = std::max(max_err, std::abs(approx - exact) / std::abs(exact));
    }
    EXPECT_LT(max_err, prev) << "pivot count " << k;
    prev = max_err;
  }
  EXPECT_LT(prev, 0.05);
}

TEST(PivotSetValidation, CatchesBadSets) {
  std::mt19937_64 rng(23);
  PivotSet p = random_simplex_pivots(rng, 3, 3, 3, 0.2);
  EXPECT_NO_THROW(p.validate());

  PivotSet bad = p;
  bad.score_bandwidths[1] = 0.0;
  EXPECT_THROW(bad.validate(), InvariantError);

  bad = p;
  bad.temporal_pivots = {0.0, 0.5, 0.5};
  EXPECT_THROW(bad.validate(), InvariantError);

  bad = p;
  bad.temporal_pivots.clear();
  EXPECT_THROW(bad.validate(), InvariantError);

  bad = p;
  bad.score_pivots.resize(0, 3);
  bad.score_bandwidths.resize(0);
  EXPECT_THROW(bad.validate(), InvariantError);
}

TEST(SequenceKernelParams, ValidatesZetaAndLambda) {
  SequenceKernelParams p;
  p.zeta1 = 0.7;
  p.zeta2 = 0.7;
  EXPECT_THROW(p.validate(), InvalidParameterError);
  p.zeta2 = 0.3;
  EXPECT_NO_THROW(p.validate());
  p.lambda = 0.0;
  EXPECT_THROW(p.validate(), InvalidParameterError);
  p.lambda = 1.0;
  p.order = 0;
  EXPECT_THROW(p.validate(), InvalidParameterError);
}
