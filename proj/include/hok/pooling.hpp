#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <mutex>
#include <numeric>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "hok/common.hpp"
#include "hok/errors.hpp"
#include "hok/kernels.hpp"
#include "hok/sequence.hpp"
#include "hok/tensor.hpp"

namespace hok {

enum class DescriptorKind { hok, second_order, average, concat };

inline const char* to_string(DescriptorKind k) {
  switch (k) {
    case DescriptorKind::hok: return "hok";
    case DescriptorKind::second_order: return "second_order";
    case DescriptorKind::average: return "average";
    case DescriptorKind::concat: return "concat";
  }
  return "unknown";
}

inline DescriptorKind descriptor_kind_from_string(const std::string& s) {
  if (s == "hok") return DescriptorKind::hok;
  if (s == "second_order") return DescriptorKind::second_order;
  if (s == "average") return DescriptorKind::average;
  if (s == "concat") return DescriptorKind::concat;
  throw InvalidParameterError("unknown descriptor kind '" + s + "'");
}

struct Descriptor {
  DescriptorKind kind = DescriptorKind::average;
  std::vector<double> values;
  std::string sequence_id;
  std::string config_hash;
  std::string block_order;  // for concat: '+'-joined kinds in caller order
};

// The per-sequence normalization Lambda. n_squared is the equal-length
// convention Lambda = n^2; ni_nj generalizes a kernel between sequences of
// different lengths to Lambda = n_i * n_j. Either way a single sequence
// contributes the factor 1/n.
enum class LambdaMode { n_squared, ni_nj };

inline const char* to_string(LambdaMode m) {
  return m == LambdaMode::n_squared ? "n_squared" : "ni_nj";
}

inline LambdaMode lambda_mode_from_string(const std::string& s) {
  if (s == "n_squared") return LambdaMode::n_squared;
  if (s == "ni_nj") return LambdaMode::ni_nj;
  throw InvalidParameterError("unknown lambda mode '" + s + "'");
}

inline double pair_lambda(int ni, int nj, LambdaMode mode) {
  if (mode == LambdaMode::n_squared && ni != nj)
    throw InvalidInputError("lambda mode n_squared requires equal sequence lengths");
  return static_cast<double>(ni) * static_cast<double>(nj);
}

struct HokConfig {
  int order = 3;           // r
  double zeta1 = 0.5;
  double zeta2 = 0.5;
  double alpha = 0.1;      // power-normalization exponent
  LambdaMode lambda_mode = LambdaMode::n_squared;
  int truncation_rank = 0;  // 0 = full

  void validate() const {
    if (order < 1 || order > 4)
      throw InvalidParameterError("hok config: order must be in [1,4]");
    if (zeta1 < 0.0 || zeta1 > 1.0 || zeta2 < 0.0 || zeta2 > 1.0 ||
        std::abs(zeta1 + zeta2 - 1.0) > 1e-9)
      throw InvalidParameterError("hok config: zeta1 + zeta2 must equal 1");
    if (!(alpha > 0.0) || alpha > 1.0)
      throw InvalidParameterError("hok config: alpha must be in (0,1]");
    if (truncation_rank < 0)
      throw InvalidParameterError("hok config: truncation rank must be >= 0");
  }
};

namespace detail {

inline std::string hash_doubles(const double* p, std::size_t count, std::uint64_t h0) {
  return hash_hex(fnv1a(
      std::string_view(reinterpret_cast<const char*>(p), count * sizeof(double)), h0));
}

inline std::string hok_config_hash(const HokConfig& cfg, const PivotSet& pivots) {
  std::ostringstream os;
  os << "hok|r=" << cfg.order << "|z1=" << cfg.zeta1 << "|z2=" << cfg.zeta2
     << "|a=" << cfg.alpha << "|lm=" << to_string(cfg.lambda_mode)
     << "|tr=" << cfg.truncation_rank << "|kf=" << pivots.score_count()
     << "|kt=" << pivots.temporal_count() << "|st=" << pivots.temporal_bandwidth
     << "|prov=" << pivots.provenance << "|";
  std::uint64_t h = fnv1a(os.str());
  h = fnv1a(std::string_view(reinterpret_cast<const char*>(pivots.score_pivots.data()),
                             static_cast<std::size_t>(pivots.score_pivots.size()) *
                                 sizeof(double)),
            h);
  h = fnv1a(std::string_view(reinterpret_cast<const char*>(pivots.score_bandwidths.data()),
                             static_cast<std::size_t>(pivots.score_bandwidths.size()) *
                                 sizeof(double)),
            h);
  return hash_hex(h);
}

}  // namespace detail

// Pooled tensor before power normalization: the sum over frames of the r-th
// outer powers of the concatenated feature maps, scaled by 1/sqrt(Lambda).
// Frames are accumulated in a canonical (sorted-feature) order, so with
// zeta2 = 0 the result is bit-identical under any frame permutation.
inline SymTensor hok_tensor(const ScoreSequence& seq, const PivotSet& pivots,
                            const HokConfig& cfg) {
  cfg.validate();
  pivots.validate();
  validate_sequence(seq);
  if (pivots.score_dim() != seq.dim())
    throw DimensionError("hok_tensor: pivot dimension does not match sequence scores");

  const int n = seq.length();
  std::vector<Eigen::VectorXd> features(static_cast<std::size_t>(n));
  for (int t = 0; t < n; ++t)
    features[static_cast<std::size_t>(t)] =
        frame_feature(pivots, seq.scores.row(t).transpose(), normalized_time(t, n),
                      cfg.zeta1, cfg.zeta2);
  std::sort(features.begin(), features.end(),
            [](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
              return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
            });

  SymAccumulator acc(pivots.feature_dim(), cfg.order);
  for (const auto& w : features) acc.add(w);
  return acc.materialize(1.0 / static_cast<double>(n));  // 1/sqrt(Lambda), Lambda = n^2
}

// Full higher-order kernel descriptor: pooled tensor, power normalization,
// compressed vectorization.
inline Descriptor hok_descriptor(const ScoreSequence& seq, const PivotSet& pivots,
                                 const HokConfig& cfg) {
  SymTensor pooled = hok_tensor(seq, pivots, cfg);
  SymTensor normalized = power_normalize(pooled, cfg.alpha, cfg.truncation_rank);
  Descriptor d;
  d.kind = DescriptorKind::hok;
  d.values = sym_vectorize(normalized);
  d.sequence_id = seq.id;
  d.config_hash = detail::hok_config_hash(cfg, pivots);
  return d;
}

// Upper triangle of a symmetric matrix with off-diagonal entries scaled by
// sqrt(2), which preserves Frobenius inner products.
inline std::vector<double> half_vectorize(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) throw DimensionError("half_vectorize: matrix must be square");
  const double sqrt2 = std::sqrt(2.0);
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(m.rows() * (m.rows() + 1) / 2));
  for (int i = 0; i < m.rows(); ++i)
    for (int j = i; j < m.cols(); ++j) out.push_back(i == j ? m(i, j) : sqrt2 * m(i, j));
  return out;
}

// RBF kernel matrix over the classifier trajectories of one sequence,
// K_ij = exp(-sigma ||x_:^i - x_:^j||^2), ridged and mapped through the
// matrix logarithm. Per-frame squared differences are sorted before summing,
// which makes the descriptor bit-identical under any permutation of frames.
inline Descriptor second_order_descriptor(const ScoreSequence& seq, double sigma,
                                          double epsilon = 1e-6) {
  validate_sequence(seq);
  if (!(sigma > 0.0))
    throw InvalidParameterError("second_order_descriptor: sigma must be positive");
  if (!(epsilon > 0.0))
    throw InvalidParameterError("second_order_descriptor: epsilon must be positive");

  const int n = seq.length();
  const int d = seq.dim();
  Eigen::MatrixXd k(d, d);
  std::vector<double> diffs(static_cast<std::size_t>(n));
  for (int i = 0; i < d; ++i) {
    k(i, i) = 1.0 + epsilon;
    for (int j = i + 1; j < d; ++j) {
      for (int t = 0; t < n; ++t) {
        const double e = seq.scores(t, i) - seq.scores(t, j);
        diffs[static_cast<std::size_t>(t)] = e * e;
      }
      std::sort(diffs.begin(), diffs.end());
      const double dist2 = std::accumulate(diffs.begin(), diffs.end(), 0.0);
      const double v = std::exp(-sigma * dist2);
      if (!std::isfinite(v))
        throw NumericError("second_order_descriptor: non-finite kernel entry");
      k(i, j) = v;
      k(j, i) = v;
    }
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(k);
  if (eig.info() != Eigen::Success)
    throw NumericError("second_order_descriptor: eigendecomposition failed");
  if (eig.eigenvalues().minCoeff() <= 0.0)
    throw NumericError("second_order_descriptor: kernel matrix not positive definite");
  const Eigen::MatrixXd log_k = eig.eigenvectors() *
                                eig.eigenvalues().array().log().matrix().asDiagonal() *
                                eig.eigenvectors().transpose();
  const Eigen::MatrixXd sym = 0.5 * (log_k + log_k.transpose());

  Descriptor out;
  out.kind = DescriptorKind::second_order;
  out.values = half_vectorize(sym);
  out.sequence_id = seq.id;
  {
    std::ostringstream os;
    os << "second_order|sigma=" << sigma << "|eps=" << epsilon << "|d=" << d;
    out.config_hash = hash_hex(fnv1a(os.str()));
  }
  return out;
}

// Arithmetic mean of the per-frame score vectors.
inline Descriptor average_pool(const ScoreSequence& seq) {
  validate_sequence(seq);
  const Eigen::RowVectorXd mean = seq.scores.colwise().mean();
  Descriptor out;
  out.kind = DescriptorKind::average;
  out.values.assign(mean.begin(), mean.end());
  out.sequence_id = seq.id;
  out.config_hash = hash_hex(fnv1a("average"));
  return out;
}

// L2-normalizes each block, then stacks them in caller order.
inline Descriptor concat(const std::vector<Descriptor>& blocks) {
  if (blocks.empty()) throw InvalidInputError("concat: no descriptors");
  for (const auto& b : blocks)
    if (b.sequence_id != blocks.front().sequence_id)
      throw InvalidInputError("concat: descriptors come from different sequences");

  Descriptor out;
  out.kind = DescriptorKind::concat;
  out.sequence_id = blocks.front().sequence_id;
  std::string order;
  std::uint64_t h = fnv1a("concat");
  for (const auto& b : blocks) {
    double norm = 0.0;
    for (double v : b.values) norm += v * v;
    norm = std::sqrt(norm);
    const double scale = norm > 0.0 ? 1.0 / norm : 1.0;
    for (double v : b.values) out.values.push_back(scale * v);
    if (!order.empty()) order += '+';
    order += to_string(b.kind);
    h = fnv1a(b.config_hash, h);
  }
  out.block_order = order;
  out.config_hash = hash_hex(fnv1a(order, h));
  return out;
}

struct PoolingOptions {
  DescriptorKind descriptor = DescriptorKind::hok;
  HokConfig hok;
  double second_sigma = 0.1;
  double second_epsilon = 1e-6;
};

// Computes the configured descriptor for one sequence. Pivots are required
// for the hok and concat kinds.
inline Descriptor pool_one(const ScoreSequence& seq, const PoolingOptions& opt,
                           const PivotSet* pivots) {
  switch (opt.descriptor) {
    case DescriptorKind::hok:
      if (!pivots) throw InvalidParameterError("pooling: hok descriptor needs pivots");
      return hok_descriptor(seq, *pivots, opt.hok);
    case DescriptorKind::second_order:
      return second_order_descriptor(seq, opt.second_sigma, opt.second_epsilon);
    case DescriptorKind::average:
      return average_pool(seq);
    case DescriptorKind::concat: {
      if (!pivots) throw InvalidParameterError("pooling: concat descriptor needs pivots");
      return concat({hok_descriptor(seq, *pivots, opt.hok),
                     second_order_descriptor(seq, opt.second_sigma, opt.second_epsilon)});
    }
  }
  throw InvalidParameterError("pooling: unknown descriptor kind");
}

// Batch pooling; sequences are independent, so worker threads fill disjoint
// output slots and the result does not depend on the thread count.
inline std::vector<Descriptor> pool_all(const std::vector<ScoreSequence>& seqs,
                                        const PoolingOptions& opt, const PivotSet* pivots,
                                        int threads = 1) {
  std::vector<Descriptor> out(seqs.size());
  if (seqs.empty()) return out;
  const int workers = std::max(1, std::min<int>(threads, static_cast<int>(seqs.size())));
  if (workers == 1) {
    for (std::size_t i = 0; i < seqs.size(); ++i) out[i] = pool_one(seqs[i], opt, pivots);
    return out;
  }
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w]() {
      try {
        for (std::size_t i = static_cast<std::size_t>(w); i < seqs.size();
             i += static_cast<std::size_t>(workers))
          out[i] = pool_one(seqs[i], opt, pivots);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
  return out;
}

}  // namespace hok
