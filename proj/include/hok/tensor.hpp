#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include "hok/errors.hpp"
#include "hok/indexing.hpp"

namespace hok {

// Dense super-symmetric tensor of a given order over dimension `dim`,
// stored as all dim^order entries in row-major multi-index layout.
struct SymTensor {
  int order = 0;
  int dim = 0;
  std::vector<double> data;

  static SymTensor zeros(int dim, int order) {
    if (dim < 1) throw InvalidParameterError("tensor dim must be >= 1");
    if (order < 1) throw InvalidParameterError("tensor order must be >= 1");
    SymTensor t;
    t.order = order;
    t.dim = dim;
    std::size_t n = 1;
    for (int k = 0; k < order; ++k) n *= static_cast<std::size_t>(dim);
    t.data.assign(n, 0.0);
    return t;
  }

  double at(const std::vector<int>& idx) const { return data[flat_offset(idx, dim)]; }
  double& at(const std::vector<int>& idx) { return data[flat_offset(idx, dim)]; }
};

// General dense tensor; used for HOSVD cores, which are not super-symmetric.
struct DenseTensor {
  std::vector<int> shape;
  std::vector<double> data;

  std::size_t size() const { return data.size(); }
};

struct TuckerFactors {
  DenseTensor core;       // shape k^order; equals input contracted with factor^T on every mode
  Eigen::MatrixXd factor; // dim x k, orthonormal columns; shared by all modes
};

namespace detail {

inline void check_same_shape(const SymTensor& a, const SymTensor& b, const char* op) {
  if (a.order != b.order || a.dim != b.dim)
    throw DimensionError(std::string(op) + ": tensor shapes differ");
}

inline bool all_finite(const std::vector<double>& v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

}  // namespace detail

// Accumulates weighted r-th outer powers of vectors. Only canonical
// (non-decreasing) multi-index entries are touched; materialize() copies each
// orbit value to every permuted position, so the result is permutation
// invariant down to the last bit.
class SymAccumulator {
 public:
  SymAccumulator(int dim, int order) : dim_(dim), order_(order) {
    if (dim < 1) throw InvalidParameterError("outer power: dim must be >= 1");
    if (order < 1) throw InvalidParameterError("outer power: order must be >= 1");
    canonical_.assign(sym_vector_length(dim, order), 0.0);
  }

  void add(const Eigen::VectorXd& v, double weight = 1.0) {
    if (v.size() == 0) throw InvalidInputError("outer power: empty vector");
    if (v.size() != dim_) throw DimensionError("outer power: vector length mismatch");
    if (!v.allFinite() || !std::isfinite(weight))
      throw InvalidInputError("outer power: non-finite input");
    std::size_t pos = 0;
    accumulate(0, 0, weight, v, pos);
  }

  int dim() const { return dim_; }
  int order() const { return order_; }

  SymTensor materialize(double scale = 1.0) const {
    SymTensor t = SymTensor::zeros(dim_, order_);
    std::size_t pos = 0;
    std::vector<int> perm;
    for_each_canonical_index(dim_, order_, [&](const std::vector<int>& idx) {
      const double value = scale == 1.0 ? canonical_[pos] : scale * canonical_[pos];
      ++pos;
      perm = idx;
      do {
        t.data[flat_offset(perm, dim_)] = value;
      } while (std::next_permutation(perm.begin(), perm.end()));
    });
    return t;
  }

 private:
  void accumulate(int start, int depth, double partial, const Eigen::VectorXd& v,
                  std::size_t& pos) {
    if (depth == order_) {
      canonical_[pos++] += partial;
      return;
    }
    for (int i = start; i < dim_; ++i) accumulate(i, depth + 1, partial * v[i], v, pos);
  }

  int dim_;
  int order_;
  std::vector<double> canonical_;
};

// r-th outer power of a vector: entry (i_1,..,i_r) = prod_j v[i_j].
inline SymTensor outer_power(const Eigen::VectorXd& v, int order) {
  if (v.size() == 0) throw InvalidInputError("outer_power: empty vector");
  SymAccumulator acc(static_cast<int>(v.size()), order);
  acc.add(v);
  return acc.materialize();
}

// Element-wise product-and-sum of two tensors of identical shape.
inline double inner(const SymTensor& a, const SymTensor& b) {
  detail::check_same_shape(a, b, "inner");
  double s = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) s += a.data[i] * b.data[i];
  return s;
}

inline double frobenius_norm(const std::vector<double>& data) {
  double s = 0.0;
  for (double x : data) s += x * x;
  return std::sqrt(s);
}

inline double frobenius_norm(const SymTensor& t) { return frobenius_norm(t.data); }

inline bool is_super_symmetric(const SymTensor& t, double tol = 1e-12) {
  bool ok = true;
  std::vector<int> perm;
  for_each_canonical_index(t.dim, t.order, [&](const std::vector<int>& idx) {
    if (!ok) return;
    const double ref = t.data[flat_offset(idx, t.dim)];
    perm = idx;
    while (std::next_permutation(perm.begin(), perm.end())) {
      if (std::abs(t.data[flat_offset(perm, t.dim)] - ref) > tol) {
        ok = false;
        return;
      }
    }
  });
  return ok;
}

// Replaces every entry with the mean over its permutation orbit. The same
// mean is written to each orbit member, so the output is exactly symmetric.
inline void resymmetrize(SymTensor& t) {
  std::vector<int> perm;
  for_each_canonical_index(t.dim, t.order, [&](const std::vector<int>& idx) {
    double sum = 0.0;
    std::uint64_t count = 0;
    perm = idx;
    do {
      sum += t.data[flat_offset(perm, t.dim)];
      ++count;
    } while (std::next_permutation(perm.begin(), perm.end()));
    const double mean = sum / static_cast<double>(count);
    perm = idx;
    do {
      t.data[flat_offset(perm, t.dim)] = mean;
    } while (std::next_permutation(perm.begin(), perm.end()));
  });
}

// Compressed vectorization of a super-symmetric tensor: one slot per
// non-decreasing multi-index, scaled by sqrt of the index multiplicity so the
// Euclidean inner product of two vectorizations equals inner() of the tensors.
inline std::vector<double> sym_vectorize(const SymTensor& t, double tol = 1e-12) {
  if (!detail::all_finite(t.data))
    throw InvalidInputError("sym_vectorize: non-finite tensor entries");
  if (!is_super_symmetric(t, tol))
    throw InvariantError("sym_vectorize: tensor is not super-symmetric within tolerance");
  std::vector<double> out;
  out.reserve(sym_vector_length(t.dim, t.order));
  for_each_canonical_index(t.dim, t.order, [&](const std::vector<int>& idx) {
    const double mult = static_cast<double>(permutation_multiplicity(idx));
    out.push_back(t.data[flat_offset(idx, t.dim)] * std::sqrt(mult));
  });
  return out;
}

inline DenseTensor to_dense(const SymTensor& t) {
  DenseTensor d;
  d.shape.assign(static_cast<std::size_t>(t.order), t.dim);
  d.data = t.data;
  return d;
}

// Single mode-k product: out(..., a, ...) = sum_i t(..., i, ...) * m(a, i).
inline DenseTensor mode_multiply_one(const DenseTensor& t, const Eigen::MatrixXd& m,
                                     int mode) {
  const int order = static_cast<int>(t.shape.size());
  if (mode < 0 || mode >= order) throw InvalidParameterError("mode_multiply: bad mode");
  const int old_size = t.shape[static_cast<std::size_t>(mode)];
  if (m.cols() != old_size)
    throw DimensionError("mode_multiply: matrix columns do not match tensor mode size");
  const int new_size = static_cast<int>(m.rows());

  std::size_t outer = 1, inner_len = 1;
  for (int k = 0; k < mode; ++k) outer *= static_cast<std::size_t>(t.shape[k]);
  for (int k = mode + 1; k < order; ++k) inner_len *= static_cast<std::size_t>(t.shape[k]);

  DenseTensor out;
  out.shape = t.shape;
  out.shape[static_cast<std::size_t>(mode)] = new_size;
  out.data.assign(outer * static_cast<std::size_t>(new_size) * inner_len, 0.0);

  for (std::size_t o = 0; o < outer; ++o) {
    const std::size_t src_base = o * static_cast<std::size_t>(old_size) * inner_len;
    const std::size_t dst_base = o * static_cast<std::size_t>(new_size) * inner_len;
    for (int a = 0; a < new_size; ++a) {
      double* dst = out.data.data() + dst_base + static_cast<std::size_t>(a) * inner_len;
      for (int i = 0; i < old_size; ++i) {
        const double c = m(a, i);
        if (c == 0.0) continue;
        const double* src = t.data.data() + src_base + static_cast<std::size_t>(i) * inner_len;
        for (std::size_t j = 0; j < inner_len; ++j) dst[j] += c * src[j];
      }
    }
  }
  return out;
}

// Multi-linear contraction: applies mats[k] along mode k for every mode.
inline DenseTensor mode_multiply(const DenseTensor& t,
                                 const std::vector<Eigen::MatrixXd>& mats) {
  if (mats.size() != t.shape.size())
    throw DimensionError("mode_multiply: need one matrix per mode");
  DenseTensor cur = t;
  for (int k = 0; k < static_cast<int>(mats.size()); ++k)
    cur = mode_multiply_one(cur, mats[static_cast<std::size_t>(k)], k);
  return cur;
}

namespace detail {

// Extends the orthonormal columns of u to a full basis of R^dim.
inline Eigen::MatrixXd complete_orthonormal_basis(const Eigen::MatrixXd& u) {
  const int dim = static_cast<int>(u.rows());
  Eigen::MatrixXd q(dim, dim);
  int have = static_cast<int>(u.cols());
  q.leftCols(have) = u;
  for (int i = 0; i < dim && have < dim; ++i) {
    Eigen::VectorXd v = Eigen::VectorXd::Unit(dim, i);
    // two Gram-Schmidt passes keep the basis orthonormal to machine precision
    for (int pass = 0; pass < 2; ++pass)
      v -= q.leftCols(have) * (q.leftCols(have).transpose() * v);
    const double n = v.norm();
    if (n > 1e-8) q.col(have++) = v / n;
  }
  return q;
}

// Deterministic sign convention: the largest-magnitude component of each
// column is made non-negative.
inline void fix_column_signs(Eigen::MatrixXd& u) {
  for (int c = 0; c < u.cols(); ++c) {
    int imax = 0;
    u.col(c).cwiseAbs().maxCoeff(&imax);
    if (u(imax, c) < 0.0) u.col(c) = -u.col(c);
  }
}

}  // namespace detail

// HOSVD of a super-symmetric tensor. The factor comes from the SVD of the
// mode-1 unfolding; by super-symmetry the same factor serves every mode. A
// zero tensor yields a zero core with an identity factor. truncation_rank = 0
// keeps the full rank.
inline TuckerFactors hosvd(const SymTensor& t, int truncation_rank = 0) {
  if (t.dim < 1 || t.order < 1) throw InvalidParameterError("hosvd: invalid tensor");
  if (!detail::all_finite(t.data)) throw InvalidInputError("hosvd: non-finite entries");
  if (truncation_rank < 0 || truncation_rank > t.dim)
    throw InvalidParameterError("hosvd: truncation rank out of range");
  const int d = t.dim;
  const int k = truncation_rank == 0 ? d : truncation_rank;

  const bool zero = std::all_of(t.data.begin(), t.data.end(),
                                [](double x) { return x == 0.0; });
  Eigen::MatrixXd u;
  if (zero) {
    u = Eigen::MatrixXd::Identity(d, k);
  } else {
    const std::size_t cols = t.data.size() / static_cast<std::size_t>(d);
    Eigen::MatrixXd unfolding =
        Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                       Eigen::RowMajor>>(
            t.data.data(), d, static_cast<Eigen::Index>(cols));
    Eigen::BDCSVD<Eigen::MatrixXd> svd(unfolding, Eigen::ComputeThinU);
    u = svd.matrixU();
    if (u.cols() < d) u = detail::complete_orthonormal_basis(u);
    detail::fix_column_signs(u);
    u = u.leftCols(k).eval();
  }

  TuckerFactors f;
  f.factor = u;
  f.core = mode_multiply(to_dense(t),
                         std::vector<Eigen::MatrixXd>(static_cast<std::size_t>(t.order),
                                                      u.transpose()));
  return f;
}

inline DenseTensor reconstruct(const TuckerFactors& f) {
  const int order = static_cast<int>(f.core.shape.size());
  return mode_multiply(f.core, std::vector<Eigen::MatrixXd>(
                                   static_cast<std::size_t>(order), f.factor));
}

// Spectral power normalization: sign(c)|c|^alpha applied to the HOSVD core,
// then reconstructed with the factor and re-symmetrized by orbit averaging.
inline SymTensor power_normalize(const SymTensor& t, double alpha,
                                 int truncation_rank = 0) {
  if (!(alpha > 0.0) || alpha > 1.0)
    throw InvalidParameterError("power_normalize: alpha must be in (0,1]");
  TuckerFactors f = hosvd(t, truncation_rank);
  for (double& c : f.core.data) c = std::copysign(std::pow(std::abs(c), alpha), c);
  DenseTensor rec = reconstruct(f);
  SymTensor out;
  out.order = t.order;
  out.dim = t.dim;
  out.data = std::move(rec.data);
  resymmetrize(out);
  return out;
}

}  // namespace hok
