#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <string>

#include "hok/common.hpp"
#include "hok/sequence.hpp"
#include "hok/tensor.hpp"

namespace hok::testutil {

inline Eigen::VectorXd random_vector(std::mt19937_64& rng, int d, double lo = -1.0,
                                     double hi = 1.0) {
  Eigen::VectorXd v(d);
  for (int i = 0; i < d; ++i) v[i] = lo + (hi - lo) * uniform_double(rng);
  return v;
}

inline Eigen::VectorXd random_simplex_point(std::mt19937_64& rng, int d) {
  Eigen::VectorXd v(d);
  for (int i = 0; i < d; ++i) v[i] = -std::log(std::max(uniform_double(rng), 0x1.0p-53));
  return v / v.sum();
}

inline ScoreSequence random_sequence(std::mt19937_64& rng, const std::string& id, int n,
                                     int d, int label = 0) {
  ScoreSequence s;
  s.id = id;
  s.label = label;
  s.scores.resize(n, d);
  for (int t = 0; t < n; ++t) s.scores.row(t) = random_simplex_point(rng, d).transpose();
  return s;
}

// Random super-symmetric tensor as a signed combination of outer powers.
inline SymTensor random_sym_tensor(std::mt19937_64& rng, int d, int r, int terms = 3) {
  SymAccumulator acc(d, r);
  for (int i = 0; i < terms; ++i) {
    const double w = uniform_double(rng) < 0.5 ? -1.0 : 1.0;
    acc.add(random_vector(rng, d), w * (0.5 + uniform_double(rng)));
  }
  return acc.materialize();
}

inline double rel_frobenius_error(const std::vector<double>& a, const std::vector<double>& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    num += d * d;
    den += b[i] * b[i];
  }
  return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

}  // namespace hok::testutil
