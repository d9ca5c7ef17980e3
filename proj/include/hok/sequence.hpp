#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>

#include "hok/errors.hpp"

namespace hok {

// A variable-length sequence of per-frame classifier score vectors. Rows of
// `scores` are frames; each row is a probability vector over the classes.
struct ScoreSequence {
  std::string id;
  int label = -1;          // class index, 0-based; -1 when unlabeled
  Eigen::MatrixXd scores;  // n x d

  int length() const { return static_cast<int>(scores.rows()); }
  int dim() const { return static_cast<int>(scores.cols()); }
};

// Frame index mapped to [0,1]; a single-frame sequence maps to 0.
inline double normalized_time(int t, int n) {
  return n > 1 ? static_cast<double>(t) / static_cast<double>(n - 1) : 0.0;
}

inline void validate_sequence(const ScoreSequence& seq, double simplex_tol = 1e-4) {
  if (seq.scores.rows() < 1)
    throw InvalidInputError("sequence '" + seq.id + "': no frames");
  if (seq.scores.cols() < 2)
    throw InvalidInputError("sequence '" + seq.id + "': needs at least 2 classifier scores");
  if (!seq.scores.allFinite())
    throw InvalidInputError("sequence '" + seq.id + "': non-finite scores");
  for (int t = 0; t < seq.scores.rows(); ++t) {
    const double lo = seq.scores.row(t).minCoeff();
    const double hi = seq.scores.row(t).maxCoeff();
    if (lo < -1e-9 || hi > 1.0 + 1e-9)
      throw InvalidInputError("sequence '" + seq.id + "': frame " + std::to_string(t) +
                              " has scores outside [0,1]");
    const double sum = seq.scores.row(t).sum();
    if (std::abs(sum - 1.0) > simplex_tol)
      throw InvalidInputError("sequence '" + seq.id + "': frame " + std::to_string(t) +
                              " row sum " + std::to_string(sum) + " is off the simplex");
  }
}

}  // namespace hok
