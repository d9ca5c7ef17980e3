#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "hok/common.hpp"
#include "hok/dataset.hpp"
#include "hok/errors.hpp"

namespace hok {

// Synthetic score-sequence benchmark with controlled temporal structure.
// Classes come in pairs: both classes of a pair traverse the same ordered set
// of peaked simplex modes, the second one in reversed frame order. The frame
// multisets of a pair are identical, so first-order statistics cannot
// separate them; only temporal modeling can.
struct SynthSpec {
  int classes = 6;  // M
  int sequences_per_class = 40;
  int min_length = 30;
  int max_length = 50;
  double noise = 0.25;       // mixing weight of the per-frame Dirichlet noise
  int modes_per_class = 4;   // length of each class's mode template
  int dim = 0;               // score dimensionality; 0 means equal to classes

  int score_dim() const { return dim > 0 ? dim : classes; }

  void validate() const {
    if (classes < 2) throw InvalidParameterError("synth: need at least 2 classes");
    if (sequences_per_class < 1)
      throw InvalidParameterError("synth: need at least 1 sequence per class");
    if (min_length < 1 || max_length < min_length)
      throw InvalidParameterError("synth: invalid length range");
    if (noise < 0.0 || noise > 1.0)
      throw InvalidParameterError("synth: noise must be in [0,1]");
    if (modes_per_class < 2)
      throw InvalidParameterError("synth: need at least 2 modes per class");
    if (score_dim() < 2) throw InvalidParameterError("synth: score dim must be >= 2");
  }
};

namespace detail {

inline Eigen::VectorXd dirichlet_uniform(std::mt19937_64& rng, int d) {
  Eigen::VectorXd v(d);
  for (int i = 0; i < d; ++i) {
    double u = uniform_double(rng);
    if (u <= 0.0) u = 0x1.0p-53;
    v[i] = -std::log(u);
  }
  return v / v.sum();
}

}  // namespace detail

inline Dataset synth_generate(const SynthSpec& spec, std::uint64_t seed) {
  spec.validate();
  const int m = spec.classes;
  const int d = spec.score_dim();
  const int q = spec.modes_per_class;
  std::mt19937_64 rng(seed);

  Dataset ds;
  ds.dim = d;
  for (int c = 0; c < m; ++c) {
    char name[32];
    std::snprintf(name, sizeof(name), "class%02d", c + 1);
    ds.classes.emplace_back(name);
  }

  // one mode template per class pair; a mode is a peaked simplex point
  const int pairs = (m + 1) / 2;
  std::vector<std::vector<Eigen::VectorXd>> templates(static_cast<std::size_t>(pairs));
  constexpr double kPeakSpread = 0.25;
  for (int p = 0; p < pairs; ++p) {
    auto& modes = templates[static_cast<std::size_t>(p)];
    for (int j = 0; j < q; ++j) {
      const int peak = uniform_int(rng, d);
      Eigen::VectorXd mode = kPeakSpread * detail::dirichlet_uniform(rng, d);
      mode[peak] += 1.0 - kPeakSpread;
      modes.push_back(std::move(mode));
    }
  }

  for (int c = 0; c < m; ++c) {
    const auto& modes = templates[static_cast<std::size_t>(c / 2)];
    const bool reversed = (c % 2) == 1;
    for (int s = 0; s < spec.sequences_per_class; ++s) {
      const int n = spec.min_length + uniform_int(rng, spec.max_length - spec.min_length + 1);
      ScoreSequence seq;
      char id[64];
      std::snprintf(id, sizeof(id), "%s_seq%03d", ds.classes[static_cast<std::size_t>(c)].c_str(),
                    s + 1);
      seq.id = id;
      seq.label = c;
      seq.scores.resize(n, d);
      for (int t = 0; t < n; ++t) {
        // block traversal of the template; the reversed class replays the
        // same index sequence backwards, so the frame multisets match
        const int pos = reversed ? n - 1 - t : t;
        int mode_idx = static_cast<int>((static_cast<long long>(pos) * q) / n);
        if (mode_idx >= q) mode_idx = q - 1;
        Eigen::VectorXd frame = modes[static_cast<std::size_t>(mode_idx)];
        if (spec.noise > 0.0)
          frame = (1.0 - spec.noise) * frame +
                  spec.noise * detail::dirichlet_uniform(rng, d);
        seq.scores.row(t) = frame.transpose();
      }
      ds.sequences.push_back(std::move(seq));
    }
  }
  return ds;
}

}  // namespace hok
