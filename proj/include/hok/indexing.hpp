#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace hok {

inline std::uint64_t binomial(int n, int k) {
  if (k < 0 || n < 0 || k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t r = 1;
  // r stays C(n-k+i, i) at every step, so the division is exact.
  for (int i = 1; i <= k; ++i) r = r * static_cast<std::uint64_t>(n - k + i) / i;
  return r;
}

// Number of free entries of a super-symmetric tensor: one per non-decreasing
// multi-index.
inline std::size_t sym_vector_length(int dim, int order) {
  return static_cast<std::size_t>(binomial(dim + order - 1, order));
}

inline std::size_t flat_offset(const std::vector<int>& idx, int dim) {
  std::size_t f = 0;
  for (int i : idx) f = f * static_cast<std::size_t>(dim) + static_cast<std::size_t>(i);
  return f;
}

// Visits all non-decreasing multi-indices of the given order over {0..dim-1}
// in lexicographic order.
template <typename Fn>
void for_each_canonical_index(int dim, int order, Fn&& fn) {
  if (dim < 1 || order < 1) return;
  std::vector<int> idx(static_cast<std::size_t>(order), 0);
  while (true) {
    fn(static_cast<const std::vector<int>&>(idx));
    int p = order - 1;
    while (p >= 0 && idx[static_cast<std::size_t>(p)] == dim - 1) --p;
    if (p < 0) return;
    int v = idx[static_cast<std::size_t>(p)] + 1;
    for (int q = p; q < order; ++q) idx[static_cast<std::size_t>(q)] = v;
  }
}

// Count of distinct permutations of a sorted multi-index:
// order! / prod(run length factorials).
inline std::uint64_t permutation_multiplicity(const std::vector<int>& sorted_idx) {
  static const std::uint64_t factorial[11] = {1,  1,   2,    6,     24,      120,
                                              720, 5040, 40320, 362880, 3628800};
  const std::size_t r = sorted_idx.size();
  std::uint64_t mult = factorial[r];
  std::size_t i = 0;
  while (i < r) {
    std::size_t j = i;
    while (j < r && sorted_idx[j] == sorted_idx[i]) ++j;
    mult /= factorial[j - i];
    i = j;
  }
  return mult;
}

}  // namespace hok
