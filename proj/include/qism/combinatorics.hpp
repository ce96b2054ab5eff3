#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <numeric>
#include <vector>

#include "qism/errors.hpp"

namespace qism {

inline std::size_t factorial(std::size_t n) {
  std::size_t r = 1;
  for (std::size_t i = 2; i <= n; ++i) r *= i;
  return r;
}

inline std::size_t binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0;
  std::size_t r = 1;
  for (std::size_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

inline std::size_t int_pow(std::size_t base, std::size_t exp) {
  std::size_t r = 1;
  while (exp-- > 0) r *= base;
  return r;
}

/// (J, complement of J) inside {0..M-1}.
struct Bipartition {
  std::vector<std::size_t> subset;
  std::vector<std::size_t> complement;
};

/// Binary counting over masks 0..2^M-1; bit i set sends element i to the
/// complement. Mask 0 is (all, empty).
inline void for_each_bipartition(std::size_t m, const std::function<void(const Bipartition&)>& fn) {
  if (m >= 8 * sizeof(std::size_t)) throw Error(ErrorCode::InvalidArgument, "too many elements to enumerate");
  Bipartition p;
  for (std::size_t mask = 0; mask < (std::size_t{1} << m); ++mask) {
    p.subset.clear();
    p.complement.clear();
    for (std::size_t i = 0; i < m; ++i) ((mask >> i) & 1u ? p.complement : p.subset).push_back(i);
    fn(p);
  }
}

inline std::vector<Bipartition> enumerate_bipartitions(std::size_t m) {
  std::vector<Bipartition> out;
  for_each_bipartition(m, [&](const Bipartition& p) { out.push_back(p); });
  return out;
}

/// Division of {0..M-1} into K labelled, possibly empty, disjoint blocks.
struct OrderedPartition {
  std::vector<std::vector<std::size_t>> blocks;
  std::vector<std::size_t> assignment;  // element -> block

  static OrderedPartition from_assignment(std::vector<std::size_t> assignment, std::size_t k) {
    OrderedPartition p;
    p.blocks.assign(k, {});
    for (std::size_t i = 0; i < assignment.size(); ++i) p.blocks.at(assignment[i]).push_back(i);
    p.assignment = std::move(assignment);
    return p;
  }

  std::size_t largest_block() const {
    std::size_t best = 0;
    for (const auto& b : blocks) best = std::max(best, b.size());
    return best;
  }
};

/// All K^M ordered partitions in base-K counting order; element i is digit i
/// (element 0 least significant), and its digit is its block index.
inline void for_each_ordered_partition(std::size_t m, std::size_t k,
                                       const std::function<void(const OrderedPartition&)>& fn) {
  if (k < 1) throw Error(ErrorCode::InvalidArgument, "need at least one block");
  std::vector<std::size_t> digits(m, 0);
  for (;;) {
    fn(OrderedPartition::from_assignment(digits, k));
    std::size_t i = 0;
    while (i < m && ++digits[i] == k) digits[i++] = 0;
    if (i == m) break;
  }
}

inline std::vector<OrderedPartition> enumerate_ordered_partitions(std::size_t m, std::size_t k) {
  std::vector<OrderedPartition> out;
  for_each_ordered_partition(m, k, [&](const OrderedPartition& p) { out.push_back(p); });
  return out;
}

/// Only the ordered partitions whose blocks hold at most one element
/// (injective assignments), K!/(K-M)! of them, in the same relative order as
/// the full enumeration.
inline void for_each_injective_partition(std::size_t m, std::size_t k,
                                         const std::function<void(const OrderedPartition&)>& fn) {
  if (k < 1) throw Error(ErrorCode::InvalidArgument, "need at least one block");
  if (m > k) return;
  for_each_ordered_partition(m, k, [&](const OrderedPartition& p) {
    if (p.largest_block() <= 1) fn(p);
  });
}

/// Strictly increasing index tuples 0 <= c_0 < ... < c_{M-1} < N, lexicographic.
inline void for_each_combination(std::size_t n, std::size_t m,
                                 const std::function<void(const std::vector<std::size_t>&)>& fn) {
  if (m > n) return;
  std::vector<std::size_t> c(m);
  std::iota(c.begin(), c.end(), 0);
  for (;;) {
    fn(c);
    std::size_t i = m;
    while (i > 0 && c[i - 1] == n - m + (i - 1)) --i;
    if (i == 0) break;
    ++c[i - 1];
    for (std::size_t j = i; j < m; ++j) c[j] = c[j - 1] + 1;
  }
}

/// All permutations of 0..M-1 in lexicographic order.
inline void for_each_permutation(std::size_t m, const std::function<void(const std::vector<std::size_t>&)>& fn) {
  std::vector<std::size_t> p(m);
  std::iota(p.begin(), p.end(), 0);
  do {
    fn(p);
  } while (std::next_permutation(p.begin(), p.end()));
}

}  // namespace qism
