#pragma once

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include "wchaos/errors.hpp"

namespace wchaos {

// Multi-index n = (n_1, ..., n_M) labelling one product Hermite functional;
// n_k is the polynomial degree attached to noise coordinate k.
struct MultiIndex {
  std::vector<int> n;

  int size() const { return static_cast<int>(n.size()); }
  int degree() const { return std::accumulate(n.begin(), n.end(), 0); }
  int operator[](int k) const { return n[static_cast<std::size_t>(k)]; }
  int& operator[](int k) { return n[static_cast<std::size_t>(k)]; }
  bool operator==(const MultiIndex& o) const { return n == o.n; }
  bool is_zero() const {
    return std::all_of(n.begin(), n.end(), [](int v) { return v == 0; });
  }
};

// Zero index and coordinate unit index of dimension M.
inline MultiIndex zero_index(int M) { return MultiIndex{std::vector<int>(static_cast<std::size_t>(M), 0)}; }

inline MultiIndex unit_index(int M, int k) {
  MultiIndex u = zero_index(M);
  u[k] = 1;
  return u;
}

// Graded lexicographic order: lower total degree first, ties broken
// lexicographically on (n_1, n_2, ...).  The zero index is always first.
inline bool graded_lex_less(const MultiIndex& a, const MultiIndex& b) {
  const int da = a.degree(), db = b.degree();
  if (da != db) return da < db;
  return std::lexicographical_compare(a.n.begin(), a.n.end(), b.n.begin(), b.n.end());
}

enum class TruncationScheme { FullTensor, TotalDegree };

inline std::size_t index_set_cap() { return 20000; }

// Ordered truncated index family J^{M,N}.  FullTensor keeps every n with
// max_k n_k <= N ((N+1)^M indices); TotalDegree keeps sum_k n_k <= N
// (binomial(M+N, N) indices).  Both are stored in graded lexicographic order,
// so membership queries are binary searches.
struct IndexSet {
  std::vector<MultiIndex> indices;
  TruncationScheme scheme = TruncationScheme::TotalDegree;
  int M = 0;
  int N = 0;

  int size() const { return static_cast<int>(indices.size()); }
  const MultiIndex& operator[](int i) const { return indices[static_cast<std::size_t>(i)]; }

  // Position of m in the set, or -1 when absent.
  int find(const MultiIndex& m) const {
    auto it = std::lower_bound(indices.begin(), indices.end(), m, graded_lex_less);
    if (it == indices.end() || !(*it == m)) return -1;
    return static_cast<int>(it - indices.begin());
  }

  // Restriction to the positions in `keep` (ascending), preserving order.
  IndexSet subset(const std::vector<int>& keep) const {
    IndexSet out;
    out.scheme = scheme;
    out.M = M;
    out.N = N;
    out.indices.reserve(keep.size());
    for (int i : keep) out.indices.push_back(indices[static_cast<std::size_t>(i)]);
    return out;
  }
};

namespace detail {

// Depth-first enumeration in graded-lex-compatible generation order is not
// guaranteed, so indices are generated with running cap enforcement and then
// sorted.  The cap check fires during generation, keeping the work bounded
// even for absurd (M, N).
inline void enumerate_rec(int M, int N, TruncationScheme scheme, int coord, int used_degree,
                          MultiIndex& cur, std::vector<MultiIndex>& out) {
  if (coord == M) {
    if (out.size() >= index_set_cap()) {
      throw ConfigError("index set exceeds cap of " + std::to_string(index_set_cap()) +
                        " entries; reduce M or N");
    }
    out.push_back(cur);
    return;
  }
  const int limit = scheme == TruncationScheme::FullTensor ? N : N - used_degree;
  for (int v = 0; v <= limit; ++v) {
    cur[coord] = v;
    enumerate_rec(M, N, scheme, coord + 1, used_degree + v, cur, out);
  }
  cur[coord] = 0;
}

}  // namespace detail

inline IndexSet enumerate_indices(int M, int N, TruncationScheme scheme) {
  if (M < 1) throw ConfigError("index set needs at least one noise coordinate (M >= 1)");
  if (N < 0) throw ConfigError("polynomial degree bound must be nonnegative");
  IndexSet set;
  set.scheme = scheme;
  set.M = M;
  set.N = N;
  MultiIndex cur = zero_index(M);
  detail::enumerate_rec(M, N, scheme, 0, 0, cur, set.indices);
  std::sort(set.indices.begin(), set.indices.end(), graded_lex_less);
  return set;
}

// Ornstein-Uhlenbeck eigenvalue of the product functional labelled by n:
// lambda_n = sum_k n_k * lambda_k for the supplied mode spectrum.
inline double ou_eigenvalue(const MultiIndex& n, const std::vector<double>& lambda) {
  if (lambda.size() < n.n.size()) {
    throw ConfigError("spectrum shorter than multi-index dimension");
  }
  double acc = 0.0;
  for (std::size_t k = 0; k < n.n.size(); ++k) acc += n.n[k] * lambda[k];
  return acc;
}

}  // namespace wchaos
