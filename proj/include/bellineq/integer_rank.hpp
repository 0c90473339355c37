#pragma once

// Exact rank of integer matrices.
//
// Bareiss fraction-free elimination over arbitrary-precision integers is the
// exact path. For large systems a modular screen runs first: rows that are
// independent modulo a prime are independent over the rationals, so a
// full-rank result mod p is already a proof of full rational rank.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace bellineq {

using IntRow = std::vector<std::int64_t>;

/// Rank by Bareiss elimination with cpp_int entries; exact for any input.
inline std::size_t bareiss_rank(const std::vector<IntRow>& rows) {
  using boost::multiprecision::cpp_int;
  if (rows.empty()) return 0;
  const std::size_t cols = rows.front().size();
  std::vector<std::vector<cpp_int>> a;
  a.reserve(rows.size());
  for (const auto& r : rows) a.emplace_back(r.begin(), r.end());

  cpp_int prev = 1;
  std::size_t rank = 0;
  for (std::size_t c = 0; c < cols && rank < a.size(); ++c) {
    std::size_t piv = rank;
    while (piv < a.size() && a[piv][c] == 0) ++piv;
    if (piv == a.size()) continue;
    std::swap(a[piv], a[rank]);
    for (std::size_t i = rank + 1; i < a.size(); ++i) {
      for (std::size_t j = c + 1; j < cols; ++j)
        a[i][j] = (a[i][j] * a[rank][c] - a[i][c] * a[rank][j]) / prev;
      a[i][c] = 0;
    }
    prev = a[rank][c];
    ++rank;
  }
  return rank;
}

namespace detail {

inline constexpr std::uint64_t kRankPrime = 2147483647ULL;  // 2^31 - 1

inline std::uint64_t mod_p(std::int64_t x) {
  const auto p = static_cast<std::int64_t>(kRankPrime);
  x %= p;
  return static_cast<std::uint64_t>(x < 0 ? x + p : x);
}

inline std::uint64_t pow_mod(std::uint64_t b, std::uint64_t e) {
  std::uint64_t r = 1;
  b %= kRankPrime;
  while (e) {
    if (e & 1) r = r * b % kRankPrime;
    b = b * b % kRankPrime;
    e >>= 1;
  }
  return r;
}

}  // namespace detail

/// Indices of a maximal set of rows independent modulo 2^31 - 1, scanning in
/// the given order and stopping early at full column rank.
inline std::vector<std::size_t> modular_independent_rows(const std::vector<IntRow>& rows,
                                                         std::span<const std::size_t> order) {
  using detail::kRankPrime;
  std::vector<std::size_t> chosen;
  if (rows.empty()) return chosen;
  const std::size_t cols = rows.front().size();
  std::vector<std::vector<std::uint64_t>> basis;  // normalized, pivot entry 1
  std::vector<std::size_t> pivots;
  std::vector<std::uint64_t> r(cols);
  for (std::size_t idx : order) {
    for (std::size_t j = 0; j < cols; ++j) r[j] = detail::mod_p(rows[idx][j]);
    for (std::size_t b = 0; b < basis.size(); ++b) {
      const std::uint64_t f = r[pivots[b]];
      if (f == 0) continue;
      const auto& br = basis[b];
      for (std::size_t j = 0; j < cols; ++j)
        if (br[j]) r[j] = (r[j] + (kRankPrime - f) * br[j]) % kRankPrime;
    }
    std::size_t pc = 0;
    while (pc < cols && r[pc] == 0) ++pc;
    if (pc == cols) continue;
    const std::uint64_t inv = detail::pow_mod(r[pc], kRankPrime - 2);
    for (auto& x : r) x = x * inv % kRankPrime;
    // Keep the basis fully reduced at pivot columns.
    for (std::size_t b = 0; b < basis.size(); ++b) {
      const std::uint64_t f = basis[b][pc];
      if (f == 0) continue;
      for (std::size_t j = 0; j < cols; ++j)
        if (r[j]) basis[b][j] = (basis[b][j] + (kRankPrime - f) * r[j]) % kRankPrime;
    }
    basis.push_back(r);
    pivots.push_back(pc);
    chosen.push_back(idx);
    if (chosen.size() == cols) break;
  }
  return chosen;
}

/// Exact rank. Small systems go straight to Bareiss; large ones are
/// certified by the modular screen when it already finds full column rank.
inline std::size_t integer_rank(const std::vector<IntRow>& rows, std::span<const std::size_t> order) {
  if (rows.empty()) return 0;
  const std::size_t cols = rows.front().size();
  const auto chosen = modular_independent_rows(rows, order);
  if (chosen.size() == cols) {
    if (cols > 128) return cols;
    std::vector<IntRow> basis;
    for (auto i : chosen) basis.push_back(rows[i]);
    return bareiss_rank(basis);
  }
  return bareiss_rank(rows);
}

inline std::size_t integer_rank(const std::vector<IntRow>& rows) {
  std::vector<std::size_t> order(rows.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  return integer_rank(rows, order);
}

}  // namespace bellineq
