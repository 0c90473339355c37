#pragma once

// Setting layouts, correlation tables, deterministic strategies and the
// integer-coefficient Bell inequalities evaluated on them.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "bellineq/errors.hpp"

namespace bellineq {

inline constexpr double kTableSlack = 1e-9;
inline constexpr int kMaxSettingsPerParty = 32;

/// Settings per party (m_1, ..., m_N).
class ExperimentLayout {
 public:
  ExperimentLayout() = default;
  explicit ExperimentLayout(std::vector<int> settings_per_party)
      : m_(std::move(settings_per_party)) {
    require(!m_.empty(), "layout needs at least one party");
    for (int m : m_)
      require(m >= 1 && m <= kMaxSettingsPerParty, "settings per party must be in [1, 32]");
  }

  std::size_t parties() const { return m_.size(); }
  int settings(std::size_t party) const { return m_[party]; }
  const std::vector<int>& settings_per_party() const { return m_; }

  /// Number of correlation values, the product of m_j.
  std::size_t cells() const {
    return std::accumulate(m_.begin(), m_.end(), std::size_t{1},
                           [](std::size_t a, int b) { return a * static_cast<std::size_t>(b); });
  }
  int total_settings() const { return std::accumulate(m_.begin(), m_.end(), 0); }

  bool all_two_settings() const {
    for (int m : m_)
      if (m != 2) return false;
    return true;
  }

  /// Flat index of zero-based setting indices, party 1 major.
  std::size_t flat(std::span<const int> k) const {
    std::size_t f = 0;
    for (std::size_t j = 0; j < m_.size(); ++j) f = f * static_cast<std::size_t>(m_[j]) + static_cast<std::size_t>(k[j]);
    return f;
  }
  std::vector<int> unflat(std::size_t f) const {
    std::vector<int> k(m_.size());
    for (std::size_t j = m_.size(); j-- > 0;) {
      k[j] = static_cast<int>(f % static_cast<std::size_t>(m_[j]));
      f /= static_cast<std::size_t>(m_[j]);
    }
    return k;
  }

  std::string to_string() const {
    std::string s;
    for (std::size_t j = 0; j < m_.size(); ++j) s += (j ? "x" : "") + std::to_string(m_[j]);
    return s;
  }

  friend bool operator==(const ExperimentLayout&, const ExperimentLayout&) = default;

 private:
  std::vector<int> m_;
};

/// Correlation functions E(k_1, ..., k_N), stored flat with zero-based
/// setting indices.
class CorrelationTable {
 public:
  CorrelationTable(ExperimentLayout layout, std::vector<double> values)
      : layout_(std::move(layout)), values_(std::move(values)) {
    require(values_.size() == layout_.cells(), "table size does not match layout");
    for (double v : values_)
      require(std::isfinite(v) && std::abs(v) <= 1.0 + kTableSlack,
              "correlation value outside [-1, 1]");
  }
  static CorrelationTable zeros(const ExperimentLayout& layout) {
    return CorrelationTable(layout, std::vector<double>(layout.cells(), 0.0));
  }

  const ExperimentLayout& layout() const { return layout_; }
  std::span<const double> values() const { return values_; }
  double operator()(std::span<const int> k) const { return values_[layout_.flat(k)]; }
  double operator[](std::size_t flat) const { return values_[flat]; }

 private:
  ExperimentLayout layout_;
  std::vector<double> values_;
};

/// Predetermined outcomes: bit k of outcomes[j] set means A_j(k+1) = -1.
struct DeterministicStrategy {
  std::vector<std::uint32_t> outcomes;

  int outcome(std::size_t party, int setting) const {
    return ((outcomes[party] >> setting) & 1u) ? -1 : 1;
  }
  friend auto operator<=>(const DeterministicStrategy&, const DeterministicStrategy&) = default;
};

inline void check_strategy(const DeterministicStrategy& s, const ExperimentLayout& layout) {
  require(s.outcomes.size() == layout.parties(), "strategy party count mismatch");
  for (std::size_t j = 0; j < layout.parties(); ++j) {
    const int m = layout.settings(j);
    require(m == 32 || (s.outcomes[j] >> m) == 0, "strategy uses settings outside the layout");
  }
}

/// The vertex table E(k) = prod_j A_j(k_j) of a deterministic strategy.
inline CorrelationTable strategy_table(const DeterministicStrategy& s, const ExperimentLayout& layout) {
  check_strategy(s, layout);
  std::vector<double> v(layout.cells());
  for (std::size_t f = 0; f < v.size(); ++f) {
    const auto k = layout.unflat(f);
    int prod = 1;
    for (std::size_t j = 0; j < k.size(); ++j) prod *= s.outcome(j, k[j]);
    v[f] = prod;
  }
  return CorrelationTable(layout, std::move(v));
}

/// Writes prod_j A_j(k_j) for every cell into out (length layout.cells()).
inline void fill_vertex_products(const ExperimentLayout& layout, const DeterministicStrategy& s,
                                 std::span<double> out) {
  out[0] = 1.0;
  std::size_t len = 1;
  for (std::size_t j = 0; j < layout.parties(); ++j) {
    const auto m = static_cast<std::size_t>(layout.settings(j));
    // Expand in place from the back so unread entries are never clobbered.
    for (std::size_t i = len; i-- > 0;) {
      const double base = out[i];
      for (std::size_t k = m; k-- > 0;) out[i * m + k] = base * s.outcome(j, static_cast<int>(k));
    }
    len *= m;
  }
}

inline constexpr std::size_t kMaxVertices = std::size_t{1} << 20;

/// Enumerates the distinct vertices of the correlation polytope. Flipping
/// every outcome of two parties leaves the vertex unchanged, so parties
/// 1..N-1 have their first outcome pinned to +1 and the last party is free.
class VertexEnumerator {
 public:
  explicit VertexEnumerator(ExperimentLayout layout) : layout_(std::move(layout)) {
    const int free_bits = layout_.total_settings() - static_cast<int>(layout_.parties() - 1);
    if (free_bits > 20)
      throw ResourceLimit("layout " + layout_.to_string() + " has 2^" +
                          std::to_string(free_bits) + " vertices, cap is 2^20");
    count_ = std::size_t{1} << free_bits;
  }

  std::size_t count() const { return count_; }
  const ExperimentLayout& layout() const { return layout_; }

  DeterministicStrategy strategy(std::size_t index) const {
    DeterministicStrategy s;
    s.outcomes.resize(layout_.parties());
    const std::size_t last = layout_.parties() - 1;
    for (std::size_t j = layout_.parties(); j-- > 0;) {
      const int m = layout_.settings(j);
      if (j == last) {
        s.outcomes[j] = static_cast<std::uint32_t>(index & ((std::uint64_t{1} << m) - 1));
        index >>= m;
      } else {
        s.outcomes[j] = static_cast<std::uint32_t>((index & ((std::uint64_t{1} << (m - 1)) - 1)) << 1);
        index >>= (m - 1);
      }
    }
    return s;
  }

  /// Writes the vertex vector prod_j A_j(k_j) into out (length cells()).
  void vertex(std::size_t index, std::span<double> out) const;

 private:
  ExperimentLayout layout_;
  std::size_t count_ = 0;
};

inline void VertexEnumerator::vertex(std::size_t index, std::span<double> out) const {
  fill_vertex_products(layout_, strategy(index), out);
}

/// |sum_k coefficients(k) E(k)| <= bound, with exact integer coefficients.
struct BellInequality {
  ExperimentLayout layout;
  std::vector<std::int64_t> coefficients;
  std::int64_t bound = 0;

  BellInequality() = default;
  BellInequality(ExperimentLayout l, std::vector<std::int64_t> c, std::int64_t b)
      : layout(std::move(l)), coefficients(std::move(c)), bound(b) {
    require(coefficients.size() == layout.cells(), "coefficient count does not match layout");
    require(bound > 0, "bound must be positive");
    bool any = false;
    for (auto c0 : coefficients) any = any || c0 != 0;
    require(any, "coefficients must not all be zero");
  }

  std::int64_t coefficient(std::span<const int> k) const { return coefficients[layout.flat(k)]; }
};

/// sum_k coefficients(k) E(k); compare |value| with ineq.bound.
inline double evaluate_inequality(const BellInequality& ineq, const CorrelationTable& table) {
  require(ineq.layout == table.layout(), "inequality and table layouts differ");
  double acc = 0.0;
  for (std::size_t f = 0; f < ineq.coefficients.size(); ++f)
    acc += static_cast<double>(ineq.coefficients[f]) * table[f];
  return acc;
}

/// Exact value of the Bell expression on a deterministic strategy.
/// Contracts the last party first, so the cost is about cells() operations.
inline std::int64_t strategy_value(const BellInequality& ineq, const DeterministicStrategy& s) {
  const auto& layout = ineq.layout;
  std::vector<std::int64_t> cur(ineq.coefficients.begin(), ineq.coefficients.end());
  std::size_t len = cur.size();
  for (std::size_t j = layout.parties(); j-- > 0;) {
    const auto m = static_cast<std::size_t>(layout.settings(j));
    const std::size_t outer = len / m;
    for (std::size_t o = 0; o < outer; ++o) {
      std::int64_t acc = 0;
      for (std::size_t k = 0; k < m; ++k) acc += cur[o * m + k] * s.outcome(j, static_cast<int>(k));
      cur[o] = acc;
    }
    len = outer;
  }
  return cur[0];
}

}  // namespace bellineq
