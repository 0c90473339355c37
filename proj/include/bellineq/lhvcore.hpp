#pragma once

// Local-realistic descriptions of correlation data: the complete
// two-setting inequality family, explicit hidden-variable models, and an
// LP oracle for membership in the correlation polytope.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "bellineq/errors.hpp"
#include "bellineq/layout.hpp"
#include "bellineq/sign_function.hpp"
#include "bellineq/simplex.hpp"

namespace bellineq {

inline constexpr double kBoundaryTolerance = 1e-12;

/// Probability distribution over deterministic strategies. `tail` is extra
/// weight spread uniformly over all 2^(sum m_j) strategies; it does not
/// change any correlation function.
struct LhvModel {
  ExperimentLayout layout;
  std::map<DeterministicStrategy, double> weights;
  double tail = 0.0;

  double total_weight() const {
    double t = tail;
    for (const auto& [s, w] : weights) t += w;
    return t;
  }

  void validate() const {
    for (const auto& [s, w] : weights) {
      check_strategy(s, layout);
      require(w >= 0.0, "model weights must be nonnegative");
    }
    require(tail >= 0.0, "tail weight must be nonnegative");
    require(std::abs(total_weight() - 1.0) <= 1e-12, "model weights must sum to 1");
  }

  /// Every strategy with its total weight, tail included.
  std::vector<std::pair<DeterministicStrategy, double>> explicit_weights() const {
    const int bits = layout.total_settings();
    if (tail == 0.0) return {weights.begin(), weights.end()};
    if (bits > 20) throw ResourceLimit("model tail spans more than 2^20 strategies");
    const std::size_t count = std::size_t{1} << bits;
    const double share = tail / static_cast<double>(count);
    std::vector<std::pair<DeterministicStrategy, double>> out;
    out.reserve(count);
    for (std::size_t code = 0; code < count; ++code) {
      DeterministicStrategy s;
      s.outcomes.resize(layout.parties());
      std::size_t rest = code;
      for (std::size_t j = layout.parties(); j-- > 0;) {
        const int m = layout.settings(j);
        s.outcomes[j] = static_cast<std::uint32_t>(rest & ((std::size_t{1} << m) - 1));
        rest >>= m;
      }
      const auto it = weights.find(s);
      out.emplace_back(s, share + (it == weights.end() ? 0.0 : it->second));
    }
    return out;
  }
};

namespace detail {

inline void require_two_settings(const CorrelationTable& table) {
  require(table.layout().all_two_settings(), "operation needs a 2 x ... x 2 layout");
  require(table.layout().parties() <= static_cast<std::size_t>(kMaxSignArity),
          "too many parties for the two-setting family");
}

/// W(s) = sum_k prod_j s_j^{k_j - 1} E(k) for every sign vector s.
inline std::vector<double> walsh_sums(const CorrelationTable& table) {
  require_two_settings(table);
  std::vector<double> w(table.values().begin(), table.values().end());
  walsh_hadamard(std::span<double>(w));
  return w;
}

}  // namespace detail

/// sum_s | sum_k s_1^{k_1-1} ... s_N^{k_N-1} E(k) |; local realism for the
/// two-setting experiment holds iff this is at most 2^N.
inline double general_bell_lhs(const CorrelationTable& table) {
  double acc = 0.0;
  for (double w : detail::walsh_sums(table)) acc += std::abs(w);
  return acc;
}

inline double evaluate_sign_inequality(const CorrelationTable& table, const SignFunction& s) {
  require(static_cast<std::size_t>(s.arity()) == table.layout().parties(),
          "sign function arity must equal the number of parties");
  const auto w = detail::walsh_sums(table);
  double acc = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) acc += s.value(i) * w[i];
  return std::abs(acc);
}

/// P(s) = 2^-N |W(s)|, indexed like sign-function arguments.
inline std::vector<double> hidden_probabilities(const CorrelationTable& table) {
  auto w = detail::walsh_sums(table);
  const double scale = std::ldexp(1.0, -static_cast<int>(table.layout().parties()));
  for (double& x : w) x = scale * std::abs(x);
  return w;
}

/// The sign function S(s) = sign W(s) (zero counted as +1); it selects the
/// most violated member of the two-setting family.
inline SignFunction most_violated_sign_function(const CorrelationTable& table) {
  const auto w = detail::walsh_sums(table);
  std::vector<std::uint8_t> bits(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) bits[i] = w[i] < 0 ? 1 : 0;
  return SignFunction(static_cast<int>(table.layout().parties()), std::move(bits));
}

/// Hidden-variable model for a two-setting table that satisfies the
/// general inequality. The sign of W(s) is absorbed into party 1's
/// outcomes: s maps to A_1 = (sigma, sigma s_1), A_j = (1, s_j) for j > 1.
inline LhvModel construct_lhv_model(const CorrelationTable& table) {
  const auto w = detail::walsh_sums(table);
  const std::size_t n = table.layout().parties();
  const double bound = std::ldexp(1.0, static_cast<int>(n));
  double lhs = 0.0;
  for (double x : w) lhs += std::abs(x);
  if (lhs > bound + kBoundaryTolerance) throw InequalityViolated(lhs, bound);

  LhvModel model{table.layout(), {}, 0.0};
  const double scale = 1.0 / bound;
  double mass = 0.0;
  for (std::size_t idx = 0; idx < w.size(); ++idx) {
    const double p = scale * std::abs(w[idx]);
    if (p == 0.0) continue;
    DeterministicStrategy s;
    s.outcomes.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
      const bool s_negative = (idx >> (n - 1 - j)) & 1u;
      std::uint32_t mask = s_negative ? 2u : 0u;  // A_j(2) = s_j A_j(1)
      if (j == 0 && w[idx] < 0) mask ^= 3u;        // flip both outcomes
      s.outcomes[j] = mask;
    }
    model.weights[s] += p;
    mass += p;
  }
  if (mass > 1.0) {
    // Saturated within tolerance: renormalize instead of a negative tail.
    for (auto& [s, p] : model.weights) p /= mass;
  } else {
    model.tail = 1.0 - mass;
  }
  return model;
}

/// E(k) = sum over strategies of weight * prod_j A_j(k_j). The uniform tail
/// averages every product to zero and is skipped.
inline CorrelationTable evaluate_model(const LhvModel& model) {
  model.validate();
  const auto& layout = model.layout;
  std::vector<double> e(layout.cells(), 0.0);
  std::vector<double> vertex(layout.cells());
  for (const auto& [s, weight] : model.weights) {
    fill_vertex_products(layout, s, vertex);
    for (std::size_t f = 0; f < e.size(); ++f) e[f] += weight * vertex[f];
  }
  for (double& x : e) x = std::clamp(x, -1.0, 1.0);
  return CorrelationTable(layout, std::move(e));
}

struct MembershipResult {
  bool inside = false;
  /// Remaining phase-1 infeasibility (0 when inside).
  double infeasibility = 0.0;
  std::optional<LhvModel> model;
  /// When outside: an inequality |c.E| <= bound valid for every vertex and
  /// violated by the table.
  std::optional<BellInequality> certificate;
  double certificate_value = 0.0;
};

namespace detail {

inline std::int64_t gcd64(std::int64_t a, std::int64_t b) {
  a = a < 0 ? -a : a;
  b = b < 0 ? -b : b;
  while (b) {
    const auto t = a % b;
    a = b;
    b = t;
  }
  return a;
}

inline std::int64_t exact_vertex_bound(const std::vector<std::int64_t>& c, const VertexEnumerator& verts) {
  BellInequality probe;
  probe.layout = verts.layout();
  probe.coefficients = c;
  std::int64_t best = 0;
  for (std::size_t v = 0; v < verts.count(); ++v)
    best = std::max(best, std::abs(strategy_value(probe, verts.strategy(v))));
  return best;
}

/// Integer inequality proportional (up to rounding) to a real facet normal.
/// The bound is recomputed exactly over all vertices, so the result is a
/// valid Bell inequality whether or not the rounding was exact.
inline BellInequality integer_inequality(const Eigen::VectorXd& normal, const VertexEnumerator& verts) {
  const double top = normal.cwiseAbs().maxCoeff();
  std::vector<std::int64_t> c(static_cast<std::size_t>(normal.size()));
  bool exact = false;
  for (int denom = 1; denom <= 4096 && !exact; ++denom) {
    exact = true;
    for (Eigen::Index i = 0; i < normal.size(); ++i) {
      const double x = normal(i) / top * denom;
      const double r = std::round(x);
      if (std::abs(x - r) > 1e-7) {
        exact = false;
        break;
      }
      c[static_cast<std::size_t>(i)] = static_cast<std::int64_t>(r);
    }
  }
  if (!exact)
    for (Eigen::Index i = 0; i < normal.size(); ++i)
      c[static_cast<std::size_t>(i)] = static_cast<std::int64_t>(std::llround(normal(i) / top * 1e6));
  std::int64_t g = 0;
  for (auto x : c) g = gcd64(g, x);
  if (g > 1)
    for (auto& x : c) x /= g;
  const auto bound = exact_vertex_bound(c, verts);
  return BellInequality(verts.layout(), std::move(c), bound);
}

}  // namespace detail

/// Decides whether the table lies in the correlation polytope by phase-1
/// simplex on  V lambda = E, sum lambda = 1, lambda >= 0. Outside, a facet
/// certificate comes from the gauge LP  min sum lambda s.t. V lambda = E,
/// whose optimal dual y satisfies y.v <= 1 on every vertex and y.E > 1.
inline MembershipResult polytope_membership(const CorrelationTable& table,
                                            double feasibility_tolerance = 1e-9) {
  const VertexEnumerator verts(table.layout());
  const auto d = static_cast<Eigen::Index>(table.layout().cells());
  std::vector<double> scratch(static_cast<std::size_t>(d));

  RevisedSimplex::Options opt;
  opt.feasibility_tolerance = feasibility_tolerance;

  Eigen::VectorXd b(d + 1);
  for (Eigen::Index i = 0; i < d; ++i) b(i) = table[static_cast<std::size_t>(i)];
  b(d) = 1.0;
  RevisedSimplex lp(b, verts.count(),
                    [&](std::size_t j, Eigen::Ref<Eigen::VectorXd> col) {
                      verts.vertex(j, scratch);
                      for (Eigen::Index i = 0; i < d; ++i) col(i) = scratch[static_cast<std::size_t>(i)];
                      col(d) = 1.0;
                    },
                    opt);
  MembershipResult result;
  result.infeasibility = lp.phase1();
  result.inside = lp.feasible();
  if (result.inside) {
    LhvModel model{table.layout(), {}, 0.0};
    double mass = 0.0;
    for (const auto& [j, x] : lp.solution()) {
      if (x <= 0.0) continue;
      model.weights[verts.strategy(j)] += x;
      mass += x;
    }
    for (auto& [s, x] : model.weights) x /= mass;
    result.model = std::move(model);
    return result;
  }

  RevisedSimplex gauge(b.head(d), verts.count(),
                       [&](std::size_t j, Eigen::Ref<Eigen::VectorXd> col) {
                         verts.vertex(j, scratch);
                         for (Eigen::Index i = 0; i < d; ++i) col(i) = scratch[static_cast<std::size_t>(i)];
                       },
                       opt);
  gauge.phase1();
  const auto unit_cost = [&](std::size_t j) { return j < verts.count() ? 1.0 : 0.0; };
  gauge.phase2(unit_cost);
  const Eigen::VectorXd y = gauge.duals(unit_cost);
  auto cert = detail::integer_inequality(y, verts);
  result.certificate_value = evaluate_inequality(cert, table);
  result.certificate = std::move(cert);
  return result;
}

}  // namespace bellineq
