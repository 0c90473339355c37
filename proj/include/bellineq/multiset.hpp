#pragma once

// Recursive construction of multisetting Bell inequalities and tightness
// verification.
//
// A construction tree is either a single predetermined outcome A_p(k) or a
// node  sum_s S(s) prod_i (X_i + s_i Y_i)  where X_i, Y_i are subtrees over
// the same parties and with the same magnitude, and different factors act on
// disjoint parties. Every deterministic strategy gives a node the value
// +-prod_i 2|X_i|, which becomes the bound of the averaged inequality.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "bellineq/errors.hpp"
#include "bellineq/integer_rank.hpp"
#include "bellineq/layout.hpp"
#include "bellineq/sign_function.hpp"

namespace bellineq {

class ConstructionTree {
 public:
  static ConstructionTree outcome(int party, int setting) {
    require(party >= 0 && setting >= 0, "outcome needs nonnegative party and setting");
    ConstructionTree t;
    t.party_ = party;
    t.setting_ = setting;
    return t;
  }

  /// sum_s S(s) prod_i (first[i] + s_i second[i]).
  static ConstructionTree node(SignFunction sign, std::vector<ConstructionTree> first,
                               std::vector<ConstructionTree> second) {
    require(first.size() == second.size(), "node needs paired sub-blocks");
    require(static_cast<std::size_t>(sign.arity()) == first.size(),
            "sign function arity must equal the number of factors");
    ConstructionTree t;
    t.sign_.emplace(std::move(sign));
    t.first_ = std::move(first);
    t.second_ = std::move(second);
    return t;
  }

  /// Two settings (a, b) for each listed party under one sign function:
  /// the block A_{ab,...,ab;S}.
  static ConstructionTree two_setting_block(const SignFunction& sign, const std::vector<int>& parties,
                                            int setting_a, int setting_b) {
    std::vector<ConstructionTree> first, second;
    for (int p : parties) {
      first.push_back(outcome(p, setting_a));
      second.push_back(outcome(p, setting_b));
    }
    return node(sign, std::move(first), std::move(second));
  }

  bool is_outcome() const { return !sign_.has_value(); }
  int party() const { return party_; }
  int setting() const { return setting_; }
  const SignFunction& sign() const { return *sign_; }
  const std::vector<ConstructionTree>& first() const { return first_; }
  const std::vector<ConstructionTree>& second() const { return second_; }

  /// log2 of the number of sign-function choices in this tree's shape.
  std::size_t family_size_log2() const {
    if (is_outcome()) return 0;
    std::size_t bits = std::size_t{1} << sign_->arity();
    for (std::size_t i = 0; i < first_.size(); ++i)
      bits += first_[i].family_size_log2() + second_[i].family_size_log2();
    return bits;
  }

  /// Sign functions in depth-first order (node, then each factor's first
  /// and second subtree).
  std::vector<SignFunction> sign_functions() const {
    std::vector<SignFunction> out;
    collect(out);
    return out;
  }

  /// Same shape with the sign functions replaced in depth-first order.
  ConstructionTree with_sign_functions(const std::vector<SignFunction>& signs) const {
    std::size_t pos = 0;
    auto t = replace(signs, pos);
    require(pos == signs.size(), "too many sign functions for this tree");
    return t;
  }

 private:
  ConstructionTree() = default;

  void collect(std::vector<SignFunction>& out) const {
    if (is_outcome()) return;
    out.push_back(*sign_);
    for (std::size_t i = 0; i < first_.size(); ++i) {
      first_[i].collect(out);
      second_[i].collect(out);
    }
  }

  ConstructionTree replace(const std::vector<SignFunction>& signs, std::size_t& pos) const {
    if (is_outcome()) return *this;
    require(pos < signs.size(), "too few sign functions for this tree");
    require(signs[pos].arity() == sign_->arity(), "sign function arity does not match its node");
    ConstructionTree t;
    t.sign_ = signs[pos++];
    for (std::size_t i = 0; i < first_.size(); ++i) {
      t.first_.push_back(first_[i].replace(signs, pos));
      t.second_.push_back(second_[i].replace(signs, pos));
    }
    return t;
  }

  int party_ = -1;
  int setting_ = -1;
  std::optional<SignFunction> sign_;
  std::vector<ConstructionTree> first_;
  std::vector<ConstructionTree> second_;
};

namespace detail {

/// Multilinear polynomial: key = setting per party (-1 where absent).
struct BlockPolynomial {
  std::map<std::vector<int>, std::int64_t> terms;
  std::set<int> parties;
  std::int64_t magnitude = 1;
};

inline BlockPolynomial multiply(const BlockPolynomial& a, const BlockPolynomial& b) {
  BlockPolynomial out;
  out.parties = a.parties;
  out.parties.insert(b.parties.begin(), b.parties.end());
  for (const auto& [ka, ca] : a.terms)
    for (const auto& [kb, cb] : b.terms) {
      std::vector<int> k = ka;
      for (std::size_t j = 0; j < k.size(); ++j)
        if (kb[j] >= 0) k[j] = kb[j];
      out.terms[k] += ca * cb;
    }
  return out;
}

inline BlockPolynomial expand(const ConstructionTree& t, std::size_t parties) {
  BlockPolynomial poly;
  if (t.is_outcome()) {
    require(static_cast<std::size_t>(t.party()) < parties, "outcome party out of range");
    std::vector<int> key(parties, -1);
    key[static_cast<std::size_t>(t.party())] = t.setting();
    poly.terms[key] = 1;
    poly.parties = {t.party()};
    return poly;
  }
  const std::size_t r = t.first().size();
  std::vector<BlockPolynomial> xs, ys;
  std::set<int> seen;
  std::int64_t magnitude = 1;
  for (std::size_t i = 0; i < r; ++i) {
    xs.push_back(expand(t.first()[i], parties));
    ys.push_back(expand(t.second()[i], parties));
    require(xs.back().parties == ys.back().parties,
            "paired sub-blocks must act on the same parties");
    require(xs.back().magnitude == ys.back().magnitude,
            "paired sub-blocks must have equal magnitude");
    for (int p : xs.back().parties)
      require(seen.insert(p).second, "factors of a node must act on disjoint parties");
    magnitude *= 2 * xs.back().magnitude;
  }
  const auto w = t.sign().walsh();
  for (std::size_t mask = 0; mask < w.size(); ++mask) {
    if (w[mask] == 0) continue;
    BlockPolynomial prod;
    prod.terms[std::vector<int>(parties, -1)] = w[mask];
    for (std::size_t i = 0; i < r; ++i) {
      const bool pick_second = (mask >> (r - 1 - i)) & 1u;
      prod = multiply(prod, pick_second ? ys[i] : xs[i]);
    }
    for (const auto& [k, c] : prod.terms) poly.terms[k] += c;
  }
  std::erase_if(poly.terms, [](const auto& kv) { return kv.second == 0; });
  poly.parties = std::move(seen);
  poly.magnitude = magnitude;
  return poly;
}

inline std::size_t count_parties(const ConstructionTree& t) {
  if (t.is_outcome()) return static_cast<std::size_t>(t.party()) + 1;
  std::size_t n = 0;
  for (std::size_t i = 0; i < t.first().size(); ++i)
    n = std::max({n, count_parties(t.first()[i]), count_parties(t.second()[i])});
  return n;
}

inline void max_settings(const ConstructionTree& t, std::vector<int>& m) {
  if (t.is_outcome()) {
    auto& slot = m[static_cast<std::size_t>(t.party())];
    slot = std::max(slot, t.setting() + 1);
    return;
  }
  for (std::size_t i = 0; i < t.first().size(); ++i) {
    max_settings(t.first()[i], m);
    max_settings(t.second()[i], m);
  }
}

}  // namespace detail

/// Expands a construction tree into explicit integer coefficients. The
/// layout is the smallest one containing every referenced setting; the
/// bound is the identity value prod 2|X_i|.
inline BellInequality build_recursive(const ConstructionTree& tree) {
  require(!tree.is_outcome(), "tree root must be a node");
  const std::size_t n = detail::count_parties(tree);
  const auto poly = detail::expand(tree, n);
  require(poly.parties.size() == n, "tree must cover parties 0..N-1");
  std::vector<int> m(n, 0);
  detail::max_settings(tree, m);
  ExperimentLayout layout(m);
  std::vector<std::int64_t> c(layout.cells(), 0);
  for (const auto& [k, coeff] : poly.terms) c[layout.flat(k)] += coeff;
  return BellInequality(std::move(layout), std::move(c), poly.magnitude);
}

/// A_{1234,12}-type tree: parties (p1, p2) choose among 4 settings starting
/// at offsets, p3 among 2.
inline ConstructionTree tree_442(const SignFunction& s, const SignFunction& s1, const SignFunction& s2,
                                 int p1 = 0, int p2 = 1, int p3 = 2, int offset12 = 0, int offset3 = 0) {
  require(s.arity() == 2 && s1.arity() == 2 && s2.arity() == 2,
          "4x4x2 construction needs arity-2 sign functions");
  return ConstructionTree::node(
      s,
      {ConstructionTree::two_setting_block(s1, {p1, p2}, offset12, offset12 + 1),
       ConstructionTree::outcome(p3, offset3)},
      {ConstructionTree::two_setting_block(s2, {p1, p2}, offset12 + 2, offset12 + 3),
       ConstructionTree::outcome(p3, offset3 + 1)});
}

inline BellInequality build_442(const SignFunction& s, const SignFunction& s1, const SignFunction& s2) {
  return build_recursive(tree_442(s, s1, s2));
}

/// 4 x ... x 4 x 2 with N parties: (A_{12,..,12;S'} + s1 A_{34,..,34;S''})
/// (A_N(1) + s2 A_N(2)) under S.
inline ConstructionTree tree_4x2(int n_parties, const SignFunction& s, const SignFunction& s1,
                                 const SignFunction& s2) {
  require(n_parties >= 2, "need at least two parties");
  require(s.arity() == 2, "outer sign function must have arity 2");
  require(s1.arity() == n_parties - 1 && s2.arity() == n_parties - 1,
          "inner sign functions must have arity N-1");
  std::vector<int> inner(static_cast<std::size_t>(n_parties - 1));
  for (int p = 0; p < n_parties - 1; ++p) inner[static_cast<std::size_t>(p)] = p;
  return ConstructionTree::node(
      s,
      {ConstructionTree::two_setting_block(s1, inner, 0, 1),
       ConstructionTree::outcome(n_parties - 1, 0)},
      {ConstructionTree::two_setting_block(s2, inner, 2, 3),
       ConstructionTree::outcome(n_parties - 1, 1)});
}

/// 8 x 8 x 4 x 2: two 4x4x2 blocks on disjoint settings, joined through
/// party 4. `a` and `b` hold (S, S', S'') of each block.
inline ConstructionTree tree_8842(const SignFunction& s, const std::vector<SignFunction>& a,
                                  const std::vector<SignFunction>& b) {
  require(a.size() == 3 && b.size() == 3, "each 4x4x2 block needs three sign functions");
  return ConstructionTree::node(
      s, {tree_442(a[0], a[1], a[2], 0, 1, 2, 0, 0), ConstructionTree::outcome(3, 0)},
      {tree_442(b[0], b[1], b[2], 0, 1, 2, 4, 2), ConstructionTree::outcome(3, 1)});
}

/// 8 x 8 x 4 x 4 x 4: two 4x4x2 blocks on parties 1-3 joined with two
/// two-setting blocks on parties 4-5.
inline ConstructionTree tree_88444(const SignFunction& s, const std::vector<SignFunction>& a,
                                   const std::vector<SignFunction>& b, const SignFunction& d1,
                                   const SignFunction& d2) {
  require(a.size() == 3 && b.size() == 3, "each 4x4x2 block needs three sign functions");
  return ConstructionTree::node(
      s,
      {tree_442(a[0], a[1], a[2], 0, 1, 2, 0, 0), ConstructionTree::two_setting_block(d1, {3, 4}, 0, 1)},
      {tree_442(b[0], b[1], b[2], 0, 1, 2, 4, 2), ConstructionTree::two_setting_block(d2, {3, 4}, 2, 3)});
}

struct TightnessReport {
  bool is_tight = false;
  std::size_t vertex_count = 0;
  std::size_t saturating_count = 0;
  std::size_t affine_rank = 0;
  std::size_t dimension = 0;
  /// max over vertices of |value|; equals the bound for a valid, attained inequality.
  std::int64_t max_abs_value = 0;
};

/// Sweeps every distinct vertex, counts those reaching +bound and computes
/// the exact rank of that set. Tight iff the rank equals prod m_j.
inline TightnessReport check_tightness(const BellInequality& ineq) {
  const VertexEnumerator verts(ineq.layout);
  TightnessReport rep;
  rep.vertex_count = verts.count();
  rep.dimension = ineq.layout.cells();
  std::vector<IntRow> rows;
  std::vector<double> scratch(rep.dimension);
  for (std::size_t v = 0; v < verts.count(); ++v) {
    const auto s = verts.strategy(v);
    const auto value = strategy_value(ineq, s);
    rep.max_abs_value = std::max(rep.max_abs_value, value < 0 ? -value : value);
    if (value != ineq.bound) continue;
    ++rep.saturating_count;
    fill_vertex_products(ineq.layout, s, scratch);
    rows.emplace_back(scratch.begin(), scratch.end());
  }
  // Vertex enumeration order is highly structured; a fixed shuffle lets the
  // modular screen reach full rank after about `dimension` rows.
  std::vector<std::size_t> order(rows.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), std::mt19937_64(0x5eed));
  rep.affine_rank = integer_rank(rows, order);
  rep.is_tight = rep.max_abs_value <= ineq.bound && rep.affine_rank == rep.dimension;
  return rep;
}

/// Identifies settings: map[j][old] = new setting of party j. Coefficients
/// of merged settings add up; the bound stays valid.
inline BellInequality reduce_settings(const BellInequality& ineq, const std::vector<std::vector<int>>& map) {
  const auto& layout = ineq.layout;
  require(map.size() == layout.parties(), "need one setting map per party");
  std::vector<int> m(layout.parties());
  for (std::size_t j = 0; j < map.size(); ++j) {
    require(map[j].size() == static_cast<std::size_t>(layout.settings(j)),
            "setting map must cover every setting of the party");
    std::set<int> hit(map[j].begin(), map[j].end());
    require(*hit.begin() == 0, "setting map must be surjective onto 0..m'-1");
    m[j] = *hit.rbegin() + 1;
    require(hit.size() == static_cast<std::size_t>(m[j]), "setting map must be surjective onto 0..m'-1");
  }
  ExperimentLayout reduced(m);
  std::vector<std::int64_t> c(reduced.cells(), 0);
  for (std::size_t f = 0; f < ineq.coefficients.size(); ++f) {
    auto k = layout.unflat(f);
    for (std::size_t j = 0; j < k.size(); ++j) k[j] = map[j][static_cast<std::size_t>(k[j])];
    c[reduced.flat(k)] += ineq.coefficients[f];
  }
  return BellInequality(std::move(reduced), std::move(c), ineq.bound);
}

/// A_j(k) -> -A_j(k): negates the coefficient slice of one setting.
inline BellInequality flip_setting(const BellInequality& ineq, std::size_t party, int setting) {
  BellInequality out = ineq;
  for (std::size_t f = 0; f < out.coefficients.size(); ++f)
    if (out.layout.unflat(f)[party] == setting) out.coefficients[f] = -out.coefficients[f];
  return out;
}

}  // namespace bellineq
