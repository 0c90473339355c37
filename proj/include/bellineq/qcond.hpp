#pragma once

// Quantum violation conditions on correlation tensors and numerical
// maximization of Bell expressions over measurement directions.
//
// All optimizers are monotone ascent methods with seeded random restarts;
// their values are lower bounds of the true maxima unless a closed form is
// used, and reports say which.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bellineq/errors.hpp"
#include "bellineq/layout.hpp"
#include "bellineq/qstate.hpp"
#include "bellineq/tensor.hpp"

namespace bellineq {

using FrameAssignment = std::vector<LocalFrame>;

enum class ConditionKind { two_setting_NS_2qubit, two_setting_sufficient_N, multisetting_CN };

inline std::string to_string(ConditionKind k) {
  switch (k) {
    case ConditionKind::two_setting_NS_2qubit: return "two_setting_NS_2qubit";
    case ConditionKind::two_setting_sufficient_N: return "two_setting_sufficient_N";
    case ConditionKind::multisetting_CN: return "multisetting_CN";
  }
  return "unknown";
}

inline constexpr double kViolationMargin = 1e-9;

struct ConditionReport {
  double value = 0.0;
  /// One assignment for the two-setting conditions; one per trailing index
  /// tuple for C_N, in tuple order (last party least significant).
  std::vector<FrameAssignment> frames;
  ConditionKind kind = ConditionKind::two_setting_NS_2qubit;
  bool violated = false;
  bool exact = false;
  bool converged = true;
  std::uint64_t seed = 0;
};

struct OptimizerOptions {
  int restarts = 50;
  int max_sweeps = 500;
  double tolerance = 1e-10;
  std::uint64_t seed = 0;
};

namespace detail {

using Frame = Eigen::Matrix<double, 2, 3>;

inline std::mt19937_64 restart_rng(std::uint64_t seed, int restart) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(restart)};
  return std::mt19937_64(seq);
}

inline Eigen::Vector3d random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::Vector3d v;
  do {
    v = Eigen::Vector3d(g(rng), g(rng), g(rng));
  } while (v.norm() < 1e-8);
  return v.normalized();
}

inline Frame orthonormal_rows(const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
  Frame f;
  Eigen::Vector3d u = a.normalized();
  Eigen::Vector3d w = b - u.dot(b) * u;
  if (w.norm() < 1e-12) w = u.unitOrthogonal();
  f.row(0) = u.transpose();
  f.row(1) = w.normalized().transpose();
  return f;
}

inline Frame random_frame(std::mt19937_64& rng) {
  return orthonormal_rows(random_unit(rng), random_unit(rng));
}

/// Top-2 eigenpairs of a symmetric 3x3 matrix: (eigenvalue sum, rows = eigenvectors).
inline std::pair<double, Frame> top_two(const Eigen::Matrix3d& g) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(0.5 * (g + g.transpose()));
  Frame f;
  f.row(0) = eig.eigenvectors().col(2).transpose();
  f.row(1) = eig.eigenvectors().col(1).transpose();
  return {eig.eigenvalues()(2) + eig.eigenvalues()(1), f};
}

/// Sum over all other indices of t[.., i, ..] t[.., j, ..] for one mode.
inline Eigen::MatrixXd mode_gram(const DenseTensor& t, std::size_t mode) {
  const auto& dims = t.dims();
  std::size_t outer = 1, inner = 1;
  for (std::size_t m = 0; m < mode; ++m) outer *= dims[m];
  for (std::size_t m = mode + 1; m < dims.size(); ++m) inner *= dims[m];
  const std::size_t d = dims[mode];
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  for (std::size_t o = 0; o < outer; ++o)
    for (std::size_t a = 0; a < d; ++a)
      for (std::size_t b = 0; b <= a; ++b) {
        double acc = 0.0;
        const double* pa = &t.data()[(o * d + a) * inner];
        const double* pb = &t.data()[(o * d + b) * inner];
        for (std::size_t r = 0; r < inner; ++r) acc += pa[r] * pb[r];
        g(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) += acc;
        if (a != b) g(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a)) += acc;
      }
  return g;
}

inline LocalFrame to_local_frame(const Frame& f) {
  return LocalFrame::orthonormalized(f.row(0).transpose(), f.row(1).transpose());
}

inline Eigen::Matrix3d slice_matrix(const DenseTensor& t) {
  Eigen::Matrix3d m;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) m(i, j) = t[static_cast<std::size_t>(3 * i + j)];
  return m;
}

/// max over orthonormal (c0, c1) of c0'G0c0 + c1'G1c1 by exact maximization
/// along three circles through the current point (rotations about c1, c0
/// and c0 x c1). Monotone; starts from `f`.
inline double optimize_pair(const Eigen::Matrix3d& g0, const Eigen::Matrix3d& g1, Frame& f) {
  Eigen::Vector3d c0 = f.row(0).transpose(), c1 = f.row(1).transpose();
  auto objective = [&] { return c0.dot(g0 * c0) + c1.dot(g1 * c1); };
  auto best_on_circle = [](const Eigen::Matrix3d& g, const Eigen::Vector3d& ea, const Eigen::Vector3d& eb) {
    Eigen::Matrix2d h;
    h << ea.dot(g * ea), ea.dot(g * eb), eb.dot(g * ea), eb.dot(g * eb);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(0.5 * (h + h.transpose()));
    const Eigen::Vector2d x = eig.eigenvectors().col(1);
    return Eigen::Vector3d(x(0) * ea + x(1) * eb);
  };
  double value = objective();
  for (int round = 0; round < 200; ++round) {
    const double before = value;
    Eigen::Vector3d normal = c1.cross(c0).normalized();
    Eigen::Vector3d cand = best_on_circle(g0, c0, normal);
    if (cand.dot(g0 * cand) > c0.dot(g0 * c0)) c0 = cand;
    normal = c0.cross(c1).normalized();
    cand = best_on_circle(g1, c1, normal);
    if (cand.dot(g1 * cand) > c1.dot(g1 * c1)) c1 = cand;
    {
      const Eigen::Vector3d u = c0, v = c1;
      const double p = u.dot(g0 * u) + v.dot(g1 * v);
      const double q = v.dot(g0 * v) + u.dot(g1 * u);
      const double c = u.dot(g0 * v) - u.dot(g1 * v);
      const double theta = 0.5 * std::atan2(c, 0.5 * (p - q));
      const Eigen::Vector3d n0 = std::cos(theta) * u + std::sin(theta) * v;
      const Eigen::Vector3d n1 = -std::sin(theta) * u + std::cos(theta) * v;
      if (n0.dot(g0 * n0) + n1.dot(g1 * n1) > u.dot(g0 * u) + v.dot(g1 * v)) {
        c0 = n0;
        c1 = n1;
      }
    }
    f = orthonormal_rows(c0, c1);
    c0 = f.row(0).transpose();
    c1 = f.row(1).transpose();
    value = objective();
    if (value - before <= 1e-15 * (1.0 + std::abs(value))) break;
  }
  return value;
}

}  // namespace detail

/// Necessary and sufficient two-qubit condition: the sum of the two largest
/// squared singular values of the 3x3 correlation block.
inline ConditionReport condition_two_qubit(const CorrelationTensor& t) {
  require(t.n_qubits() == 2, "two-qubit condition needs N = 2");
  const Eigen::Matrix3d m = detail::slice_matrix(t.correlation_part());
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  ConditionReport rep;
  rep.kind = ConditionKind::two_setting_NS_2qubit;
  rep.value = s(0) * s(0) + s(1) * s(1);
  rep.exact = true;
  rep.frames.push_back(
      {detail::to_local_frame(detail::orthonormal_rows(svd.matrixU().col(0), svd.matrixU().col(1))),
       detail::to_local_frame(detail::orthonormal_rows(svd.matrixV().col(0), svd.matrixV().col(1)))});
  rep.violated = rep.value > 1.0 + kViolationMargin;
  return rep;
}

namespace detail {

/// ||T contracted with every party's plane||^2 maximized by alternating
/// per-party top-2 eigenvector updates.
class TwoSettingAscent {
 public:
  explicit TwoSettingAscent(const DenseTensor& tc) : tc_(tc), n_(tc.order()) {}

  double objective(const std::vector<Frame>& frames) const {
    DenseTensor r = tc_;
    for (std::size_t p = 0; p < n_; ++p) r = r.mode_product(p, frames[p]);
    return r.squared_norm();
  }

  /// Runs sweeps until the improvement drops below tol; returns
  /// (value, converged).
  std::pair<double, bool> run(std::vector<Frame>& frames, const OptimizerOptions& opt) const {
    double value = objective(frames);
    for (int sweep = 0; sweep < opt.max_sweeps; ++sweep) {
      const double before = value;
      for (std::size_t j = 0; j < n_; ++j) {
        DenseTensor r = tc_;
        for (std::size_t p = 0; p < n_; ++p)
          if (p != j) r = r.mode_product(p, frames[p]);
        const Eigen::Matrix3d g = mode_gram(r, j);
        auto [v, f] = top_two(g);
        frames[j] = f;
        value = v;
      }
      if (value - before < opt.tolerance) return {value, true};
    }
    return {value, false};
  }

  std::vector<Frame> hosvd_start() const {
    std::vector<Frame> frames(n_);
    for (std::size_t j = 0; j < n_; ++j) frames[j] = top_two(Eigen::Matrix3d(mode_gram(tc_, j))).second;
    return frames;
  }

 private:
  const DenseTensor& tc_;
  std::size_t n_;
};

}  // namespace detail

/// max over local planes of sum_{k in {1,2}^N} T_k^2; a sufficient
/// condition (<= 1) for every two-setting inequality to hold.
inline ConditionReport condition_two_setting_N(const CorrelationTensor& t, const OptimizerOptions& opt = {}) {
  require(t.n_qubits() >= 2, "two-setting condition needs N >= 2");
  const DenseTensor tc = t.correlation_part();
  const detail::TwoSettingAscent ascent(tc);
  const auto n = static_cast<std::size_t>(t.n_qubits());

  std::vector<detail::Frame> best_frames;
  double best = -1.0;
  bool best_converged = true;
  for (int r = -1; r < opt.restarts; ++r) {
    std::vector<detail::Frame> frames;
    if (r < 0) {
      frames = ascent.hosvd_start();
    } else {
      auto rng = detail::restart_rng(opt.seed, r);
      for (std::size_t p = 0; p < n; ++p) frames.push_back(detail::random_frame(rng));
    }
    auto [value, converged] = ascent.run(frames, opt);
    if (value > best) {
      best = value;
      best_frames = frames;
      best_converged = converged;
    }
  }
  ConditionReport rep;
  rep.kind = ConditionKind::two_setting_sufficient_N;
  rep.value = ascent.objective(best_frames);
  rep.converged = best_converged;
  rep.seed = opt.seed;
  FrameAssignment fa;
  for (const auto& f : best_frames) fa.push_back(detail::to_local_frame(f));
  rep.frames.push_back(std::move(fa));
  rep.violated = rep.value > 1.0 + kViolationMargin;
  return rep;
}

namespace detail {

/// The recursive multisetting objective. Parties 3..N (zero-based 2..N-1)
/// carry frames indexed by the axis choices of all later parties; the
/// first two parties are maximized in closed form per trailing tuple. With
/// `shared`, every party has a single frame and parties 1-2 share one
/// plane pair across terms.
class MultisettingAscent {
 public:
  MultisettingAscent(const DenseTensor& tc, bool shared) : tc_(tc), n_(tc.order()), shared_(shared) {
    terms_ = std::size_t{1} << (n_ - 2);
  }

  struct State {
    std::vector<std::vector<Frame>> trailing;  // [party][path]
    Frame p0, p1;                              // shared inner planes
  };

  std::size_t paths(std::size_t party) const { return shared_ ? 1 : std::size_t{1} << (n_ - 1 - party); }

  /// Axis of `party` (>= 2) used in term t, where bit (n-1-q) of t is the
  /// axis choice of party q.
  int axis_of(std::size_t t, std::size_t party) const { return static_cast<int>((t >> (n_ - 1 - party)) & 1u); }
  std::size_t path_of(std::size_t t, std::size_t party) const {
    if (shared_) return 0;
    return t & ((std::size_t{1} << (n_ - 1 - party)) - 1);
  }

  State initial(const std::function<Frame(std::size_t)>& frame_for_party) const {
    State s;
    s.trailing.resize(n_);
    for (std::size_t j = 2; j < n_; ++j) s.trailing[j].assign(paths(j), frame_for_party(j));
    s.p0 = frame_for_party(0);
    s.p1 = frame_for_party(1);
    return s;
  }

  /// 3x3x3 tensor over modes (0, 1, skip) after contracting every trailing
  /// party except `skip` with the vectors of term t; skip = n gives 3x3x1.
  DenseTensor partial(const State& s, std::size_t t, std::size_t skip) const {
    DenseTensor r = tc_;
    for (std::size_t j = n_; j-- > 2;) {
      if (j == skip) continue;
      const Eigen::Vector3d v = s.trailing[j][path_of(t, j)].row(axis_of(t, j)).transpose();
      r = r.contract(j, v);
    }
    return r;
  }

  Eigen::Matrix3d slice(const State& s, std::size_t t) const { return slice_matrix(partial(s, t, n_)); }

  double term_value(const State& s, const Eigen::Matrix3d& m) const {
    if (shared_) return (s.p0 * m * s.p1.transpose()).squaredNorm();
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(m);
    const auto& sv = svd.singularValues();
    return sv(0) * sv(0) + sv(1) * sv(1);
  }

  double objective(const State& s) const {
    double v = 0.0;
    for (std::size_t t = 0; t < terms_; ++t) v += term_value(s, slice(s, t));
    return v;
  }

  /// Optimal inner planes of term t (party-0 rows, party-1 rows).
  std::pair<Frame, Frame> inner_planes(const State& s, const Eigen::Matrix3d& m) const {
    if (shared_) return {s.p0, s.p1};
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    return {orthonormal_rows(svd.matrixU().col(0), svd.matrixU().col(1)),
            orthonormal_rows(svd.matrixV().col(0), svd.matrixV().col(1))};
  }

  void update_shared_inner(State& s) const {
    Eigen::Matrix3d g = Eigen::Matrix3d::Zero();
    std::vector<Eigen::Matrix3d> slices;
    for (std::size_t t = 0; t < terms_; ++t) slices.push_back(slice(s, t));
    for (const auto& m : slices) g += m * s.p1.transpose() * s.p1 * m.transpose();
    s.p0 = top_two(g).second;
    g.setZero();
    for (const auto& m : slices) g += m.transpose() * s.p0.transpose() * s.p0 * m;
    s.p1 = top_two(g).second;
  }

  void update_trailing(State& s, std::size_t party, std::size_t path) const {
    Eigen::Matrix3d g[2] = {Eigen::Matrix3d::Zero(), Eigen::Matrix3d::Zero()};
    for (std::size_t t = 0; t < terms_; ++t) {
      if (path_of(t, party) != path) continue;
      const auto [u, v] = inner_planes(s, slice(s, t));
      const DenseTensor k = partial(s, t, party);  // dims 3 x 3 x ... 3 (at party) ...
      // Remaining modes other than 0, 1, party have extent 1.
      Eigen::Matrix<double, 9, 3> kmat;
      for (std::size_t i1 = 0; i1 < 3; ++i1)
        for (std::size_t i2 = 0; i2 < 3; ++i2)
          for (std::size_t i = 0; i < 3; ++i)
            kmat(static_cast<Eigen::Index>(3 * i1 + i2), static_cast<Eigen::Index>(i)) = k[(3 * i1 + i2) * 3 + i];
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
          Eigen::Matrix<double, 1, 9> w;
          for (int i1 = 0; i1 < 3; ++i1)
            for (int i2 = 0; i2 < 3; ++i2) w(3 * i1 + i2) = u(a, i1) * v(b, i2);
          const Eigen::Vector3d gab = (w * kmat).transpose();
          g[axis_of(t, party)] += gab * gab.transpose();
        }
    }
    optimize_pair(g[0], g[1], s.trailing[party][path]);
  }

  std::pair<double, bool> run(State& s, const OptimizerOptions& opt) const {
    double value = objective(s);
    for (int sweep = 0; sweep < opt.max_sweeps; ++sweep) {
      const double before = value;
      if (shared_) update_shared_inner(s);
      for (std::size_t j = 2; j < n_; ++j)
        for (std::size_t p = 0; p < paths(j); ++p) update_trailing(s, j, p);
      value = objective(s);
      if (value - before < opt.tolerance) return {value, true};
    }
    return {value, false};
  }

  std::vector<FrameAssignment> frames(const State& s) const {
    std::vector<FrameAssignment> out;
    for (std::size_t t = 0; t < terms_; ++t) {
      const auto [u, v] = inner_planes(s, slice(s, t));
      FrameAssignment fa{to_local_frame(u), to_local_frame(v)};
      for (std::size_t j = 2; j < n_; ++j) fa.push_back(to_local_frame(s.trailing[j][path_of(t, j)]));
      out.push_back(std::move(fa));
    }
    return out;
  }

 private:
  const DenseTensor& tc_;
  std::size_t n_;
  bool shared_;
  std::size_t terms_;
};

}  // namespace detail

struct MultisettingOptions : OptimizerOptions {
  /// Force one frame per party shared by every term (parties 1-2 included).
  bool shared_planes = false;
};

/// Recursive condition C_N for the 2^(N-1) x 2^(N-1) x ... x 2 family:
/// C_2 = sum_{k,l in {1,2}} T_kl^2 and C_N = [C_{N-1}]_{+2} + [C_{N-1}]'_{+1}
/// with independent frames in the primed term.
inline ConditionReport condition_multisetting_CN(const CorrelationTensor& t, const MultisettingOptions& opt = {}) {
  require(t.n_qubits() >= 2, "multisetting condition needs N >= 2");
  if (t.n_qubits() == 2) {
    auto rep = condition_two_qubit(t);
    rep.kind = ConditionKind::multisetting_CN;
    rep.seed = opt.seed;
    return rep;
  }
  const DenseTensor tc = t.correlation_part();
  const detail::MultisettingAscent ascent(tc, opt.shared_planes);
  using State = detail::MultisettingAscent::State;

  // Start 0: the two-setting optimum replicated across paths, so the result
  // never falls below the shared-plane value. Start 1: HOSVD planes.
  std::vector<State> starts;
  {
    const auto two = condition_two_setting_N(t, opt);
    const auto& fa = two.frames.front();
    starts.push_back(ascent.initial([&](std::size_t p) { return fa[p].as_rows(); }));
    starts.push_back(ascent.initial([&](std::size_t p) {
      return detail::top_two(Eigen::Matrix3d(detail::mode_gram(tc, p))).second;
    }));
  }
  double best = -1.0;
  State best_state;
  bool best_converged = true;
  auto consider = [&](State s) {
    auto [value, converged] = ascent.run(s, opt);
    if (value > best) {
      best = value;
      best_state = std::move(s);
      best_converged = converged;
    }
  };
  for (auto& s : starts) consider(std::move(s));
  for (int r = 0; r < opt.restarts; ++r) {
    auto rng = detail::restart_rng(opt.seed ^ 0x9e3779b97f4a7c15ULL, r);
    State s;
    s.trailing.resize(tc.order());
    for (std::size_t j = 2; j < tc.order(); ++j)
      for (std::size_t p = 0; p < ascent.paths(j); ++p) s.trailing[j].push_back(detail::random_frame(rng));
    s.p0 = detail::random_frame(rng);
    s.p1 = detail::random_frame(rng);
    consider(std::move(s));
  }
  ConditionReport rep;
  rep.kind = ConditionKind::multisetting_CN;
  rep.value = ascent.objective(best_state);
  rep.frames = ascent.frames(best_state);
  rep.converged = best_converged;
  rep.seed = opt.seed;
  rep.violated = rep.value > 1.0 + kViolationMargin;
  return rep;
}

/// |E11 + E12 + E21 - E22| <= 2.
inline BellInequality chsh_inequality() { return BellInequality(ExperimentLayout({2, 2}), {1, 1, 1, -1}, 2); }

/// |E211 + E121 + E112 - E222| <= 2.
inline BellInequality mermin_inequality() {
  return BellInequality(ExperimentLayout({2, 2, 2}), {0, 1, 1, 0, 1, 0, 0, -1}, 2);
}

struct BellMaximum {
  double value = 0.0;
  /// settings[j][k]: direction of party j's setting k.
  std::vector<std::vector<SettingVector>> settings;
  bool converged = true;
  /// Number of updates skipped because the contraction vanished.
  std::size_t degenerate_updates = 0;
};

/// See-saw ascent of sum_k c_k (a^1_{k1} x ... x a^N_{kN}) . T. The value is
/// linear in each direction, so each update sets a direction to its
/// normalized gradient; a zero gradient keeps the previous direction.
inline BellMaximum maximize_bell_value(const CorrelationTensor& t, const BellInequality& ineq,
                                       const OptimizerOptions& opt = {}) {
  const auto n = static_cast<std::size_t>(t.n_qubits());
  require(ineq.layout.parties() == n, "inequality parties must match the tensor");
  const DenseTensor tc = t.correlation_part();
  std::vector<std::size_t> cdims;
  for (std::size_t j = 0; j < n; ++j) cdims.push_back(static_cast<std::size_t>(ineq.layout.settings(j)));
  std::vector<double> cvals(ineq.coefficients.begin(), ineq.coefficients.end());
  const DenseTensor coeff(cdims, cvals);

  using Settings = std::vector<Eigen::MatrixXd>;  // party j: m_j x 3, rows unit
  auto value_of = [&](const Settings& s) {
    DenseTensor r = tc;
    for (std::size_t p = 0; p < n; ++p) r = r.mode_product(p, s[p]);
    return r.dot(coeff);
  };

  BellMaximum best;
  best.value = -std::numeric_limits<double>::infinity();
  Settings best_settings;
  for (int restart = 0; restart < std::max(1, opt.restarts); ++restart) {
    auto rng = detail::restart_rng(opt.seed, restart);
    Settings s(n);
    for (std::size_t p = 0; p < n; ++p) {
      s[p].resize(static_cast<Eigen::Index>(cdims[p]), 3);
      for (std::size_t k = 0; k < cdims[p]; ++k) s[p].row(static_cast<Eigen::Index>(k)) = detail::random_unit(rng).transpose();
    }
    double value = value_of(s);
    bool converged = false;
    std::size_t degenerate = 0;
    for (int sweep = 0; sweep < opt.max_sweeps; ++sweep) {
      const double before = value;
      for (std::size_t j = 0; j < n; ++j) {
        DenseTensor r = tc;
        for (std::size_t p = 0; p < n; ++p)
          if (p != j) r = r.mode_product(p, s[p]);
        // grad(k, i) = sum over other settings of coeff[.., k, ..] r[.., i, ..]
        std::size_t outer = 1, inner = 1;
        for (std::size_t p = 0; p < j; ++p) outer *= cdims[p];
        for (std::size_t p = j + 1; p < n; ++p) inner *= cdims[p];
        const std::size_t m = cdims[j];
        Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m), 3);
        for (std::size_t o = 0; o < outer; ++o)
          for (std::size_t k = 0; k < m; ++k)
            for (std::size_t i = 0; i < 3; ++i) {
              double acc = 0.0;
              const double* pc = &coeff.data()[(o * m + k) * inner];
              const double* pr = &r.data()[(o * 3 + i) * inner];
              for (std::size_t q = 0; q < inner; ++q) acc += pc[q] * pr[q];
              grad(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i)) += acc;
            }
        for (std::size_t k = 0; k < m; ++k) {
          const auto kk = static_cast<Eigen::Index>(k);
          const double norm = grad.row(kk).norm();
          if (norm > 1e-14) {
            s[j].row(kk) = grad.row(kk) / norm;
          } else {
            ++degenerate;
          }
        }
      }
      value = value_of(s);
      if (value - before < opt.tolerance) {
        converged = true;
        break;
      }
    }
    if (value > best.value) {
      best.value = value;
      best.converged = converged;
      best.degenerate_updates = degenerate;
      best_settings = s;
    }
  }
  for (std::size_t p = 0; p < n; ++p) {
    std::vector<SettingVector> vs;
    for (Eigen::Index k = 0; k < best_settings[p].rows(); ++k)
      vs.push_back(SettingVector::normalized(best_settings[p].row(k).transpose()));
    best.settings.push_back(std::move(vs));
  }
  return best;
}

/// Quantum correlation table E(k) = (a^1_{k1} x ... x a^N_{kN}) . T.
inline CorrelationTable quantum_table(const CorrelationTensor& t,
                                      const std::vector<std::vector<SettingVector>>& settings) {
  const auto n = static_cast<std::size_t>(t.n_qubits());
  require(settings.size() == n, "need settings for every party");
  DenseTensor r = t.correlation_part();
  std::vector<int> m;
  for (std::size_t p = 0; p < n; ++p) {
    Eigen::MatrixXd rows(static_cast<Eigen::Index>(settings[p].size()), 3);
    for (std::size_t k = 0; k < settings[p].size(); ++k)
      rows.row(static_cast<Eigen::Index>(k)) = settings[p][k].components().transpose();
    r = r.mode_product(p, rows);
    m.push_back(static_cast<int>(settings[p].size()));
  }
  std::vector<double> v(r.data().begin(), r.data().end());
  for (double& x : v) x = std::clamp(x, -1.0, 1.0);
  return CorrelationTable(ExperimentLayout(m), std::move(v));
}

}  // namespace bellineq
