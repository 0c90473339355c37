#pragma once

// Dense revised simplex over implicitly generated columns, with Bland's
// rule for both entering and leaving variables.
//
// Solves  A x = b, x >= 0  (phase 1) and optionally  min c.x  over that set
// (phase 2). Columns are produced on demand by a callback, so polytopes with
// up to ~10^6 vertices never materialize a full constraint matrix.

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "bellineq/errors.hpp"

namespace bellineq {

class RevisedSimplex {
 public:
  using ColumnFn = std::function<void(std::size_t, Eigen::Ref<Eigen::VectorXd>)>;
  using CostFn = std::function<double(std::size_t)>;

  struct Options {
    double feasibility_tolerance = 1e-9;
    double optimality_tolerance = 1e-10;
    double pivot_tolerance = 1e-11;
    std::size_t refactor_every = 64;
    std::size_t max_iterations = 1'000'000;
  };

  RevisedSimplex(const Eigen::VectorXd& b, std::size_t num_columns, ColumnFn column)
      : RevisedSimplex(b, num_columns, std::move(column), Options{}) {}

  RevisedSimplex(const Eigen::VectorXd& b, std::size_t num_columns, ColumnFn column, Options options)
      : rows_(static_cast<std::size_t>(b.size())),
        cols_(num_columns),
        column_(std::move(column)),
        opt_(options),
        row_sign_(b.size()),
        b_(b.size()),
        in_basis_(num_columns, 0) {
    for (Eigen::Index i = 0; i < b.size(); ++i) {
      row_sign_(i) = b(i) < 0 ? -1.0 : 1.0;
      b_(i) = std::abs(b(i));
    }
    basis_.resize(rows_);
    for (std::size_t i = 0; i < rows_; ++i) basis_[i] = cols_ + i;
    binv_ = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(rows_), static_cast<Eigen::Index>(rows_));
    xb_ = b_;
  }

  /// Minimizes the sum of artificial variables. Returns the remaining
  /// infeasibility; the system is feasible when it is below the tolerance.
  double phase1() {
    iterate([this](std::size_t j) { return j >= cols_ ? 1.0 : 0.0; });
    double infeasibility = 0.0;
    for (std::size_t i = 0; i < rows_; ++i)
      if (basis_[i] >= cols_) infeasibility += std::max(0.0, xb_(static_cast<Eigen::Index>(i)));
    infeasibility_ = infeasibility;
    return infeasibility;
  }

  bool feasible() const { return infeasibility_ <= opt_.feasibility_tolerance; }

  /// Pivots zero-level artificials out of the basis. Requires A to have
  /// full row rank, which holds for every polytope built in this library.
  void drive_out_artificials() {
    Eigen::VectorXd col(static_cast<Eigen::Index>(rows_));
    for (std::size_t i = 0; i < rows_; ++i) {
      if (basis_[i] < cols_) continue;
      bool pivoted = false;
      for (std::size_t j = 0; j < cols_ && !pivoted; ++j) {
        if (in_basis_[j]) continue;
        structural_column(j, col);
        const Eigen::VectorXd u = binv_ * col;
        if (std::abs(u(static_cast<Eigen::Index>(i))) > 1e-9) {
          pivot(i, j, u);
          pivoted = true;
        }
      }
      if (!pivoted) throw std::runtime_error("constraint matrix is rank deficient");
    }
  }

  /// Minimizes cost(j) x_j starting from the phase-1 basis.
  void phase2(const CostFn& cost) {
    require(feasible(), "phase 2 requires a feasible phase-1 basis");
    drive_out_artificials();
    iterate([&](std::size_t j) {
      return j >= cols_ ? std::numeric_limits<double>::infinity() : cost(j);
    });
  }

  /// Simplex multipliers y with y^T A_j <= c_j at optimality, expressed for
  /// the caller's original row signs.
  Eigen::VectorXd duals(const CostFn& cost) const {
    Eigen::VectorXd cb(static_cast<Eigen::Index>(rows_));
    for (std::size_t i = 0; i < rows_; ++i) cb(static_cast<Eigen::Index>(i)) = cost(basis_[i]);
    Eigen::VectorXd y = binv_.transpose() * cb;
    return y.cwiseProduct(row_sign_);
  }

  /// Basic structural variables and their values.
  std::vector<std::pair<std::size_t, double>> solution() const {
    std::vector<std::pair<std::size_t, double>> out;
    for (std::size_t i = 0; i < rows_; ++i)
      if (basis_[i] < cols_) out.emplace_back(basis_[i], xb_(static_cast<Eigen::Index>(i)));
    return out;
  }

  std::size_t iterations() const { return iterations_; }

 private:
  void structural_column(std::size_t j, Eigen::VectorXd& col) const {
    column_(j, col);
    col = col.cwiseProduct(row_sign_);
  }

  void full_column(std::size_t j, Eigen::VectorXd& col) const {
    if (j < cols_) {
      structural_column(j, col);
    } else {
      col.setZero();
      col(static_cast<Eigen::Index>(j - cols_)) = 1.0;
    }
  }

  void refactor() {
    const auto m = static_cast<Eigen::Index>(rows_);
    Eigen::MatrixXd basis_matrix(m, m);
    Eigen::VectorXd col(m);
    for (std::size_t i = 0; i < rows_; ++i) {
      full_column(basis_[i], col);
      basis_matrix.col(static_cast<Eigen::Index>(i)) = col;
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(basis_matrix);
    binv_ = lu.inverse();
    xb_ = binv_ * b_;
    for (Eigen::Index i = 0; i < m; ++i)
      if (xb_(i) < 0 && xb_(i) > -1e-12) xb_(i) = 0.0;
  }

  void pivot(std::size_t leave_row, std::size_t enter, const Eigen::VectorXd& u) {
    const auto r = static_cast<Eigen::Index>(leave_row);
    const double piv = u(r);
    const double step = xb_(r) / piv;
    xb_ -= step * u;
    xb_(r) = step;
    const Eigen::RowVectorXd pivot_row = binv_.row(r) / piv;
    for (Eigen::Index i = 0; i < binv_.rows(); ++i) {
      if (i == r) continue;
      if (u(i) != 0.0) binv_.row(i) -= u(i) * pivot_row;
    }
    binv_.row(r) = pivot_row;
    if (basis_[leave_row] < cols_) in_basis_[basis_[leave_row]] = 0;
    basis_[leave_row] = enter;
    in_basis_[enter] = 1;
    ++iterations_;
    if (++since_refactor_ >= opt_.refactor_every) {
      refactor();
      since_refactor_ = 0;
    }
  }

  template <typename Cost>
  void iterate(const Cost& cost) {
    const auto m = static_cast<Eigen::Index>(rows_);
    Eigen::VectorXd col(m), cb(m);
    for (std::size_t guard = 0;; ++guard) {
      if (guard > opt_.max_iterations) throw std::runtime_error("simplex iteration limit reached");
      for (std::size_t i = 0; i < rows_; ++i) cb(static_cast<Eigen::Index>(i)) = cost(basis_[i]);
      const Eigen::VectorXd y = binv_.transpose() * cb;
      // Bland: lowest-index improving column.
      std::size_t enter = cols_;
      for (std::size_t j = 0; j < cols_; ++j) {
        if (in_basis_[j]) continue;
        structural_column(j, col);
        if (cost(j) - y.dot(col) < -opt_.optimality_tolerance) {
          enter = j;
          break;
        }
      }
      if (enter == cols_) return;
      const Eigen::VectorXd u = binv_ * col;
      std::size_t leave = rows_;
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < rows_; ++i) {
        const double ui = u(static_cast<Eigen::Index>(i));
        if (ui <= opt_.pivot_tolerance) continue;
        const double ratio = std::max(0.0, xb_(static_cast<Eigen::Index>(i))) / ui;
        if (ratio < best - 1e-12 ||
            (std::abs(ratio - best) <= 1e-12 && leave < rows_ && basis_[i] < basis_[leave])) {
          best = ratio;
          leave = i;
        }
      }
      if (leave == rows_) throw std::runtime_error("linear program is unbounded");
      pivot(leave, enter, u);
    }
  }

  std::size_t rows_;
  std::size_t cols_;
  ColumnFn column_;
  Options opt_;
  Eigen::VectorXd row_sign_;
  Eigen::VectorXd b_;
  std::vector<char> in_basis_;
  std::vector<std::size_t> basis_;
  Eigen::MatrixXd binv_;
  Eigen::VectorXd xb_;
  double infeasibility_ = std::numeric_limits<double>::infinity();
  std::size_t iterations_ = 0;
  std::size_t since_refactor_ = 0;
};

}  // namespace bellineq
