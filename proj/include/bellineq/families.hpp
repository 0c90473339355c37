#pragma once

// Named state families with closed-form correlation tensors.

#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "bellineq/errors.hpp"
#include "bellineq/qstate.hpp"

namespace bellineq {

/// cos(alpha)|0...0> + sin(alpha)|1...1>, alpha in [0, pi/4].
/// Inputs rounded near pi/4 (e.g. 0.7854) are accepted.
inline constexpr double kAlphaSlack = 1e-4;

struct GhzFamily {
  int n_qubits = 3;
  double alpha = std::numbers::pi / 4;

  void validate() const {
    require(n_qubits >= 2, "GHZ family needs at least two qubits");
    check_qubit_count(n_qubits);
    require(alpha >= -kAlphaSlack && alpha <= std::numbers::pi / 4 + kAlphaSlack, "alpha must lie in [0, pi/4]");
  }
};

/// (|01> - |10>) / sqrt(2).
inline PureState singlet() {
  Eigen::VectorXcd a = Eigen::VectorXcd::Zero(4);
  a(1) = std::sqrt(0.5);
  a(2) = -std::sqrt(0.5);
  return PureState(2, a);
}

inline PureState ghz_state(const GhzFamily& f) {
  f.validate();
  Eigen::VectorXcd a = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(pow_size(2, f.n_qubits)));
  a(0) = std::cos(f.alpha);
  a(a.size() - 1) = std::sin(f.alpha);
  return PureState(f.n_qubits, a);
}

/// Closed form of the generalized GHZ tensor:
///  - indices all in {0, z}: 1 for an even number of z's, cos 2a for odd;
///  - indices all in {x, y} with 2k y's: (-1)^k sin 2a;
///  - everything else vanishes.
inline CorrelationTensor ghz_tensor_analytic(const GhzFamily& f) {
  f.validate();
  const int n = f.n_qubits;
  const std::size_t count = pow_size(4, n);
  const double c2 = std::cos(2 * f.alpha);
  const double s2 = std::sin(2 * f.alpha);
  std::vector<double> t(count, 0.0);
  for (std::size_t flat = 0; flat < count; ++flat) {
    int diag = 0, zs = 0, ys = 0;
    std::size_t rest = flat;
    for (int q = 0; q < n; ++q) {
      const auto k = rest % 4;
      rest /= 4;
      if (k == 0 || k == 3) ++diag;
      if (k == 3) ++zs;
      if (k == 2) ++ys;
    }
    if (diag == n) {
      t[flat] = (zs % 2 == 0) ? 1.0 : c2;
    } else if (diag == 0 && ys % 2 == 0) {
      t[flat] = ((ys / 2) % 2 == 0) ? s2 : -s2;
    }
  }
  return CorrelationTensor(n, DenseTensor(std::vector<std::size_t>(static_cast<std::size_t>(n), 4), std::move(t)));
}

/// sin 2a threshold 1/sqrt(2^(N-1)); for odd N the two-setting family is
/// not violated at or below it.
inline double scarani_gisin_threshold(int n) {
  require(n >= 2, "threshold needs N >= 2");
  return 1.0 / std::sqrt(std::ldexp(1.0, n - 1));
}

/// v rho + (1 - v) I / 2^N.
inline DensityMatrix mix_with_white_noise(const DensityMatrix& rho, double visibility) {
  require(visibility >= 0.0 && visibility <= 1.0, "visibility must lie in [0, 1]");
  const auto dim = rho.entries().rows();
  Eigen::MatrixXcd mixed = visibility * rho.entries() +
                           ((1.0 - visibility) / static_cast<double>(dim)) * Eigen::MatrixXcd::Identity(dim, dim);
  return DensityMatrix(rho.n_qubits(), std::move(mixed));
}

}  // namespace bellineq
