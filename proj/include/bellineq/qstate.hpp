#pragma once

// N-qubit states, Pauli algebra and correlation tensors.
//
// Qubit ordering: party 1 is the most significant bit of a computational
// basis index, so |0>_A|1>_B is index 1. Pauli indices are 0 = identity,
// 1 = x, 2 = y, 3 = z with the standard matrix forms.

#include <bit>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bellineq/errors.hpp"
#include "bellineq/tensor.hpp"

namespace bellineq {

using Complex = std::complex<double>;

inline constexpr int kMaxQubits = 10;
inline constexpr double kNormTolerance = 1e-12;
inline constexpr double kPsdTolerance = 1e-10;
inline constexpr double kComponentSlack = 1e-9;

inline std::size_t pow_size(std::size_t base, int exp) {
  std::size_t r = 1;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

inline void check_qubit_count(int n_qubits) {
  require(n_qubits >= 1, "n_qubits must be positive");
  if (n_qubits > kMaxQubits)
    throw ResourceLimit("n_qubits " + std::to_string(n_qubits) + " exceeds cap " +
                        std::to_string(kMaxQubits));
}

class PureState {
 public:
  PureState(int n_qubits, Eigen::VectorXcd amplitudes)
      : n_qubits_(n_qubits), amplitudes_(std::move(amplitudes)) {
    check_qubit_count(n_qubits_);
    require(static_cast<std::size_t>(amplitudes_.size()) == pow_size(2, n_qubits_),
            "amplitude vector must have length 2^n_qubits");
    require(std::abs(amplitudes_.squaredNorm() - 1.0) <= kNormTolerance,
            "state is not normalized");
  }

  int n_qubits() const { return n_qubits_; }
  const Eigen::VectorXcd& amplitudes() const { return amplitudes_; }

 private:
  int n_qubits_;
  Eigen::VectorXcd amplitudes_;
};

class DensityMatrix {
 public:
  DensityMatrix(int n_qubits, Eigen::MatrixXcd entries)
      : n_qubits_(n_qubits), entries_(std::move(entries)) {
    check_qubit_count(n_qubits_);
    const auto dim = static_cast<Eigen::Index>(pow_size(2, n_qubits_));
    require(entries_.rows() == dim && entries_.cols() == dim,
            "density matrix must be 2^n x 2^n");
    require((entries_ - entries_.adjoint()).cwiseAbs().maxCoeff() <= kNormTolerance,
            "density matrix is not Hermitian");
    require(std::abs(entries_.trace() - Complex(1.0, 0.0)) <= kNormTolerance,
            "density matrix trace is not 1");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(entries_, Eigen::EigenvaluesOnly);
    require(eig.eigenvalues().minCoeff() >= -kPsdTolerance,
            "density matrix is not positive semidefinite");
  }

  int n_qubits() const { return n_qubits_; }
  const Eigen::MatrixXcd& entries() const { return entries_; }

 private:
  int n_qubits_;
  Eigen::MatrixXcd entries_;
};

/// Real coefficients T_{k1..kN} = Tr(rho sigma_k1 x ... x sigma_kN), each
/// index in {0,1,2,3}. Stored densely (4^N values, party-1-major).
class CorrelationTensor {
 public:
  CorrelationTensor(int n_qubits, DenseTensor full_components)
      : n_qubits_(n_qubits), full_(std::move(full_components)) {
    check_qubit_count(n_qubits_);
    require(full_.dims() == std::vector<std::size_t>(static_cast<std::size_t>(n_qubits_), 4),
            "correlation tensor must have shape 4 x ... x 4");
    require(std::abs(full_[0] - 1.0) <= kNormTolerance,
            "correlation tensor component (0,...,0) must be 1");
    for (double v : full_.data())
      require(std::abs(v) <= 1.0 + kComponentSlack, "correlation tensor component outside [-1,1]");
  }

  int n_qubits() const { return n_qubits_; }
  const DenseTensor& full_components() const { return full_; }

  double component(std::span<const std::size_t> idx) const { return full_.at(idx); }

  /// The 3^N block with every index in {x,y,z}.
  DenseTensor correlation_part() const {
    Eigen::MatrixXd drop_identity = Eigen::MatrixXd::Zero(3, 4);
    drop_identity.rightCols(3).setIdentity();
    DenseTensor t = full_;
    for (std::size_t m = 0; m < static_cast<std::size_t>(n_qubits_); ++m)
      t = t.mode_product(m, drop_identity);
    return t;
  }

 private:
  int n_qubits_;
  DenseTensor full_;
};

class SettingVector {
 public:
  explicit SettingVector(const Eigen::Vector3d& components) : v_(components) {
    require(std::abs(v_.norm() - 1.0) <= kNormTolerance, "setting vector must have unit norm");
  }
  SettingVector(double x, double y, double z) : SettingVector(Eigen::Vector3d(x, y, z)) {}

  static SettingVector normalized(const Eigen::Vector3d& v) {
    require(v.norm() > 0.0, "cannot normalize a zero vector");
    return SettingVector(v.normalized());
  }

  const Eigen::Vector3d& components() const { return v_; }
  SettingVector operator-() const { return SettingVector(Eigen::Vector3d(-v_)); }

 private:
  Eigen::Vector3d v_;
};

/// Two orthonormal axes spanning a party's measurement plane.
class LocalFrame {
 public:
  LocalFrame(SettingVector axis1, SettingVector axis2)
      : axis1_(std::move(axis1)), axis2_(std::move(axis2)) {
    require(std::abs(axis1_.components().dot(axis2_.components())) <= 1e-10,
            "frame axes must be orthogonal");
  }

  /// Gram-Schmidt on (a, b).
  static LocalFrame orthonormalized(const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
    Eigen::Vector3d u = a.normalized();
    Eigen::Vector3d w = b - u.dot(b) * u;
    require(w.norm() > 1e-12, "frame axes are linearly dependent");
    w.normalize();
    w -= u.dot(w) * u;
    return LocalFrame(SettingVector(u), SettingVector(w.normalized()));
  }

  const SettingVector& axis1() const { return axis1_; }
  const SettingVector& axis2() const { return axis2_; }
  const Eigen::Vector3d& axis(int i) const {
    return i == 0 ? axis1_.components() : axis2_.components();
  }
  /// 2 x 3 matrix whose rows are the axes.
  Eigen::Matrix<double, 2, 3> as_rows() const {
    Eigen::Matrix<double, 2, 3> m;
    m.row(0) = axis1_.components().transpose();
    m.row(1) = axis2_.components().transpose();
    return m;
  }

 private:
  SettingVector axis1_;
  SettingVector axis2_;
};

inline DensityMatrix density_from_pure(const PureState& state) {
  const Eigen::VectorXcd& a = state.amplitudes();
  Eigen::MatrixXcd rho = a * a.adjoint();
  rho = 0.5 * (rho + rho.adjoint()).eval();
  return DensityMatrix(state.n_qubits(), std::move(rho));
}

/// Tr(rho P) for every Pauli string P. Each string maps |i> to
/// phase(i) |i xor flip>, so a single pass over the basis suffices.
inline CorrelationTensor correlation_tensor(const DensityMatrix& rho) {
  const int n = rho.n_qubits();
  const std::size_t dim = pow_size(2, n);
  const std::size_t count = pow_size(4, n);
  const Eigen::MatrixXcd& m = rho.entries();
  std::vector<double> out(count);
  static const Complex kIPow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  for (std::size_t flat = 0; flat < count; ++flat) {
    std::uint64_t flip = 0, sign = 0;
    int ys = 0;
    std::size_t rest = flat;
    for (int q = n - 1; q >= 0; --q) {
      const auto k = rest % 4;
      rest /= 4;
      const std::uint64_t bit = std::uint64_t{1} << (n - 1 - q);
      if (k == 1 || k == 2) flip |= bit;
      if (k == 2 || k == 3) sign |= bit;
      if (k == 2) ++ys;
    }
    Complex acc = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
      const double s = (std::popcount(i & sign) & 1) ? -1.0 : 1.0;
      acc += s * m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i ^ flip));
    }
    acc *= kIPow[ys % 4];
    out[flat] = acc.real();
  }
  out[0] = 1.0;
  return CorrelationTensor(n, DenseTensor(std::vector<std::size_t>(static_cast<std::size_t>(n), 4),
                                          std::move(out)));
}

/// (a_1 x ... x a_N) . T over the {x,y,z} block.
inline double quantum_correlation(const CorrelationTensor& t,
                                  std::span<const SettingVector> settings) {
  require(settings.size() == static_cast<std::size_t>(t.n_qubits()),
          "need exactly one setting vector per party");
  DenseTensor c = t.correlation_part();
  for (std::size_t p = 0; p < settings.size(); ++p)
    c = c.contract(p, settings[p].components());
  return c[0];
}

/// Applies an independent 3x3 rotation to each party's {x,y,z} indices.
inline CorrelationTensor rotate_locally(const CorrelationTensor& t,
                                        std::span<const Eigen::Matrix3d> rotations) {
  require(rotations.size() == static_cast<std::size_t>(t.n_qubits()), "one rotation per party");
  DenseTensor full = t.full_components();
  for (std::size_t p = 0; p < rotations.size(); ++p) {
    Eigen::Matrix4d lifted = Eigen::Matrix4d::Identity();
    lifted.bottomRightCorner<3, 3>() = rotations[p];
    full = full.mode_product(p, lifted);
  }
  return CorrelationTensor(t.n_qubits(), std::move(full));
}

}  // namespace bellineq
