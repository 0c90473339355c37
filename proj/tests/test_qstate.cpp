#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "bellineq/families.hpp"
#include "bellineq/qstate.hpp"

using namespace bellineq;
using Complex = std::complex<double>;

namespace {

// Oracle: explicit Kronecker products of the standard Pauli matrices.
Eigen::Matrix2cd pauli(int k) {
  Eigen::Matrix2cd m;
  switch (k) {
    case 0: m << 1, 0, 0, 1; break;
    case 1: m << 0, 1, 1, 0; break;
    case 2: m << 0, Complex(0, -1), Complex(0, 1), 0; break;
    default: m << 1, 0, 0, -1; break;
  }
  return m;
}

Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

Eigen::MatrixXcd pauli_string(const std::vector<int>& ks) {
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Identity(1, 1);
  for (int k : ks) m = kron(m, pauli(k));
  return m;
}

Eigen::Matrix2cd along(const Eigen::Vector3d& a) {
  return a(0) * pauli(1) + a(1) * pauli(2) + a(2) * pauli(3);
}

PureState random_state(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::VectorXcd v(1 << n);
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = {g(rng), g(rng)};
  return PureState(n, v.normalized());
}

SettingVector random_setting(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  return SettingVector::normalized(Eigen::Vector3d(g(rng), g(rng), g(rng)));
}

double tensor_entry(const CorrelationTensor& t, std::vector<std::size_t> idx) { return t.component(idx); }

}  // namespace

TEST(PureState, RejectsBadNormAndLength) {
  EXPECT_THROW(PureState(1, Eigen::VectorXcd::Ones(2)), InputError);
  EXPECT_THROW(PureState(2, Eigen::VectorXcd::Unit(2, 0)), InputError);
  EXPECT_THROW(PureState(0, Eigen::VectorXcd::Unit(1, 0)), InputError);
  EXPECT_NO_THROW(PureState(1, Eigen::VectorXcd::Unit(2, 1)));
}

TEST(DensityMatrix, RejectsNonHermitianTraceAndNegative) {
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Identity(2, 2) * 0.5;
  m(0, 1) = 0.1;
  EXPECT_THROW(DensityMatrix(1, m), InputError);
  EXPECT_THROW(DensityMatrix(1, Eigen::MatrixXcd::Identity(2, 2)), InputError);
  Eigen::MatrixXcd neg(2, 2);
  neg << 1.5, 0, 0, -0.5;
  EXPECT_THROW(DensityMatrix(1, neg), InputError);
}

TEST(DensityFromPure, BasisStateAndSinglet) {
  const auto rho0 = density_from_pure(PureState(1, Eigen::VectorXcd::Unit(2, 0)));
  EXPECT_NEAR(std::abs(rho0.entries()(0, 0) - 1.0), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(rho0.entries()(1, 1)), 0.0, 1e-15);

  const auto rho = density_from_pure(singlet());
  Eigen::Matrix4cd expected = Eigen::Matrix4cd::Zero();
  expected(1, 1) = expected(2, 2) = 0.5;
  expected(1, 2) = expected(2, 1) = -0.5;
  EXPECT_LT((rho.entries() - expected).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(DensityFromPure, BellStateIsRankOneProjector) {
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(4);
  v(0) = v(3) = std::sqrt(0.5);
  const auto rho = density_from_pure(PureState(2, v));
  const Eigen::MatrixXcd m = rho.entries();
  EXPECT_LT((m * m - m).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_NEAR(m.trace().real(), 1.0, 1e-14);
}

TEST(CorrelationTensor, SingletIsMinusIdentity) {
  const auto t = correlation_tensor(density_from_pure(singlet()));
  for (std::size_t k = 0; k < 4; ++k)
    for (std::size_t l = 0; l < 4; ++l) {
      double expected = 0.0;
      if (k == 0 && l == 0) expected = 1.0;
      if (k == l && k > 0) expected = -1.0;
      EXPECT_NEAR(tensor_entry(t, {k, l}), expected, 1e-14) << k << l;
    }
}

TEST(CorrelationTensor, MaximallyMixedHasOnlyIdentityComponent) {
  const auto t = correlation_tensor(DensityMatrix(2, Eigen::MatrixXcd::Identity(4, 4) / 4.0));
  for (std::size_t f = 0; f < 16; ++f) EXPECT_NEAR(t.full_components()[f], f == 0 ? 1.0 : 0.0, 1e-15);
}

TEST(CorrelationTensor, SchmidtState) {
  for (double a : {0.0, 0.1, 0.4, 0.7}) {
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(4);
    v(0) = std::cos(a);
    v(3) = std::sin(a);
    const auto t = correlation_tensor(density_from_pure(PureState(2, v)));
    EXPECT_NEAR(tensor_entry(t, {1, 1}), std::sin(2 * a), 1e-14);
    EXPECT_NEAR(tensor_entry(t, {2, 2}), -std::sin(2 * a), 1e-14);
    EXPECT_NEAR(tensor_entry(t, {3, 3}), 1.0, 1e-14);
  }
}

TEST(CorrelationTensor, MatchesExplicitTraceOracle) {
  std::mt19937_64 rng(7);
  for (int n = 1; n <= 3; ++n) {
    const auto psi = random_state(n, rng);
    const auto rho = density_from_pure(psi);
    const auto t = correlation_tensor(rho);
    for (std::size_t f = 0; f < pow_size(4, n); ++f) {
      std::vector<int> ks(static_cast<std::size_t>(n));
      std::size_t rest = f;
      for (int q = n - 1; q >= 0; --q) {
        ks[static_cast<std::size_t>(q)] = static_cast<int>(rest % 4);
        rest /= 4;
      }
      const Complex tr = (rho.entries() * pauli_string(ks)).trace();
      EXPECT_NEAR(t.full_components()[f], tr.real(), 1e-12);
      EXPECT_NEAR(tr.imag(), 0.0, 1e-12);
    }
  }
}

TEST(CorrelationTensor, ValidatesComponents) {
  DenseTensor bad(std::vector<std::size_t>{4}, {1.0, 0.0, 0.0, 1.5});
  EXPECT_THROW(CorrelationTensor(1, bad), InputError);
  DenseTensor bad_id(std::vector<std::size_t>{4}, {0.5, 0.0, 0.0, 0.0});
  EXPECT_THROW(CorrelationTensor(1, bad_id), InputError);
}

TEST(SettingVector, RequiresUnitNorm) {
  EXPECT_THROW(SettingVector(1, 1, 0), InputError);
  EXPECT_NO_THROW(SettingVector(0, 0, 1));
  EXPECT_THROW(LocalFrame(SettingVector(1, 0, 0), SettingVector(std::sqrt(0.5), std::sqrt(0.5), 0)), InputError);
}

TEST(QuantumCorrelation, SingletExamples) {
  const auto t = correlation_tensor(density_from_pure(singlet()));
  const std::vector<SettingVector> zz{SettingVector(0, 0, 1), SettingVector(0, 0, 1)};
  const std::vector<SettingVector> zx{SettingVector(0, 0, 1), SettingVector(1, 0, 0)};
  EXPECT_NEAR(quantum_correlation(t, zz), -1.0, 1e-14);
  EXPECT_NEAR(quantum_correlation(t, zx), 0.0, 1e-14);
  EXPECT_THROW(quantum_correlation(t, std::vector<SettingVector>{SettingVector(0, 0, 1)}), InputError);
}

TEST(QuantumCorrelation, AgreesWithDirectExpectation) {
  std::mt19937_64 rng(11);
  for (int n = 1; n <= 5; ++n)
    for (int rep = 0; rep < 5; ++rep) {
      const auto psi = random_state(n, rng);
      const auto t = correlation_tensor(density_from_pure(psi));
      std::vector<SettingVector> s;
      Eigen::MatrixXcd op = Eigen::MatrixXcd::Identity(1, 1);
      for (int p = 0; p < n; ++p) {
        s.push_back(random_setting(rng));
        op = kron(op, along(s.back().components()));
      }
      const Complex direct = psi.amplitudes().dot(op * psi.amplitudes());
      const double q = quantum_correlation(t, s);
      EXPECT_NEAR(q, direct.real(), 1e-10);
      EXPECT_LE(std::abs(q), 1.0 + 1e-9);
    }
}

TEST(QuantumCorrelation, ProductStateFactorizes) {
  std::mt19937_64 rng(3);
  const auto a = random_state(1, rng), b = random_state(1, rng);
  const auto ta = correlation_tensor(density_from_pure(a));
  const auto tb = correlation_tensor(density_from_pure(b));
  Eigen::VectorXcd ab = kron(a.amplitudes(), b.amplitudes());
  const auto tab = correlation_tensor(density_from_pure(PureState(2, ab)));
  for (std::size_t k = 0; k < 4; ++k)
    for (std::size_t l = 0; l < 4; ++l)
      EXPECT_NEAR(tensor_entry(tab, {k, l}), ta.full_components()[k] * tb.full_components()[l], 1e-10);
}

TEST(QuantumCorrelation, NegatingOneVectorNegatesValue) {
  std::mt19937_64 rng(5);
  const auto t = correlation_tensor(density_from_pure(random_state(3, rng)));
  std::vector<SettingVector> s{random_setting(rng), random_setting(rng), random_setting(rng)};
  const double v = quantum_correlation(t, s);
  s[1] = SettingVector(-s[1].components());
  EXPECT_NEAR(quantum_correlation(t, s), -v, 1e-14);
}

TEST(QuantumCorrelation, MultilinearInEachVector) {
  std::mt19937_64 rng(9);
  const auto t = correlation_tensor(density_from_pure(random_state(3, rng)));
  for (int party = 0; party < 3; ++party) {
    std::vector<SettingVector> s{random_setting(rng), random_setting(rng), random_setting(rng)};
    const auto u = random_setting(rng), w = random_setting(rng);
    const double alpha = 0.3, beta = -1.7;
    const Eigen::Vector3d mix = alpha * u.components() + beta * w.components();
    auto with = [&](const SettingVector& v) {
      auto c = s;
      c[static_cast<std::size_t>(party)] = v;
      return quantum_correlation(t, c);
    };
    const double combined = with(SettingVector::normalized(mix)) * mix.norm();
    EXPECT_NEAR(combined, alpha * with(u) + beta * with(w), 1e-12);
  }
}

TEST(RotateLocally, RotationMovesSettings) {
  std::mt19937_64 rng(13);
  const auto t = correlation_tensor(density_from_pure(random_state(2, rng)));
  const Eigen::Matrix3d r1 = Eigen::AngleAxisd(0.7, Eigen::Vector3d(1, 2, 3).normalized()).toRotationMatrix();
  const Eigen::Matrix3d r2 = Eigen::AngleAxisd(-1.1, Eigen::Vector3d(0, 1, -1).normalized()).toRotationMatrix();
  const std::vector<Eigen::Matrix3d> rots{r1, r2};
  const auto rt = rotate_locally(t, rots);
  const std::vector<SettingVector> s{random_setting(rng), random_setting(rng)};
  const std::vector<SettingVector> back{SettingVector::normalized(r1.transpose() * s[0].components()),
                                        SettingVector::normalized(r2.transpose() * s[1].components())};
  EXPECT_NEAR(quantum_correlation(rt, s), quantum_correlation(t, back), 1e-12);
}
