#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <vector>

#include <gtest/gtest.h>

#include "bellineq/families.hpp"
#include "bellineq/lhvcore.hpp"
#include "bellineq/qcond.hpp"
#include "bellineq/sign_function.hpp"
#include "bellineq/simplex.hpp"

using namespace bellineq;

namespace {

const double kR = 1.0 / std::sqrt(2.0);

CorrelationTable chsh_optimal() { return CorrelationTable(ExperimentLayout({2, 2}), {kR, kR, kR, -kR}); }

// GHZ correlations with setting 1 = y, setting 2 = x.
CorrelationTable ghz_mermin_table() {
  const auto t = correlation_tensor(density_from_pure(ghz_state({3, std::numbers::pi / 4})));
  const SettingVector y(0, 1, 0), x(1, 0, 0);
  std::vector<double> v;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int c = 0; c < 2; ++c) {
        const std::vector<SettingVector> s{a ? x : y, b ? x : y, c ? x : y};
        v.push_back(quantum_correlation(t, s));
      }
  return CorrelationTable(ExperimentLayout({2, 2, 2}), v);
}

// Oracle: the defining double sum with explicit powers of s_j.
double lhs_oracle(const CorrelationTable& t) {
  const std::size_t n = t.layout().parties();
  double total = 0.0;
  for (std::size_t sc = 0; sc < (std::size_t{1} << n); ++sc) {
    double inner = 0.0;
    for (std::size_t kc = 0; kc < (std::size_t{1} << n); ++kc) {
      double term = 1.0;
      std::vector<int> k(n);
      for (std::size_t j = 0; j < n; ++j) {
        const int s_j = ((sc >> j) & 1u) ? -1 : 1;
        k[j] = static_cast<int>((kc >> j) & 1u);
        term *= std::pow(s_j, k[j]);
      }
      inner += term * t(k);
    }
    total += std::abs(inner);
  }
  return total;
}

CorrelationTable random_table(const ExperimentLayout& l, std::mt19937_64& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  std::vector<double> v(l.cells());
  for (double& x : v) x = u(rng);
  return CorrelationTable(l, v);
}

DeterministicStrategy random_strategy(const ExperimentLayout& l, std::mt19937_64& rng) {
  DeterministicStrategy s;
  for (std::size_t j = 0; j < l.parties(); ++j)
    s.outcomes.push_back(static_cast<std::uint32_t>(rng() & ((1u << l.settings(j)) - 1)));
  return s;
}

std::vector<DeterministicStrategy> all_strategies(const ExperimentLayout& l) {
  std::vector<DeterministicStrategy> out;
  const int bits = l.total_settings();
  for (std::uint64_t code = 0; code < (std::uint64_t{1} << bits); ++code) {
    DeterministicStrategy s;
    s.outcomes.resize(l.parties());
    std::uint64_t rest = code;
    for (std::size_t j = 0; j < l.parties(); ++j) {
      s.outcomes[j] = static_cast<std::uint32_t>(rest & ((1u << l.settings(j)) - 1));
      rest >>= l.settings(j);
    }
    out.push_back(s);
  }
  return out;
}

void expect_tables_near(const CorrelationTable& a, const CorrelationTable& b, double tol) {
  ASSERT_EQ(a.layout(), b.layout());
  for (std::size_t f = 0; f < a.values().size(); ++f) EXPECT_NEAR(a[f], b[f], tol) << "cell " << f;
}

}  // namespace

TEST(Layout, ValidatesAndFlattens) {
  EXPECT_THROW(ExperimentLayout(std::vector<int>{}), InputError);
  EXPECT_THROW(ExperimentLayout({2, 0}), InputError);
  const ExperimentLayout l({4, 4, 2});
  EXPECT_EQ(l.cells(), 32u);
  EXPECT_EQ(l.to_string(), "4x4x2");
  const std::vector<int> k{3, 1, 1};
  EXPECT_EQ(l.flat(k), 3u * 8 + 1 * 2 + 1);
  EXPECT_EQ(l.unflat(l.flat(k)), k);
}

TEST(CorrelationTable, RejectsOutOfRange) {
  EXPECT_THROW(CorrelationTable(ExperimentLayout({2}), {1.1, 0}), InputError);
  EXPECT_THROW(CorrelationTable(ExperimentLayout({2}), {0}), InputError);
  EXPECT_NO_THROW(CorrelationTable(ExperimentLayout({2}), {1.0 + 1e-10, -1}));
}

TEST(Strategy, EncodingAndValidation) {
  const ExperimentLayout l({2, 3});
  const DeterministicStrategy s{{0b10, 0b101}};
  EXPECT_EQ(s.outcome(0, 0), 1);
  EXPECT_EQ(s.outcome(0, 1), -1);
  EXPECT_EQ(s.outcome(1, 0), -1);
  EXPECT_EQ(s.outcome(1, 1), 1);
  EXPECT_EQ(s.outcome(1, 2), -1);
  const auto t = strategy_table(s, l);
  EXPECT_EQ(t(std::vector<int>{1, 2}), 1.0);
  EXPECT_EQ(t(std::vector<int>{0, 0}), -1.0);
  EXPECT_THROW(strategy_table(DeterministicStrategy{{0b100, 0}}, l), InputError);
}

TEST(SignFunction, Enumeration) {
  EXPECT_EQ(enumerate_sign_functions(1).size(), 4u);
  EXPECT_EQ(enumerate_sign_functions(2).size(), 16u);
  const auto three = enumerate_sign_functions(3);
  EXPECT_EQ(three.size(), 256u);
  std::set<std::string> distinct;
  for (const auto& s : three) distinct.insert(s.to_bitstring());
  EXPECT_EQ(distinct.size(), 256u);
  EXPECT_EQ(sign_function_count(4), 65536u);
  EXPECT_THROW(enumerate_sign_functions(5), ResourceLimit);
}

TEST(SignFunction, BitstringParsing) {
  EXPECT_EQ(SignFunction::from_bitstring("0001").arity(), 2);
  EXPECT_THROW(SignFunction::from_bitstring("001"), InputError);
  EXPECT_THROW(SignFunction::from_bitstring("0021"), InputError);
  EXPECT_THROW(SignFunction::from_bitstring(""), InputError);
  EXPECT_EQ(SignFunction::chsh().value(3), -1);
  EXPECT_EQ(SignFunction::chsh().value(0), 1);
}

TEST(SignFunction, ChshMatchesSineFormula) {
  const auto s = SignFunction::chsh();
  for (std::size_t i = 0; i < 4; ++i) {
    const int s1 = (i & 2) ? -1 : 1, s2 = (i & 1) ? -1 : 1;
    const double f = std::sqrt(2.0) * std::sin(3 * std::numbers::pi / 4 + (s1 + s2 - 2) * std::numbers::pi / 4);
    EXPECT_EQ(s.value(i), static_cast<int>(std::lround(f)));
  }
}

TEST(GeneralBellLhs, Examples) {
  EXPECT_NEAR(general_bell_lhs(chsh_optimal()), 4 * std::sqrt(2.0), 1e-12);
  EXPECT_EQ(general_bell_lhs(CorrelationTable::zeros(ExperimentLayout({2, 2}))), 0.0);
  EXPECT_NEAR(general_bell_lhs(CorrelationTable(ExperimentLayout({2, 2}), {1, 1, 1, 1})), 4.0, 1e-15);
  EXPECT_THROW(general_bell_lhs(CorrelationTable::zeros(ExperimentLayout({2, 3}))), InputError);
}

TEST(GeneralBellLhs, MatchesOracle) {
  std::mt19937_64 rng(21);
  for (std::size_t n = 1; n <= 5; ++n)
    for (int rep = 0; rep < 10; ++rep) {
      const auto t = random_table(ExperimentLayout(std::vector<int>(n, 2)), rng);
      EXPECT_NEAR(general_bell_lhs(t), lhs_oracle(t), 1e-11);
    }
}

TEST(SignInequality, Examples) {
  EXPECT_NEAR(evaluate_sign_inequality(chsh_optimal(), SignFunction::chsh()), 4 * std::sqrt(2.0), 1e-12);
  const auto mermin_sign = SignFunction::from_bitstring("00010111");
  EXPECT_NEAR(evaluate_sign_inequality(ghz_mermin_table(), mermin_sign), 16.0, 1e-12);
  std::mt19937_64 rng(1);
  const auto t = random_table(ExperimentLayout({2, 2, 2}), rng);
  EXPECT_NEAR(evaluate_sign_inequality(t, SignFunction::constant(3)), 8 * std::abs(t[0]), 1e-12);
  EXPECT_THROW(evaluate_sign_inequality(t, SignFunction::chsh()), InputError);
}

TEST(SignInequality, MerminSignGivesMerminCoefficients) {
  const auto ineq = sign_inequality(SignFunction::from_bitstring("00010111"));
  EXPECT_EQ(ineq.bound, 8);
  EXPECT_EQ(ineq.coefficients, (std::vector<std::int64_t>{0, 4, 4, 0, 4, 0, 0, -4}));
  EXPECT_NEAR(evaluate_inequality(mermin_inequality(), ghz_mermin_table()), -4.0, 1e-12);
}

// Every sign function on every strategy gives exactly the bound (N <= 3
// exhaustively, N = 4 on all functions and sampled strategies).
TEST(SignIdentity, ExactOnEveryStrategy) {
  for (int n = 1; n <= 3; ++n) {
    const ExperimentLayout l(std::vector<int>(static_cast<std::size_t>(n), 2));
    const auto strategies = all_strategies(l);
    for_each_sign_function(n, [&](const SignFunction& s) {
      const auto ineq = sign_inequality(s);
      for (const auto& st : strategies) ASSERT_EQ(std::abs(strategy_value(ineq, st)), ineq.bound);
    });
  }
  std::mt19937_64 rng(4);
  const ExperimentLayout l4({2, 2, 2, 2});
  for (std::uint64_t code = 0; code < sign_function_count(4); code += 97) {
    const auto ineq = sign_inequality(SignFunction::from_index(4, code));
    for (int r = 0; r < 20; ++r) ASSERT_EQ(std::abs(strategy_value(ineq, random_strategy(l4, rng))), 16);
  }
}

TEST(SignIdentity, GeneralLhsIsMaxOverSignFunctions) {
  std::mt19937_64 rng(17);
  for (int n = 1; n <= 3; ++n)
    for (int rep = 0; rep < 20; ++rep) {
      const auto t = random_table(ExperimentLayout(std::vector<int>(static_cast<std::size_t>(n), 2)), rng);
      double best = 0.0;
      for (const auto& s : enumerate_sign_functions(n)) best = std::max(best, evaluate_sign_inequality(t, s));
      EXPECT_NEAR(best, general_bell_lhs(t), 1e-12);
      EXPECT_NEAR(evaluate_sign_inequality(t, most_violated_sign_function(t)), best, 1e-12);
    }
}

TEST(HiddenProbabilities, Examples) {
  const auto ones = hidden_probabilities(CorrelationTable(ExperimentLayout({2, 2}), {1, 1, 1, 1}));
  EXPECT_NEAR(ones[0], 1.0, 1e-15);
  for (std::size_t i = 1; i < 4; ++i) EXPECT_EQ(ones[i], 0.0);
  for (double p : hidden_probabilities(CorrelationTable::zeros(ExperimentLayout({2, 2})))) EXPECT_EQ(p, 0.0);
  const auto chsh = hidden_probabilities(chsh_optimal());
  for (double p : chsh) EXPECT_NEAR(p, std::sqrt(2.0) / 4, 1e-12);
  EXPECT_NEAR(std::accumulate(chsh.begin(), chsh.end(), 0.0), std::sqrt(2.0), 1e-12);
}

TEST(LhvModel, ZeroTableIsUniform) {
  const auto m = construct_lhv_model(CorrelationTable::zeros(ExperimentLayout({2, 2})));
  EXPECT_TRUE(m.weights.empty());
  EXPECT_NEAR(m.tail, 1.0, 1e-15);
  const auto w = m.explicit_weights();
  ASSERT_EQ(w.size(), 16u);
  for (const auto& [s, p] : w) EXPECT_NEAR(p, 1.0 / 16, 1e-15);
}

TEST(LhvModel, AnticorrelatedIsDeterministic) {
  const auto t = CorrelationTable(ExperimentLayout({2, 2}), {-1, -1, -1, -1});
  const auto m = construct_lhv_model(t);
  ASSERT_EQ(m.weights.size(), 1u);
  EXPECT_NEAR(m.tail, 0.0, 1e-15);
  const auto& s = m.weights.begin()->first;
  EXPECT_EQ(s.outcome(0, 0) * s.outcome(1, 0), -1);
  EXPECT_EQ(s.outcome(0, 1) * s.outcome(1, 1), -1);
  expect_tables_near(evaluate_model(m), t, 1e-15);
}

TEST(LhvModel, ViolatingTableThrows) {
  EXPECT_THROW(construct_lhv_model(chsh_optimal()), InequalityViolated);
  try {
    construct_lhv_model(chsh_optimal());
  } catch (const InequalityViolated& e) {
    EXPECT_NEAR(e.lhs(), 4 * std::sqrt(2.0), 1e-12);
    EXPECT_EQ(e.bound(), 4.0);
  }
}

TEST(LhvModel, EvaluateExamples) {
  const ExperimentLayout l({2, 3});
  LhvModel single{l, {{DeterministicStrategy{{0, 0}}, 1.0}}, 0.0};
  const auto all_plus = evaluate_model(single);
  for (double v : all_plus.values()) EXPECT_EQ(v, 1.0);
  LhvModel uniform{l, {}, 1.0};
  const auto flat = evaluate_model(uniform);
  for (double v : flat.values()) EXPECT_EQ(v, 0.0);
  double total = 0.0;
  for (const auto& [s, w] : uniform.explicit_weights()) total += w;
  EXPECT_NEAR(total, 1.0, 1e-12);
  LhvModel bad{l, {{DeterministicStrategy{{0, 0}}, 0.5}}, 0.0};
  EXPECT_THROW(evaluate_model(bad), InputError);
}

TEST(LhvModel, RoundTripOnAdmissibleTables) {
  std::mt19937_64 rng(99);
  int checked = 0;
  for (std::size_t n = 1; n <= 4; ++n)
    for (int rep = 0; rep < 200; ++rep) {
      const auto t = random_table(ExperimentLayout(std::vector<int>(n, 2)), rng, 0.6);
      if (general_bell_lhs(t) > std::ldexp(1.0, static_cast<int>(n))) continue;
      const auto m = construct_lhv_model(t);
      EXPECT_NO_THROW(m.validate());
      expect_tables_near(evaluate_model(m), t, 1e-10);
      ++checked;
    }
  EXPECT_GT(checked, 200);
}

TEST(LhvModel, SaturatedTableRoundTrips) {
  // Convex mix of two vertices sits on the boundary.
  const ExperimentLayout l({2, 2});
  const auto a = strategy_table(DeterministicStrategy{{0, 0}}, l);
  const auto b = strategy_table(DeterministicStrategy{{0b10, 0b01}}, l);
  std::vector<double> v(4);
  for (std::size_t i = 0; i < 4; ++i) v[i] = 0.3 * a[i] + 0.7 * b[i];
  const CorrelationTable t(l, v);
  EXPECT_NEAR(general_bell_lhs(t), 4.0, 1e-12);
  expect_tables_near(evaluate_model(construct_lhv_model(t)), t, 1e-12);
}

TEST(Simplex, SmallFeasibilityAndOptimum) {
  // x0 + x1 = 1, x1 + x2 = 0.5 ; min x0 + 2 x1 + 3 x2 -> x1 = 0.5, x0 = 0.5.
  Eigen::MatrixXd a(2, 3);
  a << 1, 1, 0, 0, 1, 1;
  Eigen::VectorXd b(2);
  b << 1, 0.5;
  RevisedSimplex lp(b, 3, [&](std::size_t j, Eigen::Ref<Eigen::VectorXd> col) { col = a.col(static_cast<Eigen::Index>(j)); });
  EXPECT_NEAR(lp.phase1(), 0.0, 1e-12);
  EXPECT_TRUE(lp.feasible());
  const auto cost = [](std::size_t j) { return j < 3 ? static_cast<double>(j + 1) : 0.0; };
  lp.phase2(cost);
  double value = 0.0;
  for (const auto& [j, x] : lp.solution()) value += cost(j) * x;
  EXPECT_NEAR(value, 1.5, 1e-12);

  Eigen::VectorXd infeasible(2);
  infeasible << 1, -1;
  RevisedSimplex bad(infeasible, 3, [&](std::size_t j, Eigen::Ref<Eigen::VectorXd> col) { col = a.col(static_cast<Eigen::Index>(j)); });
  EXPECT_GT(bad.phase1(), 0.1);
  EXPECT_FALSE(bad.feasible());
}

TEST(PolytopeMembership, ZeroTableInside) {
  for (const auto& l : {ExperimentLayout({2, 2}), ExperimentLayout({3, 2}), ExperimentLayout({4, 4, 2})}) {
    const auto r = polytope_membership(CorrelationTable::zeros(l));
    EXPECT_TRUE(r.inside);
    ASSERT_TRUE(r.model.has_value());
    expect_tables_near(evaluate_model(*r.model), CorrelationTable::zeros(l), 1e-9);
  }
}

TEST(PolytopeMembership, ChshCertificate) {
  const auto r = polytope_membership(chsh_optimal());
  EXPECT_FALSE(r.inside);
  ASSERT_TRUE(r.certificate.has_value());
  const auto& c = r.certificate->coefficients;
  const std::int64_t sign = c[0] > 0 ? 1 : -1;
  EXPECT_EQ(c, (std::vector<std::int64_t>{sign, sign, sign, -sign}));
  EXPECT_EQ(r.certificate->bound, 2);
  EXPECT_NEAR(std::abs(r.certificate_value), 2 * std::sqrt(2.0), 1e-9);
}

TEST(PolytopeMembership, MerminCertificate) {
  const auto r = polytope_membership(ghz_mermin_table());
  EXPECT_FALSE(r.inside);
  ASSERT_TRUE(r.certificate.has_value());
  EXPECT_GT(std::abs(r.certificate_value), static_cast<double>(r.certificate->bound));
  // The table is the GHZ Mermin point; the certificate must be the Mermin facet.
  const auto& c = r.certificate->coefficients;
  const std::int64_t sign = c[1] > 0 ? 1 : -1;
  EXPECT_EQ(c, (std::vector<std::int64_t>{0, sign, sign, 0, sign, 0, 0, -sign}));
  EXPECT_EQ(r.certificate->bound, 2);
}

TEST(PolytopeMembership, CertificateIsValidForEveryVertex) {
  std::mt19937_64 rng(5);
  const ExperimentLayout l({3, 3});
  int outside = 0;
  for (int rep = 0; rep < 30; ++rep) {
    const auto t = random_table(l, rng);
    const auto r = polytope_membership(t);
    if (r.inside) {
      expect_tables_near(evaluate_model(*r.model), t, 1e-8);
      continue;
    }
    ++outside;
    const auto& cert = *r.certificate;
    EXPECT_GT(std::abs(evaluate_inequality(cert, t)), static_cast<double>(cert.bound));
    for (const auto& s : all_strategies(l)) EXPECT_LE(std::abs(strategy_value(cert, s)), cert.bound);
  }
  EXPECT_GT(outside, 0);
}

TEST(PolytopeMembership, AgreesWithGeneralInequality) {
  std::mt19937_64 rng(123);
  for (std::size_t n = 2; n <= 3; ++n)
    for (int rep = 0; rep < 200; ++rep) {
      const auto t = random_table(ExperimentLayout(std::vector<int>(n, 2)), rng, n == 2 ? 1.0 : 0.7);
      const bool local = general_bell_lhs(t) <= std::ldexp(1.0, static_cast<int>(n)) + 1e-9;
      EXPECT_EQ(polytope_membership(t).inside, local);
    }
}

TEST(PolytopeMembership, SizeCap) {
  EXPECT_THROW(polytope_membership(CorrelationTable::zeros(ExperimentLayout({8, 8, 8}))), ResourceLimit);
}

TEST(EvaluateInequality, LayoutMismatchAndZero) {
  EXPECT_EQ(evaluate_inequality(chsh_inequality(), CorrelationTable::zeros(ExperimentLayout({2, 2}))), 0.0);
  EXPECT_THROW(evaluate_inequality(chsh_inequality(), CorrelationTable::zeros(ExperimentLayout({2, 3}))), InputError);
  EXPECT_THROW(BellInequality(ExperimentLayout({2}), {0, 0}, 1), InputError);
  EXPECT_THROW(BellInequality(ExperimentLayout({2}), {1, 0}, 0), InputError);
}
