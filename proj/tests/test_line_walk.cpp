#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "rwre/checks.hpp"
#include "rwre/line_walk.hpp"

using namespace rwre;

namespace {

LineEnvironment constant_env(double a, std::size_t n) { return LineEnvironment(std::vector<double>(n, a)); }

LineEnvironment random_env(std::uint64_t seed, std::size_t n) {
  Rng g(seed);
  return detail::random_line_environment(n, g);
}

const ALaw kSymmetric = ALaw::finite({0.5, 2.0}, {0.5, 0.5});

}  // namespace

TEST(LineEnvironment, PotentialInvariants) {
  for (std::uint64_t s = 0; s < 100; ++s) {
    const auto env = random_env(s, 60);
    EXPECT_EQ(env.V(0), 0.0);
    for (std::size_t i = 0; i < 60; ++i) {
      EXPECT_NEAR(env.V(i + 1) - env.V(i), -std::log(env.mark(i)), 1e-12);
      EXPECT_LE(env.M(i), env.M(i + 1));
    }
    for (std::size_t i = 0; i <= 60; ++i) {
      EXPECT_GE(env.H1(i), 0.0);
      for (std::size_t p = i; p <= 60; p += 7) EXPECT_GE(env.H2(i, p), 0.0);
    }
  }
}

TEST(LineEnvironment, RejectsNonPositiveMarks) {
  EXPECT_THROW(LineEnvironment({1.0, 0.0}), InvalidLaw);
}

TEST(HitProbability, Examples) {
  for (std::size_t n : {1u, 5u, 30u}) EXPECT_NEAR(hit_prob_before_minus1(constant_env(1.0, n), n), 1.0 / (n + 1), 1e-14);
  for (double a : {0.3, 1.0, 4.0})
    EXPECT_NEAR(hit_prob_before_minus1(constant_env(a, 1), 1), a / (1.0 + a), 1e-14);
  EXPECT_NEAR(hit_prob_before_minus1(constant_env(2.0, 20), 20), oracle::geometric_ruin(2.0, 20), 1e-14);
  EXPECT_EQ(hit_prob_before_minus1(constant_env(2.0, 20), 0), 1.0);
}

TEST(HitProbability, BracketedByThePotentialMaximum) {
  EXPECT_TRUE(check_potential_bracket().passed);
}

TEST(HitProbability, BetweenInteriorPoints) {
  const auto env = random_env(7, 30);
  EXPECT_EQ(hit_prob_between(env, -1, 20), 0.0);
  EXPECT_NEAR(hit_prob_between(env, 20, 20), 1.0, 1e-15);
  for (long j = 0; j < 20; ++j) EXPECT_LT(hit_prob_between(env, j, 20), hit_prob_between(env, j + 1, 20));
}

TEST(ExitTime, Examples) {
  EXPECT_EQ(expected_exit_time(random_env(1, 5), 1), 1.0);
  for (std::size_t n : {2u, 7u, 40u}) EXPECT_NEAR(expected_exit_time(constant_env(1.0, n), n), n, 1e-10 * n);
  EXPECT_THROW(expected_exit_time(random_env(1, 5), 0), std::invalid_argument);
  EXPECT_THROW(expected_exit_time(random_env(1, 5), 6), std::out_of_range);
}

TEST(ExitTime, AgreesWithIndependentSolvers) {
  for (std::uint64_t s = 0; s < 200; ++s) {
    const std::size_t n = 1 + s % 50;
    const auto env = random_env(derive_seed(71, s), n);
    const auto [hit, exit] = oracle::dense_line_solve(env.marks(), static_cast<int>(n));
    const double naive = static_cast<double>(oracle::naive_exit_time(env.marks(), static_cast<int>(n)));
    const double e = expected_exit_time(env, n);
    EXPECT_NEAR(e / exit, 1.0, 1e-9) << "env " << s;
    EXPECT_NEAR(e / naive, 1.0, 1e-10) << "env " << s;
    EXPECT_NEAR(hit_prob_before_minus1(env, n), hit, 1e-10) << "env " << s;
  }
}

TEST(Oracle, Examples) {
  EXPECT_NEAR(oracle_solve(constant_env(1.0, 3), 3).hit(3), 0.25, 1e-14);
  EXPECT_NEAR(oracle_solve(constant_env(2.0, 2), 2).hit(2), 4.0 / 7.0, 1e-14);
  EXPECT_THROW(oracle_solve(constant_env(1.0, kOracleMaxLevel + 1), kOracleMaxLevel + 1),
               std::invalid_argument);
}

TEST(Oracle, CircuitFormulasMatchTridiagonalSolve) { EXPECT_TRUE(check_circuit_oracle().passed); }

TEST(Oracle, InjectedFaultIsDetected) {
  inject_circuit_fault(true);
  const bool passed = check_circuit_oracle(12, 50).passed;
  inject_circuit_fault(false);
  EXPECT_FALSE(passed);
}

TEST(MEstimate, DegenerateCasesAreExact) {
  EXPECT_EQ(m_estimate(kSymmetric, 30, 0.0, 10, 1).point, 1.0);
  EXPECT_EQ(m_estimate(kSymmetric, 1, 0.7, 10, 1).point, 1.0);
  EXPECT_THROW(m_estimate(kSymmetric, 10, 1.5, 10, 1), std::invalid_argument);
}

TEST(MEstimate, UnitMarksGiveN) {
  EXPECT_NEAR(m_estimate(ALaw::constant(1.0), 25, 1.0, 5, 1).point, 25.0, 1e-9);
}

// ln m(n, lambda) / n approaches L(lambda); the step from n = 40 to 60 must
// already be within 0.02.
TEST(MEstimate, GrowthRateIsCauchyBetweenFortyAndSixty) {
  for (double lambda : {0.25, 0.5, 0.75, 1.0}) {
    const double r40 = std::log(m_estimate(kSymmetric, 40, lambda, 10'000, 81, 4).point) / 40.0;
    const double r60 = std::log(m_estimate(kSymmetric, 60, lambda, 10'000, 82, 4).point) / 60.0;
    EXPECT_LE(std::abs(r40 - r60), 0.02) << "lambda=" << lambda << " r40=" << r40 << " r60=" << r60;
  }
}

// For lambda < Lambda the chord value sits below ln(1/q1); the sampled
// growth rate of m(n, lambda) must then leave room for q1^n m(n, lambda) to
// be summable.
TEST(MEstimate, GrowthRateBelowSingleChildDecay) {
  const TransformTable tab(kSymmetric);
  for (double q1 : {0.5, 0.8}) {
    const double lambda_exp = lambda_exponent(kSymmetric, q1).value();
    for (double lambda : {0.25, 0.5, 0.75, 1.0}) {
      ASSERT_LT(lambda, lambda_exp);
      EXPECT_LT(tab.big_L(lambda).value, -std::log(q1));
      const double rate = std::log(m_estimate(kSymmetric, 60, lambda, 5'000, 83, 4).point) / 60.0;
      EXPECT_LT(rate, -std::log(q1)) << "q1=" << q1 << " lambda=" << lambda;
    }
  }
}

TEST(PEstimate, DegenerateCases) {
  EXPECT_EQ(p_estimate(kSymmetric, 10, 0.5, 10, 1).point, 1.0);
  EXPECT_EQ(p_estimate(kSymmetric, 1, 100.0, 10, 1).point, 0.0);
}

TEST(PEstimate, DecreasesInTheThreshold) {
  double prev = 1.0;
  for (double a : {2.0, 10.0, 50.0, 250.0}) {
    const double p = p_estimate(kSymmetric, 20, a, 4'000, 91).point;
    EXPECT_LE(p, prev);
    prev = p;
  }
  EXPECT_LT(prev, 0.5);
}

TEST(PEstimate, ExponentIsFiniteAndNegative) {
  const auto e = p_exponent(kSymmetric, 0.95, 1'000.0, 30, 2'000, 92, 4);
  EXPECT_TRUE(std::isfinite(e.value));
  EXPECT_LT(e.value, 0.0);
  EXPECT_GE(e.argmax, 2u);
}

TEST(Projection, NotAncestorRaises) {
  MarkedTree tree(kSymmetric, OffspringLaw::regular(2), 1);
  const NodeId left = tree.child(kRoot, 0), right = tree.child(kRoot, 1);
  EXPECT_THROW(project_to_path(tree, left, right), NotAncestor);
}

TEST(Projection, HalfLineIsUnchanged) {
  MarkedTree tree(ALaw::uniform(0.5, 2.0), OffspringLaw::line(), 3);
  NodeId y = kRoot;
  for (int d = 0; d < 6; ++d) y = tree.child(y, 0);
  const auto proj = project_to_path(tree, kRoot, y);
  for (std::size_t i = 0; i < proj.length(); ++i) {
    const NodeId v = proj.path()[i + 1];
    EXPECT_NEAR(proj.forward(i), 1.0 - tree.p_parent(v), 1e-15);
    EXPECT_NEAR(proj.backward(i), tree.p_parent(v), 1e-15);
  }
}

TEST(Projection, UnitMarksOnBinaryTreeAreFair) {
  MarkedTree tree(ALaw::constant(1.0), OffspringLaw::regular(2), 3);
  NodeId y = kRoot;
  for (int d = 0; d < 4; ++d) y = tree.child(y, 1);
  const auto proj = project_to_path(tree, kRoot, y);
  for (std::size_t i = 0; i < proj.length(); ++i) {
    EXPECT_DOUBLE_EQ(proj.forward(i), 0.5);
    EXPECT_DOUBLE_EQ(proj.backward(i), 0.5);
  }
}

TEST(Projection, RowsAreNormalized) {
  MarkedTree tree(ALaw::uniform(0.5, 2.0), OffspringLaw::from_probs({0.3, 0.4, 0.3}), 5);
  NodeId y = kRoot;
  for (int d = 0; d < 8; ++d) y = tree.child(y, tree.offspring(y) - 1);
  const auto proj = project_to_path(tree, kRoot, y);
  for (std::size_t i = 0; i < proj.length(); ++i) EXPECT_NEAR(proj.forward(i) + proj.backward(i), 1.0, 1e-15);
  for (std::size_t j = 0; j <= proj.length(); ++j) EXPECT_NEAR(proj.hit_y(j) + proj.hit_parent(j), 1.0, 1e-12);
}

TEST(Projection, DominatesTreeHittingProbabilities) { EXPECT_TRUE(check_path_domination().passed); }
