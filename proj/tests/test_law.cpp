#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "rwre/checks.hpp"
#include "rwre/law.hpp"

using namespace rwre;

namespace {

ALaw symmetric() { return ALaw::finite({0.5, 2.0}, {0.5, 0.5}); }

OffspringLaw offspring_with_q1(double q1) { return OffspringLaw::from_probs({q1, 1.0 - q1}); }

}  // namespace

TEST(MomentTransform, ConstantLawIsOneAtAnyPower) {
  EXPECT_EQ(moment_transform(ALaw::constant(1.0), 7.0), 1.0);
}

TEST(MomentTransform, SymmetricTwoPointAtOne) {
  EXPECT_DOUBLE_EQ(moment_transform(symmetric(), 1.0), 1.25);
}

TEST(MomentTransform, IsOneAtZero) {
  EXPECT_DOUBLE_EQ(moment_transform(symmetric(), 0.0), 1.0);
  EXPECT_NEAR(moment_transform(ALaw::uniform(0.5, 2.0), 0.0), 1.0, 1e-12);
}

TEST(MomentTransform, UniformDensityMatchesClosedForm) {
  const auto law = ALaw::uniform(0.5, 2.0);
  for (double t : {-3.0, -1.5, -0.5, 0.3, 1.0, 2.5}) {
    const double exact = (std::pow(2.0, t + 1.0) - std::pow(0.5, t + 1.0)) / ((t + 1.0) * 1.5);
    EXPECT_NEAR(moment_transform(law, t) / exact, 1.0, 1e-10) << "t=" << t;
  }
}

TEST(LawValidation, RejectsBadLaws) {
  EXPECT_THROW(ALaw::finite({0.5, 2.0}, {0.5, 0.4}), InvalidLaw);
  EXPECT_THROW(ALaw::finite({0.0, 2.0}, {0.5, 0.5}), InvalidLaw);
  EXPECT_THROW(ALaw::finite({}, {}), InvalidLaw);
  EXPECT_THROW(OffspringLaw::from_probs({0.5, 0.4}), InvalidLaw);
}

TEST(Transience, Examples) {
  EXPECT_TRUE(is_transient(ALaw::constant(1.0), OffspringLaw::regular(2)));
  EXPECT_FALSE(is_transient(ALaw::constant(0.25), OffspringLaw::regular(2)));
}

TEST(Transience, BorderlineRaises) {
  // inf_{[0,1]} 2^{-t} = 1/2 = 1/m
  EXPECT_THROW(is_transient(ALaw::constant(0.5), OffspringLaw::regular(2)), BorderlineCriterion);
}

TEST(Transience, HalfLineUsesLogDrift) {
  EXPECT_TRUE(is_transient(ALaw::constant(2.0), OffspringLaw::line()));
  EXPECT_FALSE(is_transient(ALaw::constant(0.5), OffspringLaw::line()));
  EXPECT_THROW(is_transient(symmetric(), OffspringLaw::line()), BorderlineCriterion);
}

TEST(LambdaExponent, InfiniteWithoutSingleChildren) {
  EXPECT_TRUE(lambda_exponent(symmetric(), 0.0).is_pos_inf());
}

TEST(LambdaExponent, SymmetricMatchesCoshInversion) {
  for (double q1 : {0.1, 0.5, 0.9, 0.99}) {
    const auto l = lambda_exponent(symmetric(), q1);
    ASSERT_TRUE(l.is_finite());
    EXPECT_NEAR(l.value(), oracle::symmetric_lambda(q1), 1e-8) << "q1=" << q1;
  }
  // Frozen from the cosh inversion.
  EXPECT_NEAR(lambda_exponent(symmetric(), 0.5).value(), 3.7999372539, 1e-9);
}

TEST(LambdaExponent, InfiniteWhenPhiIsMonotone) {
  EXPECT_TRUE(lambda_exponent(ALaw::constant(2.0), 0.5).is_pos_inf());
  EXPECT_TRUE(lambda_exponent(ALaw::finite({1.5, 3.0}, {0.5, 0.5}), 0.5).is_pos_inf());
}

TEST(LambdaExponent, PositiveForRandomTransientLaws) {
  Rng g(101);
  int checked = 0;
  for (int k = 0; k < 200 && checked < 50; ++k) {
    const auto law = detail::random_two_sided_law(g);
    const double q1 = 0.05 + 0.9 * uniform01(g);
    bool transient = false;
    try {
      transient = is_transient(law, offspring_with_q1(q1));
    } catch (const BorderlineCriterion&) {
      continue;
    }
    if (!transient) continue;
    const auto l = lambda_exponent(law, q1);
    EXPECT_TRUE(l.is_pos_inf() || l.value() > 0.0);
    ++checked;
  }
  EXPECT_EQ(checked, 50);
}

TEST(SolomonKappa, ThreePointExample) {
  const auto law = ALaw::finite({1.0 / 3.0, 3.0}, {0.3, 0.7});
  const auto kappa = solomon_kappa(law);
  ASSERT_TRUE(kappa.has_value());
  EXPECT_NEAR(*kappa, std::log(7.0 / 3.0) / std::log(3.0), 1e-9);
  EXPECT_NEAR(*kappa, 0.77124, 1e-5);
}

TEST(SolomonKappa, UnitInverseMeanGivesOne) {
  // E[1/A] = 2/3 * 1/2 + 1/3 * 2 = 1
  const auto law = ALaw::finite({0.5, 2.0}, {1.0 / 3.0, 2.0 / 3.0});
  const auto kappa = solomon_kappa(law);
  ASSERT_TRUE(kappa.has_value());
  EXPECT_NEAR(*kappa, 1.0, 1e-9);
}

TEST(SolomonKappa, NoneForZeroDrift) { EXPECT_FALSE(solomon_kappa(symmetric()).has_value()); }

TEST(SolomonKappa, RootSolvesTheMomentEquation) {
  Rng g(102);
  for (int k = 0; k < 50; ++k) {
    const auto law = detail::random_two_sided_law(g);
    const auto kappa = solomon_kappa(law);
    if (!kappa) continue;
    EXPECT_GT(*kappa, 0.0);
    EXPECT_LE(*kappa, 1.0);
    if (*kappa < 1.0) {
      EXPECT_NEAR(law.moment(-*kappa), 1.0, 1e-8);
    }
  }
}

TEST(Legendre, DegenerateLaw) {
  const TransformTable tab(ALaw::constant(std::exp(1.0)));
  EXPECT_EQ(tab.legendre(1.0).value(), 0.0);
  EXPECT_TRUE(tab.legendre(2.0).is_pos_inf());
}

TEST(Legendre, ZeroAtTheMeanAndInfiniteOutsideSupport) {
  const TransformTable tab(symmetric());
  EXPECT_NEAR(tab.legendre(0.0).value(), 0.0, 1e-10);
  EXPECT_TRUE(tab.legendre(1.0).is_pos_inf());
  EXPECT_TRUE(tab.legendre(-1.0).is_pos_inf());

  const TransformTable skew(ALaw::finite({0.5, 3.0}, {0.4, 0.6}));
  EXPECT_NEAR(skew.legendre(skew.law().mean_log()).value(), 0.0, 1e-9);
}

TEST(Legendre, NonNegativeAndConvex) {
  Rng g(103);
  for (int k = 0; k < 200; ++k) {
    const TransformTable tab(detail::random_two_sided_law(g));
    const double a = tab.support_low(), b = tab.support_high();
    const double x0 = a + (b - a) * (0.05 + 0.3 * uniform01(g));
    const double h = (b - a) * 0.05 * (0.2 + uniform01(g));
    const double f0 = tab.legendre(x0).value();
    const double f1 = tab.legendre(x0 + h).value();
    const double f2 = tab.legendre(x0 + 2 * h).value();
    EXPECT_GE(f0, 0.0);
    EXPECT_GE(f0 - 2 * f1 + f2, -1e-8) << "law " << k;
  }
}

TEST(Legendre, InvertsPhiOnAGrid) {
  // phi(t) = sup_x { t x - I(x) } for t in [-5, 5].
  const TransformTable tab(ALaw::finite({0.5, 1.0, 3.0}, {0.3, 0.3, 0.4}));
  const double a = tab.support_low(), b = tab.support_high();
  for (double t = -5.0; t <= 5.0; t += 0.5) {
    double best = -1e300;
    for (int i = 1; i < 4000; ++i) {
      const double x = a + (b - a) * i / 4000.0;
      best = std::max(best, t * x - tab.legendre(x).value());
    }
    EXPECT_NEAR(best, tab.phi(t), 1e-4) << "t=" << t;
  }
}

TEST(BigL, SymmetricLawMatchesClosedForm) {
  const TransformTable tab(symmetric());
  const auto r = tab.big_L(1.0);
  EXPECT_NEAR(r.value, 0.058891, 1e-6);
  EXPECT_NEAR(r.t_bar, -0.5, 1e-9);
  for (double l : {0.1, 0.25, 0.5, 0.75}) {
    const auto s = tab.big_L(l);
    EXPECT_NEAR(s.value, oracle::symmetric_big_L(l), 1e-10);
    EXPECT_NEAR(s.t_bar, -l / 2.0, 1e-9);
  }
}

TEST(BigL, MonotonePhiGivesZero) {
  const auto r = TransformTable(ALaw::constant(2.0)).big_L(0.5);
  EXPECT_EQ(r.value, 0.0);
  EXPECT_EQ(r.t_bar, 0.0);
}

TEST(BigL, VanishesAsLambdaShrinks) {
  EXPECT_LT(TransformTable(symmetric()).big_L(1e-6).value, 1e-12);
}

TEST(BigL, RejectsLambdaOutsideUnitInterval) {
  const TransformTable tab(symmetric());
  EXPECT_THROW(tab.big_L(0.0), std::invalid_argument);
  EXPECT_THROW(tab.big_L(1.5), std::invalid_argument);
}

TEST(BigLPrime, Examples) {
  const TransformTable tab(symmetric());
  EXPECT_TRUE(big_L_prime(tab, 0.0).is_neg_inf());
  EXPECT_NEAR(big_L_prime(tab, 0.5).value(), -3.7999372539, 1e-9);
  EXPECT_NEAR(big_L_prime(tab, 0.95).value(), -0.9320861379, 1e-9);
  EXPECT_NEAR(big_L_prime(tab, 0.95).value(), -oracle::symmetric_lambda(0.95), 1e-9);
}

TEST(BigLPrime, DirectMaximizationAgreesWithClosedForm) {
  const TransformTable tab(symmetric());
  for (double q1 : {0.1, 0.5, 0.95}) {
    EXPECT_NEAR(big_L_prime_direct(tab, q1).value(), big_L_prime(tab, q1).value(), 1e-6)
        << "q1=" << q1;
  }
}

TEST(BigLPrime, EqualsMinusLambdaOnRandomLaws) {
  EXPECT_TRUE(check_legendre_variational_identity().passed);
}

TEST(Duality, ChordEndpointsBoundTheSublevelSet) {
  EXPECT_TRUE(check_sublevel_chord_duality().passed);
  EXPECT_TRUE(check_transform_identities().passed);
}

TEST(Duality, LambdaClosedFormCheck) { EXPECT_TRUE(check_lambda_closed_form().passed); }

TEST(Phi, VanishesAtZeroAndIsConvex) {
  Rng g(104);
  for (int k = 0; k < 200; ++k) {
    const TransformTable tab(detail::random_two_sided_law(g));
    EXPECT_EQ(tab.phi(0.0), 0.0);
    const double t0 = -6.0 + 12.0 * uniform01(g);
    const double h = 0.01 + uniform01(g);
    EXPECT_GE(tab.phi(t0 - h) - 2.0 * tab.phi(t0) + tab.phi(t0 + h), -1e-9) << "law " << k;
  }
}
