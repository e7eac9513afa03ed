#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "qmoments/arith_sieves.hpp"
#include "qmoments/errors.hpp"
#include "qmoments/euler_series.hpp"

using namespace qmoments;
using E = TruncatedSeries::Exponents;

namespace {

constexpr FactorVariant kVariants[] = {FactorVariant::definition, FactorVariant::closed_form,
                                       FactorVariant::middle_expansion};
constexpr PairReading kReadings[] = {PairReading::unordered, PairReading::ordered};

unsigned full_degree(unsigned k) { return k + 2 * pair_count(k); }

}  // namespace

TEST(LocalSeries, LocalFactorization) {
  for (const std::uint64_t p : {2, 3, 5, 7}) {
    for (unsigned k = 2; k <= 4; ++k) {
      for (const unsigned d : {4u, 6u, 8u}) {
        EXPECT_EQ(local_factor_E_definition(p, k, d) * pair_geometric_inverse(k, d), local_factor_F(p, k, d))
            << p << " " << k << " " << d;
      }
    }
  }
  EXPECT_EQ(local_factor_E_definition(3, 5, 6) * pair_geometric_inverse(5, 6), local_factor_F(3, 5, 6));
}

TEST(LocalSeries, FHasEvenSubsets) {
  const auto f = local_factor_F(5, 4, 4);
  EXPECT_EQ(f.coefficient(E{}), Rational(1));
  EXPECT_EQ(f.coefficient(E{1, 1, 0, 0}), Rational(5, 6));
  EXPECT_EQ(f.coefficient(E{1, 1, 1, 1}), Rational(5, 6));
  EXPECT_EQ(f.coefficient(E{1, 1, 1, 0}), Rational(0));
  EXPECT_EQ(f.terms().size(), 1u + 6u + 1u);
}

TEST(LocalSeries, KEqualsTwoCollapses) {
  for (const std::uint64_t p : {2, 3, 5, 7, 11, 13}) {
    for (const unsigned d : {4u, 8u, 12u}) {
      EXPECT_EQ(collapse_pair_product(local_factor_E_definition(p, 2, d)), single_variable_E_factor(p, d / 2));
    }
  }
  TruncatedSeries lopsided(2, 4);
  lopsided.add_term(E{1, 0}, Rational(1));
  EXPECT_THROW(collapse_pair_product(lopsided), InvalidArgument);
}

TEST(LocalSeries, ExpansionAgreesWithDefinitionOnlyForKTwo) {
  for (const std::uint64_t p : {2, 3, 5}) {
    EXPECT_EQ(local_factor_E_expansion(p, 2, 8), local_factor_E_definition(p, 2, 8));
    EXPECT_NE(local_factor_E_expansion(p, 3, 8), local_factor_E_definition(p, 3, 8));
  }
}

TEST(LocalValues, HandValuesAtTwo) {
  EXPECT_EQ(local_factor_exact(2, 3, FactorVariant::definition), Rational(1, 4));
  EXPECT_EQ(local_factor_exact(2, 3, FactorVariant::closed_form), Rational(1, 8));
  EXPECT_EQ(local_factor_exact(2, 3, FactorVariant::middle_expansion), Rational(-3, 8));
  for (const auto v : kVariants) EXPECT_EQ(local_factor_exact(5, 2, v), Rational(1) - Rational(2, 30));
}

TEST(LocalValues, ExactValueEqualsSeriesAtInverseRootP) {
  for (const std::uint64_t p : {2, 3, 5, 7}) {
    for (unsigned k = 2; k <= 3; ++k) {
      const auto [even, odd] = local_factor_E_definition(p, k, full_degree(k)).evaluate_diagonal(Rational(1, p));
      EXPECT_EQ(odd, 0);
      EXPECT_EQ(even, local_factor_exact(p, k, FactorVariant::definition));
      for (const auto r : kReadings) {
        const auto [e2, o2] = local_factor_E_expansion(p, k, full_degree(k), r).evaluate_diagonal(Rational(1, p));
        EXPECT_EQ(o2, 0);
        EXPECT_EQ(e2, local_factor_exact(p, k, FactorVariant::middle_expansion, r)) << p << " " << k;
      }
    }
  }
}

TEST(LocalValues, HighPrecisionMatchesExact) {
  for (const std::uint64_t p : {2, 3, 5, 11, 101, 7919}) {
    for (unsigned k = 2; k <= 6; ++k) {
      for (const auto v : kVariants) {
        for (const auto r : kReadings) {
          const Rational exact = local_factor_exact(p, k, v, r);
          const HighFloat high = local_factor_high(p, k, v, r);
          const HighFloat diff = abs(high - HighFloat(exact));
          EXPECT_LT(diff, HighFloat("1e-44") * (1 + abs(high))) << p << " " << k << " " << to_string(v);
        }
      }
    }
  }
}

TEST(EulerPartial, HandProductToSeven) {
  EXPECT_EQ(euler_partial_exact("e1", 2, FactorVariant::definition, 7), Rational(1, 2));
  EXPECT_EQ(euler_partial_exact("z2", 2, FactorVariant::closed_form, 7), Rational(1, 2));
  EXPECT_EQ(e1_local_factor(2), Rational(2, 3));
  EXPECT_EQ(euler_partial_exact("z3", 3, FactorVariant::definition, 1), Rational(4));
}

TEST(EulerConstant, MatchesExactPartialProduct) {
  for (const auto v : kVariants) {
    const auto c = euler_constant("hk0", 4, v, 1000);
    const Rational exact = euler_partial_exact("hk0", 4, v, 1000);
    EXPECT_LT(abs(c.value - HighFloat(exact)), HighFloat("1e-40")) << to_string(v);
    EXPECT_LE(abs(c.value - HighFloat(exact)), c.rounding_bound + HighFloat("1e-48"));
  }
}

TEST(EulerConstant, TailBoundCoversLongerProduct) {
  for (unsigned k = 2; k <= 5; ++k) {
    for (const auto v : kVariants) {
      for (const auto r : kReadings) {
        const auto shorter = euler_constant("hk0", k, v, 1000, 1, r);
        const auto longer = euler_constant("hk0", k, v, 200000, 1, r);
        EXPECT_LE(abs(shorter.value - longer.value), shorter.tail_bound)
            << k << " " << to_string(v) << " " << to_string(r);
        if (shorter.value != 0) {
          EXPECT_GT(shorter.tail_bound, 0) << k << " " << to_string(v) << " " << to_string(r);
        }
      }
    }
  }
}

TEST(EulerConstant, IndependentOfWorkers) {
  const auto a = euler_constant("z3", 3, FactorVariant::definition, 3'000'000, 1);
  const auto b = euler_constant("z3", 3, FactorVariant::definition, 3'000'000, 4);
  EXPECT_EQ(a.value, b.value);
  EXPECT_EQ(a.prime_count, 216816u);
}

TEST(EulerConstant, ZTwoAgainstDoubleProduct) {
  double product = 1.0;
  for (const std::uint32_t p : small_primes(1'000'000)) product *= 1.0 - 2.0 / (double(p) * (double(p) + 1.0));
  const auto c = euler_constant("z2", 2, FactorVariant::definition, 1'000'000);
  EXPECT_NEAR(static_cast<double>(c.value), product, 1e-12);
  EXPECT_EQ(c.k, 2u);
  EXPECT_EQ(c.prefactor, 1);
  const auto z3 = euler_constant("z3", 3, FactorVariant::definition, 1000);
  EXPECT_EQ(z3.prefactor, 4);
  EXPECT_EQ(z3.k, 3u);
}

TEST(EulerConstant, Errors) {
  EXPECT_THROW(euler_constant("zeta", 2, FactorVariant::definition, 1000), InvalidArgument);
  EXPECT_THROW(euler_constant("z2", 2, FactorVariant::definition, 999), InvalidArgument);
  EXPECT_THROW(euler_constant("hk0", 7, FactorVariant::definition, 1000), InvalidArgument);
  EXPECT_THROW(euler_constant("hk0", 1, FactorVariant::definition, 1000), InvalidArgument);
  EXPECT_THROW(local_factor_F(1, 2, 4), InvalidArgument);
}

TEST(Variants, Parsing) {
  EXPECT_EQ(parse_factor_variant("paper-closed-form"), FactorVariant::closed_form);
  EXPECT_EQ(parse_factor_variant("paper-middle-expansion"), FactorVariant::middle_expansion);
  for (const auto v : kVariants) EXPECT_EQ(parse_factor_variant(to_string(v)), v);
  for (const auto r : kReadings) EXPECT_EQ(parse_pair_reading(to_string(r)), r);
  EXPECT_THROW(parse_factor_variant("closed"), InvalidArgument);
  EXPECT_THROW(parse_pair_reading("sorted"), InvalidArgument);
  EXPECT_EQ(binomial(6, 2), 15u);
  EXPECT_EQ(binomial(4, 5), 0u);
  EXPECT_EQ(pair_count(5), 10u);
}
