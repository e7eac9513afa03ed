#include <gtest/gtest.h>

#include <random>

#include "qmoments/errors.hpp"
#include "qmoments/truncated_series.hpp"

using namespace qmoments;
using E = TruncatedSeries::Exponents;

namespace {

TruncatedSeries random_series(std::mt19937_64& rng, unsigned vars, unsigned cap) {
  TruncatedSeries s(vars, cap);
  for (int i = 0; i < 8; ++i) {
    E e{};
    for (unsigned v = 0; v < vars; ++v) e[v] = static_cast<std::uint8_t>(rng() % 3);
    const auto num = static_cast<std::int64_t>(rng() % 11) - 5;
    const auto den = static_cast<std::int64_t>(1 + rng() % 6);
    s.add_term(e, Rational(num, den));
  }
  return s;
}

}  // namespace

TEST(Series, TermsAboveCapAreDropped) {
  TruncatedSeries s(2, 3);
  s.add_term(E{1, 1}, Rational(2));
  s.add_term(E{2, 2}, Rational(5));
  EXPECT_EQ(s.terms().size(), 1u);
  EXPECT_EQ(s.coefficient(E{1, 1}), Rational(2));
  EXPECT_EQ(s.coefficient(E{2, 2}), Rational(0));
  s.add_term(E{1, 1}, Rational(-2));
  EXPECT_TRUE(s.terms().empty());
}

TEST(Series, Multiplication) {
  auto a = TruncatedSeries::constant(2, 4, Rational(1));
  a.add_term(E{1, 0}, Rational(1));
  auto b = TruncatedSeries::constant(2, 4, Rational(1));
  b.add_term(E{1, 0}, Rational(-1));
  const auto c = a * b;  // 1 - z1^2
  EXPECT_EQ(c.coefficient(E{0, 0}), Rational(1));
  EXPECT_EQ(c.coefficient(E{1, 0}), Rational(0));
  EXPECT_EQ(c.coefficient(E{2, 0}), Rational(-1));
  EXPECT_EQ(c.terms().size(), 2u);

  auto geo = TruncatedSeries::constant(1, 5, Rational(1));
  for (std::uint8_t d = 1; d <= 5; ++d) geo.add_term(E{d}, Rational(1));
  auto one_minus = TruncatedSeries::constant(1, 5, Rational(1));
  one_minus.add_term(E{1}, Rational(-1));
  EXPECT_EQ(geo * one_minus, TruncatedSeries::constant(1, 5, Rational(1)));
}

TEST(Series, RingLaws) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 40; ++trial) {
    const unsigned vars = 1 + trial % 4;
    const auto a = random_series(rng, vars, 5);
    const auto b = random_series(rng, vars, 5);
    const auto c = random_series(rng, vars, 5);
    EXPECT_EQ(a * b, b * a);
    EXPECT_EQ((a * b) * c, a * (b * c));
    EXPECT_EQ(a * (b + c), a * b + a * c);
    EXPECT_EQ((a + b) - b, a);
  }
}

TEST(Series, DiagonalEvaluation) {
  TruncatedSeries s(3, 6);
  s.add_term(E{0, 0, 0}, Rational(1));
  s.add_term(E{1, 0, 0}, Rational(2));     // odd degree
  s.add_term(E{1, 1, 0}, Rational(3));     // t^2
  s.add_term(E{1, 1, 1}, Rational(-1));    // t^3
  s.add_term(E{2, 1, 1}, Rational(1, 2));  // t^4
  const auto [even, odd] = s.evaluate_diagonal(Rational(1, 4));
  EXPECT_EQ(even, Rational(1) + Rational(3, 4) + Rational(1, 32));
  EXPECT_EQ(odd, Rational(2) - Rational(1, 4));
}

TEST(Series, Degrees) {
  TruncatedSeries s(2, 6);
  EXPECT_EQ(s.min_nonconstant_degree(), -1);
  s.add_term(E{0, 0}, Rational(1));
  EXPECT_EQ(s.min_nonconstant_degree(), -1);
  s.add_term(E{2, 1}, Rational(1));
  s.add_term(E{2, 2}, Rational(1));
  EXPECT_EQ(s.min_nonconstant_degree(), 3);
  EXPECT_EQ(total_degree(E{1, 2, 3, 0, 0, 0}), 6u);
}

TEST(Series, Errors) {
  EXPECT_THROW(TruncatedSeries(0, 3), InvalidArgument);
  EXPECT_THROW(TruncatedSeries(7, 3), InvalidArgument);
  TruncatedSeries s(2, 3);
  EXPECT_THROW(s.add_term(E{0, 0, 1}, Rational(1)), InvalidArgument);
  EXPECT_THROW(s + TruncatedSeries(3, 3), InvalidArgument);
  EXPECT_THROW(s * TruncatedSeries(2, 4), InvalidArgument);
}

TEST(Series, ToString) {
  TruncatedSeries s(2, 3);
  EXPECT_FALSE(s.to_string().empty());
  s.add_term(E{1, 1}, Rational(-1, 3));
  EXPECT_NE(s.to_string().find("1/3"), std::string::npos);
}
