#include <gtest/gtest.h>

#include "qmoments/arith_sieves.hpp"
#include "qmoments/errors.hpp"
#include "qmoments/moment_engine.hpp"

using namespace qmoments;

namespace {

const SieveTables& tables() {
  static const SieveTables t = SieveTables::build(100000);
  return t;
}

std::uint64_t powmod(std::uint64_t b, std::uint64_t e, std::uint64_t m) {
  std::uint64_t r = 1;
  b %= m;
  while (e) {
    if (e & 1) r = r * b % m;
    b = b * b % m;
    e >>= 1;
  }
  return r;
}

// (8d/p) by Euler's criterion.
int legendre_8d(std::uint64_t d, std::uint64_t p) {
  const std::uint64_t a = 8 * d % p;
  if (a == 0) return 0;
  return powmod(a, (p - 1) / 2, p) == 1 ? 1 : -1;
}

// sum_{n <= y} mu(n) chi_{8d}(n) by factoring each n.
std::int64_t oracle_inner(std::uint64_t d, std::uint64_t y) {
  std::int64_t total = 0;
  for (std::uint64_t n = 1; n <= y; n += 2) {
    std::uint64_t m = n;
    int term = 1;
    for (std::uint64_t p = 3; p <= m; p += 2) {
      if (m % p) continue;
      m /= p;
      if (m % p == 0) {
        term = 0;
        break;
      }
      term *= -legendre_8d(d, p);
    }
    total += term;
  }
  return total;
}

bool odd_squarefree(std::uint64_t d) {
  if (d % 2 == 0) return false;
  for (std::uint64_t p = 3; p * p <= d; p += 2) {
    if (d % (p * p) == 0) return false;
  }
  return true;
}

BigInt oracle_moment(unsigned k, std::uint64_t x, std::uint64_t y) {
  BigInt total = 0;
  for (std::uint64_t d = 1; d <= x; d += 2) {
    if (!odd_squarefree(d)) continue;
    BigInt s = oracle_inner(d, y);
    BigInt p = 1;
    for (unsigned i = 0; i < k; ++i) p *= s;
    total += p;
  }
  return total;
}

}  // namespace

TEST(Moment, MatchesIndependentOracle) {
  for (const unsigned k : {2u, 3u, 4u, 5u}) {
    for (const auto& [x, y] : {std::pair{1ull, 1ull}, {50ull, 7ull}, {300ull, 15ull}, {1000ull, 5ull}}) {
      EXPECT_EQ(moment(k, x, y, tables()).value, oracle_moment(k, x, y)) << k << " " << x << " " << y;
    }
  }
  EXPECT_EQ(moment(2, 1000, 5, tables()).value, BigInt(1012));
}

TEST(Moment, InnerSumPaths) {
  for (const std::uint64_t y : {1, 2, 17, 400}) {
    const InnerSumPlan plan(y, tables());
    for (std::uint64_t d = 1; d <= 2000; d += 2) {
      if (!odd_squarefree(d)) continue;
      const auto ref = inner_sum(d, y, tables());
      ASSERT_EQ(plan.evaluate(d), ref) << d << " " << y;
      if (d < 200) { ASSERT_EQ(ref, oracle_inner(d, y)) << d << " " << y; }
    }
  }
}

TEST(Moment, RearrangementIdentity) {
  struct Case {
    unsigned k;
    std::uint64_t x, y;
  };
  for (const Case c : {Case{2, 500, 12}, Case{3, 300, 8}, Case{2, 20000, 40}, Case{4, 2000, 9}, Case{3, 1, 5}}) {
    EXPECT_EQ(moment(c.k, c.x, c.y, tables()).value, moment_via_rearrangement(c.k, c.x, c.y, tables()))
        << c.k << " " << c.x << " " << c.y;
  }
  EXPECT_THROW(moment_via_rearrangement(6, 1000, 5000, tables()), ResourceLimit);
}

TEST(Moment, IndependentOfWorkersAndBlocks) {
  const auto ref = moment(3, 300000, 40, tables());
  for (const unsigned w : {1u, 2u, 5u}) {
    for (const std::uint64_t block : {std::uint64_t{64}, std::uint64_t{9999}, std::uint64_t{1} << 22}) {
      const auto r = moment(3, 300000, 40, tables(), {w, block});
      EXPECT_EQ(r.value, ref.value) << w << " " << block;
      EXPECT_EQ(r.d_count, ref.d_count);
    }
  }
}

TEST(Moment, CountsOddSquarefreeD) {
  std::uint64_t count = 0;
  for (std::uint64_t d = 1; d <= 54321; d += 2) count += odd_squarefree(d);
  EXPECT_EQ(moment(2, 54321, 3, tables()).d_count, count);
}

TEST(Moment, LargeValuesUseBigIntegers) {
  // Y^k beyond 2^62 switches accumulation type
  const auto small = moment(8, 2000, 300, tables());
  EXPECT_EQ(small.value, oracle_moment(8, 2000, 300));
}

TEST(Moment, Errors) {
  EXPECT_THROW(moment(1, 10, 5, tables()), InvalidArgument);
  EXPECT_THROW(moment(2, 10, 200000, tables()), InvalidArgument);
  EXPECT_THROW(moment(2, kMaxMomentX + 1, 5, tables()), ResourceLimit);
  EXPECT_THROW(moment(2, 100, 5, tables(), {1, 0}), InvalidArgument);
}

TEST(Moment, YRule) {
  EXPECT_EQ(default_y_rule(10000), 10u);
  EXPECT_EQ(default_y_rule(9999), 9u);
  EXPECT_EQ(default_y_rule(10'000'000), 56u);
}

TEST(Moment, ConvergenceRows) {
  const std::vector<std::uint64_t> xs{1000, 20000};
  const std::vector<CandidateConstant> cands{{"one", 1.0}, {"half", 0.5}};
  const auto rows = convergence_experiment(2, xs, default_y_rule, cands, tables());
  ASSERT_EQ(rows.size(), 2u);
  for (const auto& r : rows) {
    EXPECT_EQ(r.y, default_y_rule(r.x));
    EXPECT_EQ(r.s_k, moment(2, r.x, r.y, tables()).value);
    const double base = static_cast<double>(r.s_k) / (double(r.x) * double(r.y));
    EXPECT_DOUBLE_EQ(r.ratios[0], base);
    EXPECT_DOUBLE_EQ(r.ratios[1], base / 0.5);
  }
}
