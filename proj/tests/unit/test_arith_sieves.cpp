#include <gtest/gtest.h>

#include <random>
#include <set>
#include <sstream>

#include "qmoments/arith_sieves.hpp"
#include "qmoments/errors.hpp"

using namespace qmoments;

namespace {

int trial_mobius(std::uint64_t n) {
  int mu = 1;
  for (std::uint64_t p = 2; p * p <= n; ++p) {
    if (n % p) continue;
    n /= p;
    if (n % p == 0) return 0;
    mu = -mu;
  }
  return n > 1 ? -mu : mu;
}

bool is_prime(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t p = 2; p * p <= n; ++p) {
    if (n % p == 0) return false;
  }
  return true;
}

std::string cache_bytes(const SieveTables& t) {
  std::ostringstream out(std::ios::binary);
  t.save(out);
  return out.str();
}

}  // namespace

TEST(Sieve, SmallMobius) {
  const auto t = SieveTables::build(6);
  const int want[] = {1, -1, -1, 0, -1, 1};
  for (int n = 1; n <= 6; ++n) EXPECT_EQ(t.mobius(n), want[n - 1]) << n;
  EXPECT_EQ(SieveTables::build(4).mobius(4), 0);
}

TEST(Sieve, PrimesToTen) {
  const auto t = SieveTables::build(10);
  const std::vector<std::uint32_t> got(t.primes().begin(), t.primes().end());
  EXPECT_EQ(got, (std::vector<std::uint32_t>{2, 3, 5, 7}));
  EXPECT_EQ(t.prime_count(10), 4u);
}

TEST(Sieve, RejectsBadLimits) {
  EXPECT_THROW(SieveTables::build(0), InvalidArgument);
  EXPECT_THROW(SieveTables::build(1), InvalidArgument);
  EXPECT_THROW(SieveTables::build(1000, 999), ResourceLimit);
}

TEST(Sieve, MobiusMatchesTrialDivision) {
  const auto t = SieveTables::build(100000);
  for (std::uint64_t n = 1; n <= 100000; ++n) ASSERT_EQ(t.mobius(n), trial_mobius(n)) << n;
}

TEST(Sieve, TableInvariants) {
  const auto t = SieveTables::build(5000);
  std::vector<int> divisor_sum(5001, 0);
  for (std::uint64_t d = 1; d <= 5000; ++d) {
    for (std::uint64_t m = d; m <= 5000; m += d) divisor_sum[m] += t.mobius(d);
  }
  for (std::uint64_t n = 1; n <= 5000; ++n) {
    EXPECT_EQ(divisor_sum[n], n == 1 ? 1 : 0) << n;
    EXPECT_EQ(t.mobius(n) == 0, !t.is_squarefree(n)) << n;
    if (n >= 2) {
      EXPECT_TRUE(is_prime(t.spf(n))) << n;
      EXPECT_EQ(n % t.spf(n), 0u) << n;
      if (is_prime(n)) { EXPECT_EQ(t.spf(n), n); }
    }
  }
}

TEST(Kronecker, SpecExamples) {
  EXPECT_EQ(kronecker(8, 3), -1);
  EXPECT_EQ(kronecker(24, 5), 1);
  for (std::uint64_t d = 1; d < 50; ++d) EXPECT_EQ(kronecker(8 * d, 2), 0);
  for (std::uint64_t a = 0; a < 50; ++a) EXPECT_EQ(kronecker(a, 1), 1);
  EXPECT_THROW(kronecker(3, 0), InvalidArgument);
}

TEST(Kronecker, MatchesResidueSets) {
  std::mt19937_64 rng(7);
  const auto primes = small_primes(10000);
  for (int trial = 0; trial < 60; ++trial) {
    const std::uint32_t p = primes[1 + rng() % (primes.size() - 1)];
    std::set<std::uint64_t> residues;
    for (std::uint64_t i = 1; i < p; ++i) residues.insert(i * i % p);
    for (std::uint64_t a = 1; a < p; ++a) {
      ASSERT_EQ(kronecker(a, p), residues.count(a) ? 1 : -1) << a << " mod " << p;
    }
  }
}

TEST(Kronecker, SupplementAtTwo) {
  // (a/2) = 0 for even a, 1 for a = +-1 mod 8, -1 for a = +-3 mod 8
  for (std::uint64_t a = 0; a < 200; ++a) {
    const int want = a % 2 == 0 ? 0 : (a % 8 == 1 || a % 8 == 7) ? 1 : -1;
    EXPECT_EQ(kronecker(a, 2), want) << a;
  }
}

TEST(Kronecker, CompletelyMultiplicative) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 3000; ++trial) {
    const std::uint64_t a = rng() % 1000;
    const std::uint64_t b = rng() % 1000;
    const std::uint64_t m = 1 + rng() % 1000;
    const std::uint64_t n = 1 + rng() % 1000;
    ASSERT_EQ(kronecker(a * b, n), kronecker(a, n) * kronecker(b, n));
    ASSERT_EQ(kronecker(a, m * n), kronecker(a, m) * kronecker(a, n));
  }
}

TEST(Kernel, Examples) {
  const auto t = SieveTables::build(100);
  EXPECT_EQ(squarefree_kernel(12, t), 3u);
  EXPECT_EQ(squarefree_kernel(36, t), 1u);
  EXPECT_EQ(squarefree_kernel(1, t), 1u);
  EXPECT_THROW(squarefree_kernel(0, t), InvalidArgument);
}

TEST(Kernel, StripsSquares) {
  const auto t = SieveTables::build(100000);
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::uint64_t m = 1 + rng() % 300;
    std::uint64_t s = 1 + rng() % 5000;
    while (trial_mobius(s) == 0) s = 1 + rng() % 5000;
    ASSERT_EQ(squarefree_kernel(m * m * s, t), s);
  }
}

TEST(Kernel, PrimeDivisorsBeyondLimit) {
  const auto t = SieveTables::build(100);
  EXPECT_EQ(prime_divisors(97 * 89, t), (std::vector<std::uint64_t>{89, 97}));
  EXPECT_EQ(prime_divisors(2 * 2 * 3 * 829, t), (std::vector<std::uint64_t>{2, 3, 829}));
  EXPECT_THROW(prime_divisors(10007ULL * 10009ULL, t), InvalidArgument);
}

TEST(Cache, RoundTrip) {
  const auto t = SieveTables::build(3000);
  std::istringstream in(cache_bytes(t), std::ios::binary);
  const auto u = SieveTables::load(in);
  ASSERT_EQ(u.limit(), t.limit());
  for (std::uint64_t n = 1; n <= 3000; ++n) {
    ASSERT_EQ(u.mobius(n), t.mobius(n));
    ASSERT_EQ(u.is_squarefree(n), t.is_squarefree(n));
    if (n >= 2) { ASSERT_EQ(u.spf(n), t.spf(n)); }
  }
  EXPECT_TRUE(std::equal(u.primes().begin(), u.primes().end(), t.primes().begin(), t.primes().end()));
}

TEST(Cache, ByteLayout) {
  const std::string bytes = cache_bytes(SieveTables::build(10));
  ASSERT_EQ(bytes.size(), 5u + 8u + 10u + 2u + 4u * 9u);
  EXPECT_EQ(bytes.substr(0, 5), "QMSV1");
  EXPECT_EQ(static_cast<unsigned char>(bytes[5]), 10u);
  for (int i = 6; i < 13; ++i) EXPECT_EQ(bytes[i], 0);
  const int mobius[] = {1, -1, -1, 0, -1, 1, -1, 0, 0, 1};
  for (int n = 1; n <= 10; ++n) EXPECT_EQ(static_cast<signed char>(bytes[12 + n]), mobius[n - 1]);
  // square-free bits for 1..8 then 9..10, least significant bit first
  EXPECT_EQ(static_cast<unsigned char>(bytes[23]), 0b01110111u);
  EXPECT_EQ(static_cast<unsigned char>(bytes[24]), 0b10u);
  EXPECT_EQ(static_cast<unsigned char>(bytes[25]), 2u);  // spf(2)
}

TEST(Cache, RejectsBadInput) {
  std::string bytes = cache_bytes(SieveTables::build(100));
  std::string wrong = bytes;
  wrong[0] = 'X';
  std::istringstream a(wrong, std::ios::binary);
  EXPECT_THROW(SieveTables::load(a), InvalidArgument);

  for (const std::size_t cut : {3ul, 9ul, 60ul, bytes.size() - 1}) {
    std::istringstream b(bytes.substr(0, cut), std::ios::binary);
    EXPECT_THROW(SieveTables::load(b), InvalidArgument) << cut;
  }

  std::string flipped = bytes;
  flipped[13 + 3] = 1;  // mobius(4) = 1 contradicts the flags
  std::istringstream c(flipped, std::ios::binary);
  EXPECT_THROW(SieveTables::load(c), InvalidArgument);
}
