#pragma once

// Basic arithmetic tables (Moebius, square-free flags, smallest prime
// factor, primes) and the Kronecker symbol.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

namespace qmoments {

/// Largest sieve limit accepted by SieveTables::build unless a caller
/// passes a larger cap explicitly. At 2^31 the tables take roughly 11 GiB.
inline constexpr std::uint64_t kDefaultSieveCap = std::uint64_t{1} << 31;

/// Immutable arithmetic tables for 1..limit. Safe to share between threads
/// once built.
class SieveTables {
 public:
  /// Linear sieve up to `limit`. Throws InvalidArgument for limit < 2 and
  /// ResourceLimit when limit exceeds `cap` or allocation fails.
  static SieveTables build(std::uint64_t limit, std::uint64_t cap = kDefaultSieveCap);

  /// Reads the binary cache format written by save(). Rejects bad magic,
  /// truncation and internally inconsistent tables with InvalidArgument.
  static SieveTables load(std::istream& in);
  static SieveTables load(const std::filesystem::path& path);

  /// Writes "QMSV1", the limit (u64 LE), mobius as signed bytes for 1..limit,
  /// square-free flags as LSB-first packed bits for 1..limit, and spf as
  /// u32 LE for 2..limit.
  void save(std::ostream& out) const;
  void save(const std::filesystem::path& path) const;

  std::uint64_t limit() const { return limit_; }

  int mobius(std::uint64_t n) const { return mobius_[n]; }
  bool is_squarefree(std::uint64_t n) const {
    return (squarefree_bits_[(n - 1) >> 6] >> ((n - 1) & 63)) & 1U;
  }
  /// Smallest prime factor, defined for 2 <= n <= limit.
  std::uint32_t spf(std::uint64_t n) const { return spf_[n]; }
  std::span<const std::uint32_t> primes() const { return primes_; }

  /// Number of primes <= x for x <= limit.
  std::size_t prime_count(std::uint64_t x) const;

 private:
  SieveTables() = default;
  void derive_squarefree_bits();

  std::uint64_t limit_ = 0;
  std::vector<std::int8_t> mobius_;            // index n, entry 0 unused
  std::vector<std::uint64_t> squarefree_bits_;  // bit n-1
  std::vector<std::uint32_t> spf_;              // index n, entries 0,1 unused
  std::vector<std::uint32_t> primes_;
};

/// Kronecker symbol (a/n) for a >= 0, n >= 1, including even n through the
/// (a/2) supplement. Completely multiplicative in n.
int kronecker(std::uint64_t a, std::uint64_t n);

/// Product of the primes dividing n to an odd power; 1 iff n is a perfect
/// square. Values above the sieve limit are factored by trial division with
/// table primes, so n must stay <= limit^2. Throws InvalidArgument for n = 0
/// or n > limit^2.
std::uint64_t squarefree_kernel(std::uint64_t n, const SieveTables& tables);

/// Distinct prime factors of n (ascending), n <= limit^2.
std::vector<std::uint64_t> prime_divisors(std::uint64_t n, const SieveTables& tables);

/// Primes up to `limit` by a plain Eratosthenes sieve; used where only a
/// short prime list is needed and full tables would be wasteful.
std::vector<std::uint32_t> small_primes(std::uint32_t limit);

/// Visits every odd square-free d in [lo, hi) in ascending order, sieving by
/// odd prime squares. `odd_primes` must contain every odd prime up to
/// sqrt(hi - 1).
template <typename Visitor>
void for_each_odd_squarefree(std::uint64_t lo, std::uint64_t hi,
                             std::span<const std::uint32_t> odd_primes, Visitor&& visit);

}  // namespace qmoments

#include "qmoments/detail/squarefree_segment.hpp"
