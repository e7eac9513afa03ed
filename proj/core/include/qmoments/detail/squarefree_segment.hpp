#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace qmoments {

template <typename Visitor>
void for_each_odd_squarefree(std::uint64_t lo, std::uint64_t hi,
                             std::span<const std::uint32_t> odd_primes, Visitor&& visit) {
  if (lo < 1) lo = 1;
  if (hi <= lo) return;
  // Only odd members of [lo, hi) are stored: slot i <-> first_odd + 2i.
  const std::uint64_t first_odd = lo | 1U;
  if (first_odd >= hi) return;
  const std::uint64_t slots = (hi - first_odd + 1) / 2;
  std::vector<std::uint8_t> keep(slots, 1);
  for (const std::uint32_t p : odd_primes) {
    if (p == 2) continue;
    const std::uint64_t sq = std::uint64_t{p} * p;
    if (sq >= hi) break;
    // First odd multiple of p^2 that is >= first_odd.
    std::uint64_t m = (first_odd + sq - 1) / sq * sq;
    if ((m & 1U) == 0) m += sq;
    for (; m < hi; m += 2 * sq) keep[(m - first_odd) / 2] = 0;
  }
  for (std::uint64_t i = 0; i < slots; ++i) {
    if (keep[i]) visit(first_odd + 2 * i);
  }
}

}  // namespace qmoments
