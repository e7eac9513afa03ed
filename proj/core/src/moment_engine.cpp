#include "qmoments/moment_engine.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>

#include "qmoments/char_engine.hpp"
#include "qmoments/errors.hpp"
#include "qmoments/parallel.hpp"

namespace qmoments {
namespace {

constexpr std::size_t kMaxResidueEntries = std::size_t{1} << 22;

std::vector<std::uint32_t> odd_primes_up_to(std::uint64_t bound, const SieveTables& tables) {
  std::vector<std::uint32_t> out;
  if (bound <= tables.limit()) {
    for (const std::uint32_t p : tables.primes()) {
      if (p > bound) break;
      if (p != 2) out.push_back(p);
    }
  } else {
    for (const std::uint32_t p : small_primes(static_cast<std::uint32_t>(bound))) {
      if (p != 2) out.push_back(p);
    }
  }
  return out;
}

// |inner|^k fits comfortably when the bound is below 2^62; otherwise return 0.
std::uint64_t power_bound(std::uint64_t y, unsigned k) {
  unsigned __int128 acc = 1;
  for (unsigned i = 0; i < k; ++i) {
    acc *= y;
    if (acc > (std::uint64_t{1} << 62)) return 0;
  }
  return static_cast<std::uint64_t>(acc);
}

struct BlockPartial {
  BigInt sum;
  std::uint64_t count = 0;
};

BigInt from_int128(__int128 v) {
  const bool negative = v < 0;
  unsigned __int128 u = negative ? -static_cast<unsigned __int128>(v) : static_cast<unsigned __int128>(v);
  BigInt out = BigInt(static_cast<std::uint64_t>(u >> 64));
  out <<= 64;
  out += BigInt(static_cast<std::uint64_t>(u));
  return negative ? BigInt(-out) : out;
}

}  // namespace

std::int64_t inner_sum(std::uint64_t d, std::uint64_t y, const SieveTables& tables) {
  if (y == 0) {
    if (d == 0 || (d & 1U) == 0 || squarefree_kernel(d, tables) != d) {
      throw InvalidArgument("d must be odd and square-free");
    }
    return 0;
  }
  const auto chi = char_vector(d, y, tables);
  std::int64_t total = 0;
  for (std::uint64_t n = 1; n <= y; ++n) total += tables.mobius(n) * chi[n - 1];
  return total;
}

InnerSumPlan::InnerSumPlan(std::uint64_t y, const SieveTables& tables) : y_(y) {
  if (y > tables.limit()) throw InvalidArgument("Y exceeds the sieve limit");
  std::vector<std::uint32_t> index_of_n(y + 1, 0);
  std::vector<std::uint32_t> index_of_prime(y + 1, 0);
  std::size_t count = 1;  // n = 1 occupies slot 0
  for (std::uint64_t n = 3; n <= y; n += 2) {
    if (!tables.is_squarefree(n)) continue;
    const std::uint32_t p = tables.spf(n);
    if (p == n) {
      index_of_prime[n] = static_cast<std::uint32_t>(odd_primes_.size());
      odd_primes_.push_back(p);
    }
    index_of_n[n] = static_cast<std::uint32_t>(count++);
    prime_of_.push_back(index_of_prime[p]);
    cofactor_of_.push_back(n / p == 1 ? 0 : index_of_n[n / p]);
  }

  std::size_t total = 0;
  for (const std::uint32_t p : odd_primes_) total += p;
  if (total <= kMaxResidueEntries) {
    residue_symbols_.reserve(total);
    for (const std::uint32_t p : odd_primes_) {
      residue_offset_.push_back(residue_symbols_.size());
      for (std::uint32_t r = 0; r < p; ++r) {
        residue_symbols_.push_back(static_cast<std::int8_t>(kronecker(8 * std::uint64_t{r}, p)));
      }
    }
  }
}

std::int64_t InnerSumPlan::evaluate(std::uint64_t d) const {
  thread_local std::vector<std::int8_t> minus_chi;
  thread_local std::vector<std::int8_t> values;
  minus_chi.resize(odd_primes_.size());
  values.resize(prime_of_.size() + 1);
  if (!residue_symbols_.empty()) {
    for (std::size_t i = 0; i < odd_primes_.size(); ++i) {
      minus_chi[i] = static_cast<std::int8_t>(-residue_symbols_[residue_offset_[i] + d % odd_primes_[i]]);
    }
  } else {
    for (std::size_t i = 0; i < odd_primes_.size(); ++i) {
      minus_chi[i] = static_cast<std::int8_t>(-kronecker(8 * d, odd_primes_[i]));
    }
  }
  values[0] = 1;
  std::int64_t total = y_ >= 1 ? 1 : 0;
  for (std::size_t j = 0; j < prime_of_.size(); ++j) {
    const std::int8_t v = static_cast<std::int8_t>(minus_chi[prime_of_[j]] * values[cofactor_of_[j]]);
    values[j + 1] = v;
    total += v;
  }
  return total;
}

MomentResult moment(unsigned k, std::uint64_t x, std::uint64_t y, const SieveTables& tables,
                    const MomentOptions& options) {
  if (k < 2) throw InvalidArgument("moment order k must be at least 2");
  if (x == 0) throw InvalidArgument("X must be positive");
  if (x > kMaxMomentX) throw ResourceLimit("X exceeds the supported range");
  if (y > tables.limit()) throw InvalidArgument("Y exceeds the sieve limit");
  if (options.block == 0) throw InvalidArgument("block size must be positive");

  const auto start = std::chrono::steady_clock::now();
  const InnerSumPlan plan(y, tables);
  const auto odd_primes = odd_primes_up_to(integer_root(x, 2), tables);
  const std::uint64_t max_power = power_bound(y, k);
  // Per-block __int128 accumulation is exact while block * Y^k < 2^126.
  const bool narrow = max_power != 0 && options.block <= (std::uint64_t{1} << 62);

  const std::uint64_t blocks = (x + options.block) / options.block;
  const auto partials = parallel_map(blocks, options.workers, [&](std::size_t b) {
    BlockPartial part;
    const std::uint64_t lo = b * options.block;
    const std::uint64_t hi = std::min(x + 1, lo + options.block);
    if (narrow) {
      __int128 acc = 0;
      for_each_odd_squarefree(lo, hi, odd_primes, [&](std::uint64_t d) {
        const std::int64_t s = plan.evaluate(d);
        std::int64_t p = 1;
        for (unsigned i = 0; i < k; ++i) p *= s;
        acc += p;
        ++part.count;
      });
      part.sum = from_int128(acc);
    } else {
      for_each_odd_squarefree(lo, hi, odd_primes, [&](std::uint64_t d) {
        part.sum += boost::multiprecision::pow(BigInt(plan.evaluate(d)), k);
        ++part.count;
      });
    }
    return part;
  });

  MomentResult result;
  result.k = k;
  result.x = x;
  result.y = y;
  result.worker_count = std::max(1u, options.workers);
  for (const auto& part : partials) {
    result.value += part.sum;
    result.d_count += part.count;
  }
  result.runtime_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return result;
}

BigInt moment_via_rearrangement(unsigned k, std::uint64_t x, std::uint64_t y,
                                const SieveTables& tables, unsigned workers) {
  if (k < 2) throw InvalidArgument("moment order k must be at least 2");
  if (y > tables.limit()) throw InvalidArgument("Y exceeds the sieve limit");

  std::vector<std::uint64_t> support;
  for (std::uint64_t n = 1; n <= y; ++n) {
    if (tables.mobius(n) != 0) support.push_back(n);
  }
  std::uint64_t tuples = 1;
  for (unsigned i = 0; i < k; ++i) {
    tuples *= support.size();
    if (tuples > kMaxRearrangementTuples) {
      throw ResourceLimit("rearranged sum would enumerate more than 2^24 tuples");
    }
  }
  if (support.empty()) return BigInt(0);
  if (power_bound(y, k) == 0) throw ResourceLimit("tuple products exceed 62 bits");

  // Group tuples by their product: coefficient[N] = sum of prod mu(n_i).
  std::map<std::uint64_t, std::int64_t> coefficient{{1, 1}};
  for (unsigned i = 0; i < k; ++i) {
    std::map<std::uint64_t, std::int64_t> next;
    for (const auto& [product, c] : coefficient) {
      for (const std::uint64_t n : support) next[product * n] += c * tables.mobius(n);
    }
    coefficient.swap(next);
  }

  BigInt total = 0;
  for (const auto& [product, c] : coefficient) {
    if (c == 0 || (product & 1U) == 0) continue;  // (8d/N) = 0 for even N
    const auto t = char_sum(x, product, tables, workers);
    total += BigInt(c) * BigInt(t.value);
  }
  return total;
}

std::uint64_t default_y_rule(std::uint64_t x) { return integer_root(x, 4); }

std::vector<ConvergenceRow> convergence_experiment(unsigned k, const std::vector<std::uint64_t>& x_list,
                                                   const YRule& y_rule,
                                                   const std::vector<CandidateConstant>& candidates,
                                                   const SieveTables& tables,
                                                   const MomentOptions& options) {
  std::vector<ConvergenceRow> rows;
  for (const std::uint64_t x : x_list) {
    const std::uint64_t y = y_rule ? y_rule(x) : default_y_rule(x);
    const auto m = moment(k, x, y, tables, options);
    ConvergenceRow row;
    row.x = x;
    row.y = y;
    row.s_k = m.value;
    row.d_count = m.d_count;
    row.runtime_ms = m.runtime_ms;
    const double s = m.value.convert_to<double>();
    const double scale = static_cast<double>(x) * std::pow(static_cast<double>(y), k / 2.0);
    for (const auto& c : candidates) row.ratios.push_back(s / (c.value * scale));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace qmoments
