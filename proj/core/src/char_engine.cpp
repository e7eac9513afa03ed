#include "qmoments/char_engine.hpp"

#include <algorithm>
#include <cmath>

#include "qmoments/errors.hpp"
#include "qmoments/parallel.hpp"

namespace qmoments {
namespace {

constexpr std::uint64_t kBlock = std::uint64_t{1} << 20;
constexpr std::uint64_t kMaxResidueTable = std::uint64_t{1} << 24;

bool is_perfect_square(std::uint64_t n) {
  const std::uint64_t r = integer_root(n, 2);
  return r * r == n;
}

std::vector<std::uint32_t> odd_primes_through(std::uint64_t bound, const SieveTables& tables) {
  std::vector<std::uint32_t> out;
  if (bound <= tables.limit()) {
    for (const std::uint32_t p : tables.primes()) {
      if (p > bound) break;
      if (p != 2) out.push_back(p);
    }
    return out;
  }
  for (const std::uint32_t p : small_primes(static_cast<std::uint32_t>(bound))) {
    if (p != 2) out.push_back(p);
  }
  return out;
}

void require_odd_squarefree(std::uint64_t d, const SieveTables& tables) {
  if (d == 0 || (d & 1U) == 0) throw InvalidArgument("d must be odd and positive");
  if (squarefree_kernel(d, tables) != d) throw InvalidArgument("d must be square-free");
}

}  // namespace

double CharSumResult::main_term() const {
  return predicted_main ? kInvZeta2 * to_double(*predicted_main) : 0.0;
}

std::vector<std::int8_t> char_vector(std::uint64_t d, std::uint64_t y, const SieveTables& tables) {
  require_odd_squarefree(d, tables);
  if (y > tables.limit()) throw InvalidArgument("Y exceeds the sieve limit");
  std::vector<std::int8_t> chi(y, 0);
  if (y == 0) return chi;
  chi[0] = 1;
  const std::uint64_t top = 8 * d;
  for (std::uint64_t n = 2; n <= y; ++n) {
    const std::uint32_t p = tables.spf(n);
    if (p == n) {
      chi[n - 1] = static_cast<std::int8_t>(kronecker(top, p));
    } else {
      chi[n - 1] = static_cast<std::int8_t>(chi[p - 1] * chi[n / p - 1]);
    }
  }
  return chi;
}

Rational prime_weight(std::uint64_t m, const SieveTables& tables) {
  Rational w(1);
  for (const std::uint64_t p : prime_divisors(m, tables)) w *= Rational(p, p + 1);
  return w;
}

std::int64_t char_sum_direct(std::uint64_t z, std::uint64_t n) {
  std::int64_t total = 0;
  for (std::uint64_t d = 1; d <= z; d += 2) {
    bool squarefree = true;
    for (std::uint64_t q = 3; q * q <= d; q += 2) {
      if (d % (q * q) == 0) {
        squarefree = false;
        break;
      }
    }
    if (squarefree) total += kronecker(8 * d, n);
  }
  return total;
}

CharSumResult char_sum(std::uint64_t z, std::uint64_t n, const SieveTables& tables,
                       unsigned workers) {
  if (z == 0 || n == 0) throw InvalidArgument("z and n must be positive");
  CharSumResult result;
  result.z = z;
  result.n = n;
  result.is_square = is_perfect_square(n);
  if ((n & 1U) == 0) return result;

  // (8d/n) for odd n depends only on d mod n.
  std::vector<std::int8_t> residue;
  if (n <= kMaxResidueTable) {
    residue.resize(n);
    for (std::uint64_t r = 0; r < n; ++r) residue[r] = static_cast<std::int8_t>(kronecker(8 * r, n));
  }
  const auto odd_primes = odd_primes_through(integer_root(z, 2), tables);
  const std::uint64_t blocks = (z + kBlock) / kBlock;
  const auto partials = parallel_map(blocks, workers, [&](std::size_t b) {
    std::int64_t acc = 0;
    const std::uint64_t lo = b * kBlock;
    const std::uint64_t hi = std::min(z + 1, lo + kBlock);
    if (!residue.empty()) {
      for_each_odd_squarefree(lo, hi, odd_primes, [&](std::uint64_t d) { acc += residue[d % n]; });
    } else {
      for_each_odd_squarefree(lo, hi, odd_primes,
                              [&](std::uint64_t d) { acc += kronecker(8 * d, n); });
    }
    return acc;
  });
  for (const std::int64_t part : partials) result.value += part;

  if (result.is_square) {
    result.predicted_main = Rational(z) * prime_weight(2 * n, tables);
    result.residual = static_cast<double>(result.value) - result.main_term();
  }
  return result;
}

SquareReport square_case_report(std::uint64_t z, std::uint64_t m_max, const SieveTables& tables,
                                unsigned workers, std::span<const std::uint64_t> ms) {
  std::vector<std::uint64_t> moduli(ms.begin(), ms.end());
  if (moduli.empty()) {
    for (std::uint64_t m = 1; m <= m_max; m += 2) {
      if (squarefree_kernel(m, tables) == m) moduli.push_back(m);
    }
  }
  SquareReport report;
  const double scale = std::pow(static_cast<double>(z), kSquareResidualExponent);
  for (const std::uint64_t m : moduli) {
    if ((m & 1U) == 0) throw InvalidArgument("square-case moduli must be odd");
    const auto r = char_sum(z, m * m, tables, workers);
    SquareReportRow row{z, m, m * m, r.value, r.main_term(), r.residual, r.residual / scale};
    report.max_abs_normalized = std::max(report.max_abs_normalized, std::abs(row.normalized_residual));
    report.rows.push_back(row);
  }
  return report;
}

NonSquareReport nonsquare_case_report(std::span<const std::uint64_t> z_list,
                                      std::span<const std::uint64_t> n_list,
                                      const SieveTables& tables, unsigned workers) {
  for (const std::uint64_t n : n_list) {
    if (n == 0 || (n & 1U) == 0) throw InvalidArgument("non-square grid needs odd n");
    if (is_perfect_square(n)) {
      throw InvalidArgument("n = " + std::to_string(n) + " is a perfect square");
    }
  }
  NonSquareReport report;
  for (const std::uint64_t z : z_list) {
    double max_here = 0.0;
    for (const std::uint64_t n : n_list) {
      const auto r = char_sum(z, n, tables, workers);
      const double nd = static_cast<double>(n);
      const double denom = std::sqrt(static_cast<double>(z)) * std::pow(nd, 0.25) * std::log(2 * nd);
      const double ratio = std::abs(static_cast<double>(r.value)) / denom;
      report.rows.push_back({z, n, r.value, ratio});
      max_here = std::max(max_here, ratio);
    }
    report.max_ratio_by_z.emplace_back(z, max_here);
    report.max_ratio = std::max(report.max_ratio, max_here);
  }
  return report;
}

std::vector<std::uint64_t> default_z_grid() { return {1000, 10000, 100000, 1000000}; }

std::vector<std::uint64_t> default_nonsquare_n_grid() {
  std::vector<std::uint64_t> out;
  for (std::uint64_t n = 3; n <= 225; n += 2) {
    if (!is_perfect_square(n)) out.push_back(n);
  }
  return out;
}

}  // namespace qmoments
