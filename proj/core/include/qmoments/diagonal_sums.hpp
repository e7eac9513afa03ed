#pragma once

// The multivariable weight f(n_1..n_k) = prod mu(n_i) * prod_{p | n_1..n_k} p/(p+1)
// * [n_1...n_k is a square], and its diagonal sums D_k(Y).

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "qmoments/arith_sieves.hpp"
#include "qmoments/moment_engine.hpp"
#include "qmoments/numeric.hpp"

namespace qmoments {

enum class Parity { all, odd };
enum class DiagonalMethod { structured, bruteforce };

std::string to_string(Parity parity);
Parity parse_parity(const std::string& text);
std::string to_string(DiagonalMethod method);
DiagonalMethod parse_diagonal_method(const std::string& text);

struct DiagonalSum {
  unsigned k = 0;
  std::uint64_t y = 0;
  Parity parity = Parity::all;
  Rational value;
  DiagonalMethod method = DiagonalMethod::structured;
};

/// Exact f(n_1, ..., n_k). Every n_i must be positive and <= limit^2.
Rational f_value(std::span<const std::uint64_t> tuple, const SieveTables& tables);

/// Exact sum_{n <= y} mu(n)^2 prod_{p | n} p/(p+1), odd n only for Parity::odd.
DiagonalSum d2_sum(std::uint64_t y, Parity parity, const SieveTables& tables);

/// Cap on y for the exact structured k = 3 enumeration.
inline constexpr std::uint64_t kMaxExactD3 = 20000;

/// Exact D_3(y) over pairwise-coprime square-free (a, b, c) with
/// (n_1, n_2, n_3) = (ab, ac, bc).
DiagonalSum d3_sum(std::uint64_t y, Parity parity, const SieveTables& tables);

/// Exact D_k(y) for 2 <= k <= 6 by assigning pairwise-coprime square-free
/// values y_S to the even-size subsets S of {1..k}, n_j = prod_{S containing j} y_S.
DiagonalSum dk_sum_generic(unsigned k, std::uint64_t y, Parity parity, const SieveTables& tables);

/// Brute-force oracle: lexicographic square-free k-tuples with kernel
/// pruning, each surviving tuple weighted by f_value.
DiagonalSum dk_sum_bruteforce(unsigned k, std::uint64_t y, Parity parity, const SieveTables& tables);

/// Dispatches to the structured routine for k (d2, d3, or generic) or the
/// brute-force oracle.
DiagonalSum diagonal_sum(unsigned k, std::uint64_t y, Parity parity, DiagonalMethod method,
                         const SieveTables& tables);

/// Floating D_2 evaluated at ascending checkpoints in a single pass with
/// compensated summation. Non-authoritative fast path for large y.
std::vector<double> d2_prefix(std::span<const std::uint64_t> checkpoints, Parity parity,
                              const SieveTables& tables);

/// Floating D_3(y). Sums over coprime pairs (a, b) and evaluates the c-sum
/// through prefix sums of mu^2(c) prod p/(p+1) with inclusion-exclusion over
/// the primes of ab. Parallel over a; deterministic for any worker count.
double d3_sum_fast(std::uint64_t y, Parity parity, const SieveTables& tables, unsigned workers = 1);

struct DiagonalTrendRow {
  std::uint64_t y = 0;
  bool exact = false;
  std::string value_text;  // exact "num/den" or a 17-digit decimal
  double value = 0.0;
  double normalized = 0.0;  // D_3 / y^{3/2}
  std::vector<double> ratios;  // normalized / candidate
};

/// D_3(y) / y^{3/2} along y_list against candidate limit constants. Only
/// k = 3 is supported because the normalization assumes a constant leading
/// polynomial. Exact values are used up to kMaxExactD3.
std::vector<DiagonalTrendRow> diagonal_ratio_trend(unsigned k, std::span<const std::uint64_t> y_list,
                                                   Parity parity,
                                                   const std::vector<CandidateConstant>& candidates,
                                                   const SieveTables& tables, unsigned workers = 1);

}  // namespace qmoments
