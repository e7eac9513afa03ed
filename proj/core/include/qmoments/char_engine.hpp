#pragma once

// The quadratic characters chi_{8d}(n) = (8d/n) and their averages over odd
// square-free d.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "qmoments/arith_sieves.hpp"
#include "qmoments/numeric.hpp"

namespace qmoments {

/// T(z, n) = sum over odd square-free d <= z of (8d/n), with the square-case
/// main term kept as an exact rational until comparison time.
struct CharSumResult {
  std::uint64_t z = 0;
  std::uint64_t n = 0;
  std::int64_t value = 0;
  bool is_square = false;
  /// z * prod_{p | 2n} p/(p+1); present only when n is an odd square.
  std::optional<Rational> predicted_main;
  /// value - (6/pi^2) * predicted_main; zero-filled when not a square.
  double residual = 0.0;

  /// (6/pi^2) * predicted_main, or 0 when absent.
  double main_term() const;
};

/// chi_{8d}(n) for n = 1..y (index 0 holds n = 1). Prime values come from
/// one Kronecker evaluation each and are extended multiplicatively through
/// the spf table. Requires d odd and square-free, y <= tables.limit().
std::vector<std::int8_t> char_vector(std::uint64_t d, std::uint64_t y, const SieveTables& tables);

/// Exact T(z, n). Parallel over disjoint d-ranges; the result does not depend
/// on `workers`. Even n short-circuits to 0.
CharSumResult char_sum(std::uint64_t z, std::uint64_t n, const SieveTables& tables,
                       unsigned workers = 1);

/// The same sum by a direct double loop with one Kronecker evaluation per d.
/// Reference path for tests.
std::int64_t char_sum_direct(std::uint64_t z, std::uint64_t n);

/// prod_{p | m} p/(p+1) as an exact rational.
Rational prime_weight(std::uint64_t m, const SieveTables& tables);

struct SquareReportRow {
  std::uint64_t z = 0;
  std::uint64_t m = 0;
  std::uint64_t n = 0;  // m^2
  std::int64_t value = 0;
  double main = 0.0;
  double residual = 0.0;
  double normalized_residual = 0.0;  // residual / z^0.6
};

struct SquareReport {
  std::vector<SquareReportRow> rows;
  double max_abs_normalized = 0.0;
};

/// Normalization exponent applied to square-case residuals.
inline constexpr double kSquareResidualExponent = 0.6;

/// Square-case table for n = m^2, m odd square-free, m <= m_max. An explicit
/// `ms` list overrides the m_max enumeration.
SquareReport square_case_report(std::uint64_t z, std::uint64_t m_max, const SieveTables& tables,
                                unsigned workers = 1, std::span<const std::uint64_t> ms = {});

struct NonSquareReportRow {
  std::uint64_t z = 0;
  std::uint64_t n = 0;
  std::int64_t value = 0;
  double ratio = 0.0;  // |value| / (z^{1/2} n^{1/4} log(2n))
};

struct NonSquareReport {
  std::vector<NonSquareReportRow> rows;
  double max_ratio = 0.0;
  /// Max ratio per z, in the order of the z list.
  std::vector<std::pair<std::uint64_t, double>> max_ratio_by_z;
};

/// Non-square-case table over the grid z_list x n_list. Every n must be odd
/// and not a perfect square (InvalidArgument otherwise).
NonSquareReport nonsquare_case_report(std::span<const std::uint64_t> z_list,
                                      std::span<const std::uint64_t> n_list,
                                      const SieveTables& tables, unsigned workers = 1);

/// Default grid: z in {10^3, 10^4, 10^5, 10^6}.
std::vector<std::uint64_t> default_z_grid();
/// Default grid: odd non-square n in [3, 225].
std::vector<std::uint64_t> default_nonsquare_n_grid();

}  // namespace qmoments
