#pragma once

// Local factors of the Euler product attached to f, and high-precision Euler
// products for the constants built from them.

#include <cstdint>
#include <string>

#include "qmoments/numeric.hpp"
#include "qmoments/truncated_series.hpp"

namespace qmoments {

/// How the l-fold sum over pair sets J_1..J_l in the expanded local factor
/// is read: as unordered sets of distinct pairs, or as ordered tuples of
/// independently chosen pairs.
enum class PairReading { unordered, ordered };

/// Which formula supplies the local factor at z_j = p^{-1/2}.
///  - definition: F_p * prod_{i<j} (1 - z_i z_j), the exact factorization.
///  - closed_form: 1 - C(k,2)/(p(p+1)) + sum_h sum_l (-1)^l C(k,2h) / (p^{h+l-1}(p+1)).
///  - middle_expansion: the expanded product with pair sets counted per PairReading.
enum class FactorVariant { definition, closed_form, middle_expansion };

std::string to_string(FactorVariant variant);
/// Accepts "definition", "closed-form", "middle-expansion" and the
/// "paper-closed-form" / "paper-middle-expansion" spellings.
FactorVariant parse_factor_variant(const std::string& text);
std::string to_string(PairReading reading);
PairReading parse_pair_reading(const std::string& text);

/// 1 + sum over v in {0,1}^k with |v| even and >= 2 of p/(p+1) z^v.
TruncatedSeries local_factor_F(std::uint64_t p, unsigned k, unsigned degree_cap);

/// local_factor_F times prod_{i<j} (1 - z_i z_j), truncated.
TruncatedSeries local_factor_E_definition(std::uint64_t p, unsigned k, unsigned degree_cap);

/// 1 - sum_{|I|=2} z^I/(p+1) + sum_{l=1}^{C(k,2)} (-1)^l sum_{I even, J_1..J_l pairs}
/// p/(p+1) z^{I+J_1+...+J_l}, with the J's enumerated per `reading`.
TruncatedSeries local_factor_E_expansion(std::uint64_t p, unsigned k, unsigned degree_cap,
                                         PairReading reading = PairReading::unordered);

/// prod_{i<j} sum_{m >= 0} (z_i z_j)^m, truncated. Inverse of prod (1 - z_i z_j).
TruncatedSeries pair_geometric_inverse(unsigned k, unsigned degree_cap);

/// Single-variable factor 1 - w/(p+1) - p/(p+1) w^2 (one variable, w).
TruncatedSeries single_variable_E_factor(std::uint64_t p, unsigned degree_cap);

/// Maps a two-variable series in which every monomial is (z_1 z_2)^m to the
/// one-variable series in w = z_1 z_2. Throws InvalidArgument otherwise.
TruncatedSeries collapse_pair_product(const TruncatedSeries& series);

/// Exact local factor value at z_j = p^{-1/2}, straight from the defining
/// sums. Cheap enough for small p; used for exact partial products.
Rational local_factor_exact(std::uint64_t p, unsigned k, FactorVariant variant,
                            PairReading reading = PairReading::unordered);

/// The same value in HighFloat through closed geometric forms.
HighFloat local_factor_high(std::uint64_t p, unsigned k, FactorVariant variant,
                            PairReading reading = PairReading::unordered);

/// Single-variable factor evaluated at s = 1: 1 - 1/(p(p+1)) - 1/(p(p+1)).
Rational e1_local_factor(std::uint64_t p);

struct EulerConstant {
  std::string name;
  unsigned k = 0;
  FactorVariant variant = FactorVariant::definition;
  PairReading reading = PairReading::unordered;
  std::uint64_t prime_cutoff = 0;
  std::uint64_t prime_count = 0;
  HighFloat prefactor = 1;  // 4 for z3 (the k = 3 polytope constant), else 1
  HighFloat value;          // prefactor * prod_{p <= P} factor(p)
  /// |value - limit| <= tail_bound, from |log factor(p)| <= tail_constant / p^2 for p > P.
  HighFloat tail_bound;
  double tail_constant = 0.0;
  /// Bound on accumulated MPFR rounding error in value.
  HighFloat rounding_bound;
};

/// Smallest cutoff accepted by euler_constant.
inline constexpr std::uint64_t kMinPrimeCutoff = 1000;

/// Names: "z2" (k forced to 2), "z3" (k forced to 3, prefactor 4),
/// "hk0" (given k), "e1" (single-variable factor at s = 1; k = 2).
/// Throws InvalidArgument for unknown names, k outside 2..6, or P < 1000.
EulerConstant euler_constant(const std::string& name, unsigned k, FactorVariant variant,
                             std::uint64_t prime_cutoff, unsigned workers = 1,
                             PairReading reading = PairReading::unordered);

/// Exact prefactor * prod_{p <= P} factor(p); any P >= 2.
Rational euler_partial_exact(const std::string& name, unsigned k, FactorVariant variant,
                             std::uint64_t prime_cutoff, PairReading reading = PairReading::unordered);

unsigned pair_count(unsigned k);
std::uint64_t binomial(unsigned n, unsigned r);

}  // namespace qmoments
