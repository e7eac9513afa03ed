#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>

#include "qmoments/numeric.hpp"

namespace qmoments {

/// Multivariate polynomial in z_1..z_k (k <= 6) with exact rational
/// coefficients, truncated at total degree `degree_cap`. All arithmetic
/// drops monomials above the cap, which makes the set of such series a ring.
class TruncatedSeries {
 public:
  static constexpr std::size_t kMaxVariables = 6;
  using Exponents = std::array<std::uint8_t, kMaxVariables>;

  TruncatedSeries(unsigned variables, unsigned degree_cap);

  static TruncatedSeries constant(unsigned variables, unsigned degree_cap, const Rational& c);
  static TruncatedSeries monomial(unsigned variables, unsigned degree_cap, const Exponents& e,
                                  const Rational& c);

  unsigned variables() const { return variables_; }
  unsigned degree_cap() const { return degree_cap_; }
  const std::map<Exponents, Rational>& terms() const { return terms_; }

  Rational coefficient(const Exponents& e) const;
  /// Adds c z^e; silently ignored above the degree cap.
  void add_term(const Exponents& e, const Rational& c);

  /// Smallest total degree carrying a nonzero non-constant coefficient, or
  /// -1 when the series is constant.
  int min_nonconstant_degree() const;

  /// Evaluates at z_j = t for every j, with t^2 = t_squared supplied as a
  /// rational so that half-integer powers of primes stay exact: returns the
  /// pair (A, B) with value = A + B * t, where odd total degrees go to B.
  std::pair<Rational, Rational> evaluate_diagonal(const Rational& t_squared) const;

  TruncatedSeries& operator+=(const TruncatedSeries& other);
  TruncatedSeries& operator-=(const TruncatedSeries& other);
  friend TruncatedSeries operator+(TruncatedSeries a, const TruncatedSeries& b) { return a += b; }
  friend TruncatedSeries operator-(TruncatedSeries a, const TruncatedSeries& b) { return a -= b; }
  friend TruncatedSeries operator*(const TruncatedSeries& a, const TruncatedSeries& b);
  friend bool operator==(const TruncatedSeries& a, const TruncatedSeries& b);

  std::string to_string() const;

 private:
  void check_compatible(const TruncatedSeries& other) const;

  unsigned variables_;
  unsigned degree_cap_;
  std::map<Exponents, Rational> terms_;  // no zero coefficients stored
};

unsigned total_degree(const TruncatedSeries::Exponents& e);

}  // namespace qmoments
