#pragma once

// Shared numeric vocabulary: exact integers and rationals backed by GMP,
// and a 50-digit binary float backed by MPFR.

#include <cstdint>
#include <string>

#include <boost/multiprecision/gmp.hpp>
#include <boost/multiprecision/mpfr.hpp>

namespace qmoments {

using BigInt = boost::multiprecision::number<boost::multiprecision::gmp_int,
                                             boost::multiprecision::et_off>;
using Rational = boost::multiprecision::number<boost::multiprecision::gmp_rational,
                                               boost::multiprecision::et_off>;
using HighFloat = boost::multiprecision::number<boost::multiprecision::mpfr_float_backend<50>,
                                                boost::multiprecision::et_off>;

/// Decimal digits carried by HighFloat.
inline constexpr int kHighFloatDigits = 50;

/// 1/zeta(2) = 6/pi^2 to 20 digits, applied to exact rational parts at comparison time.
inline constexpr double kInvZeta2 = 0.60792710185402662866;

/// Decimal string of a big integer.
std::string to_string(const BigInt& value);

/// "num/den" (or "num" when the denominator is 1).
std::string to_string(const Rational& value);

/// Locale-independent shortest round-trip form with 17 significant digits.
std::string format_double(double value);

/// Decimal string with `digits` significant digits.
std::string format_high(const HighFloat& value, int digits = 30);

/// Parses "num/den" or "num"; throws InvalidArgument on malformed input.
Rational parse_rational(const std::string& text);

double to_double(const Rational& value);

/// floor(x^(1/r)) computed exactly for 64-bit x.
std::uint64_t integer_root(std::uint64_t x, unsigned r);

}  // namespace qmoments
