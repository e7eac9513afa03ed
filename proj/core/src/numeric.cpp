#include "qmoments/numeric.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>

#include "qmoments/errors.hpp"

namespace qmoments {

std::string to_string(const BigInt& value) { return value.str(); }

std::string to_string(const Rational& value) {
  const BigInt num = boost::multiprecision::numerator(value);
  const BigInt den = boost::multiprecision::denominator(value);
  if (den == 1) return num.str();
  return num.str() + "/" + den.str();
}

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, 17);
  if (ec != std::errc{}) return "nan";
  return std::string(buf, end);
}

std::string format_high(const HighFloat& value, int digits) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os.precision(digits);
  os << value;
  return os.str();
}

Rational parse_rational(const std::string& text) {
  const auto slash = text.find('/');
  try {
    if (slash == std::string::npos) return Rational(BigInt(text));
    const BigInt num(text.substr(0, slash));
    const BigInt den(text.substr(slash + 1));
    if (den == 0) throw InvalidArgument("zero denominator in '" + text + "'");
    return Rational(num, den);
  } catch (const std::runtime_error&) {
    throw InvalidArgument("malformed rational '" + text + "'");
  }
}

double to_double(const Rational& value) { return value.convert_to<double>(); }

std::uint64_t integer_root(std::uint64_t x, unsigned r) {
  if (r == 0) throw InvalidArgument("root index must be positive");
  if (r == 1 || x < 2) return x;
  auto pow_le = [&](std::uint64_t b) {
    unsigned __int128 acc = 1;
    for (unsigned i = 0; i < r; ++i) {
      acc *= b;
      if (acc > x) return false;
    }
    return true;
  };
  auto guess = static_cast<std::uint64_t>(std::pow(static_cast<double>(x), 1.0 / r));
  while (guess > 0 && !pow_le(guess)) --guess;
  while (pow_le(guess + 1)) ++guess;
  return guess;
}

}  // namespace qmoments
