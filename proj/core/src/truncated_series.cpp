#include "qmoments/truncated_series.hpp"

#include <sstream>

#include "qmoments/errors.hpp"

namespace qmoments {

unsigned total_degree(const TruncatedSeries::Exponents& e) {
  unsigned d = 0;
  for (const auto v : e) d += v;
  return d;
}

TruncatedSeries::TruncatedSeries(unsigned variables, unsigned degree_cap)
    : variables_(variables), degree_cap_(degree_cap) {
  if (variables == 0 || variables > kMaxVariables) {
    throw InvalidArgument("series supports 1..6 variables");
  }
}

TruncatedSeries TruncatedSeries::constant(unsigned variables, unsigned degree_cap, const Rational& c) {
  TruncatedSeries s(variables, degree_cap);
  s.add_term(Exponents{}, c);
  return s;
}

TruncatedSeries TruncatedSeries::monomial(unsigned variables, unsigned degree_cap,
                                          const Exponents& e, const Rational& c) {
  TruncatedSeries s(variables, degree_cap);
  s.add_term(e, c);
  return s;
}

Rational TruncatedSeries::coefficient(const Exponents& e) const {
  const auto it = terms_.find(e);
  return it == terms_.end() ? Rational(0) : it->second;
}

void TruncatedSeries::add_term(const Exponents& e, const Rational& c) {
  for (std::size_t j = variables_; j < kMaxVariables; ++j) {
    if (e[j] != 0) throw InvalidArgument("exponent on a variable the series does not have");
  }
  if (total_degree(e) > degree_cap_ || c == 0) return;
  auto [it, inserted] = terms_.try_emplace(e, c);
  if (!inserted) {
    it->second += c;
    if (it->second == 0) terms_.erase(it);
  }
}

int TruncatedSeries::min_nonconstant_degree() const {
  int best = -1;
  for (const auto& [e, c] : terms_) {
    const int d = static_cast<int>(total_degree(e));
    if (d > 0 && (best < 0 || d < best)) best = d;
  }
  return best;
}

std::pair<Rational, Rational> TruncatedSeries::evaluate_diagonal(const Rational& t_squared) const {
  Rational even(0);
  Rational odd(0);
  for (const auto& [e, c] : terms_) {
    const unsigned d = total_degree(e);
    Rational power(1);
    for (unsigned i = 0; i < d / 2; ++i) power *= t_squared;
    if (d % 2 == 0) {
      even += c * power;
    } else {
      odd += c * power;
    }
  }
  return {even, odd};
}

void TruncatedSeries::check_compatible(const TruncatedSeries& other) const {
  if (variables_ != other.variables_ || degree_cap_ != other.degree_cap_) {
    throw InvalidArgument("series differ in variable count or degree cap");
  }
}

TruncatedSeries& TruncatedSeries::operator+=(const TruncatedSeries& other) {
  check_compatible(other);
  for (const auto& [e, c] : other.terms_) add_term(e, c);
  return *this;
}

TruncatedSeries& TruncatedSeries::operator-=(const TruncatedSeries& other) {
  check_compatible(other);
  for (const auto& [e, c] : other.terms_) add_term(e, -c);
  return *this;
}

TruncatedSeries operator*(const TruncatedSeries& a, const TruncatedSeries& b) {
  a.check_compatible(b);
  TruncatedSeries out(a.variables_, a.degree_cap_);
  for (const auto& [ea, ca] : a.terms_) {
    const unsigned da = total_degree(ea);
    for (const auto& [eb, cb] : b.terms_) {
      if (da + total_degree(eb) > a.degree_cap_) continue;
      TruncatedSeries::Exponents e{};
      for (std::size_t j = 0; j < TruncatedSeries::kMaxVariables; ++j) {
        e[j] = static_cast<std::uint8_t>(ea[j] + eb[j]);
      }
      out.add_term(e, ca * cb);
    }
  }
  return out;
}

bool operator==(const TruncatedSeries& a, const TruncatedSeries& b) {
  return a.variables_ == b.variables_ && a.degree_cap_ == b.degree_cap_ && a.terms_ == b.terms_;
}

std::string TruncatedSeries::to_string() const {
  if (terms_.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  for (const auto& [e, c] : terms_) {
    if (!first) os << " + ";
    first = false;
    os << '(' << qmoments::to_string(c) << ')';
    for (unsigned j = 0; j < variables_; ++j) {
      if (e[j] == 1) os << "*z" << (j + 1);
      if (e[j] > 1) os << "*z" << (j + 1) << '^' << unsigned{e[j]};
    }
  }
  return os.str();
}

}  // namespace qmoments
