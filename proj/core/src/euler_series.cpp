#include "qmoments/euler_series.hpp"

#include <bit>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "qmoments/arith_sieves.hpp"
#include "qmoments/errors.hpp"
#include "qmoments/parallel.hpp"

namespace qmoments {
namespace {

using Exponents = TruncatedSeries::Exponents;

std::vector<std::pair<unsigned, unsigned>> index_pairs(unsigned k) {
  std::vector<std::pair<unsigned, unsigned>> out;
  for (unsigned i = 0; i < k; ++i) {
    for (unsigned j = i + 1; j < k; ++j) out.emplace_back(i, j);
  }
  return out;
}

Exponents pair_exponents(std::pair<unsigned, unsigned> pair) {
  Exponents e{};
  e[pair.first] = 1;
  e[pair.second] = 1;
  return e;
}

Exponents mask_exponents(unsigned mask) {
  Exponents e{};
  for (unsigned j = 0; j < TruncatedSeries::kMaxVariables; ++j) e[j] = (mask >> j) & 1U;
  return e;
}

std::vector<unsigned> even_nonempty_masks(unsigned k) {
  std::vector<unsigned> out;
  for (unsigned mask = 1; mask < (1U << k); ++mask) {
    if (std::popcount(mask) % 2 == 0) out.push_back(mask);
  }
  return out;
}

void require_k(unsigned k) {
  if (k < 2 || k > TruncatedSeries::kMaxVariables) throw InvalidArgument("k must be in 2..6");
}

void require_prime_like(std::uint64_t p) {
  if (p < 2) throw InvalidArgument("local factors need a prime p >= 2");
}

struct NamedConstant {
  unsigned k;
  bool single_variable;
  unsigned prefactor;
};

NamedConstant resolve_name(const std::string& name, unsigned k) {
  if (name == "z2") return {2, false, 1};
  if (name == "z3") return {3, false, 4};
  if (name == "e1") return {2, true, 1};
  if (name == "hk0") {
    require_k(k);
    return {k, false, 1};
  }
  throw InvalidArgument("unknown constant '" + name + "' (expected z2, z3, hk0 or e1)");
}

// Multiplicity of an l-element pair collection under each reading.
double pair_collection_count(unsigned q, unsigned l, PairReading reading) {
  return reading == PairReading::unordered ? static_cast<double>(binomial(q, l))
                                           : std::pow(static_cast<double>(q), l);
}

// Constant C with |log factor(p)| <= C / p^2 for every prime p > cutoff.
double tail_constant(const NamedConstant& nc, FactorVariant variant, PairReading reading,
                     std::uint64_t cutoff) {
  const double cut = static_cast<double>(cutoff);
  if (nc.single_variable) return 2.0 / (1.0 - 2.0 / (cut * cut));
  const unsigned k = nc.k;
  const double q = pair_count(k);
  if (variant == FactorVariant::definition) {
    // log F <= a - q u <= B u^2 and log F + q log(1-u) >= -2q u^2 - a^2/2, a <= (q+B)u.
    double b = 0.0;
    for (unsigned h = 2; 2 * h <= k; ++h) b += static_cast<double>(binomial(k, 2 * h));
    return 2.0 * q + 0.5 * (q + b) * (q + b);
  }
  double m = q;
  for (unsigned h = 1; 2 * h <= k; ++h) {
    for (unsigned l = 1; l <= q; ++l) {
      const double mult = variant == FactorVariant::closed_form
                              ? 1.0
                              : pair_collection_count(static_cast<unsigned>(q), l, reading);
      m += static_cast<double>(binomial(k, 2 * h)) * mult * std::pow(cut, -double(h + l) + 2.0);
    }
  }
  return m / (1.0 - m / (cut * cut));
}

}  // namespace

unsigned pair_count(unsigned k) { return k * (k - 1) / 2; }

std::uint64_t binomial(unsigned n, unsigned r) {
  if (r > n) return 0;
  std::uint64_t out = 1;
  for (unsigned i = 1; i <= r; ++i) out = out * (n - r + i) / i;
  return out;
}

std::string to_string(FactorVariant variant) {
  switch (variant) {
    case FactorVariant::definition:
      return "definition";
    case FactorVariant::closed_form:
      return "closed-form";
    case FactorVariant::middle_expansion:
      return "middle-expansion";
  }
  return "definition";
}

FactorVariant parse_factor_variant(const std::string& text) {
  if (text == "definition") return FactorVariant::definition;
  if (text == "closed-form" || text == "paper-closed-form") return FactorVariant::closed_form;
  if (text == "middle-expansion" || text == "paper-middle-expansion") {
    return FactorVariant::middle_expansion;
  }
  throw InvalidArgument("unknown factor variant '" + text + "'");
}

std::string to_string(PairReading reading) {
  return reading == PairReading::unordered ? "unordered" : "ordered";
}

PairReading parse_pair_reading(const std::string& text) {
  if (text == "unordered") return PairReading::unordered;
  if (text == "ordered") return PairReading::ordered;
  throw InvalidArgument("pair reading must be 'unordered' or 'ordered'");
}

TruncatedSeries local_factor_F(std::uint64_t p, unsigned k, unsigned degree_cap) {
  require_k(k);
  require_prime_like(p);
  auto out = TruncatedSeries::constant(k, degree_cap, Rational(1));
  const Rational c(p, p + 1);
  for (const unsigned mask : even_nonempty_masks(k)) out.add_term(mask_exponents(mask), c);
  return out;
}

TruncatedSeries local_factor_E_definition(std::uint64_t p, unsigned k, unsigned degree_cap) {
  auto out = local_factor_F(p, k, degree_cap);
  for (const auto& pair : index_pairs(k)) {
    auto factor = TruncatedSeries::constant(k, degree_cap, Rational(1));
    factor.add_term(pair_exponents(pair), Rational(-1));
    out = out * factor;
  }
  return out;
}

TruncatedSeries local_factor_E_expansion(std::uint64_t p, unsigned k, unsigned degree_cap,
                                         PairReading reading) {
  require_k(k);
  require_prime_like(p);
  const auto pairs = index_pairs(k);
  const auto masks = even_nonempty_masks(k);
  const Rational weight(p, p + 1);

  auto out = TruncatedSeries::constant(k, degree_cap, Rational(1));
  for (const auto& pair : pairs) out.add_term(pair_exponents(pair), Rational(-1, p + 1));

  auto emit = [&](const Exponents& j_sum, unsigned l) {
    const Rational c = (l % 2 == 0) ? weight : Rational(-weight);
    for (const unsigned mask : masks) {
      Exponents e = mask_exponents(mask);
      for (std::size_t v = 0; v < e.size(); ++v) e[v] = static_cast<std::uint8_t>(e[v] + j_sum[v]);
      out.add_term(e, c);
    }
  };

  const auto q = static_cast<unsigned>(pairs.size());
  for (unsigned l = 1; l <= q && 2 + 2 * l <= degree_cap; ++l) {
    // Walk all pair collections of size l; each contributes degree 2l.
    auto walk = [&](auto&& self, unsigned depth, std::size_t start, Exponents acc) -> void {
      if (depth == l) {
        emit(acc, l);
        return;
      }
      const std::size_t first = reading == PairReading::unordered ? start : 0;
      for (std::size_t i = first; i < pairs.size(); ++i) {
        Exponents next = acc;
        ++next[pairs[i].first];
        ++next[pairs[i].second];
        self(self, depth + 1, i + 1, next);
      }
    };
    walk(walk, 0, 0, Exponents{});
  }
  return out;
}

TruncatedSeries pair_geometric_inverse(unsigned k, unsigned degree_cap) {
  require_k(k);
  auto out = TruncatedSeries::constant(k, degree_cap, Rational(1));
  for (const auto& pair : index_pairs(k)) {
    TruncatedSeries geometric(k, degree_cap);
    for (unsigned m = 0; 2 * m <= degree_cap; ++m) {
      Exponents e{};
      e[pair.first] = static_cast<std::uint8_t>(m);
      e[pair.second] = static_cast<std::uint8_t>(m);
      geometric.add_term(e, Rational(1));
    }
    out = out * geometric;
  }
  return out;
}

TruncatedSeries single_variable_E_factor(std::uint64_t p, unsigned degree_cap) {
  require_prime_like(p);
  auto out = TruncatedSeries::constant(1, degree_cap, Rational(1));
  out.add_term(Exponents{1}, Rational(-1, p + 1));
  out.add_term(Exponents{2}, Rational(-static_cast<std::int64_t>(p), p + 1));
  return out;
}

TruncatedSeries collapse_pair_product(const TruncatedSeries& series) {
  if (series.variables() != 2) throw InvalidArgument("collapse needs a two-variable series");
  TruncatedSeries out(1, series.degree_cap() / 2);
  for (const auto& [e, c] : series.terms()) {
    if (e[0] != e[1]) throw InvalidArgument("monomial is not a power of z1*z2");
    out.add_term(Exponents{e[0]}, c);
  }
  return out;
}

Rational e1_local_factor(std::uint64_t p) {
  require_prime_like(p);
  return Rational(1) - Rational(1, (p + 1) * p) - Rational(p, (p + 1) * p * p);
}

Rational local_factor_exact(std::uint64_t p, unsigned k, FactorVariant variant, PairReading reading) {
  require_k(k);
  require_prime_like(p);
  const unsigned q = pair_count(k);
  const Rational u(1, p);
  auto u_pow = [&](unsigned e) {
    Rational r(1);
    for (unsigned i = 0; i < e; ++i) r *= u;
    return r;
  };

  if (variant == FactorVariant::definition) {
    // F at z_j = p^{-1/2}: every even subset v contributes p/(p+1) p^{-|v|/2}.
    Rational f(1);
    for (const unsigned mask : even_nonempty_masks(k)) {
      f += Rational(p, p + 1) * u_pow(static_cast<unsigned>(std::popcount(mask)) / 2);
    }
    Rational pairs(1);
    for (unsigned i = 0; i < q; ++i) pairs *= Rational(1) - u;
    return f * pairs;
  }

  Rational value = Rational(1) - Rational(q) / Rational(p * (p + 1));
  for (unsigned h = 1; 2 * h <= k; ++h) {
    for (unsigned l = 1; l <= q; ++l) {
      Rational mult(1);
      if (variant == FactorVariant::middle_expansion) {
        mult = reading == PairReading::unordered ? Rational(binomial(q, l))
                                                 : boost::multiprecision::pow(BigInt(q), l);
      }
      Rational term = mult * Rational(binomial(k, 2 * h)) * u_pow(h + l - 1) / Rational(p + 1);
      value += (l % 2 == 0) ? term : Rational(-term);
    }
  }
  return value;
}

HighFloat local_factor_high(std::uint64_t p, unsigned k, FactorVariant variant, PairReading reading) {
  require_k(k);
  const unsigned q = pair_count(k);
  const HighFloat pf(p);
  const HighFloat u = HighFloat(1) / pf;
  const HighFloat inv_p1 = HighFloat(1) / (pf + 1);
  // a = sum_h C(k,2h) u^{h-1}
  HighFloat a = 0;
  for (unsigned h = k / 2; h >= 1; --h) a = a * u + HighFloat(binomial(k, 2 * h));
  switch (variant) {
    case FactorVariant::definition:
      return (HighFloat(1) + a * inv_p1) * boost::multiprecision::pow(HighFloat(1) - u, q);
    case FactorVariant::closed_form: {
      const HighFloat s = -u * (HighFloat(1) - boost::multiprecision::pow(-u, q)) / (HighFloat(1) + u);
      return HighFloat(1) - HighFloat(q) * u * inv_p1 + a * s * inv_p1;
    }
    case FactorVariant::middle_expansion: {
      HighFloat s;
      if (reading == PairReading::unordered) {
        s = boost::multiprecision::pow(HighFloat(1) - u, q) - 1;
      } else {
        const HighFloat r = -HighFloat(q) * u;
        s = r * (HighFloat(1) - boost::multiprecision::pow(r, q)) / (HighFloat(1) - r);
      }
      return HighFloat(1) - HighFloat(q) * u * inv_p1 + a * s * inv_p1;
    }
  }
  return HighFloat(1);
}

EulerConstant euler_constant(const std::string& name, unsigned k, FactorVariant variant,
                             std::uint64_t prime_cutoff, unsigned workers, PairReading reading) {
  const NamedConstant nc = resolve_name(name, k);
  if (prime_cutoff < kMinPrimeCutoff) throw InvalidArgument("prime cutoff must be at least 1000");
  if (prime_cutoff >= (std::uint64_t{1} << 32)) throw ResourceLimit("prime cutoff beyond 2^32");

  const auto primes = small_primes(static_cast<std::uint32_t>(prime_cutoff));
  constexpr std::size_t kPrimesPerBlock = std::size_t{1} << 15;
  const std::size_t blocks = (primes.size() + kPrimesPerBlock - 1) / kPrimesPerBlock;
  const auto partials = parallel_map(blocks, workers, [&](std::size_t b) {
    HighFloat prod = 1;
    const std::size_t end = std::min(primes.size(), (b + 1) * kPrimesPerBlock);
    for (std::size_t i = b * kPrimesPerBlock; i < end; ++i) {
      const std::uint64_t p = primes[i];
      if (nc.single_variable) {
        const HighFloat pf(p);
        prod *= HighFloat(1) - HighFloat(2) / (pf * (pf + 1));
      } else {
        prod *= local_factor_high(p, nc.k, variant, reading);
      }
    }
    return prod;
  });

  EulerConstant out;
  out.name = name;
  out.k = nc.k;
  out.variant = nc.single_variable ? FactorVariant::definition : variant;
  out.reading = reading;
  out.prime_cutoff = prime_cutoff;
  out.prime_count = primes.size();
  out.prefactor = nc.prefactor;
  HighFloat product = 1;
  for (const auto& part : partials) product *= part;
  out.value = out.prefactor * product;

  out.tail_constant = tail_constant(nc, out.variant, reading, prime_cutoff);
  const HighFloat abs_value = boost::multiprecision::abs(out.value);
  out.tail_bound =
      abs_value * (boost::multiprecision::exp(HighFloat(out.tail_constant) / HighFloat(prime_cutoff)) - 1);
  // Each local factor costs at most ~32 correctly rounded operations and
  // each product step one more; errors compound linearly to first order.
  const HighFloat eps = std::numeric_limits<HighFloat>::epsilon();
  out.rounding_bound = abs_value * eps * HighFloat(34.0 * static_cast<double>(primes.size()) + 8.0);
  return out;
}

Rational euler_partial_exact(const std::string& name, unsigned k, FactorVariant variant,
                             std::uint64_t prime_cutoff, PairReading reading) {
  const NamedConstant nc = resolve_name(name, k);
  Rational value(nc.prefactor);
  if (prime_cutoff < 2) return value;
  for (const std::uint32_t p : small_primes(static_cast<std::uint32_t>(prime_cutoff))) {
    value *= nc.single_variable ? e1_local_factor(p) : local_factor_exact(p, nc.k, variant, reading);
  }
  return value;
}

}  // namespace qmoments
