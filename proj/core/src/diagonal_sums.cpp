#include "qmoments/diagonal_sums.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "qmoments/errors.hpp"
#include "qmoments/parallel.hpp"

namespace qmoments {
namespace {

bool admissible(std::uint64_t n, Parity parity, const SieveTables& tables) {
  if (parity == Parity::odd && (n & 1U) == 0) return false;
  return tables.is_squarefree(n);
}

// mu(n)^2 prod_{p | n} p/(p+1) for n <= y, zero outside the parity class.
std::vector<Rational> exact_weights(std::uint64_t y, Parity parity, const SieveTables& tables) {
  std::vector<Rational> w(y + 1, Rational(0));
  if (y >= 1) w[1] = 1;
  for (std::uint64_t n = 2; n <= y; ++n) {
    if (!admissible(n, parity, tables)) continue;
    const std::uint32_t p = tables.spf(n);
    w[n] = Rational(p, p + 1) * w[n / p];
  }
  return w;
}

std::vector<double> float_weights(std::uint64_t y, Parity parity, const SieveTables& tables) {
  std::vector<double> w(y + 1, 0.0);
  if (y >= 1) w[1] = 1.0;
  for (std::uint64_t n = 2; n <= y; ++n) {
    if (!admissible(n, parity, tables)) continue;
    const std::uint32_t p = tables.spf(n);
    w[n] = (static_cast<double>(p) / (p + 1.0)) * w[n / p];
  }
  return w;
}

void require_limit(std::uint64_t y, const SieveTables& tables) {
  if (y > tables.limit()) throw InvalidArgument("Y exceeds the sieve limit");
}

// Neumaier compensated accumulator.
struct CompensatedSum {
  long double sum = 0.0L;
  long double carry = 0.0L;
  void add(long double v) {
    const long double t = sum + v;
    if (std::fabs(sum) >= std::fabs(v)) {
      carry += (sum - t) + v;
    } else {
      carry += (v - t) + sum;
    }
    sum = t;
  }
  long double value() const { return sum + carry; }
};

}  // namespace

std::string to_string(Parity parity) { return parity == Parity::all ? "all" : "odd"; }

Parity parse_parity(const std::string& text) {
  if (text == "all") return Parity::all;
  if (text == "odd") return Parity::odd;
  throw InvalidArgument("parity must be 'all' or 'odd', got '" + text + "'");
}

std::string to_string(DiagonalMethod method) {
  return method == DiagonalMethod::structured ? "structured" : "bruteforce";
}

DiagonalMethod parse_diagonal_method(const std::string& text) {
  if (text == "structured") return DiagonalMethod::structured;
  if (text == "bruteforce") return DiagonalMethod::bruteforce;
  throw InvalidArgument("method must be 'structured' or 'bruteforce', got '" + text + "'");
}

Rational f_value(std::span<const std::uint64_t> tuple, const SieveTables& tables) {
  std::map<std::uint64_t, unsigned> multiplicity;
  int sign = 1;
  for (std::uint64_t n : tuple) {
    if (n == 0) throw InvalidArgument("tuple entries must be positive");
    for (const std::uint64_t p : prime_divisors(n, tables)) {
      n /= p;
      if (n % p == 0) return Rational(0);  // mu(n_i) = 0
      sign = -sign;
      ++multiplicity[p];
    }
  }
  Rational weight(sign);
  for (const auto& [p, count] : multiplicity) {
    if (count % 2 != 0) return Rational(0);  // product is not a square
    weight *= Rational(p, p + 1);
  }
  return weight;
}

DiagonalSum d2_sum(std::uint64_t y, Parity parity, const SieveTables& tables) {
  require_limit(y, tables);
  const auto w = exact_weights(y, parity, tables);
  DiagonalSum out{2, y, parity, Rational(0), DiagonalMethod::structured};
  for (std::uint64_t n = 1; n <= y; ++n) {
    if (w[n] != 0) out.value += w[n];
  }
  return out;
}

DiagonalSum d3_sum(std::uint64_t y, Parity parity, const SieveTables& tables) {
  require_limit(y, tables);
  if (y > kMaxExactD3) throw ResourceLimit("exact D_3 enumeration capped at Y = 20000");
  const auto w = exact_weights(y, parity, tables);
  DiagonalSum out{3, y, parity, Rational(0), DiagonalMethod::structured};
  for (std::uint64_t a = 1; a <= y; ++a) {
    if (w[a] == 0) continue;
    for (std::uint64_t b = 1; a * b <= y; ++b) {
      if (w[b] == 0 || std::gcd(a, b) != 1) continue;
      const std::uint64_t ab = a * b;
      const std::uint64_t c_max = y / std::max(a, b);
      Rational c_sum(0);
      for (std::uint64_t c = 1; c <= c_max; ++c) {
        if (w[c] != 0 && std::gcd(c, ab) == 1) c_sum += w[c];
      }
      out.value += w[a] * w[b] * c_sum;
    }
  }
  return out;
}

DiagonalSum dk_sum_generic(unsigned k, std::uint64_t y, Parity parity, const SieveTables& tables) {
  if (k < 2 || k > 6) throw InvalidArgument("generic diagonal sum supports 2 <= k <= 6");
  require_limit(y, tables);
  if (std::pow(static_cast<double>(y), k / 2.0) > 2.5e7) {
    throw ResourceLimit("generic diagonal enumeration too large (need y^{k/2} <= 2.5e7)");
  }
  const auto w = exact_weights(y, parity, tables);

  std::vector<unsigned> subsets;
  for (unsigned mask = 1; mask < (1U << k); ++mask) {
    const int size = __builtin_popcount(mask);
    if (size >= 2 && size % 2 == 0) subsets.push_back(mask);
  }

  DiagonalSum out{k, y, parity, Rational(0), DiagonalMethod::structured};
  std::vector<std::uint64_t> n(k, 1);
  // used = product of all values assigned so far (square-free, pairwise coprime).
  auto visit = [&](auto&& self, std::size_t index, std::uint64_t used, const Rational& weight) -> void {
    if (index == subsets.size()) {
      out.value += weight;
      return;
    }
    const unsigned mask = subsets[index];
    std::uint64_t bound = y;
    for (unsigned j = 0; j < k; ++j) {
      if (mask & (1U << j)) bound = std::min(bound, y / n[j]);
    }
    for (std::uint64_t v = 1; v <= bound; ++v) {
      if (w[v] == 0 || std::gcd(v, used) != 1) continue;
      for (unsigned j = 0; j < k; ++j) {
        if (mask & (1U << j)) n[j] *= v;
      }
      self(self, index + 1, used * v, v == 1 ? weight : weight * w[v]);
      for (unsigned j = 0; j < k; ++j) {
        if (mask & (1U << j)) n[j] /= v;
      }
    }
  };
  if (y >= 1) visit(visit, 0, 1, Rational(1));
  return out;
}

DiagonalSum dk_sum_bruteforce(unsigned k, std::uint64_t y, Parity parity, const SieveTables& tables) {
  if (k < 1 || k > 6) throw InvalidArgument("brute-force diagonal sum supports 1 <= k <= 6");
  require_limit(y, tables);
  std::vector<std::uint64_t> support;
  for (std::uint64_t n = 1; n <= y; ++n) {
    if (admissible(n, parity, tables)) support.push_back(n);
  }
  if (std::pow(static_cast<double>(support.size()), k) > 4.0e9) {
    throw ResourceLimit("brute-force enumeration exceeds 4e9 tuples");
  }
  // y^r for the kernel bound; saturates well above any reachable kernel.
  std::vector<std::uint64_t> bound(k + 1, 1);
  for (unsigned r = 1; r <= k; ++r) {
    bound[r] = bound[r - 1] > (std::uint64_t{1} << 62) / std::max<std::uint64_t>(y, 1)
                   ? (std::uint64_t{1} << 62)
                   : bound[r - 1] * y;
  }

  DiagonalSum out{k, y, parity, Rational(0), DiagonalMethod::bruteforce};
  std::vector<std::uint64_t> tuple(k, 0);
  auto visit = [&](auto&& self, unsigned depth, std::uint64_t kernel) -> void {
    if (depth == k) {
      if (kernel == 1) out.value += f_value(tuple, tables);
      return;
    }
    for (const std::uint64_t n : support) {
      const std::uint64_t g = std::gcd(kernel, n);
      const std::uint64_t next = (kernel / g) * (n / g);
      // The remaining k - depth - 1 entries must supply every prime of next.
      if (next > bound[k - depth - 1]) continue;
      tuple[depth] = n;
      self(self, depth + 1, next);
    }
  };
  visit(visit, 0, 1);
  return out;
}

DiagonalSum diagonal_sum(unsigned k, std::uint64_t y, Parity parity, DiagonalMethod method,
                         const SieveTables& tables) {
  if (method == DiagonalMethod::bruteforce) return dk_sum_bruteforce(k, y, parity, tables);
  if (k == 2) return d2_sum(y, parity, tables);
  if (k == 3) return d3_sum(y, parity, tables);
  return dk_sum_generic(k, y, parity, tables);
}

std::vector<double> d2_prefix(std::span<const std::uint64_t> checkpoints, Parity parity,
                              const SieveTables& tables) {
  if (!std::is_sorted(checkpoints.begin(), checkpoints.end())) {
    throw InvalidArgument("checkpoints must be ascending");
  }
  std::vector<double> out;
  if (checkpoints.empty()) return out;
  require_limit(checkpoints.back(), tables);
  const auto w = float_weights(checkpoints.back(), parity, tables);
  CompensatedSum acc;
  std::size_t next = 0;
  for (std::uint64_t n = 0; n <= checkpoints.back() && next < checkpoints.size(); ++n) {
    if (n > 0) acc.add(w[n]);
    while (next < checkpoints.size() && checkpoints[next] == n) {
      out.push_back(static_cast<double>(acc.value()));
      ++next;
    }
  }
  return out;
}

double d3_sum_fast(std::uint64_t y, Parity parity, const SieveTables& tables, unsigned workers) {
  require_limit(y, tables);
  if (y == 0) return 0.0;
  const auto w = float_weights(y, parity, tables);
  std::vector<long double> prefix(y + 1, 0.0L);
  for (std::uint64_t n = 1; n <= y; ++n) prefix[n] = prefix[n - 1] + w[n];

  auto primes_of = [&](std::uint64_t n, std::vector<std::uint32_t>& out) {
    while (n > 1) {
      const std::uint32_t p = tables.spf(n);
      out.push_back(p);
      n /= p;
    }
  };

  // a <= b by symmetry (a = b only at a = b = 1), so a <= sqrt(y).
  const std::uint64_t a_max = integer_root(y, 2);
  const auto partials = parallel_map(a_max, workers, [&](std::size_t i) -> long double {
    const std::uint64_t a = i + 1;
    if (w[a] == 0.0) return 0.0L;
    std::vector<std::uint32_t> primes;
    std::vector<std::uint32_t> a_primes;
    primes_of(a, a_primes);
    CompensatedSum acc;
    for (std::uint64_t b = a; a * b <= y; ++b) {
      if (w[b] == 0.0 || std::gcd(a, b) != 1) continue;
      primes = a_primes;
      primes_of(b, primes);
      const std::uint64_t c_max = y / b;
      // sum over square-free c <= c_max coprime to ab, by
      // H_m(L) = sum_{e | m^infinity} prod (-w(p))^{v_p(e)} H_1(L / e).
      long double c_sum = 0.0L;
      auto expand = [&](auto&& self, std::size_t idx, std::uint64_t e, long double coef) -> void {
        if (idx == primes.size()) {
          c_sum += coef * prefix[c_max / e];
          return;
        }
        self(self, idx + 1, e, coef);
        const std::uint64_t p = primes[idx];
        const long double step = -static_cast<long double>(w[p]);
        long double c = coef;
        for (std::uint64_t pe = e * p; pe <= c_max; pe *= p) {
          c *= step;
          self(self, idx + 1, pe, c);
        }
      };
      expand(expand, 0, 1, 1.0L);
      const long double term = static_cast<long double>(w[a]) * w[b] * c_sum;
      acc.add(a == b ? term : 2.0L * term);
    }
    return acc.value();
  });
  CompensatedSum total;
  for (const long double part : partials) total.add(part);
  return static_cast<double>(total.value());
}

std::vector<DiagonalTrendRow> diagonal_ratio_trend(unsigned k, std::span<const std::uint64_t> y_list,
                                                   Parity parity,
                                                   const std::vector<CandidateConstant>& candidates,
                                                   const SieveTables& tables, unsigned workers) {
  if (k != 3) {
    throw Unsupported("diagonal trend needs k = 3; larger k has a non-constant leading polynomial");
  }
  if (!std::is_sorted(y_list.begin(), y_list.end())) throw InvalidArgument("y_list must be ascending");
  std::vector<DiagonalTrendRow> rows;
  for (const std::uint64_t y : y_list) {
    DiagonalTrendRow row;
    row.y = y;
    if (y <= 2000) {
      const auto exact = d3_sum(y, parity, tables);
      row.exact = true;
      row.value_text = to_string(exact.value);
      row.value = to_double(exact.value);
    } else {
      row.value = d3_sum_fast(y, parity, tables, workers);
      row.value_text = format_double(row.value);
    }
    row.normalized = row.value / std::pow(static_cast<double>(y), 1.5);
    for (const auto& c : candidates) row.ratios.push_back(row.normalized / c.value);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace qmoments
