#include "qmoments/asymptotics.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "qmoments/errors.hpp"
#include "qmoments/parallel.hpp"

namespace qmoments {
namespace {

struct StratumSums {
  double sum = 0.0;
  double sum_sq = 0.0;
  std::uint64_t n = 0;
  std::uint64_t accepted = 0;
};

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double normalizer(unsigned k, double x) {
  const unsigned q = pair_count(k);
  return std::pow(x, 0.5 * k) * std::pow(std::log(x), static_cast<double>(q) - k);
}

}  // namespace

unsigned rational_rank(std::vector<std::vector<Rational>> rows) {
  if (rows.empty()) return 0;
  const std::size_t cols = rows.front().size();
  unsigned rank = 0;
  for (std::size_t c = 0; c < cols && rank < rows.size(); ++c) {
    std::size_t pivot = rank;
    while (pivot < rows.size() && rows[pivot][c] == 0) ++pivot;
    if (pivot == rows.size()) continue;
    std::swap(rows[pivot], rows[rank]);
    for (std::size_t r = rank + 1; r < rows.size(); ++r) {
      if (rows[r][c] == 0) continue;
      const Rational factor = rows[r][c] / rows[rank][c];
      for (std::size_t j = c; j < cols; ++j) rows[r][j] -= factor * rows[rank][j];
    }
    ++rank;
  }
  return rank;
}

PairFormMatrix build_pair_matrix(unsigned k) {
  if (k < 2) throw InvalidArgument("pair matrix needs k >= 2");
  PairFormMatrix m;
  m.k = k;
  m.q = pair_count(k);
  for (unsigned i = 0; i < k; ++i) {
    for (unsigned j = i + 1; j < k; ++j) {
      std::vector<int> col(k, 0);
      col[i] = 1;
      col[j] = 1;
      m.columns.push_back(std::move(col));
    }
  }
  std::vector<std::vector<Rational>> rows(k, std::vector<Rational>(m.q));
  for (unsigned c = 0; c < m.q; ++c) {
    for (unsigned r = 0; r < k; ++r) rows[r][c] = m.columns[c][r];
  }
  m.rank = rational_rank(std::move(rows));
  m.w = 0;
  m.deg_q = static_cast<int>(m.q + m.w) - static_cast<int>(m.rank);
  m.c.assign(k, Rational(1, 2));
  m.beta.assign(k, 1);
  return m;
}

std::string to_string(PolytopeMethod method) {
  return method == PolytopeMethod::exact3 ? "exact3" : "montecarlo";
}

PolytopeMethod parse_polytope_method(const std::string& text) {
  if (text == "exact3") return PolytopeMethod::exact3;
  if (text == "mc" || text == "montecarlo") return PolytopeMethod::montecarlo;
  throw InvalidArgument("polytope method must be exact3 or mc");
}

double polytope_volume_k3_integrated(double x) {
  if (x < 1.0) throw InvalidArgument("polytope volume needs x >= 1");
  return 4.0 * x * std::sqrt(x) - 3.0 * x * std::log(x) - 3.0 * x - 1.0;
}

PolytopeEstimate polytope_volume(unsigned k, double x, PolytopeMethod method, std::uint64_t samples,
                                 std::uint64_t seed, unsigned workers) {
  if (k == 2) throw Unsupported("polytope normalization is undefined for k = 2");
  if (k < 2 || k > kMaxPolytopeK) throw InvalidArgument("polytope k must be in 3..8");
  if (!(x >= 1.0) || !std::isfinite(x)) throw InvalidArgument("polytope volume needs x >= 1");

  PolytopeEstimate out;
  out.k = k;
  out.x = x;
  out.method = method;
  out.seed = seed;

  if (method == PolytopeMethod::exact3) {
    if (k != 3) throw InvalidArgument("exact3 only covers k = 3");
    const double s = std::sqrt(x);
    out.volume = 4.0 * x * s - 6.0 * x + 3.0 * s - 1.0;
    out.normalized = 4.0 - 6.0 / s + 3.0 / x - 1.0 / (x * s);
    if (x <= 9.007199254740992e15 && x == std::floor(x)) {
      const auto xi = static_cast<std::uint64_t>(x);
      const std::uint64_t r = integer_root(xi, 2);
      if (r * r == xi) {
        const BigInt b(r);
        out.exact_volume = Rational(4 * b * b * b - 6 * b * b + 3 * b - 1);
      }
    }
    return out;
  }

  if (x <= 1.0) throw InvalidArgument("Monte Carlo volume needs x > 1");
  if (samples < kPolytopeStrata) throw InvalidArgument("need at least one sample per stratum");

  const unsigned q = pair_count(k);
  std::vector<std::pair<unsigned, unsigned>> pairs;
  for (unsigned i = 0; i < k; ++i) {
    for (unsigned j = i + 1; j < k; ++j) pairs.emplace_back(i, j);
  }
  const double log_x = std::log(x);

  const auto strata = parallel_map(kPolytopeStrata, workers, [&](std::size_t b) {
    StratumSums s;
    s.n = samples / kPolytopeStrata + (b < samples % kPolytopeStrata ? 1 : 0);
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(b)};
    std::mt19937_64 rng(seq);
    std::vector<double> u(q);
    std::vector<double> row(k);
    for (std::uint64_t i = 0; i < s.n; ++i) {
      u[0] = (static_cast<double>(b) + uniform01(rng)) / kPolytopeStrata;
      for (unsigned t = 1; t < q; ++t) u[t] = uniform01(rng);
      std::fill(row.begin(), row.end(), 0.0);
      double total = 0.0;
      for (unsigned t = 0; t < q; ++t) {
        row[pairs[t].first] += u[t];
        row[pairs[t].second] += u[t];
        total += u[t];
      }
      bool inside = true;
      for (const double r : row) inside = inside && r <= 1.0;
      if (!inside) continue;
      const double w = std::exp(total * log_x);
      s.sum += w;
      s.sum_sq += w * w;
      ++s.accepted;
    }
    return s;
  });

  double mean = 0.0;
  double variance = 0.0;
  for (const auto& s : strata) {
    const double n = static_cast<double>(s.n);
    const double m = s.sum / n;
    const double var = n > 1 ? std::max(0.0, (s.sum_sq - n * m * m) / (n - 1)) : 0.0;
    mean += m / kPolytopeStrata;
    variance += var / n / (kPolytopeStrata * kPolytopeStrata);
    out.accepted += s.accepted;
  }
  const double scale = std::pow(log_x, q);
  out.samples = samples;
  out.volume = scale * mean;
  out.std_error = scale * std::sqrt(variance);
  out.normalized = out.volume / normalizer(k, x);
  return out;
}

IEstimate estimate_I(unsigned k, std::span<const double> x_list, std::uint64_t samples, std::uint64_t seed,
                     unsigned workers) {
  if (k == 2) throw Unsupported("I is not defined through this normalization for k = 2");
  if (k < 3) throw InvalidArgument("estimate_I needs k >= 3");
  if (x_list.empty()) throw InvalidArgument("estimate_I needs at least one x");
  for (std::size_t i = 1; i < x_list.size(); ++i) {
    if (!(x_list[i] > x_list[i - 1])) throw InvalidArgument("x list must be strictly ascending");
  }
  if (x_list.back() < 1e4) throw InvalidArgument("largest x must be at least 10^4");

  IEstimate out;
  out.k = k;
  for (std::size_t i = 0; i < x_list.size(); ++i) {
    out.trend.push_back(
        polytope_volume(k, x_list[i], PolytopeMethod::montecarlo, samples, seed + i, workers));
  }
  const auto& last = out.trend.back();
  out.x = last.x;
  out.value = last.normalized;
  out.std_error = last.std_error / normalizer(k, last.x);
  out.ci_low = out.value - 1.96 * out.std_error;
  out.ci_high = out.value + 1.96 * out.std_error;
  return out;
}

MainTermConstant main_term_constant(unsigned k, const ConstantSource& source, unsigned workers) {
  if (k < 2 || k > 6) throw InvalidArgument("main term constant needs k in 2..6");
  MainTermConstant out;
  out.k = k;
  out.deg_q = build_pair_matrix(k).deg_q;
  out.leading_order_only = k >= 3;
  if (k == 2) {
    const auto z = euler_constant("z2", 2, source.variant, source.prime_cutoff, workers, source.reading);
    out.euler = static_cast<double>(z.value);
    out.geometric = 1.0;
  } else if (k == 3) {
    const auto z = euler_constant("z3", 3, source.variant, source.prime_cutoff, workers, source.reading);
    out.geometric = 4.0;
    out.euler = static_cast<double>(z.value) / out.geometric;
  } else {
    const auto z = euler_constant("hk0", k, source.variant, source.prime_cutoff, workers, source.reading);
    out.euler = static_cast<double>(z.value);
    out.geometric =
        polytope_volume(k, source.i_at_x, PolytopeMethod::montecarlo, source.samples, source.seed, workers)
            .normalized;
  }
  out.z = out.geometric * out.euler;
  return out;
}

double predict_main_term(const MainTermConstant& constant, double x, double y) {
  const double lead = 4.0 / (std::numbers::pi * std::numbers::pi) * constant.z * x *
                      std::pow(y, 0.5 * constant.k);
  return constant.deg_q == 0 ? lead : lead * std::pow(std::log(y), constant.deg_q);
}

PerronFit perron_residual_fit(std::span<const std::uint64_t> y_list, Parity parity, double constant,
                              const SieveTables& tables) {
  if (y_list.size() < 2) throw InvalidArgument("residual fit needs at least two Y values");
  for (std::size_t i = 1; i < y_list.size(); ++i) {
    if (y_list[i] <= y_list[i - 1]) throw InvalidArgument("Y list must be strictly ascending");
  }
  if (y_list.front() < 2) throw InvalidArgument("Y values must be at least 2");
  if (y_list.back() > tables.limit()) throw InvalidArgument("Y beyond the sieve limit");

  const auto values = d2_prefix(y_list, parity, tables);
  PerronFit fit;
  fit.parity = parity;
  fit.constant = constant;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < y_list.size(); ++i) {
    PerronRow row;
    row.y = y_list[i];
    row.d2 = values[i];
    row.residual = values[i] - constant * static_cast<double>(row.y);
    row.normalized = std::abs(row.residual) / std::pow(static_cast<double>(row.y), 7.0 / 12.0);
    fit.max_normalized = std::max(fit.max_normalized, row.normalized);
    const double lx = std::log(static_cast<double>(row.y));
    const double ly = std::log(std::max(std::abs(row.residual), 1e-300));
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    fit.rows.push_back(row);
  }
  const double n = static_cast<double>(y_list.size());
  fit.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  fit.intercept = (sy - fit.slope * sx) / n;
  return fit;
}

std::vector<std::uint64_t> decade_grid(std::uint64_t ymin, std::uint64_t ymax) {
  std::vector<std::uint64_t> out;
  for (std::uint64_t p = 1; p <= ymax; p *= 10) {
    if (p >= ymin) out.push_back(p);
    if (p > ymax / 10) break;
  }
  return out;
}

}  // namespace qmoments
