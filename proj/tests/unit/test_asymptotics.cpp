#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "qmoments/arith_sieves.hpp"
#include "qmoments/asymptotics.hpp"
#include "qmoments/errors.hpp"

using namespace qmoments;

namespace {

constexpr std::uint64_t kMod = (std::uint64_t{1} << 61) - 1;

std::uint64_t mulmod(std::uint64_t a, std::uint64_t b) {
  return static_cast<std::uint64_t>(static_cast<unsigned __int128>(a) * b % kMod);
}

std::uint64_t inverse(std::uint64_t a) {
  std::uint64_t r = 1, e = kMod - 2;
  while (e) {
    if (e & 1) r = mulmod(r, a);
    a = mulmod(a, a);
    e >>= 1;
  }
  return r;
}

unsigned rank_mod_p(std::vector<std::vector<std::uint64_t>> m) {
  unsigned rank = 0;
  const std::size_t cols = m.empty() ? 0 : m[0].size();
  for (std::size_t c = 0; c < cols && rank < m.size(); ++c) {
    std::size_t piv = rank;
    while (piv < m.size() && m[piv][c] == 0) ++piv;
    if (piv == m.size()) continue;
    std::swap(m[piv], m[rank]);
    const std::uint64_t inv = inverse(m[rank][c]);
    for (std::size_t r = 0; r < m.size(); ++r) {
      if (r == rank || m[r][c] == 0) continue;
      const std::uint64_t f = mulmod(m[r][c], inv);
      for (std::size_t j = 0; j < cols; ++j) m[r][j] = (m[r][j] + kMod - mulmod(f, m[rank][j])) % kMod;
    }
    ++rank;
  }
  return rank;
}

// k = 3 volume: by symmetry twice the part with y12 <= y13; in log coordinates
// the inner integral is elementary and the outer one is done by Simpson's rule.
double quadrature_volume_k3(double x) {
  const double l = std::log(x);
  auto inner = [&](double s) {
    return (1 - 2 * s) * std::pow(x, 1 + s) - (x - std::pow(x, 2 * s)) / l;
  };
  const int n = 20000;
  const double h = 0.5 / n;
  double sum = inner(0) + inner(0.5);
  for (int i = 1; i < n; ++i) sum += (i % 2 ? 4 : 2) * inner(i * h);
  return 2 * l * l * sum * h / 3;
}

}  // namespace

TEST(PairMatrix, SmallCases) {
  const auto m2 = build_pair_matrix(2);
  EXPECT_EQ(m2.q, 1u);
  EXPECT_EQ(m2.rank, 1u);
  EXPECT_EQ(m2.deg_q, 0);
  const auto m3 = build_pair_matrix(3);
  EXPECT_EQ(m3.columns, (std::vector<std::vector<int>>{{1, 1, 0}, {1, 0, 1}, {0, 1, 1}}));
  EXPECT_EQ(m3.rank, 3u);
  EXPECT_EQ(m3.deg_q, 0);
  const auto m4 = build_pair_matrix(4);
  EXPECT_EQ(m4.q, 6u);
  EXPECT_EQ(m4.rank, 4u);
  EXPECT_EQ(m4.deg_q, 2);
  EXPECT_EQ(m4.columns.front(), (std::vector<int>{1, 1, 0, 0}));
  EXPECT_EQ(m4.columns.back(), (std::vector<int>{0, 0, 1, 1}));
  EXPECT_EQ(m4.c, std::vector<Rational>(4, Rational(1, 2)));
  EXPECT_EQ(m4.beta, std::vector<int>(4, 1));
  EXPECT_EQ(m4.w, 0u);
  EXPECT_THROW(build_pair_matrix(1), InvalidArgument);
}

TEST(PairMatrix, RankAgreesWithModularElimination) {
  for (unsigned k = 2; k <= 9; ++k) {
    const auto m = build_pair_matrix(k);
    std::vector<std::vector<std::uint64_t>> rows(k, std::vector<std::uint64_t>(m.q));
    for (unsigned c = 0; c < m.q; ++c) {
      int ones = 0;
      for (unsigned r = 0; r < k; ++r) {
        rows[r][c] = static_cast<std::uint64_t>(m.columns[c][r]);
        ones += m.columns[c][r];
      }
      EXPECT_EQ(ones, 2);
    }
    EXPECT_EQ(m.rank, rank_mod_p(rows)) << k;
    EXPECT_EQ(m.deg_q, static_cast<int>(m.q) - static_cast<int>(m.rank));
  }
}

TEST(PairMatrix, RationalRankOnRandomMatrices) {
  std::mt19937_64 rng(19);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t r = 1 + rng() % 5, c = 1 + rng() % 5;
    std::vector<std::vector<Rational>> q(r, std::vector<Rational>(c));
    std::vector<std::vector<std::uint64_t>> z(r, std::vector<std::uint64_t>(c));
    for (std::size_t i = 0; i < r; ++i) {
      for (std::size_t j = 0; j < c; ++j) {
        const std::uint64_t v = rng() % 3;  // small entries make rank deficiency common
        q[i][j] = v;
        z[i][j] = v;
      }
    }
    ASSERT_EQ(rational_rank(q), rank_mod_p(z));
  }
}

TEST(Polytope, ClosedFormValues) {
  const auto v1 = polytope_volume(3, 1, PolytopeMethod::exact3);
  ASSERT_TRUE(v1.exact_volume.has_value());
  EXPECT_EQ(*v1.exact_volume, Rational(0));
  EXPECT_EQ(*polytope_volume(3, 4, PolytopeMethod::exact3).exact_volume, Rational(13));
  EXPECT_EQ(*polytope_volume(3, 100, PolytopeMethod::exact3).exact_volume, Rational(3429));
  EXPECT_FALSE(polytope_volume(3, 10, PolytopeMethod::exact3).exact_volume.has_value());
  EXPECT_NEAR(polytope_volume(3, 10, PolytopeMethod::exact3).volume,
              40 * std::sqrt(10.0) - 60 + 3 * std::sqrt(10.0) - 1, 1e-9);
}

TEST(Polytope, NormalizedClosedFormIncreasesTowardFour) {
  double last = -1;
  for (double x = 1; x < 1e13; x *= 3) {
    const auto e = polytope_volume(3, x, PolytopeMethod::exact3);
    const double s = std::sqrt(x);
    EXPECT_NEAR(e.normalized, 4 - 6 / s + 3 / x - 1 / (x * s), 1e-12);
    EXPECT_GE(e.normalized, last);
    EXPECT_LT(e.normalized, 4);
    last = e.normalized;
  }
  EXPECT_NEAR(last, 4, 1e-5);
}

TEST(Polytope, IntegratedVolumeMatchesQuadrature) {
  for (const double x : {1.5, 4.0, 100.0, 1e4, 1e6}) {
    const double q = quadrature_volume_k3(x);
    EXPECT_NEAR(polytope_volume_k3_integrated(x), q, 1e-7 * q) << x;
  }
  EXPECT_DOUBLE_EQ(polytope_volume_k3_integrated(1), 0);
  // both closed forms share the leading 4 x^{3/2}
  const double x = 1e14;
  EXPECT_NEAR(polytope_volume_k3_integrated(x) / std::pow(x, 1.5), 4, 1e-4);
}

TEST(Polytope, MonteCarloMatchesIntegratedVolume) {
  const double target = quadrature_volume_k3(100);
  int inside = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const auto e = polytope_volume(3, 100, PolytopeMethod::montecarlo, 20000, seed);
    inside += std::abs(e.volume - target) <= 3 * e.std_error;
  }
  EXPECT_GE(inside, 95);
}

TEST(Polytope, MonteCarloIsReproducible) {
  const auto a = polytope_volume(4, 1e3, PolytopeMethod::montecarlo, 100000, 42, 1);
  const auto b = polytope_volume(4, 1e3, PolytopeMethod::montecarlo, 100000, 42, 1);
  const auto c = polytope_volume(4, 1e3, PolytopeMethod::montecarlo, 100000, 42, 3);
  EXPECT_EQ(a.volume, b.volume);
  EXPECT_EQ(a.std_error, b.std_error);
  EXPECT_EQ(a.volume, c.volume);
  EXPECT_EQ(a.accepted, c.accepted);
  const auto d = polytope_volume(4, 1e3, PolytopeMethod::montecarlo, 100000, 43, 1);
  EXPECT_NE(a.volume, d.volume);
}

TEST(Polytope, VolumeGrowsWithX) {
  double last = 0;
  for (const double x : {2.0, 10.0, 100.0, 1000.0}) {
    const auto e = polytope_volume(4, x, PolytopeMethod::montecarlo, 200000, 5);
    EXPECT_GT(e.volume, last);
    last = e.volume;
  }
}

TEST(Polytope, Errors) {
  EXPECT_THROW(polytope_volume(2, 10, PolytopeMethod::montecarlo), Unsupported);
  EXPECT_THROW(polytope_volume(2, 10, PolytopeMethod::exact3), Unsupported);
  EXPECT_THROW(polytope_volume(4, 10, PolytopeMethod::exact3), InvalidArgument);
  EXPECT_THROW(polytope_volume(3, 0.5, PolytopeMethod::exact3), InvalidArgument);
  EXPECT_THROW(polytope_volume(3, 1, PolytopeMethod::montecarlo), InvalidArgument);
  EXPECT_THROW(polytope_volume(3, 10, PolytopeMethod::montecarlo, 5), InvalidArgument);
  EXPECT_EQ(parse_polytope_method("mc"), PolytopeMethod::montecarlo);
  EXPECT_THROW(parse_polytope_method("grid"), InvalidArgument);
}

TEST(EstimateI, KThree) {
  const std::vector<double> xs{1e4, 1e6};
  const auto est = estimate_I(3, xs, 1'000'000, 3);
  EXPECT_GE(est.value, 3.6);
  EXPECT_LE(est.value, 4.4);
  EXPECT_EQ(est.trend.size(), 2u);
  EXPECT_NEAR(est.value, polytope_volume_k3_integrated(1e6) / 1e9, 6 * est.std_error);
  EXPECT_LT(est.ci_low, est.value);
  EXPECT_GT(est.ci_high, est.value);
}

TEST(EstimateI, KFourIsFinite) {
  const std::vector<double> xs{1e4, 1e5};
  const auto est = estimate_I(4, xs, 400'000, 3);
  EXPECT_TRUE(std::isfinite(est.value));
  EXPECT_GT(est.value, 0);
  EXPECT_GT(est.std_error, 0);
}

TEST(EstimateI, Errors) {
  const std::vector<double> ok{1e4};
  const std::vector<double> small{10, 100};
  const std::vector<double> descending{1e5, 1e4};
  EXPECT_THROW(estimate_I(2, ok), Unsupported);
  EXPECT_THROW(estimate_I(3, small), InvalidArgument);
  EXPECT_THROW(estimate_I(3, descending), InvalidArgument);
}

TEST(Predict, KTwoIsPureConstant) {
  ConstantSource src;
  src.prime_cutoff = 10000;
  const auto c = main_term_constant(2, src);
  EXPECT_EQ(c.deg_q, 0);
  EXPECT_FALSE(c.leading_order_only);
  const double expected = 4 / (std::numbers::pi * std::numbers::pi) * c.z;
  for (const double x : {1e3, 1e6, 1e9}) {
    for (const double y : {1.0, 5.0, 31.0, 1e4}) {
      EXPECT_NEAR(predict_main_term(c, x, y) / (x * y), expected, 1e-15);
    }
  }
}

TEST(Predict, HigherK) {
  ConstantSource src;
  src.prime_cutoff = 10000;
  const auto c3 = main_term_constant(3, src);
  EXPECT_EQ(c3.geometric, 4);
  EXPECT_EQ(c3.deg_q, 0);
  EXPECT_TRUE(c3.leading_order_only);
  EXPECT_NEAR(predict_main_term(c3, 1e6, 100), 4 / (std::numbers::pi * std::numbers::pi) * c3.z * 1e6 * 1e3,
              1e-6);
  src.samples = 100'000;
  src.i_at_x = 1e4;
  const auto c4 = main_term_constant(4, src);
  EXPECT_EQ(c4.deg_q, 2);
  EXPECT_GT(c4.geometric, 0);
  const double y = 50;
  EXPECT_NEAR(predict_main_term(c4, 1, y),
              4 / (std::numbers::pi * std::numbers::pi) * c4.z * y * y * std::log(y) * std::log(y), 1e-9);
}

TEST(Perron, SlopeBelowLimit) {
  const auto t = SieveTables::build(1'000'000);
  const auto grid = decade_grid(1000, 1'000'000);
  EXPECT_EQ(grid, (std::vector<std::uint64_t>{1000, 10000, 100000, 1000000}));
  const double z2 = 0.47168061914114766;
  const auto all = perron_residual_fit(grid, Parity::all, z2, t);
  EXPECT_LE(all.slope, kPerronSlopeLimit);
  const auto odd = perron_residual_fit(grid, Parity::odd, 0.75 * z2, t);
  EXPECT_LE(odd.slope, kPerronSlopeLimit);
  // the wrong odd constant leaves a linear residual
  const auto wrong = perron_residual_fit(grid, Parity::odd, z2, t);
  EXPECT_NEAR(wrong.slope, 1.0, 0.01);
}

TEST(Perron, Errors) {
  const auto t = SieveTables::build(1000);
  const std::vector<std::uint64_t> single{1000};
  const std::vector<std::uint64_t> down{1000, 100};
  const std::vector<std::uint64_t> big{100, 100000};
  EXPECT_THROW(perron_residual_fit(single, Parity::all, 0.47, t), InvalidArgument);
  EXPECT_THROW(perron_residual_fit(down, Parity::all, 0.47, t), InvalidArgument);
  EXPECT_THROW(perron_residual_fit(big, Parity::all, 0.47, t), InvalidArgument);
}
