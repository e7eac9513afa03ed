#pragma once

// Pair-form matrix, polytope volumes, the constant I, assembled main terms
// and the k = 2 residual-exponent fit.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qmoments/arith_sieves.hpp"
#include "qmoments/diagonal_sums.hpp"
#include "qmoments/euler_series.hpp"
#include "qmoments/numeric.hpp"

namespace qmoments {

/// The k x C(k,2) 0/1 matrix whose columns mark the index pairs (i, j).
struct PairFormMatrix {
  unsigned k = 0;
  unsigned q = 0;
  std::vector<std::vector<int>> columns;  // each of length k with two ones
  unsigned rank = 0;
  unsigned w = 0;
  int deg_q = 0;  // q + w - rank
  std::vector<Rational> c;  // (1/2, ..., 1/2)
  std::vector<int> beta;    // (1, ..., 1)
};

/// Columns in the order (1,2), (1,3), ..., (1,k), (2,3), ...; rank by exact
/// rational elimination. InvalidArgument for k < 2.
PairFormMatrix build_pair_matrix(unsigned k);

/// Rank of a dense rational matrix given by rows.
unsigned rational_rank(std::vector<std::vector<Rational>> rows);

enum class PolytopeMethod { exact3, montecarlo };

std::string to_string(PolytopeMethod method);
/// "exact3", "mc" or "montecarlo".
PolytopeMethod parse_polytope_method(const std::string& text);

struct PolytopeEstimate {
  unsigned k = 0;
  double x = 1.0;
  PolytopeMethod method = PolytopeMethod::exact3;
  double volume = 0.0;
  std::optional<Rational> exact_volume;  // exact3 at perfect-square integer x
  double std_error = 0.0;                // Monte Carlo only
  double normalized = 0.0;               // volume / (x^{k/2} (log x)^{q-k})
  std::uint64_t samples = 0;
  std::uint64_t accepted = 0;
  std::uint64_t seed = 0;
};

/// Number of strata in u_1 used by the Monte Carlo estimator.
inline constexpr unsigned kPolytopeStrata = 32;
inline constexpr unsigned kMaxPolytopeK = 8;

/// Volume of A(x) = {y in [1, inf)^q : prod_{pairs containing j} y <= x for all j}.
/// exact3 evaluates 4x^{3/2} - 6x + 3x^{1/2} - 1 (k = 3 only). montecarlo
/// samples u = log y / log x uniformly in [0,1]^q, keeps points with every
/// row sum <= 1 and averages (log x)^q x^{sum u}; strata are fixed slices of
/// u_1 each with its own generator, so the result does not depend on `workers`.
/// Unsupported for k = 2; InvalidArgument for x < 1, k < 2, k > kMaxPolytopeK,
/// exact3 with k != 3, or montecarlo with x <= 1 or samples < kPolytopeStrata.
PolytopeEstimate polytope_volume(unsigned k, double x, PolytopeMethod method,
                                 std::uint64_t samples = 1'000'000, std::uint64_t seed = 1,
                                 unsigned workers = 1);

/// 4x^{3/2} - 3x log x - 3x - 1: the k = 3 volume integrated in closed form.
double polytope_volume_k3_integrated(double x);

struct IEstimate {
  unsigned k = 0;
  double x = 0.0;  // largest x in the list
  double value = 0.0;
  double std_error = 0.0;
  double ci_low = 0.0;  // value -/+ 1.96 std_error
  double ci_high = 0.0;
  std::vector<PolytopeEstimate> trend;
};

/// Normalized Monte Carlo volume at each x; the estimate is taken at the
/// largest. Unsupported for k = 2; InvalidArgument unless k >= 3, the list is
/// strictly ascending and its maximum is at least 10^4.
IEstimate estimate_I(unsigned k, std::span<const double> x_list, std::uint64_t samples = 4'000'000,
                     std::uint64_t seed = 1, unsigned workers = 1);

struct ConstantSource {
  FactorVariant variant = FactorVariant::definition;
  PairReading reading = PairReading::unordered;
  std::uint64_t prime_cutoff = 1'000'000;
  /// Monte Carlo settings for I when k >= 4.
  std::uint64_t samples = 4'000'000;
  std::uint64_t seed = 1;
  double i_at_x = 1e6;
};

struct MainTermConstant {
  unsigned k = 0;
  double z = 0.0;         // Z_k
  double euler = 0.0;     // the Euler product part
  double geometric = 1.0; // I (4 for k = 3, 1 for k = 2, Monte Carlo beyond)
  int deg_q = 0;
  bool leading_order_only = false;
};

/// Z_2 = product for k = 2, Z_3 = 4 * product for k = 3, and I * product for
/// larger k with I from Monte Carlo.
MainTermConstant main_term_constant(unsigned k, const ConstantSource& source, unsigned workers = 1);

/// (4/pi^2) Z X Y^{k/2} (log Y)^{degQ}.
double predict_main_term(const MainTermConstant& constant, double x, double y);

struct PerronRow {
  std::uint64_t y = 0;
  double d2 = 0.0;
  double residual = 0.0;     // D_2(y) - Z y
  double normalized = 0.0;   // |residual| / y^{7/12}
};

struct PerronFit {
  Parity parity = Parity::all;
  double constant = 0.0;
  double slope = 0.0;
  double intercept = 0.0;
  double max_normalized = 0.0;
  std::vector<PerronRow> rows;
};

inline constexpr double kPerronSlopeLimit = 0.62;

/// Least-squares slope of log |D_2(Y) - c Y| against log Y. For Parity::odd
/// the caller passes the odd-restricted constant (3/4) Z_2. InvalidArgument
/// for fewer than two points, a non-ascending list, or Y beyond the sieve.
PerronFit perron_residual_fit(std::span<const std::uint64_t> y_list, Parity parity, double constant,
                              const SieveTables& tables);

/// 10^3, 10^4, ..., ymax (powers of ten up to ymax).
std::vector<std::uint64_t> decade_grid(std::uint64_t ymin, std::uint64_t ymax);

}  // namespace qmoments
