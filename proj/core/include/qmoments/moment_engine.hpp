#pragma once

// Exact moments S_k(X, Y) = sum over odd square-free d <= X of
// (sum_{n <= Y} chi_{8d}(n) mu(n))^k.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "qmoments/arith_sieves.hpp"
#include "qmoments/numeric.hpp"

namespace qmoments {

struct MomentResult {
  unsigned k = 0;
  std::uint64_t x = 0;
  std::uint64_t y = 0;
  BigInt value;
  std::uint64_t d_count = 0;  // odd square-free d <= X
  double runtime_ms = 0.0;
  unsigned worker_count = 1;
};

struct MomentOptions {
  unsigned workers = 1;
  /// Width of the d-ranges sieved and summed as one unit of work.
  std::uint64_t block = std::uint64_t{1} << 22;
};

/// Largest X the engine accepts; d is sieved in segments so memory stays
/// bounded by the block size.
inline constexpr std::uint64_t kMaxMomentX = std::uint64_t{1} << 40;

/// sum_{n <= y} mu(n) chi_{8d}(n) straight from char_vector. Reference path.
std::int64_t inner_sum(std::uint64_t d, std::uint64_t y, const SieveTables& tables);

/// Precomputed multiplicative structure for evaluating many inner sums with
/// the same Y. Only odd square-free n carry weight, and mu(n) chi(n) is the
/// product of -chi(p) over p | n.
class InnerSumPlan {
 public:
  InnerSumPlan(std::uint64_t y, const SieveTables& tables);

  std::uint64_t y() const { return y_; }
  std::int64_t evaluate(std::uint64_t d) const;

 private:
  std::uint64_t y_;
  std::vector<std::uint32_t> odd_primes_;
  std::vector<std::uint32_t> prime_of_;     // per odd square-free n > 1: index into odd_primes_
  std::vector<std::uint32_t> cofactor_of_;  // per odd square-free n > 1: index of n/p
  // (8r/p) for r mod p, concatenated; empty when the tables would be too large.
  std::vector<std::int8_t> residue_symbols_;
  std::vector<std::size_t> residue_offset_;
};

/// Exact S_k(X, Y). Throws InvalidArgument for k < 2 or Y beyond the sieve
/// limit, ResourceLimit for X > kMaxMomentX. The value is identical for every
/// worker count and block size.
MomentResult moment(unsigned k, std::uint64_t x, std::uint64_t y, const SieveTables& tables,
                    const MomentOptions& options = {});

/// Upper bound on the number of k-tuples enumerated by the rearranged sum.
inline constexpr std::uint64_t kMaxRearrangementTuples = std::uint64_t{1} << 24;

/// S_k(X, Y) through the exchanged order of summation:
/// sum over square-free tuples of prod mu(n_i) * T(X, n_1...n_k).
/// Must agree exactly with moment(). ResourceLimit when the tuple count
/// exceeds kMaxRearrangementTuples.
BigInt moment_via_rearrangement(unsigned k, std::uint64_t x, std::uint64_t y,
                                const SieveTables& tables, unsigned workers = 1);

struct CandidateConstant {
  std::string name;
  double value = 0.0;
};

struct ConvergenceRow {
  std::uint64_t x = 0;
  std::uint64_t y = 0;
  BigInt s_k;
  std::uint64_t d_count = 0;
  double runtime_ms = 0.0;
  /// S_k / (c X Y^{k/2}) per candidate, in candidate order.
  std::vector<double> ratios;
};

using YRule = std::function<std::uint64_t(std::uint64_t)>;

/// Y = floor(X^{1/4}).
std::uint64_t default_y_rule(std::uint64_t x);

std::vector<ConvergenceRow> convergence_experiment(unsigned k, const std::vector<std::uint64_t>& x_list,
                                                   const YRule& y_rule,
                                                   const std::vector<CandidateConstant>& candidates,
                                                   const SieveTables& tables,
                                                   const MomentOptions& options = {});

}  // namespace qmoments
