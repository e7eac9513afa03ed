#include <benchmark/benchmark.h>

#include "qmoments/arith_sieves.hpp"
#include "qmoments/asymptotics.hpp"
#include "qmoments/diagonal_sums.hpp"
#include "qmoments/euler_series.hpp"
#include "qmoments/moment_engine.hpp"

using namespace qmoments;

namespace {

const SieveTables& shared_tables() {
  static const SieveTables t = SieveTables::build(10'000'000);
  return t;
}

void BM_Sieve(benchmark::State& state) {
  for (auto _ : state) {
    auto t = SieveTables::build(static_cast<std::uint64_t>(state.range(0)));
    benchmark::DoNotOptimize(t.limit());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Sieve)->Arg(1'000'000)->Arg(10'000'000)->Unit(benchmark::kMillisecond);

void BM_Kronecker(benchmark::State& state) {
  std::uint64_t n = 3;
  for (auto _ : state) {
    benchmark::DoNotOptimize(kronecker(8 * 123457, n));
    n += 2;
    if (n > 1'000'000'001) n = 3;
  }
}
BENCHMARK(BM_Kronecker);

void BM_Moment(benchmark::State& state) {
  const auto& t = shared_tables();
  const auto x = static_cast<std::uint64_t>(state.range(0));
  for (auto _ : state) {
    auto m = moment(2, x, default_y_rule(x), t);
    benchmark::DoNotOptimize(m.value);
  }
}
BENCHMARK(BM_Moment)->Arg(1'000'000)->Arg(10'000'000)->Unit(benchmark::kMillisecond);

void BM_D3Fast(benchmark::State& state) {
  const auto& t = shared_tables();
  for (auto _ : state) {
    benchmark::DoNotOptimize(d3_sum_fast(static_cast<std::uint64_t>(state.range(0)), Parity::all, t));
  }
}
BENCHMARK(BM_D3Fast)->Arg(100'000)->Arg(1'000'000)->Unit(benchmark::kMillisecond);

void BM_EulerZ2(benchmark::State& state) {
  for (auto _ : state) {
    auto c = euler_constant("z2", 2, FactorVariant::definition, static_cast<std::uint64_t>(state.range(0)));
    benchmark::DoNotOptimize(c);
  }
}
BENCHMARK(BM_EulerZ2)->Arg(100'000)->Arg(1'000'000)->Unit(benchmark::kMillisecond);

void BM_PolytopeMC(benchmark::State& state) {
  for (auto _ : state) {
    auto e = polytope_volume(static_cast<unsigned>(state.range(0)), 1e6, PolytopeMethod::montecarlo, 1'000'000);
    benchmark::DoNotOptimize(e.volume);
  }
}
BENCHMARK(BM_PolytopeMC)->Arg(3)->Arg(4)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
