#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

#include "l1path/parametric.hpp"
#include "l1path/path.hpp"

using namespace l1path;

namespace {

VectorXd noisy_signal(Index N, unsigned seed) {
  std::mt19937 g(seed);
  std::normal_distribution<double> nd(0.0, 0.3);
  VectorXd y(N);
  for (Index i = 0; i < N; ++i) y(i) = std::sin(6.0 * double(i) / double(N)) + nd(g);
  return y;
}

// One parametric backward/forward pass on a trend filter. The final inputs
// see no observation after them and have to sit on the point.
void BM_ParamBffdTrend(benchmark::State& state) {
  const Index N = state.range(0);
  const auto m = trend_filter_model(noisy_signal(N, 1));
  std::vector<Segment> active;
  for (Index n = 0; n < N; ++n) active.push_back(m.costs[n].segment(n >= N - 2 ? 1 : n % 2 ? 0 : 2));
  for (auto _ : state) benchmark::DoNotOptimize(param_bffd(m, active));
  state.SetComplexityN(N);
}
BENCHMARK(BM_ParamBffdTrend)->RangeMultiplier(2)->Range(1000, 16000)->Complexity(benchmark::oN);

void BM_ParamFfbddMedian(benchmark::State& state) {
  const Index N = state.range(0);
  const auto m = median_smoother_model(noisy_signal(N, 2), 1e-3);
  std::vector<Segment> active;
  for (Index n = 0; n < N; ++n) active.push_back(m.variable_cost(n).segment(n % 2 ? 0 : 2));
  for (auto _ : state) benchmark::DoNotOptimize(param_ffbdd(m, active));
  state.SetComplexityN(N);
}
BENCHMARK(BM_ParamFfbddMedian)->RangeMultiplier(2)->Range(1000, 16000)->Complexity(benchmark::oN);

// Path following on trend filters, reported per knot.
void BM_TrendPathPerKnot(benchmark::State& state) {
  const Index N = state.range(0);
  const auto m = trend_filter_model(noisy_signal(N, 3));
  PathOptions opt;
  opt.knot_limit = 40;
  double seconds = 0.0;
  std::size_t iterations = 0;
  for (auto _ : state) {
    const RegPath p = path_bffd(m, opt);
    seconds += p.stats.loop_seconds;
    iterations += p.stats.iterations;
  }
  state.counters["sec_per_knot"] = seconds / double(iterations);
  state.SetComplexityN(N);
}
BENCHMARK(BM_TrendPathPerKnot)->Arg(2000)->Arg(4000)->Arg(8000)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
