#include <benchmark/benchmark.h>

#include "setfuse/reproduce.hpp"
#include "setfuse/scenario.hpp"

namespace {

using namespace setfuse;

void BM_GaussBernoulliSweep(benchmark::State& state) {
    const auto scenario = gauss_bernoulli_scenario();
    const auto jobs = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(sweep_scenario(scenario, jobs));
}
BENCHMARK(BM_GaussBernoulliSweep)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();

void BM_BinomialIidSweep(benchmark::State& state) {
    const auto scenario = binomial_iid_scenario(35, 0.98, 0.975);
    for (auto _ : state) benchmark::DoNotOptimize(sweep_scenario(scenario, 1));
}
BENCHMARK(BM_BinomialIidSweep)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
