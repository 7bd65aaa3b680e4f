#include <benchmark/benchmark.h>

#include "setfuse/gaussian_ops.hpp"
#include "setfuse/solvers.hpp"

namespace {

using namespace setfuse;

void BM_NewtonCardinality(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto pi = CardinalityPmf::binomial(n, 0.98);
    const auto pj = CardinalityPmf::binomial(n, 0.975);
    for (auto _ : state) benchmark::DoNotOptimize(newton_cardinality(pi, pj, NewtonConfig{}));
}
BENCHMARK(BM_NewtonCardinality)->Arg(5)->Arg(35)->Arg(200);

void BM_NewtonLocalisationGaussian(benchmark::State& state) {
    Vector ma(2), mb(2);
    ma << 0.25, 0.25;
    mb << -0.75, -0.25;
    const GaussianDensity a(ma, make_rotated_covariance_fixed_major(10.0, 1.0, 0.785));
    const GaussianDensity b(mb, make_rotated_covariance_fixed_major(10.0, 1.0, -0.785));
    NewtonConfig cfg;
    cfg.mc_samples = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(newton_localisation(a, b, cfg));
}
BENCHMARK(BM_NewtonLocalisationGaussian)->Arg(1000)->Arg(10000)->Unit(benchmark::kMicrosecond);

void BM_ClosedForms(benchmark::State& state) {
    for (auto _ : state) {
        benchmark::DoNotOptimize(bernoulli_closed_form(0.8, 0.6));
        benchmark::DoNotOptimize(poisson_closed_form(2.0, 7.5));
    }
}
BENCHMARK(BM_ClosedForms);

}  // namespace
