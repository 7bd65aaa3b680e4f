#include <benchmark/benchmark.h>

#include "setfuse/emd_fusion.hpp"
#include "setfuse/gaussian_ops.hpp"
#include "setfuse/quadrature.hpp"

namespace {

using namespace setfuse;

GaussianDensity make(double mx, double my, double kappa, double phi) {
    Vector m(2);
    m << mx, my;
    return GaussianDensity(m, make_rotated_covariance_fixed_major(kappa, 1.0, phi));
}

void BM_GaussianScale(benchmark::State& state) {
    const auto a = make(0.25, 0.25, 20.0, 0.785);
    const auto b = make(-0.75, -0.25, 20.0, -0.785);
    double w = 0.3;
    for (auto _ : state) {
        benchmark::DoNotOptimize(gaussian_emd_scale(a, b, w));
        w = w < 0.7 ? w + 1e-6 : 0.3;
    }
}
BENCHMARK(BM_GaussianScale);

void BM_GridScaleDerivatives(benchmark::State& state) {
    const auto a = make(0.25, 0.25, 20.0, 0.785);
    const auto b = make(-0.75, -0.25, 20.0, -0.785);
    const GaussianDensity arr[] = {a, b};
    const auto geom = GridGeometry::covering(arr, static_cast<std::size_t>(state.range(0)), 6.0);
    const auto ga = GridDensity::discretize(a, geom);
    const auto gb = GridDensity::discretize(b, geom);
    for (auto _ : state) benchmark::DoNotOptimize(grid_scale_derivatives(ga, gb, 0.4));
    state.SetComplexityN(state.range(0) * state.range(0));
}
BENCHMARK(BM_GridScaleDerivatives)->Arg(51)->Arg(101)->Arg(201)->Complexity(benchmark::oN);

void BM_FusedCardinalityP2(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto pi = CardinalityPmf::binomial(n, 0.95);
    const auto pj = CardinalityPmf::binomial(n, 0.92);
    const auto z = geometric_scale_sequence(0.6, n);
    for (auto _ : state) benchmark::DoNotOptimize(fused_cardinality_p2(pi, pj, z, 0.5));
}
BENCHMARK(BM_FusedCardinalityP2)->Arg(5)->Arg(35)->Arg(500);

}  // namespace
