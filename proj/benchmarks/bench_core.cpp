#include <benchmark/benchmark.h>

#include "mixbgk/collision.hpp"
#include "mixbgk/linear.hpp"
#include "mixbgk/solver.hpp"

using namespace mixbgk;

namespace {

MixtureParams bench_params() {
    MixtureParams p;
    p.m1 = 1.5;
    p.m2 = 1.0;
    p.delta = 0.5;
    p.omega = 0.4;
    return p;
}

PhaseGrid hom_grid(int n_axis) {
    return {SpatialGrid::homogeneous(), make_velocity_grid(8.0, n_axis)};
}

}  // namespace

static void BM_BgkRhsSampled(benchmark::State& state) {
    const MixtureParams p = bench_params();
    const PhaseGrid g = hom_grid(int(state.range(0)));
    const auto F = make_scenario("temperature-gap", 0.2, 1u, p, g);
    for (auto _ : state) {
        benchmark::DoNotOptimize(bgk_rhs(F, p, g, EquilibriumMode::sampled));
    }
    state.SetItemsProcessed(state.iterations() * g.velocity.size());
}
BENCHMARK(BM_BgkRhsSampled)->Arg(16)->Arg(24);

static void BM_BgkRhsMatched(benchmark::State& state) {
    const MixtureParams p = bench_params();
    const PhaseGrid g = hom_grid(int(state.range(0)));
    const auto F = make_scenario("temperature-gap", 0.2, 1u, p, g);
    for (auto _ : state) {
        benchmark::DoNotOptimize(bgk_rhs(F, p, g, EquilibriumMode::moment_matched));
    }
    state.SetItemsProcessed(state.iterations() * g.velocity.size());
}
BENCHMARK(BM_BgkRhsMatched)->Arg(16)->Arg(24);

static void BM_ApplyL(benchmark::State& state) {
    const MixtureParams p = bench_params();
    const PhaseGrid g = hom_grid(int(state.range(0)));
    const LinearOps L = LinearOps::build(p, g);
    const auto F = make_scenario("temperature-gap", 0.1, 1u, p, g);
    const auto f = L.perturbation_split(F);
    for (auto _ : state) {
        benchmark::DoNotOptimize(L.apply_L(f));
    }
    state.SetItemsProcessed(state.iterations() * g.velocity.size());
}
BENCHMARK(BM_ApplyL)->Arg(16)->Arg(24);

static void BM_Advect(benchmark::State& state) {
    const MixtureParams p = bench_params();
    const PhaseGrid g{SpatialGrid::periodic_line(int(state.range(0)), 1.0),
                      make_velocity_grid(8.0, 16)};
    const auto F = make_scenario("sinusoidal-density", 0.2, 1u, p, g);
    for (auto _ : state) {
        benchmark::DoNotOptimize(advect(F, 0.01, g));
    }
    state.SetItemsProcessed(state.iterations() * g.size());
}
BENCHMARK(BM_Advect)->Arg(32)->Arg(64);

static void BM_StrangStep(benchmark::State& state) {
    const MixtureParams p = bench_params();
    const PhaseGrid g{SpatialGrid::periodic_line(32, 1.0), make_velocity_grid(8.0, 16)};
    SolverConfig cfg;
    cfg.dt = 0.02;
    const auto F = make_scenario("sinusoidal-density", 0.2, 1u, p, g);
    for (auto _ : state) {
        benchmark::DoNotOptimize(step(F, p, g, cfg));
    }
}
BENCHMARK(BM_StrangStep);

BENCHMARK_MAIN();
