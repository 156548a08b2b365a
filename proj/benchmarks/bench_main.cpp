#include <benchmark/benchmark.h>

#include <cmath>

#include "varq/varq.hpp"

using namespace varq;

namespace {

HydroState gaussian_state(const Grid1D& g, double mean, double variance) {
    HydroState s{g, RealVector(g.n), RealVector(g.n, 0.0)};
    for (std::size_t i = 0; i < g.n; ++i) {
        const double x = g.node(i) - mean;
        s.rho[i] = std::exp(-x * x / (2.0 * variance));
    }
    const double mass = grid_integral(s.rho, g.h);
    for (auto& r : s.rho) r /= mass;
    return s;
}

void BM_EigensolveLowest(benchmark::State& state) {
    const Grid1D g = build_grid(-8.0, 8.0, state.range(0));
    const QFieldSpec spec{1.0, harmonic_potential(1.0), 1.0};
    const auto op = field_operator(spec, g);
    for (auto _ : state) benchmark::DoNotOptimize(eigensolve_lowest(op, 8));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_EigensolveLowest)->RangeMultiplier(4)->Range(256, 4096)->Complexity();

void BM_UnitaryStep(benchmark::State& state) {
    const Grid1D g = build_grid(-40.0, 40.0, state.range(0));
    const auto spec = natural_system(1.0, harmonic_potential(1.0));
    const UnitaryStepper stepper(schrodinger_operator(spec, g, 1.0), 0.005, 1.0);
    const auto s = gaussian_state(g, 0.0, 1.0);
    ComplexVector psi(g.n);
    for (std::size_t i = 0; i < g.n; ++i) psi[i] = std::sqrt(s.rho[i]);
    for (auto _ : state) {
        stepper.advance(psi);
        benchmark::ClobberMemory();
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_UnitaryStep)->RangeMultiplier(4)->Range(1024, 16384);

void BM_MadelungStep(benchmark::State& state) {
    const Grid1D g = build_grid(-6.0, 6.0, state.range(0));
    const auto osc = natural_system(1.0, harmonic_potential(1.0));
    const auto dspec = quantum_diffusion(1.0);
    const auto s = gaussian_state(g, 0.5, 0.5);
    const double dt = 0.5 * madelung_dispersive_limit(osc, dspec, g);
    for (auto _ : state) benchmark::DoNotOptimize(madelung_step(osc, dspec, s, dt));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MadelungStep)->Arg(601)->Arg(2401);

void BM_TransportDensity(benchmark::State& state) {
    const Grid1D g = build_grid(-3.0, 3.0, state.range(0));
    const auto osc = natural_system(1.0, harmonic_potential(1.0));
    const auto s = gaussian_state(g, 0.4, 0.5);
    ClassicalEnsemble ens{g, s.rho, RealVector(g.n)};
    for (std::size_t i = 0; i < g.n; ++i) ens.S[i] = 0.5 * g.node(i);
    for (auto _ : state) benchmark::DoNotOptimize(transport_density(ens, osc, 0.2 * g.h));
}
BENCHMARK(BM_TransportDensity)->Arg(601)->Arg(2401);

void BM_SpinPropagate(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    SpinSystemSpec spec;
    spec.N = n;
    spec.U = RealMatrix(n);
    spec.theta = RealMatrix(n);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        spec.U(i, i + 1) = spec.U(i + 1, i) = 1.0;
        spec.theta(i, i + 1) = 0.3;
        spec.theta(i + 1, i) = -0.3;
    }
    SpinState start{ComplexVector(n, 0.0)};
    start.psi[0] = 1.0;
    for (auto _ : state) benchmark::DoNotOptimize(propagate(spec, start, 1.0));
}
BENCHMARK(BM_SpinPropagate)->Arg(2)->Arg(16)->Arg(64);

void BM_DdwLeapfrog(benchmark::State& state) {
    const FieldLagrangianSpec spec{1.0, harmonic_potential(1.0)};
    const auto g = build_periodic_grid(0.0, 6.283185307179586, static_cast<std::size_t>(state.range(0)));
    const auto s = plane_wave_state(spec, g, 0.1, 2, std::sqrt(5.0));
    for (auto _ : state) benchmark::DoNotOptimize(ddw_evolve(spec, s, 0.5 * g.h, 100));
    state.SetItemsProcessed(state.iterations() * 100 * state.range(0));
}
BENCHMARK(BM_DdwLeapfrog)->Arg(256)->Arg(1024);

void BM_ConfinedSolve(benchmark::State& state) {
    const QFieldSpec spec{1.0, harmonic_potential(1.0), 1.0};
    const auto vac = vacuum_spectrum(spec, build_grid(-8.0, 8.0, 401), 8);
    RealVector c(8, 0.0);
    c[0] = 1.0;
    c[1] = 0.1;
    ConfinedOptions opts;
    opts.radial_points = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(confined_solve(spec, vac, c, opts));
}
BENCHMARK(BM_ConfinedSolve)->Arg(1000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
