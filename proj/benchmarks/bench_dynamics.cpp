#include <benchmark/benchmark.h>

#include "sivsq/dynamics.hpp"
#include "sivsq/squeezing.hpp"

using namespace sivsq;

namespace {

StateVector all_down(const EnsemblePair& p) {
    Vector v = Vector::Zero(p.dim());
    v(0) = 1.0;
    return StateVector(v);
}

std::vector<DissipatorSpec> bag(const EnsemblePair& p) {
    auto ds = decay_dissipators(p, kTwoPi * 50, kTwoPi * 50, 0.0, Placement::per_segment);
    const auto dp = dephasing_dissipators(100.0, p, DephasingMode::collective_approx);
    ds.insert(ds.end(), dp.begin(), dp.end());
    return ds;
}

void BM_LindbladRhsDense(benchmark::State& st) {
    const EnsemblePair p(static_cast<int>(st.range(0)), static_cast<int>(st.range(0)));
    const auto h = build_tats(p, 5000.0, 0.0, 0.0);
    const auto ds = bag(p);
    const auto rho = DensityMatrix::from_pure(
        product_state(coherent_spin_state(p.n1(), 1.0, 0.0), coherent_spin_state(p.n2(), 1.0, 0.0)));
    for (auto _ : st) benchmark::DoNotOptimize(lindblad_rhs(rho, h, ds));
    st.counters["dim"] = p.dim();
}
BENCHMARK(BM_LindbladRhsDense)->Arg(5)->Arg(10)->Arg(20)->Unit(benchmark::kMicrosecond);

void BM_EvolveSector(benchmark::State& st) {
    const EnsemblePair p(static_cast<int>(st.range(0)), static_cast<int>(st.range(0)));
    const auto h = build_tats(p, 5000.0, 0.0, 0.0);
    const auto ds = bag(p);
    const auto ops = SpinMomentOperators::for_pair(p);
    const auto rho0 = DensityMatrix::from_pure(all_down(p));
    const auto grid = uniform_grid(2e-6, 11);
    IntegratorSettings c;
    c.final_min_eigenvalue = false;
    std::size_t steps = 0;
    for (auto _ : st) {
        const auto tr = evolve(rho0, h, ds, grid, c, ops.operators());
        steps = tr.steps;
        benchmark::DoNotOptimize(tr.observables.data());
    }
    st.counters["steps"] = static_cast<double>(steps);
}
BENCHMARK(BM_EvolveSector)->Arg(10)->Arg(20)->Unit(benchmark::kMillisecond);

void BM_EvolvePure(benchmark::State& st) {
    const EnsemblePair p(static_cast<int>(st.range(0)), static_cast<int>(st.range(0)));
    const auto h = build_tats(p, 5000.0, 0.0, 0.0);
    const auto ops = SpinMomentOperators::for_pair(p);
    const auto grid = uniform_grid(10e-6, 101);
    for (auto _ : st) benchmark::DoNotOptimize(evolve_pure(all_down(p), h, grid, {}, ops.operators()).steps);
}
BENCHMARK(BM_EvolvePure)->Arg(20)->Arg(50)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
