#include <benchmark/benchmark.h>

#include <cmath>

#include "affinegas/diagnostics.hpp"
#include "affinegas/evolver.hpp"

using namespace affinegas;

namespace {

struct Fixture {
    Grid3 g;
    FlowState s;
    WeightProfiles p;
    ModulationFrame f;
    Coefficients c{1.0, 1.5, 1.0, 1.0};

    explicit Fixture(int n) : g(Grid3::make(3.0, n)) {
        const SyntheticFlow flow(42, 0.05);
        s = flow.state(g, 0.5);
        p.w = g.scalar();
        for (int k = 0; k < n; ++k)
            for (int j = 0; j < n; ++j)
                for (int i = 0; i < n; ++i) {
                    const double r2 = g.coord(i) * g.coord(i) + g.coord(j) * g.coord(j) + g.coord(k) * g.coord(k);
                    p.w[g.idx(i, j, k)] = std::exp(-0.5 * r2);
                }
        f.mu = 1.3;
        f.mu_tau = 0.4;
        f.Lambda = Mat3::diag(1.2, 1.0, 1.0 / 1.2);
        f.LambdaInv = Mat3::diag(1.0 / 1.2, 1.0, 1.2);
        f.eig = sym_eig3(f.Lambda);
        f.O = Mat3::identity();
    }
};

void BM_rhs_theta(benchmark::State& state) {
    const Fixture fx(int(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(rhs_theta(fx.g, fx.s, fx.f, fx.p, fx.c));
    state.SetItemsProcessed(state.iterations() * std::int64_t(fx.g.size()));
}
BENCHMARK(BM_rhs_theta)->Arg(17)->Arg(33)->Arg(49)->Unit(benchmark::kMillisecond);

void BM_compute_norms(benchmark::State& state) {
    const Fixture fx(int(state.range(0)));
    const NormContext ctx = make_context(fx.f, 1.0, 1.0, 1.0, 1.5);
    for (auto _ : state)
        benchmark::DoNotOptimize(compute_norms(fx.g, fx.s.theta, fx.s.V, fx.s.kin, Field{}, ctx, int(state.range(1))));
    state.SetItemsProcessed(state.iterations() * std::int64_t(fx.g.size()));
}
BENCHMARK(BM_compute_norms)->Args({33, 1})->Args({33, 2})->Args({49, 2})->Unit(benchmark::kMillisecond);

void BM_rk4_step(benchmark::State& state) {
    Fixture fx(int(state.range(0)));
    for (auto _ : state) rk4_step(fx.g, fx.s, 1e-3, fx.f, fx.f, fx.f, fx.p, fx.c);
    state.SetItemsProcessed(state.iterations() * std::int64_t(fx.g.size()));
}
BENCHMARK(BM_rk4_step)->Arg(33)->Unit(benchmark::kMillisecond);

void BM_sym_eig3(benchmark::State& state) {
    Uniform u(7);
    Mat3 m;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j <= i; ++j) m(i, j) = m(j, i) = u.in(-1.0, 1.0) + (i == j ? 3.0 : 0.0);
    for (auto _ : state) benchmark::DoNotOptimize(sym_eig3(m));
}
BENCHMARK(BM_sym_eig3);

void BM_integrate_affine(benchmark::State& state) {
    AffineParams p;
    p.A0(0, 1) = 0.1;
    p.A0dot = Mat3::diag(0.5, 0.3, 0.4);
    const double t_end = double(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(integrate_affine(p, t_end, 1e-10));
}
BENCHMARK(BM_integrate_affine)->Arg(100)->Arg(1000)->Arg(10000)->Unit(benchmark::kMicrosecond);

}  // namespace
BENCHMARK_MAIN();
