#include <benchmark/benchmark.h>

#include "fastflux/fft.hpp"
#include "fastflux/flux.hpp"
#include "fastflux/lippmann_schwinger.hpp"
#include "fastflux/packets.hpp"
#include "fastflux/propagation.hpp"

using namespace fastflux;

static void BM_FftForward(benchmark::State& state)
{
    const CartesianGrid g(12.0, static_cast<std::size_t>(state.range(0)));
    const ComplexField3D f = GaussianPacket{}.sample(g);
    for (auto _ : state) benchmark::DoNotOptimize(fft_forward(f));
    state.SetComplexityN(static_cast<long>(g.size()));
}
BENCHMARK(BM_FftForward)->Arg(32)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

static void BM_FarFieldSphere(benchmark::State& state)
{
    const CartesianGrid g(12.0, 64);
    const FarField ff(GaussianPacket{{}, 1.0, {0.0, 0.0, 2.0}}.sample(g));
    const DetectorCap cap{Cap{{0.0, 0.0, 1.0}, pi / 6.0}, 40.0};
    const CapQuadrature quad{static_cast<std::size_t>(state.range(0)), 2 * static_cast<std::size_t>(state.range(0))};
    for (auto _ : state) benchmark::DoNotOptimize(surface_flux(ff, cap, 20.0, quad));
}
BENCHMARK(BM_FarFieldSphere)->Arg(8)->Arg(24)->Unit(benchmark::kMillisecond);

static void BM_FreeEvolveExact(benchmark::State& state)
{
    const MomentumSymbol chi = MomentumSymbol::gaussian(1.0);
    const double t = static_cast<double>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(free_evolve_exact(chi, {0.0, 0.0, 0.5 * t}, t));
}
BENCHMARK(BM_FreeEvolveExact)->Arg(5)->Arg(40)->Unit(benchmark::kMillisecond);

static void BM_IntegralEquationSolve(benchmark::State& state)
{
    const Potential V = make_gaussian_potential(0.1, 1.0);
    LsOptions o;
    o.points_per_axis = static_cast<std::size_t>(state.range(0));
    const LsOperator op(V, o);
    for (auto _ : state) benchmark::DoNotOptimize(op.solve({0.0, 0.0, 2.0}, +1));
}
BENCHMARK(BM_IntegralEquationSolve)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
