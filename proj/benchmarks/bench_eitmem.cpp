#include <cmath>

#include <benchmark/benchmark.h>

#include "eitmem/analytic.hpp"
#include "eitmem/qbench.hpp"
#include "eitmem/sde.hpp"
#include "eitmem/storage.hpp"

namespace {

using namespace eitmem;

PhysicalParams reference_cell(double gamma0 = 6.55e-6, double gammac = 2.62e-6) {
    return PhysicalParams::from_optical_depth(121.0, 1e12, 0.01, 12.0, std::sqrt(0.22), gamma0, gammac);
}

PulseSpec reference_pulse() {
    PulseSpec p;
    p.duration = 50.0;
    p.center = 50.0;
    p.order = 4;
    p.mod_freq = 0.005;
    p.mod_depth_plus = p.mod_depth_minus = 1.0;
    return p;
}

// Trajectories per second on a coarse delay-line grid; the argument is nz.
static void BM_EnsembleDelayLine(benchmark::State& state) {
    const auto p = reference_cell(0.0, 0.005);
    sde::GridSpec g;
    g.nz = static_cast<int>(state.range(0));
    g.dt = 0.2;
    g.t_total = 400.0;
    g.n_traj = 8;
    g.threads = 1;
    g.noise_model = sde::NoiseModel::Linearized;
    sde::ReadoutSpec r;
    r.planes = {1.0};
    r.omegas = {0.005};
    r.window_start = 100.0;
    r.window_length = 300.0;
    PulseSpec pu;
    pu.shape = PulseShape::FlatTop;
    pu.duration = 1e9;
    pu.center = 0.0;
    pu.mod_freq = 0.005;
    pu.mod_depth_plus = pu.mod_depth_minus = 1.0;
    for (auto _ : state) benchmark::DoNotOptimize(sde::run_ensemble(p, g, pu, r, true));
    state.SetItemsProcessed(state.iterations() * g.n_traj);
}
BENCHMARK(BM_EnsembleDelayLine)->Arg(25)->Arg(50)->Unit(benchmark::kMillisecond);

static void BM_DelaySpectrumSweep(benchmark::State& state) {
    const auto p = reference_cell(0.002, 0.001);
    for (auto _ : state)
        for (int i = 0; i < 101; ++i) benchmark::DoNotOptimize(analytic::delay_spectrum(p, 1.0, 2e-4 * i, 1.0));
    state.SetItemsProcessed(state.iterations() * 101);
}
BENCHMARK(BM_DelaySpectrumSweep);

static void BM_AmpChainSlices(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(analytic::amp_chain(1.1, 1.2, 1.0, 1.0, state.range(0)));
}
BENCHMARK(BM_AmpChainSlices)->Arg(1000)->Arg(10000)->Arg(100000);

static void BM_StorageKernelRoundTrip(benchmark::State& state) {
    const auto p = reference_cell();
    const auto pu = reference_pulse();
    storage::KernelOptions o;
    o.nzeta = static_cast<int>(state.range(0));
    for (auto _ : state)
        benchmark::DoNotOptimize(storage::run(p, pu, 325.0, 50.0, storage::Mode::Kernel, 0.1, o));
}
BENCHMARK(BM_StorageKernelRoundTrip)->Arg(200)->Arg(400)->Unit(benchmark::kMillisecond);

static void BM_StorageIdealRoundTrip(benchmark::State& state) {
    const auto p = reference_cell();
    const auto pu = reference_pulse();
    for (auto _ : state)
        benchmark::DoNotOptimize(storage::run(p, pu, 325.0, 50.0, storage::Mode::Ideal, 0.1));
}
BENCHMARK(BM_StorageIdealRoundTrip);

static void BM_FidelityOverlap(benchmark::State& state) {
    qbench::GaussianState in;
    in.alpha_plus = 1.2;
    in.alpha_minus = -0.7;
    const auto out = qbench::channel_output(in, 0.8, 0.7, 0.3, 0.5);
    for (auto _ : state) benchmark::DoNotOptimize(qbench::fidelity_overlap(in, out));
}
BENCHMARK(BM_FidelityOverlap)->Unit(benchmark::kMicrosecond);

static void BM_RegimeMap(benchmark::State& state) {
    qbench::GridSpec2 g;
    g.nx = g.ny = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(qbench::regime_map(qbench::Plane::GainLoss, g));
    state.SetItemsProcessed(state.iterations() * g.nx * g.ny);
}
BENCHMARK(BM_RegimeMap)->Arg(101)->Arg(401);

}  // namespace

BENCHMARK_MAIN();
