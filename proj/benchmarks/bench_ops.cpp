#include <benchmark/benchmark.h>

#include "ptycho/core.hpp"
#include "ptycho/fft.hpp"
#include "ptycho/forward.hpp"
#include "ptycho/lens.hpp"
#include "ptycho/projectors.hpp"
#include "ptycho/solvers.hpp"
#include "ptycho/spectral.hpp"

namespace {

using namespace ptycho;

// Desk-scale instance: n = 64, m = 16, step 4, BLR lens.
struct Desk {
    ForwardModel model;
    MeasurementStack a;
    FrameStack zeta;

    static Desk make() {
        SchemeParams sp;
        sp.jitter = 0.5;
        sp.shear = true;
        sp.seed = 3;
        LensSpec ls;
        ls.seed = 7;
        ForwardModel model(build_scheme(sp), make_blr_lens(ls).omega);
        MeasurementStack a = forward_measure(model, make_phantom(64));
        FrameStack zeta = forward_frames(model, random_object(64, 1));
        return {std::move(model), std::move(a), std::move(zeta)};
    }
};

const Desk& desk() {
    static const Desk d = Desk::make();
    return d;
}

void BM_Dft2(benchmark::State& state) {
    const auto m = static_cast<std::size_t>(state.range(0));
    ComplexGrid g = random_object(m, 2);
    for (auto _ : state) {
        dft2_inplace(g.data, m, Direction::Forward);
        benchmark::DoNotOptimize(g.data.data());
    }
}
BENCHMARK(BM_Dft2)->Arg(16)->Arg(64)->Arg(128);

void BM_RangeProjector(benchmark::State& state) {
    const Desk& d = desk();
    const RangeProjector P(d.model);
    for (auto _ : state) benchmark::DoNotOptimize(P.apply(d.zeta));
}
BENCHMARK(BM_RangeProjector)->Unit(benchmark::kMicrosecond);

void BM_AmplitudeProjector(benchmark::State& state) {
    const Desk& d = desk();
    const AmplitudeProjector Pa(d.a);
    for (auto _ : state) benchmark::DoNotOptimize(Pa.apply(d.zeta));
}
BENCHMARK(BM_AmplitudeProjector)->Unit(benchmark::kMicrosecond);

void BM_ApStep(benchmark::State& state) {
    const Desk& d = desk();
    const RangeProjector P(d.model);
    const AmplitudeProjector Pa(d.a);
    for (auto _ : state) benchmark::DoNotOptimize(ap_step(P, Pa, d.zeta));
}
BENCHMARK(BM_ApStep)->Unit(benchmark::kMicrosecond);

void BM_Metrics(benchmark::State& state) {
    const Desk& d = desk();
    const RangeProjector P(d.model);
    const AmplitudeProjector Pa(d.a);
    const FrameStack next = ap_step(P, Pa, d.zeta);
    for (auto _ : state) benchmark::DoNotOptimize(compute_metrics(d.zeta, &next, Pa, P, &next));
}
BENCHMARK(BM_Metrics)->Unit(benchmark::kMicrosecond);

void BM_FrameSyncKernel(benchmark::State& state) {
    const Desk& d = desk();
    const RangeProjector P(d.model);
    const AmplitudeProjector Pa(d.a);
    std::size_t its = 0;
    for (auto _ : state) {
        const FrameSyncState st = frame_sync_kernel(P, Pa, d.zeta, SyncKernel::K);
        its = st.eig_iterations;
        benchmark::DoNotOptimize(st.xi.data());
    }
    state.counters["eig_iterations"] = static_cast<double>(its);
}
BENCHMARK(BM_FrameSyncKernel)->Unit(benchmark::kMicrosecond);

void BM_GclApply(benchmark::State& state) {
    const Desk& d = desk();
    const ConnectionGraph g = build_gcl(d.model, d.a);
    CVec out(g.dim());
    for (auto _ : state) {
        g.apply_normalized(d.zeta.data, out);
        benchmark::DoNotOptimize(out.data());
    }
}
BENCHMARK(BM_GclApply)->Unit(benchmark::kMicrosecond);

}  // namespace
BENCHMARK_MAIN();
