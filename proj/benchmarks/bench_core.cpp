#include "qsync/classical.hpp"
#include "qsync/heterodyne.hpp"
#include "qsync/lindblad.hpp"
#include "qsync/phase_space.hpp"

#include <benchmark/benchmark.h>

using namespace qsync;

namespace {

lindblad::Liouvillian single_qvdp(int n_max) {
    return lindblad::Liouvillian(lindblad::build_qvdp_model(4.0, 4.0, 0.5, 1.0, n_max));
}

void BM_LiouvillianApply(benchmark::State& state) {
    const auto L = single_qvdp(static_cast<int>(state.range(0)));
    const Matrix rho = DensityOperator::maximally_mixed(L.dim()).matrix();
    Matrix out(L.dim(), L.dim());
    for (auto _ : state) {
        L.apply(rho, out);
        benchmark::DoNotOptimize(out.data());
    }
}
BENCHMARK(BM_LiouvillianApply)->Arg(8)->Arg(16)->Arg(24)->Arg(48);

void BM_TwoModeApply(benchmark::State& state) {
    const lindblad::Liouvillian L(lindblad::build_two_qvdp_model(5.0, 2.0, 3.0, 1.0, 1.0, static_cast<int>(state.range(0))));
    const Matrix rho = DensityOperator::maximally_mixed(L.dim()).matrix();
    Matrix out(L.dim(), L.dim());
    for (auto _ : state) {
        L.apply(rho, out);
        benchmark::DoNotOptimize(out.data());
    }
}
BENCHMARK(BM_TwoModeApply)->Arg(6)->Arg(8)->Arg(12);

void BM_Rk4Step(benchmark::State& state) {
    const auto L = single_qvdp(static_cast<int>(state.range(0)));
    Matrix rho = DensityOperator::maximally_mixed(L.dim()).matrix();
    lindblad::Liouvillian::Workspace ws;
    for (auto _ : state) {
        L.rk4_step(rho, 1e-3, ws);
        benchmark::DoNotOptimize(rho.data());
    }
}
BENCHMARK(BM_Rk4Step)->Arg(12)->Arg(24);

// Per-step cost of the heterodyne SME, reported per integrator step.
void BM_SmeStep(benchmark::State& state) {
    const int n_max = static_cast<int>(state.range(0));
    const auto L = single_qvdp(n_max);
    const auto f = fock_operators(n_max);
    const std::vector<hetero::MonitoredChannel> channels{{f.a, 1.0, 1.0, "a"}};
    const auto rho0 = DensityOperator::pure(coherent_ket({2.0, 0.0}, n_max).ket);
    hetero::SmeOptions o;
    o.dt = 1e-3;
    o.t_final = 0.1;
    o.store_every = 10;
    std::uint64_t seed = 0;
    for (auto _ : state) {
        o.seed = ++seed;
        benchmark::DoNotOptimize(hetero::evolve_sme(L, channels, rho0, o));
    }
    state.SetItemsProcessed(state.iterations() * 100);
}
BENCHMARK(BM_SmeStep)->Arg(12)->Arg(24)->Unit(benchmark::kMillisecond);

void BM_ClassicalEm(benchmark::State& state) {
    const classical::VdpParams p{10.0, 10.0, 20.0, 1.0};
    classical::IntegrationOptions o;
    o.dt = 1e-3;
    o.t_final = 10.0;
    o.record_every = 10;
    o.threads = 1;
    for (auto _ : state) {
        o.seed++;
        benchmark::DoNotOptimize(classical::simulate_vdp(p, {0.7, 0.0}, o));
    }
    state.SetItemsProcessed(state.iterations() * 10000);
}
BENCHMARK(BM_ClassicalEm)->Unit(benchmark::kMillisecond);

void BM_PhaseDiffBoson(benchmark::State& state) {
    const lindblad::Liouvillian L(lindblad::build_two_qvdp_model(0.5, 1.0, 3.0, 1.0, 1.0, 6));
    const auto rho = lindblad::steady_state(L).rho;
    for (auto _ : state) benchmark::DoNotOptimize(phase::phase_diff_dist_boson(rho));
}
BENCHMARK(BM_PhaseDiffBoson);

}  // namespace

BENCHMARK_MAIN();
