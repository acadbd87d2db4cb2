#include <benchmark/benchmark.h>

#include "amrisk/heston.hpp"
#include "amrisk/linalg.hpp"
#include "amrisk/mc.hpp"
#include "amrisk/pde1d.hpp"
#include "amrisk/pde2d.hpp"

namespace {

void BM_TridiagonalSolve(benchmark::State& state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    amrisk::TridiagonalMatrix m{std::vector<double>(n - 1, 1.0), std::vector<double>(n, 4.0),
                                std::vector<double>(n - 1, 1.0)};
    std::vector<double> rhs(n, 1.0), x(n), scratch(n);
    for (auto _ : state) {
        amrisk::solve_tridiagonal(m, rhs.data(), x.data(), scratch.data());
        benchmark::DoNotOptimize(x);
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_TridiagonalSolve)->Range(256, 4096)->Complexity();

void BM_HestonCall(benchmark::State& state) {
    const amrisk::HestonParams p = amrisk::base_case_params();
    const amrisk::OptionSpec spec{10.0, 1.0, amrisk::OptionKind::Call,
                                  amrisk::ExerciseStyle::European};
    for (auto _ : state) {
        benchmark::DoNotOptimize(amrisk::heston_european_call(p, spec, 0.0, p.s0, p.v0));
    }
}
BENCHMARK(BM_HestonCall);

void BM_AmericanPut1D(benchmark::State& state) {
    const amrisk::LocalVolFn vol = amrisk::LocalVolFn::constant(0.3708353);
    amrisk::Solver1DConfig cfg;
    for (auto _ : state) {
        benchmark::DoNotOptimize(amrisk::price_american_put_1d(vol, cfg, 10.0, 1.0, 0.1));
    }
}
BENCHMARK(BM_AmericanPut1D);

void BM_McsStep(benchmark::State& state) {
    const amrisk::HestonParams p = amrisk::base_case_params();
    const amrisk::Grid1D gs = amrisk::build_sinh_stock_grid(10.0, 80.0, 2.0, 500);
    const amrisk::Grid1D gv = amrisk::build_sinh_variance_grid(4.5, 4.5 / 80.0, 110);
    const amrisk::SplitOperator op(gs, gv, p);
    amrisk::MCSConfig cfg;
    const amrisk::MCSStepper stepper(op, cfg, 1.0 / 300.0);
    const auto b = op.boundary(10.0, 0.0, 10.0);
    std::vector<double> v(op.size(), 1.0);
    for (auto _ : state) {
        v = stepper.step(v, b, b);
        benchmark::DoNotOptimize(v);
    }
}
BENCHMARK(BM_McsStep);

void BM_SimulateHeston(benchmark::State& state) {
    const amrisk::HestonParams p = amrisk::base_case_params();
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            amrisk::simulate_heston(p, 1.0, static_cast<std::size_t>(state.range(0)), 300, 7));
    }
}
BENCHMARK(BM_SimulateHeston)->Arg(1000)->Arg(10000);

}  // namespace

BENCHMARK_MAIN();
