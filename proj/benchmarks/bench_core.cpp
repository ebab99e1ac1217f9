#include <benchmark/benchmark.h>

#include "singlab/capacity.hpp"
#include "singlab/elliptic.hpp"
#include "singlab/measure.hpp"
#include "singlab/singular.hpp"

using namespace singlab;

static void BM_Assemble2D(benchmark::State& state) {
    Domain dom = Domain::unit_box(2, static_cast<int>(state.range(0)));
    for (auto _ : state) {
        LinearSystem sys = assemble(dom, CoefficientField::identity());
        benchmark::DoNotOptimize(sys.unknowns());
    }
}
BENCHMARK(BM_Assemble2D)->Arg(65)->Arg(129)->Arg(257);

static void BM_PoissonSolve2D(benchmark::State& state) {
    Domain dom = Domain::unit_box(2, static_cast<int>(state.range(0)));
    LinearSystem sys = assemble(dom, CoefficientField::identity());
    ScalarField load(dom, 1.0);
    for (auto _ : state) {
        ScalarField u = solve_linear(sys, load, 1e-10);
        benchmark::DoNotOptimize(u.max_abs());
    }
}
BENCHMARK(BM_PoissonSolve2D)->Arg(65)->Arg(129)->Unit(benchmark::kMillisecond);

static void BM_SingularLevel(benchmark::State& state) {
    Domain dom = Domain::unit_box(2, 65);
    DiscreteMeasure m = discretize(MeasureSpec::from_atom({{0.5, 0.5, 0}, 1.0}), dom);
    LinearSystem sys = assemble(dom, CoefficientField::identity());
    for (auto _ : state) {
        RegularizedProblem prob{dom, CoefficientField::identity(), m, 1.0,
                                static_cast<double>(state.range(0))};
        SingularSolverOptions opts;
        opts.system = &sys;
        SolveReport rep = solve_regularized(prob, opts);
        benchmark::DoNotOptimize(rep.solution.max_abs());
    }
}
BENCHMARK(BM_SingularLevel)->Arg(100)->Arg(10000)->Unit(benchmark::kMillisecond);

static void BM_Capacity2D(benchmark::State& state) {
    Domain dom = Domain::unit_box(2, 65);
    CondenserProblem cp;
    cp.center = {0.5, 0.5, 0};
    cp.radius = 0.2;
    cp.p = state.range(0) == 2 ? 2.0 : 3.0;
    for (auto _ : state) {
        CapacityEstimate est = estimate_capacity(dom, cp, 1e-6);
        benchmark::DoNotOptimize(est.value);
    }
}
BENCHMARK(BM_Capacity2D)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
