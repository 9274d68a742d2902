#include <benchmark/benchmark.h>

#include "steinkit/compare.hpp"
#include "steinkit/density.hpp"
#include "steinkit/operators.hpp"
#include "steinkit/oracle.hpp"
#include "steinkit/quadrature.hpp"
#include "steinkit/solve.hpp"

#include <cmath>

using namespace steinkit;

static void BM_QuadratureGaussianMoment(benchmark::State& state) {
    for (auto _ : state) {
        QuadResult r = integrate(
            [](double x) { return x * x * std::exp(-x * x / 2.0); }, -kInf,
            kInf);
        benchmark::DoNotOptimize(r.value);
    }
}
BENCHMARK(BM_QuadratureGaussianMoment);

static void BM_QuadratureKinked(benchmark::State& state) {
    DensityModel g = make_gaussian(0.0, 1.0);
    for (auto _ : state) {
        const double v =
            expect(g, [](double x) { return std::fabs(x - 0.3); }, 1e-10,
                   {0.3});
        benchmark::DoNotOptimize(v);
    }
}
BENCHMARK(BM_QuadratureKinked);

static void BM_KernelEvalContinuous(benchmark::State& state) {
    SteinPair sp = make_stein_pair(make_student(7.0));
    RealFn tau = stein_kernel(sp);
    double x = -3.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(tau(x));
        x += 0.01;
        if (x > 3.0) x = -3.0;
    }
}
BENCHMARK(BM_KernelEvalContinuous);

static void BM_KernelEvalLattice(benchmark::State& state) {
    SteinPair sp = make_stein_pair(make_binomial(40, 0.3));
    RealFn tau = stein_kernel(sp);
    std::int64_t k = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(tau(double(k)));
        k = (k + 1) % 41;
    }
}
BENCHMARK(BM_KernelEvalLattice);

static void BM_InverseOperator(benchmark::State& state) {
    SteinPair sp = make_stein_pair(make_gaussian(0.0, 1.0));
    RealFn h = [](double x) { return std::sin(x) + 0.1 * x * x; };
    double x = -2.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(inverse_apply(sp, h, x, true));
        x += 0.05;
        if (x > 2.0) x = -2.0;
    }
}
BENCHMARK(BM_InverseOperator);

static void BM_OracleTVContinuous(benchmark::State& state) {
    DensityModel a = make_gaussian(0.0, 1.0);
    DensityModel b = make_gaussian(0.2, 1.4);
    for (auto _ : state) {
        benchmark::DoNotOptimize(tv_distance(a, b).value);
    }
}
BENCHMARK(BM_OracleTVContinuous);

static void BM_OracleWassersteinLattice(benchmark::State& state) {
    DensityModel a = make_binomial(60, 0.4);
    DensityModel b = make_poisson(24.0);
    for (auto _ : state) {
        benchmark::DoNotOptimize(wasserstein_distance(a, b).value);
    }
}
BENCHMARK(BM_OracleWassersteinLattice);

static void BM_SumKernelFold(benchmark::State& state) {
    const std::int64_t n = state.range(0);
    std::vector<SteinPair> parts(
        std::size_t(n), make_stein_pair(make_rademacher(),
                                        {OpKind::SpanDifference, 2.0, false}));
    std::vector<double> w(std::size_t(n), 1.0 / std::sqrt(double(n)));
    for (auto _ : state) {
        WeightedSumKernel wk = sum_kernel(parts, w);
        benchmark::DoNotOptimize(wk.tau_variance());
    }
}
BENCHMARK(BM_SumKernelFold)->Arg(16)->Arg(32)->Arg(64);

BENCHMARK_MAIN();
