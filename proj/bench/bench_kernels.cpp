// Serial reference vs OpenMP kernels on a synthetic cohort shaped like the
// planning workloads (1e5 - 1e6 rows, a handful of predictors).

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "precisen/kernels.hpp"
#include "precisen/random.hpp"

namespace {

precisen::DesignMatrix make_design(std::int64_t rows, std::int64_t predictors) {
    auto gen = precisen::substream(7, precisen::StreamPurpose::test, 0);
    std::normal_distribution<double> draw(0.0, 1.0);
    precisen::DesignMatrix x(rows, predictors + 1);
    for (std::int64_t i = 0; i < rows; ++i) {
        x(i, 0) = 1.0;
        for (std::int64_t j = 1; j <= predictors; ++j) {
            x(i, j) = draw(gen);
        }
    }
    return x;
}

precisen::Matrix make_spd(std::int64_t k) {
    precisen::Matrix a = precisen::Matrix::Random(k, k);
    return a * a.transpose() + precisen::Matrix::Identity(k, k) * static_cast<double>(k);
}

void BM_GramSerial(benchmark::State& state) {
    const auto x = make_design(state.range(0), state.range(1));
    for (auto _ : state) {
        benchmark::DoNotOptimize(precisen::kernels::serial::gram(x));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_GramParallel(benchmark::State& state) {
    const auto x = make_design(state.range(0), state.range(1));
    for (auto _ : state) {
        benchmark::DoNotOptimize(precisen::kernels::parallel::gram(x));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_QuadraticFormsSerial(benchmark::State& state) {
    const auto x = make_design(state.range(0), state.range(1));
    const auto a = make_spd(state.range(1) + 1);
    std::vector<double> out(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        precisen::kernels::serial::quadratic_forms(x, a, out);
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_QuadraticFormsParallel(benchmark::State& state) {
    const auto x = make_design(state.range(0), state.range(1));
    const auto a = make_spd(state.range(1) + 1);
    std::vector<double> out(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        precisen::kernels::parallel::quadratic_forms(x, a, out);
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void shapes(benchmark::internal::Benchmark* b) {
    for (std::int64_t rows : {100'000, 1'000'000}) {
        for (std::int64_t p : {3, 10}) {
            b->Args({rows, p});
        }
    }
    b->ArgNames({"rows", "p"})->Unit(benchmark::kMillisecond)->UseRealTime();
}

} // namespace

BENCHMARK(BM_GramSerial)->Apply(shapes);
BENCHMARK(BM_GramParallel)->Apply(shapes);
BENCHMARK(BM_QuadraticFormsSerial)->Apply(shapes);
BENCHMARK(BM_QuadraticFormsParallel)->Apply(shapes);

BENCHMARK_MAIN();
