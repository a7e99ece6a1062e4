// Micro-benchmarks for the paths the experiments spend their time in:
// Gaussian data generation, linear-scan queries, the concentration inner
// loop, LSH build/query, and the Monte Carlo selection simulator.

#include <benchmark/benchmark.h>

#include <cstdint>
#include <vector>

#include "nnlab/analysis.hpp"
#include "nnlab/dataset.hpp"
#include "nnlab/experiments.hpp"
#include "nnlab/lsh.hpp"
#include "nnlab/neighbors.hpp"
#include "nnlab/rng.hpp"

namespace {

using nnlab::Dataset;
using nnlab::Point;
using nnlab::RngStream;

Point random_query(int dim, RngStream& rng) {
    Point q(static_cast<size_t>(dim));
    for (auto& c : q) c = rng.normal();
    return q;
}

// n x d standard normal coordinates; the dominant cost of every experiment.
void BM_GaussianDataset(benchmark::State& state) {
    const auto n = static_cast<int64_t>(state.range(0));
    const int d = static_cast<int>(state.range(1));
    RngStream rng(1);
    for (auto _ : state) {
        benchmark::DoNotOptimize(nnlab::gaussian_dataset(n, d, rng));
    }
    state.SetItemsProcessed(state.iterations() * n * d);
}
BENCHMARK(BM_GaussianDataset)
    ->Args({1000, 100})
    ->Args({1000, 1000})
    ->Args({100, 10000});

// Exact nearest-neighbor linear scan.
void BM_ExactNnSet(benchmark::State& state) {
    const auto n = static_cast<int64_t>(state.range(0));
    const int d = static_cast<int>(state.range(1));
    RngStream rng(2);
    const Dataset ds = nnlab::gaussian_dataset(n, d, rng);
    const Point q = random_query(d, rng);
    for (auto _ : state) {
        benchmark::DoNotOptimize(nnlab::exact_nn_set(ds, q, nnlab::kFloatTieTol));
    }
    state.SetItemsProcessed(state.iterations() * n * d);
}
BENCHMARK(BM_ExactNnSet)->Args({10000, 32})->Args({10000, 128});

// One max/min distance-ratio run, both coordinate widths; the concentration
// grid is runs x this.
void BM_DistanceRatioRun(benchmark::State& state) {
    const auto n = static_cast<int64_t>(state.range(0));
    const int d = static_cast<int>(state.range(1));
    const auto precision = state.range(2) != 0 ? nnlab::Precision::kFloat32
                                               : nnlab::Precision::kFloat64;
    uint64_t run = 0;
    for (auto _ : state) {
        RngStream rng(3, nnlab::stream_id_for("concentration",
                                              {static_cast<uint64_t>(n),
                                               static_cast<uint64_t>(d),
                                               run++}));
        benchmark::DoNotOptimize(
            nnlab::distance_ratio_run(n, d, precision, rng));
    }
    state.SetItemsProcessed(state.iterations() * n * d);
}
BENCHMARK(BM_DistanceRatioRun)
    ->Args({1000, 1000, 0})
    ->Args({1000, 1000, 1})
    ->ArgNames({"n", "d", "f32"});

// Index construction: L tables x k hashes x n points.
void BM_LshBuild(benchmark::State& state) {
    const int tables = static_cast<int>(state.range(0));
    RngStream rng(4);
    const Dataset ds = nnlab::gaussian_dataset(10000, 32, rng);
    const double w = nnlab::default_bucket_width(ds);
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            nnlab::build_lsh_index(ds, nnlab::LshParams{8, tables, w, 5}));
    }
    state.SetItemsProcessed(state.iterations() * ds.size());
}
BENCHMARK(BM_LshBuild)->Arg(4)->Arg(16);

// Single query against a built index, uncapped candidate scan.
void BM_LshQuery(benchmark::State& state) {
    RngStream rng(5);
    const Dataset ds = nnlab::gaussian_dataset(10000, 32, rng);
    const double w = nnlab::default_bucket_width(ds);
    const nnlab::LshIndex index =
        nnlab::build_lsh_index(ds, nnlab::LshParams{8, 16, w, 6});
    std::vector<Point> queries;
    for (int i = 0; i < 64; ++i) queries.push_back(random_query(32, rng));
    size_t next = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            nnlab::lsh_query(index, queries[next], ds.size()));
        next = (next + 1) % queries.size();
    }
}
BENCHMARK(BM_LshQuery);

// Monte Carlo selection trials; throughput sets the local-sim runtime.
void BM_SimulateLocal(benchmark::State& state) {
    const auto k = static_cast<int64_t>(state.range(0));
    uint64_t rep = 0;
    for (auto _ : state) {
        RngStream rng(6, nnlab::stream_id_for("bench/local-sim", {rep++}));
        benchmark::DoNotOptimize(nnlab::simulate_local(
            nnlab::LocalModel{0.3, k}, nnlab::SelectionPolicy::minority_class(),
            100000, rng));
    }
    state.SetItemsProcessed(state.iterations() * 100000);
}
BENCHMARK(BM_SimulateLocal)->Arg(1)->Arg(20);

// One jitter-and-requery perturbation draw cycle.
void BM_PerturbationDraw(benchmark::State& state) {
    const Dataset base = nnlab::perturbation_instance(5);
    const Point origin(static_cast<size_t>(base.dim()), 0.0);
    uint64_t t = 0;
    for (auto _ : state) {
        RngStream rng(7, nnlab::stream_id_for("perturb", {t++}));
        const Dataset moved = nnlab::perturb_grid_dataset(base, 0.2, rng);
        const Point q = nnlab::perturb_grid_point(origin, 0.2, rng);
        benchmark::DoNotOptimize(nnlab::exact_nn_set(moved, q, 0.0));
    }
}
BENCHMARK(BM_PerturbationDraw);

}  // namespace

BENCHMARK_MAIN();
