#include "distgeo/geometry.hpp"
#include "distgeo/metrics.hpp"
#include "distgeo/patch_graph.hpp"
#include "distgeo/rng.hpp"
#include "distgeo/solver.hpp"
#include "distgeo/stitching.hpp"
#include "distgeo/synthetic.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace distgeo;

Matrix random_points(int n, uint64_t seed) {
    Rng rng(seed);
    Matrix m(n, 2);
    for (int i = 0; i < n; ++i) {
        m(i, 0) = rng.uniform();
        m(i, 1) = rng.uniform();
    }
    return m;
}

void BM_PairwiseDistances(benchmark::State& state) {
    const Matrix pts = random_points(static_cast<int>(state.range(0)), 1);
    for (auto _ : state) benchmark::DoNotOptimize(pairwise_distances(pts));
}
BENCHMARK(BM_PairwiseDistances)->Arg(256)->Arg(1024);

void BM_CanonicalFactor(benchmark::State& state) {
    const Matrix g = gram(center(random_points(static_cast<int>(state.range(0)), 2)));
    for (auto _ : state) benchmark::DoNotOptimize(canonical_factor(g, 32));
}
BENCHMARK(BM_CanonicalFactor)->Arg(128)->Arg(512);

void BM_MutualKnnGraph(benchmark::State& state) {
    Rng rng(3);
    const int n = static_cast<int>(state.range(0));
    Matrix z(n, 16);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < 16; ++j) z(i, j) = rng.normal();
    GraphConfig cfg;
    cfg.k_z = 50;
    for (auto _ : state) benchmark::DoNotOptimize(mutual_knn_graph(z, cfg));
}
BENCHMARK(BM_MutualKnnGraph)->Arg(1000)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_WeightedMedian(benchmark::State& state) {
    Rng rng(4);
    std::vector<std::pair<double, double>> vw;
    for (int i = 0; i < 64; ++i) vw.emplace_back(rng.uniform(0.5, 2.0), rng.uniform());
    for (auto _ : state) {
        auto copy = vw;
        benchmark::DoNotOptimize(weighted_median(std::move(copy)));
    }
}
BENCHMARK(BM_WeightedMedian);

void BM_HuberStressGradient(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const Matrix pts = random_points(n, 5);
    StitchedGraph graph;
    graph.num_nodes = n;
    Rng rng(6);
    for (int i = 0; i < n; ++i)
        for (int t = 0; t < 10; ++t) {
            const int j = static_cast<int>(rng.uniform_index(n));
            if (j == i) continue;
            graph.edges.push_back({std::min(i, j), std::max(i, j),
                                   (pts.row(i) - pts.row(j)).norm(), 1.0, 2, 0.0});
        }
    SolverConfig cfg;
    for (auto _ : state) benchmark::DoNotOptimize(huber_stress(pts, graph, pts, cfg));
}
BENCHMARK(BM_HuberStressGradient)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_Spearman(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const Matrix d = pairwise_distances(random_points(n, 7));
    const Matrix d_gt = pairwise_distances(random_points(n, 8));
    for (auto _ : state)
        benchmark::DoNotOptimize(global_distance_metrics(d, d_gt));
}
BENCHMARK(BM_Spearman)->Arg(500)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_OraclePredict(benchmark::State& state) {
    Rng rng(9);
    SyntheticConfig cfg;
    cfg.n_cells = 2000;
    const auto slide = generate_slide(cfg, rng);
    OraclePredictor predictor(slide.coords, {});
    std::vector<int> patch;
    for (int i = 0; i < static_cast<int>(state.range(0)); ++i) patch.push_back(i);
    int idx = 0;
    for (auto _ : state) benchmark::DoNotOptimize(predictor.predict(patch, idx++));
}
BENCHMARK(BM_OraclePredict)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
