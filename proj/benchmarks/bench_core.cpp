// Microbenchmarks for the hot paths: scoring, the batch gradient, ranking,
// graph queries, bootstrap replicates, and a full training epoch.

#include <benchmark/benchmark.h>

#include <cstdint>
#include <set>
#include <vector>

#include "daid/causal.hpp"
#include "daid/metrics.hpp"
#include "daid/model.hpp"
#include "daid/rng.hpp"
#include "daid/synthgen.hpp"

namespace {

daid::ScmOutput make_data(std::size_t n_train, std::size_t n_test) {
    daid::ScmConfig cfg;
    cfg.n_train = n_train;
    cfg.n_test = n_test;
    cfg.seed = 1;
    return daid::generate(cfg);
}

void BM_Auc(benchmark::State& state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    auto rng = daid::rng_stream(3, daid::stream::kInit);
    std::vector<double> scores(n);
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
        scores[i] = daid::runif01(rng);
        labels[i] = i % 2 == 0 ? 1 : 0;
    }
    for (auto _ : state) benchmark::DoNotOptimize(daid::auc(scores, labels));
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                            static_cast<std::int64_t>(n));
}
BENCHMARK(BM_Auc)->Arg(256)->Arg(2048)->Arg(16384);

void BM_ScoreDataset(benchmark::State& state) {
    const daid::ScmOutput data = make_data(64, 2000);
    daid::TrainConfig cfg;
    cfg.epochs = 1;
    const daid::TrainResult model = daid::train(data.train, cfg);
    for (auto _ : state) benchmark::DoNotOptimize(daid::score_dataset(model, data.test_source));
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) * 2000);
}
BENCHMARK(BM_ScoreDataset);

void BM_ForwardBackward(benchmark::State& state) {
    const std::size_t batch = static_cast<std::size_t>(state.range(0));
    const daid::ScmOutput data = make_data(batch, 16);
    auto rng = daid::rng_stream(5, daid::stream::kInit);
    daid::ModelParams params = daid::init_params(16, {32, 32}, 16, 8, rng);

    std::vector<const daid::Sample*> ptrs;
    for (const auto& s : data.train.samples) ptrs.push_back(&s);
    const std::vector<double> weights(ptrs.size(), 1.0);
    daid::BatchOptions opts;
    daid::Gradients grads = daid::Gradients::zeros_like(params);

    for (auto _ : state) {
        daid::backward(params, ptrs, weights, nullptr, opts, grads, 1);
        benchmark::DoNotOptimize(grads.head_b);
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                            static_cast<std::int64_t>(batch));
}
BENCHMARK(BM_ForwardBackward)->Arg(64)->Arg(256);

void BM_DSeparation(benchmark::State& state) {
    const daid::Dag g = daid::fairness_generalization_dag();
    const int x = g.node_id("F"), y = g.node_id("A");
    const std::set<int> z = {g.node_id("DD"), g.node_id("MC")};
    for (auto _ : state) benchmark::DoNotOptimize(daid::d_separated_ids(g, x, y, z));
}
BENCHMARK(BM_DSeparation);

void BM_BootstrapReplicate(benchmark::State& state) {
    const daid::ScmOutput data = make_data(400, 400);
    daid::TrainConfig base;
    base.hidden = {8};
    base.epochs = 2;
    const std::vector<daid::McPreset> grid = {{"small", {8}}, {"large", {16}}};
    const daid::InterventionResult ex =
        daid::run_intervention_experiment(data.train, data.test_shifted, grid, 1, base);
    const std::int64_t b = state.range(0);
    for (auto _ : state)
        benchmark::DoNotOptimize(daid::stratified_bootstrap(ex, b, 0.05, 7));
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) * b);
}
BENCHMARK(BM_BootstrapReplicate)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_TrainEpoch(benchmark::State& state) {
    const daid::ScmOutput data = make_data(static_cast<std::size_t>(state.range(0)), 16);
    daid::TrainConfig cfg;
    cfg.epochs = 1;
    cfg.reweight = cfg.normalize = cfg.attr = cfg.ortho = true;
    for (auto _ : state) benchmark::DoNotOptimize(daid::train(data.train, cfg));
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) * state.range(0));
}
BENCHMARK(BM_TrainEpoch)->Arg(1000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
