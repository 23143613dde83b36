#include <benchmark/benchmark.h>

#include <cstdint>
#include <vector>

#include "churnforge/analysis.hpp"
#include "churnforge/classify.hpp"
#include "churnforge/eval.hpp"
#include "churnforge/label.hpp"
#include "churnforge/model.hpp"
#include "churnforge/network.hpp"
#include "churnforge/rng.hpp"
#include "churnforge/synth.hpp"

namespace {

using namespace churnforge;

synth::MarketConfig scaled_config(std::int64_t n_workers, std::int64_t n_tasks) {
    synth::MarketConfig cfg = synth::default_config(42);
    cfg.n_workers = n_workers;
    cfg.n_tasks = n_tasks;
    return cfg;
}

std::vector<label::LabeledWorker> labeled_pool(const EventLog& log) {
    return label::label_dataset(log, label::split_cut_time(log, 2.0 / 3.0));
}

void BM_GenerateMarket(benchmark::State& state) {
    const auto cfg = scaled_config(state.range(0), state.range(1));
    for (auto _ : state) {
        benchmark::DoNotOptimize(synth::generate_market(cfg));
    }
}
BENCHMARK(BM_GenerateMarket)->Args({200, 2000})->Args({1000, 13000})->Unit(benchmark::kMillisecond);

void BM_LabelDataset(benchmark::State& state) {
    const EventLog log = synth::generate_market(scaled_config(1000, 13000));
    const Timestamp cut = label::split_cut_time(log, 2.0 / 3.0);
    for (auto _ : state) {
        benchmark::DoNotOptimize(label::label_dataset(log, cut));
    }
}
BENCHMARK(BM_LabelDataset)->Unit(benchmark::kMillisecond);

void BM_WorkerFeatures(benchmark::State& state) {
    const EventLog log = synth::generate_market(scaled_config(1000, 13000));
    const network::MarketNetworks nets = network::build_networks(log);
    for (auto _ : state) {
        benchmark::DoNotOptimize(network::worker_features(nets));
    }
}
BENCHMARK(BM_WorkerFeatures)->Unit(benchmark::kMillisecond);

void BM_KnnPredict(benchmark::State& state) {
    const EventLog log = synth::generate_market(scaled_config(1000, 13000));
    const auto pool = labeled_pool(log);
    const classify::KnnModel model = classify::knn_fit(pool, 3);
    std::size_t next = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(classify::knn_predict(model, pool[next].features));
        next = (next + 1) % pool.size();
    }
}
BENCHMARK(BM_KnnPredict);

void BM_GnbPredict(benchmark::State& state) {
    const EventLog log = synth::generate_market(scaled_config(1000, 13000));
    const auto pool = labeled_pool(log);
    const classify::GnbModel model = classify::gnb_fit(pool);
    std::size_t next = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(classify::gnb_predict(model, pool[next].features));
        next = (next + 1) % pool.size();
    }
}
BENCHMARK(BM_GnbPredict);

void BM_Pearson(benchmark::State& state) {
    Rng rng(7);
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    std::vector<double> xs(n), ys(n);
    for (std::size_t i = 0; i < n; ++i) {
        xs[i] = rng.uniform(0.0, 100.0);
        ys[i] = xs[i] + rng.normal() * 10.0;
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(analysis::pearson(xs, ys));
    }
}
BENCHMARK(BM_Pearson)->Arg(1000)->Arg(100000);

void BM_BinSuccessRates(benchmark::State& state) {
    Rng rng(11);
    std::vector<WorkerFeatures> dropouts;
    dropouts.reserve(static_cast<std::size_t>(state.range(0)));
    for (std::int64_t i = 0; i < state.range(0); ++i) {
        const auto participation = static_cast<std::int64_t>(rng.uniform_index(200)) + 1;
        const auto winning =
            static_cast<std::int64_t>(rng.uniform_index(static_cast<std::uint64_t>(participation) + 1));
        dropouts.emplace_back("w" + std::to_string(i), participation, winning);
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(analysis::bin_success_rates(dropouts));
    }
}
BENCHMARK(BM_BinSuccessRates)->Arg(1000)->Arg(100000);

void BM_SplitSweep(benchmark::State& state) {
    const EventLog log = synth::generate_market(scaled_config(500, 5000));
    const auto pool = labeled_pool(log);
    const std::vector<int> ratios{10, 50, 90};
    for (auto _ : state) {
        benchmark::DoNotOptimize(eval::split_sweep(pool, ratios, 3));
    }
}
BENCHMARK(BM_SplitSweep)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
