#include <benchmark/benchmark.h>

#include "fairpsm/fairmatch.hpp"
#include "fairpsm/learners.hpp"
#include "fairpsm/psm.hpp"
#include "fairpsm/rng.hpp"
#include "fairpsm/stats.hpp"

using namespace fairpsm;

namespace {

PropensityScores random_scores(size_t n, uint64_t seed) {
    Rng rng(seed);
    PropensityScores ps;
    ps.scores.resize(n);
    for (auto& s : ps.scores) s = rng.uniform01();
    ps.source = "bench";
    return ps;
}

std::vector<int> random_pa(size_t n, uint64_t seed) {
    Rng rng(seed);
    std::vector<int> pa(n);
    for (auto& g : pa) g = rng.uniform01() < 0.5;
    return pa;
}

std::vector<int64_t> iota_ids(size_t n) {
    std::vector<int64_t> ids(n);
    for (size_t i = 0; i < n; ++i) ids[i] = static_cast<int64_t>(i);
    return ids;
}

} // namespace

static void BM_Match(benchmark::State& state) {
    const size_t n = static_cast<size_t>(state.range(0));
    const auto ps = random_scores(n, 1);
    const auto pa = random_pa(n, 2);
    const auto ids = iota_ids(n);
    for (auto _ : state) {
        benchmark::DoNotOptimize(match(ps, pa, ids, {}));
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Match)->Range(256, 1 << 16)->Complexity();

static void BM_ThresholdSearch(benchmark::State& state) {
    const size_t n = static_cast<size_t>(state.range(0));
    Rng rng(3);
    std::vector<double> a(n), b(n);
    for (auto& v : a) v = rng.uniform01();
    for (auto& v : b) v = rng.uniform01() * 0.8;
    for (auto _ : state) {
        benchmark::DoNotOptimize(threshold_search(a, b, 0.01));
    }
}
BENCHMARK(BM_ThresholdSearch)->Range(64, 1 << 13);

static void BM_FitLogistic(benchmark::State& state) {
    const size_t n = static_cast<size_t>(state.range(0));
    const size_t d = 20;
    Rng rng(4);
    Matrix x(n, d);
    std::vector<int> y(n);
    for (size_t r = 0; r < n; ++r) {
        double z = -1.0;
        for (size_t c = 0; c < d; ++c) {
            x.at(r, c) = rng.uniform01();
            z += (c % 2 ? 0.3 : -0.2) * x.at(r, c);
        }
        y[r] = rng.uniform01() < 1.0 / (1.0 + std::exp(-z)) ? 1 : 0;
    }
    LogisticConfig cfg;
    cfg.max_iters = 200;
    for (auto _ : state) {
        benchmark::DoNotOptimize(fit_logistic(x, y, cfg));
    }
}
BENCHMARK(BM_FitLogistic)->Range(512, 1 << 14);

static void BM_WelchTtest(benchmark::State& state) {
    const size_t n = static_cast<size_t>(state.range(0));
    Rng rng(5);
    std::vector<double> a(n), b(n);
    for (auto& v : a) v = rng.uniform01();
    for (auto& v : b) v = rng.uniform01() + 0.1;
    for (auto _ : state) {
        benchmark::DoNotOptimize(welch_ttest(a, b));
    }
}
BENCHMARK(BM_WelchTtest)->Range(16, 1 << 14);

static void BM_ScottKnott(benchmark::State& state) {
    const size_t groups = static_cast<size_t>(state.range(0));
    Rng rng(6);
    std::map<std::string, std::vector<double>> data;
    for (size_t g = 0; g < groups; ++g) {
        std::vector<double> obs(20);
        const double center = static_cast<double>(g % 4);
        for (auto& v : obs) v = center + rng.uniform01();
        data["method" + std::to_string(g)] = std::move(obs);
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(scott_knott(data, true));
    }
}
BENCHMARK(BM_ScottKnott)->Range(2, 64);
