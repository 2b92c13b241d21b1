// Microbenchmarks for the hot paths: table statistics, plan search, and the
// end-to-end pipeline on a synthetic biased sentiment set.

#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "igd/pipeline.hpp"

namespace {

using igd::ContingencyTable;

ContingencyTable random_table(std::size_t Y, std::size_t B, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    ContingencyTable t;
    t.feature = "bench";
    t.counts.assign(Y, std::vector<std::int64_t>(B));
    for (std::size_t y = 0; y < Y; ++y) {
        t.answer_classes.push_back("y" + std::to_string(y));
        for (std::size_t b = 0; b < B; ++b) t.counts[y][b] = 1 + rng() % 500;
    }
    for (std::size_t b = 0; b < B; ++b) t.feature_values.push_back("b" + std::to_string(b));
    return t;
}

igd::FeatureSpec spec_for(const ContingencyTable& t) {
    igd::FeatureSpec s;
    s.name = t.feature;
    s.task = igd::Task::SA;
    s.extractor = igd::Extractor::CustomClassifier;
    s.value_space = t.feature_values;
    s.answer_classes = t.answer_classes;
    return s;
}

igd::Dataset biased_sa_dataset(std::int64_t per_cell_major, std::int64_t per_cell_minor) {
    std::vector<igd::Sample> samples;
    int k = 0;
    auto add = [&](std::int64_t n, const char* answer, bool neg) {
        for (std::int64_t i = 0; i < n; ++i) {
            igd::Sample s;
            s.id = "s" + std::to_string(k++);
            s.task = igd::Task::SA;
            s.answer = answer;
            s.instruction = std::string(neg ? "it was never dull" : "it was a delight") +
                            " take " + std::to_string(k) + ". What is the sentiment?";
            samples.push_back(std::move(s));
        }
    };
    add(per_cell_major, "positive", false);
    add(per_cell_minor, "positive", true);
    add(per_cell_minor, "negative", false);
    add(per_cell_major, "negative", true);
    return igd::Dataset(std::move(samples));
}

void BM_InformationGain(benchmark::State& state) {
    auto t = random_table(static_cast<std::size_t>(state.range(0)),
                          static_cast<std::size_t>(state.range(1)), 7);
    for (auto _ : state) benchmark::DoNotOptimize(igd::information_gain(t));
}
BENCHMARK(BM_InformationGain)->Args({2, 2})->Args({4, 4})->Args({8, 8});

void BM_GoalCheck(benchmark::State& state) {
    auto t = random_table(4, 4, 11);
    for (auto _ : state) benchmark::DoNotOptimize(igd::goal_check(t, 5));
}
BENCHMARK(BM_GoalCheck);

void BM_Plan(benchmark::State& state) {
    auto t = random_table(static_cast<std::size_t>(state.range(0)),
                          static_cast<std::size_t>(state.range(1)), 23);
    auto spec = spec_for(t);
    int eps = static_cast<int>(state.range(2));
    for (auto _ : state) {
        try {
            benchmark::DoNotOptimize(igd::plan(t, spec, eps, 1));
        } catch (const igd::Infeasible&) {
        }
    }
}
BENCHMARK(BM_Plan)->Args({2, 2, 2})->Args({3, 3, 2})->Args({3, 3, 50})->Args({4, 3, 200});

void BM_Tokenize(benchmark::State& state) {
    std::string text =
        "The committee didn't approve the budget, and nobody was surprised; "
        "it wasn't the first time this has happened without warning.";
    for (auto _ : state) benchmark::DoNotOptimize(igd::tokenize(text));
}
BENCHMARK(BM_Tokenize);

void BM_NegationExtraction(benchmark::State& state) {
    const igd::Lexicon& lex = igd::default_negation_lexicon();
    std::string text =
        "A long review that rambles on about the cinematography and the pacing "
        "before concluding that the film is a triumph of restraint.";
    for (auto _ : state) benchmark::DoNotOptimize(igd::detect_negation(text, lex));
}
BENCHMARK(BM_NegationExtraction);

void BM_DebiasPipeline(benchmark::State& state) {
    auto ds = biased_sa_dataset(state.range(0), state.range(0) / 3);
    igd::BackendConfig bc;
    auto backend = igd::make_backend(bc);
    igd::PipelineOptions opts;
    opts.audit_timestamps = false;
    auto specs = igd::default_feature_specs();
    const igd::Lexicon& lex = igd::default_negation_lexicon();
    for (auto _ : state) {
        benchmark::DoNotOptimize(igd::debias_pipeline(ds, specs, *backend, lex, opts));
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(ds.size()));
}
BENCHMARK(BM_DebiasPipeline)->Arg(150)->Arg(600)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
