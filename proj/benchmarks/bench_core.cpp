// SPDX-License-Identifier: Apache-2.0
// Hot paths that run once per (solution, case) or once per prefix: patching, output
// comparison, metric summaries and frontier extraction.
#include <tcforge/analytics.hpp>
#include <tcforge/judge.hpp>
#include <tcforge/patch.hpp>

#include <benchmark/benchmark.h>

#include <random>

using namespace tcforge;

namespace
{

auto sourceOfLines(std::size_t lines) -> std::string
{
    auto s = std::string {};
    for (auto i = std::size_t { 0 }; i < lines; ++i)
        s += "    int v" + std::to_string(i) + " = rnd.next(1, " + std::to_string(i + 10) + ");\n";
    return s;
}

void BM_ApplyPatches(benchmark::State& state)
{
    auto const lines = static_cast<std::size_t>(state.range(0));
    auto const source = sourceOfLines(lines);
    auto blocks = std::vector<genkit::PatchBlock> {};
    for (auto i = std::size_t { 0 }; i < 8; ++i)
    {
        auto const n = std::to_string(i * lines / 8);
        blocks.push_back({ "int v" + n + " =", "long long v" + n + " =" });
    }
    for (auto _: state)
        benchmark::DoNotOptimize(genkit::apply_patches(source, blocks));
    state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * source.size()));
}
BENCHMARK(BM_ApplyPatches)->Arg(100)->Arg(1000)->Arg(10000);

void BM_CompareString(benchmark::State& state)
{
    auto const n = static_cast<std::size_t>(state.range(0));
    auto expected = std::string {};
    for (auto i = std::size_t { 0 }; i < n; ++i)
        expected += std::to_string(i * 7919 % 100003) + (i % 16 == 15 ? "\n" : " ");
    auto actual = expected;
    // Trailing spaces on every line make the normalizer do real work.
    for (auto pos = actual.find('\n'); pos != std::string::npos; pos = actual.find('\n', pos + 3))
        actual.insert(pos, "  ");
    for (auto _: state)
        benchmark::DoNotOptimize(judge::compare_string(expected, actual));
    state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * actual.size()));
}
BENCHMARK(BM_CompareString)->Arg(1 << 10)->Arg(1 << 16)->Arg(1 << 20);

auto randomOutcomes(std::size_t solutions, std::size_t cases) -> std::vector<judge::SolutionOutcome>
{
    auto rng = std::mt19937_64(7);
    auto pass = std::bernoulli_distribution(0.8);
    auto out = std::vector<judge::SolutionOutcome> {};
    for (auto s = std::size_t { 0 }; s < solutions; ++s)
    {
        auto o = judge::SolutionOutcome {};
        o.pool = s % 2 == 0 ? PoolKind::correct : PoolKind::incorrect;
        o.pool_index = s / 2;
        auto all = true;
        for (auto c = std::size_t { 0 }; c < cases; ++c)
        {
            auto const ok = pass(rng);
            o.per_case.push_back(Verdict { ok ? VerdictKind::accepted : VerdictKind::wrong_answer, {}, 0, 0 });
            all = all && ok;
        }
        o.overall = all ? judge::Overall::accepted : judge::Overall::rejected;
        out.push_back(std::move(o));
    }
    return out;
}

void BM_Summarize(benchmark::State& state)
{
    auto const cases = static_cast<std::size_t>(state.range(1));
    auto const outcomes = randomOutcomes(static_cast<std::size_t>(state.range(0)), cases);
    for (auto _: state)
        benchmark::DoNotOptimize(judge::summarize(outcomes, cases));
}
BENCHMARK(BM_Summarize)->Args({ 20, 20 })->Args({ 200, 50 })->Args({ 1000, 100 });

void BM_ParetoFrontier(benchmark::State& state)
{
    auto const cases = static_cast<std::size_t>(state.range(1));
    auto const outcomes = randomOutcomes(static_cast<std::size_t>(state.range(0)), cases);
    auto const stats = analytics::per_case_quality(outcomes, cases);
    for (auto _: state)
        benchmark::DoNotOptimize(analytics::pareto_frontier(stats));
}
BENCHMARK(BM_ParetoFrontier)->Args({ 20, 20 })->Args({ 200, 50 })->Args({ 1000, 100 });

} // namespace
BENCHMARK_MAIN();
