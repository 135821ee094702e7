// SPDX-License-Identifier: Apache-2.0
#include "random.hpp"

#include <tcforge/analytics.hpp>
#include <tcforge/errors.hpp>

#include <gtest/gtest.h>

#include <numeric>

using namespace tcforge;
using namespace tcforge::analytics;
namespace tt = tcforge::test;

namespace
{

// pass[s][c]: does solution s pass case c. The first `correct` rows are the correct pool.
struct Grid
{
    std::size_t correct = 0;
    std::vector<std::vector<bool>> pass;
};

auto outcomesOf(Grid const& g) -> std::vector<judge::SolutionOutcome>
{
    auto out = std::vector<judge::SolutionOutcome> {};
    for (auto s = std::size_t { 0 }; s < g.pass.size(); ++s)
    {
        auto o = judge::SolutionOutcome {};
        o.pool = s < g.correct ? PoolKind::correct : PoolKind::incorrect;
        o.pool_index = s < g.correct ? s : s - g.correct;
        auto all = true;
        for (auto const p: g.pass[s])
        {
            o.per_case.push_back(Verdict { p ? VerdictKind::accepted : VerdictKind::wrong_answer, {}, 0, 0 });
            all = all && p;
        }
        o.overall = all ? judge::Overall::accepted : judge::Overall::rejected;
        out.push_back(std::move(o));
    }
    return out;
}

auto statsOf(Grid const& g) -> std::vector<CaseQuality>
{
    auto const outcomes = outcomesOf(g);
    return per_case_quality(outcomes, g.pass.front().size());
}

auto randomGrid(tt::Rng& rng, std::size_t maxCases) -> Grid
{
    auto g = Grid {};
    g.correct = static_cast<std::size_t>(rng.between(1, 5));
    auto const incorrect = static_cast<std::size_t>(rng.between(1, 6));
    auto const cases = static_cast<std::size_t>(rng.between(1, static_cast<std::int64_t>(maxCases)));
    for (auto s = std::size_t { 0 }; s < g.correct + incorrect; ++s)
    {
        g.pass.emplace_back();
        for (auto c = std::size_t { 0 }; c < cases; ++c)
            g.pass.back().push_back(rng.chance(s < g.correct ? 0.85 : 0.6));
    }
    return g;
}

// Reference rates for a case subset, straight from the grid.
auto subsetRates(Grid const& g, std::vector<std::size_t> const& cases) -> std::pair<double, double>
{
    auto accepted = 0.0, rejected = 0.0;
    for (auto s = std::size_t { 0 }; s < g.pass.size(); ++s)
    {
        auto all = true;
        for (auto const c: cases)
            all = all && g.pass[s][c];
        if (s < g.correct)
            accepted += all ? 1 : 0;
        else
            rejected += all ? 0 : 1;
    }
    return { accepted / static_cast<double>(g.correct),
             rejected / static_cast<double>(g.pass.size() - g.correct) };
}

auto dominates(FrontierPoint const& a, FrontierPoint const& b) -> bool
{
    return a.tpr >= b.tpr && a.tnr >= b.tnr && (a.tpr > b.tpr || a.tnr > b.tnr);
}

} // namespace

TEST(AnalyticsCases, PerCaseQualityExample)
{
    // Two correct, two incorrect, three cases.
    auto const g = Grid { 2, { { true, true, false }, { true, true, true }, { true, false, false }, { true, true, false } } };
    auto const stats = statsOf(g);
    ASSERT_EQ(stats.size(), 3u);
    EXPECT_DOUBLE_EQ(stats[0].case_tpr, 1.0);
    EXPECT_DOUBLE_EQ(stats[0].case_tnr, 0.0);
    EXPECT_DOUBLE_EQ(stats[1].case_tnr, 0.5);
    EXPECT_DOUBLE_EQ(stats[2].case_tpr, 0.5);
    EXPECT_DOUBLE_EQ(stats[2].case_tnr, 1.0);
    EXPECT_EQ(stats[2].correct_pass, (std::vector<bool> { false, true }));

    EXPECT_EQ(rank_cases(stats, RankKey::tnr_first), (std::vector<std::size_t> { 2, 1, 0 }));
    EXPECT_EQ(rank_cases(stats, RankKey::tpr_first), (std::vector<std::size_t> { 1, 0, 2 }));

    auto const prefix = prefix_aggregates(stats);
    EXPECT_EQ(prefix, (std::vector<FrontierPoint> { { 1, 0.5, 1.0 }, { 2, 0.5, 1.0 }, { 3, 0.5, 1.0 } }));
    EXPECT_EQ(pareto_frontier(stats), (std::vector<FrontierPoint> { { 1, 0.5, 1.0 } }));
    auto const byTpr = pareto_frontier(stats, RankKey::tpr_first);
    EXPECT_EQ(byTpr, (std::vector<FrontierPoint> { { 1, 1.0, 0.5 }, { 3, 0.5, 1.0 } }));
}

TEST(AnalyticsCases, EmptyPoolsAndStatsThrow)
{
    auto const onlyCorrect = Grid { 1, { { true } } };
    auto const outcomes = outcomesOf(onlyCorrect);
    EXPECT_THROW((void) per_case_quality(outcomes, 1), Error);
    EXPECT_THROW((void) pareto_frontier(std::vector<CaseQuality> {}), Error);
    EXPECT_EQ(parse_rank_key(to_string(RankKey::tpr_first)), RankKey::tpr_first);
    EXPECT_THROW((void) parse_rank_key("loudest"), Error);
}

TEST(AnalyticsProperties, SubsetAndPrefixMatchTheGrid)
{
    auto rng = tt::Rng(77);
    for (auto trial = 0; trial < 500; ++trial)
    {
        auto const g = randomGrid(rng, 10);
        auto const stats = statsOf(g);
        auto subset = std::vector<std::size_t> {};
        for (auto c = std::size_t { 0 }; c < stats.size(); ++c)
            if (rng.chance(0.5))
                subset.push_back(c);
        auto const point = aggregate_subset(stats, subset);
        auto const [tpr, tnr] = subsetRates(g, subset);
        ASSERT_DOUBLE_EQ(point.tpr, tpr);
        ASSERT_DOUBLE_EQ(point.tnr, tnr);

        for (auto const key: { RankKey::tnr_first, RankKey::tpr_first })
        {
            auto const order = rank_cases(stats, key);
            auto const prefix = prefix_aggregates(stats, key);
            ASSERT_EQ(prefix.size(), stats.size());
            for (auto k = std::size_t { 1 }; k <= prefix.size(); ++k)
            {
                auto const [ptpr, ptnr] = subsetRates(g, std::vector<std::size_t>(order.begin(), order.begin() + static_cast<long>(k)));
                ASSERT_EQ(prefix[k - 1].k, k);
                ASSERT_DOUBLE_EQ(prefix[k - 1].tpr, ptpr);
                ASSERT_DOUBLE_EQ(prefix[k - 1].tnr, ptnr);
                // Adding cases can only reject more solutions.
                if (k > 1)
                {
                    ASSERT_LE(prefix[k - 1].tpr, prefix[k - 2].tpr);
                    ASSERT_GE(prefix[k - 1].tnr, prefix[k - 2].tnr);
                }
            }
        }
    }
}

TEST(AnalyticsProperties, RankingIsASortedPermutation)
{
    auto rng = tt::Rng(78);
    for (auto trial = 0; trial < 300; ++trial)
    {
        auto const stats = statsOf(randomGrid(rng, 12));
        auto order = rank_cases(stats, RankKey::tnr_first);
        for (auto i = std::size_t { 1 }; i < order.size(); ++i)
        {
            auto const& a = stats[order[i - 1]];
            auto const& b = stats[order[i]];
            ASSERT_TRUE(a.case_tnr > b.case_tnr
                        || (a.case_tnr == b.case_tnr
                            && (a.case_tpr > b.case_tpr || (a.case_tpr == b.case_tpr && order[i - 1] < order[i]))));
        }
        std::sort(order.begin(), order.end());
        auto identity = std::vector<std::size_t>(stats.size());
        std::iota(identity.begin(), identity.end(), std::size_t { 0 });
        ASSERT_EQ(order, identity);
    }
}

TEST(AnalyticsProperties, UndominatedIsExactlyTheMaximalSet)
{
    auto rng = tt::Rng(79);
    for (auto trial = 0; trial < 500; ++trial)
    {
        auto points = std::vector<FrontierPoint> {};
        for (auto k = std::size_t { 1 }; k <= static_cast<std::size_t>(rng.between(1, 12)); ++k)
            points.push_back({ k, static_cast<double>(rng.between(0, 4)) / 4, static_cast<double>(rng.between(0, 4)) / 4 });
        auto const front = undominated(points);
        ASSERT_FALSE(front.empty());
        for (auto const& p: points)
        {
            auto const dominated = std::any_of(points.begin(), points.end(), [&](auto const& q) { return dominates(q, p); });
            auto const earlierTwin = std::any_of(points.begin(), points.end(), [&](auto const& q) {
                return q.tpr == p.tpr && q.tnr == p.tnr && q.k < p.k;
            });
            auto const kept = std::find(front.begin(), front.end(), p) != front.end();
            ASSERT_EQ(kept, !dominated && !earlierTwin);
        }
        for (auto i = std::size_t { 1 }; i < front.size(); ++i)
            ASSERT_LT(front[i - 1].k, front[i].k);
    }
}

TEST(AnalyticsDataset, PerProblemHoldsShortCurvesAtTheirEnd)
{
    // Problem A: one case rejecting the only incorrect solution. Problem B: two cases, each
    // rejecting one of two incorrect solutions.
    auto const a = statsOf(Grid { 1, { { true }, { false } } });
    auto const b = statsOf(Grid { 1, { { true, true }, { false, true }, { true, false } } });
    auto const problems = std::vector<std::vector<CaseQuality>> { a, b };
    auto const curve = dataset_frontier(problems, RankKey::tnr_first);
    EXPECT_EQ(curve, (std::vector<FrontierPoint> { { 2, 1.0, 1.0 } }));

    auto const pooled = dataset_frontier(problems, RankKey::tnr_first, FrontierAveraging::pooled);
    // Pooled order: A0, B0, B1 (all case_tnr 1 or 0.5). After A0: A rejects, B accepts everything.
    EXPECT_EQ(pooled, (std::vector<FrontierPoint> { { 3, 1.0, 1.0 } }));
    EXPECT_THROW((void) dataset_frontier(std::vector<std::vector<CaseQuality>> { {} }, RankKey::tnr_first), Error);
}

TEST(AnalyticsDataset, PooledWithoutCasesAcceptsEverything)
{
    auto const a = statsOf(Grid { 1, { { true }, { false } } });
    auto const b = statsOf(Grid { 2, { { true }, { false }, { true } } });
    auto const problems = std::vector<std::vector<CaseQuality>> { a, b };
    auto const pooled = dataset_frontier(problems, RankKey::tpr_first, FrontierAveraging::pooled);
    // tpr_first: A0 (tpr 1) before B0 (tpr .5). k=1 -> A: (1, 1), B: (1, 0) -> mean (1, .5).
    // k=2 -> B: (.5, 0) since its incorrect solution passes B0 -> mean (.75, .5), dominated.
    EXPECT_EQ(pooled, (std::vector<FrontierPoint> { { 1, 1.0, 0.5 } }));
}

TEST(AnalyticsCsv, HeaderRowsAndQuoting)
{
    auto const points = std::vector<FrontierPoint> { { 1, 1.0, 0.25 }, { 3, 0.5, 1.0 } };
    EXPECT_EQ(frontier_csv("run", points, RankKey::tnr_first),
              "# rank_key=tnr_first\nlabel,k,tpr,tnr\nrun,1,1.000000,0.250000\nrun,3,0.500000,1.000000\n");
    EXPECT_EQ(frontier_csv("a,\"b\"", std::vector<FrontierPoint> { { 1, 0, 0 } }, RankKey::tpr_first),
              "# rank_key=tpr_first\nlabel,k,tpr,tnr\n\"a,\"\"b\"\"\",1,0.000000,0.000000\n");
}

namespace
{

auto traceWith(std::vector<std::pair<double, double>> const& rates) -> loop::LoopTrace
{
    auto t = loop::LoopTrace {};
    for (auto i = std::size_t { 0 }; i < rates.size(); ++i)
    {
        auto s = loop::IterationSnapshot {};
        s.state.iteration = static_cast<int>(i);
        s.state.metrics = QualityMetrics {};
        s.state.metrics->tpr = rates[i].first;
        s.state.metrics->tnr = rates[i].second;
        t.iterations.push_back(s);
    }
    return t;
}

} // namespace

TEST(AnalyticsProgression, EarlyStopsCarryForward)
{
    auto const traces = std::vector<loop::LoopTrace> { traceWith({ { 1.0, 0.2 }, { 1.0, 0.6 }, { 0.8, 1.0 } }),
                                                       traceWith({ { 0.5, 1.0 } }), loop::LoopTrace {} };
    auto const rows = iteration_progression(traces);
    ASSERT_EQ(rows.size(), 3u);
    EXPECT_EQ(rows[0].problems, 2u);
    EXPECT_DOUBLE_EQ(rows[0].mean_tpr, 0.75);
    EXPECT_DOUBLE_EQ(rows[0].mean_tnr, 0.6);
    EXPECT_DOUBLE_EQ(rows[1].mean_tnr, 0.8);
    EXPECT_DOUBLE_EQ(rows[2].mean_tpr, 0.65);
    EXPECT_DOUBLE_EQ(rows[2].mean_tnr, 1.0);
    EXPECT_EQ(iteration_progression(traces, 4).size(), 5u);
    EXPECT_THROW((void) iteration_progression(std::vector<loop::LoopTrace> {}), Error);
}

TEST(AnalyticsChecker, EffectIsTheMetricDifference)
{
    auto suite = std::vector<TestCase>(2);
    suite[0].input = "1";
    suite[1].input = "2";
    auto const g = Grid { 2, { { true, false }, { true, true }, { true, true } } };
    auto plain = judge::Evaluation {};
    plain.outcomes = outcomesOf(g);
    plain.metrics = judge::summarize(plain.outcomes, 2);
    auto checked = plain;
    checked.outcomes[0].per_case[1].kind = VerdictKind::accepted;
    checked.outcomes[0].overall = judge::Overall::accepted;
    checked.metrics = judge::summarize(checked.outcomes, 2);

    auto const effect = checker_effect(suite, plain, suite, checked);
    EXPECT_DOUBLE_EQ(effect.delta_tpr, 0.5);
    EXPECT_DOUBLE_EQ(effect.delta_tnr, 0.0);

    auto other = suite;
    other[1].expected_output = "changed";
    EXPECT_THROW((void) checker_effect(suite, plain, other, checked), Error);
    auto fewer = checked;
    fewer.outcomes.pop_back();
    EXPECT_THROW((void) checker_effect(suite, plain, suite, fewer), Error);
}

TEST(AnalyticsExport, EvaluationRoundTrip)
{
    auto const g = Grid { 1, { { true, false }, { false, true } } };
    auto e = judge::Evaluation {};
    e.outcomes = outcomesOf(g);
    e.outcomes[1].per_case[0] = Verdict { VerdictKind::time_limit, "slow", 1234, 5.5 };
    e.outcomes[1].compile_diagnostics = std::nullopt;
    e.metrics = judge::summarize(e.outcomes, 2);
    auto const j = evaluation_to_json("p1", 2, e);
    auto const back = evaluation_from_json(j);
    EXPECT_EQ(back.problem_id, "p1");
    EXPECT_EQ(back.case_count, 2u);
    EXPECT_EQ(back.metrics, e.metrics);
    ASSERT_EQ(back.outcomes.size(), 2u);
    EXPECT_EQ(back.outcomes[1].per_case[0].kind, VerdictKind::time_limit);
    EXPECT_EQ(back.outcomes[1].pool, PoolKind::incorrect);
    EXPECT_EQ(per_case_quality(back.outcomes, 2), per_case_quality(e.outcomes, 2));
}
