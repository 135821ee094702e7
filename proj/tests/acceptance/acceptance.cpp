// SPDX-License-Identifier: Apache-2.0
// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any criterion fails.
// Tolerances are pinned below and printed alongside each result.
#include "fake_sandbox.hpp"
#include "fixtures.hpp"
#include "random.hpp"

#include <tcforge/analytics.hpp>
#include <tcforge/curation.hpp>
#include <tcforge/errors.hpp>
#include <tcforge/io/dataset.hpp>
#include <tcforge/io/pipeline.hpp>
#include <tcforge/judge.hpp>
#include <tcforge/loop.hpp>
#include <tcforge/patch.hpp>
#include <tcforge/serialize.hpp>
#include <tcforge/temp_dir.hpp>
#include <tcforge/text.hpp>

#include <spdlog/spdlog.h>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>

using namespace tcforge;
namespace tt = tcforge::test;
namespace fs = std::filesystem;

namespace
{

constexpr auto metricTolerance = 1e-12;
constexpr auto oracleBudgetMs = 30'000;
constexpr auto loopBudgetMs = 120'000;
constexpr auto microProblems = 10;
constexpr auto definitionGrids = 1000;
constexpr auto patchTrials = 2000;
constexpr auto exhaustiveMaxCases = 12;
constexpr auto frontierStatSets = 500;
constexpr auto batchSize = 50;
constexpr auto batchWorkers = 4;

/// Thrown by a criterion to report why it failed.
struct Failed
{
    std::string why;
};

void require(bool condition, std::string const& why)
{
    if (!condition)
        throw Failed { why };
}

using Clock = std::chrono::steady_clock;

auto elapsedMs(Clock::time_point since) -> std::int64_t
{
    return std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - since).count();
}

// ---------------------------------------------------------------------------------------------
// Micro-problems on a fake sandbox: each solution's behaviour on each case is drawn at random.

enum class Cell
{
    exact,
    padded, // right answer with trailing whitespace, still accepted
    wrong,
    crash,
    hang,
};

struct Micro
{
    Problem problem;
    std::vector<TestCase> suite;
    /// cells[s][c], correct pool first, then incorrect.
    std::vector<std::vector<Cell>> cells;
    std::vector<bool> compiles;
    std::unique_ptr<tt::FakeSandbox> box;
};

auto passes(Cell cell) -> bool
{
    return cell == Cell::exact || cell == Cell::padded;
}

auto randomMicro(tt::Rng& rng, std::size_t maxSolutions, std::size_t maxCases) -> Micro
{
    auto m = Micro {};
    m.box = std::make_unique<tt::FakeSandbox>();
    auto const correct = static_cast<std::size_t>(rng.between(1, static_cast<std::int64_t>(maxSolutions) - 1));
    auto const total = static_cast<std::size_t>(rng.between(static_cast<std::int64_t>(correct) + 1,
                                                            static_cast<std::int64_t>(maxSolutions)));
    auto const cases = static_cast<std::size_t>(rng.between(1, static_cast<std::int64_t>(maxCases)));
    for (auto c = std::size_t { 0 }; c < cases; ++c)
        m.suite.push_back({ "q" + std::to_string(c) + "\n", "a" + std::to_string(c) + "\n", {} });

    m.problem.id = "micro";
    for (auto s = std::size_t { 0 }; s < total; ++s)
    {
        auto row = std::vector<Cell> {};
        for (auto c = std::size_t { 0 }; c < cases; ++c)
        {
            auto const r = rng.unit();
            row.push_back(r < 0.55 ? Cell::exact : r < 0.7 ? Cell::padded : r < 0.85 ? Cell::wrong : r < 0.95 ? Cell::crash : Cell::hang);
        }
        m.cells.push_back(row);
        auto const builds = rng.chance(0.9);
        m.compiles.push_back(builds);

        auto const source = (builds ? "S" : "#error S") + std::to_string(s);
        if (builds)
            m.box->define(source, [row](sandbox::ExecSpec const& spec) {
                auto const c = static_cast<std::size_t>(std::stoul(spec.stdin_data.substr(1)));
                auto const answer = "a" + std::to_string(c);
                switch (row[c])
                {
                    case Cell::exact: return tt::exited(answer + "\n");
                    case Cell::padded: return tt::exited(answer + "  \n\n");
                    case Cell::wrong: return tt::exited("b" + std::to_string(c) + "\n");
                    case Cell::crash: return tt::exited("", 139);
                    case Cell::hang: return tt::timed_out();
                }
                return tt::exited("");
            });
        auto const label = s < correct ? SolutionLabel::correct : SolutionLabel::incorrect;
        (s < correct ? m.problem.correct_pool : m.problem.incorrect_pool).push_back(tt::cpp(source, label));
    }
    return m;
}

/// Brute-force rates straight from the cell grid.
struct OracleRates
{
    double tpr = 0;
    double tnr = 0;
    std::vector<std::size_t> correctPassing;
    std::vector<std::size_t> incorrectFailing;
};

auto oracle(Micro const& m) -> OracleRates
{
    auto const correct = m.problem.correct_pool.size();
    auto const cases = m.suite.size();
    auto out = OracleRates {};
    out.correctPassing.assign(cases, 0);
    out.incorrectFailing.assign(cases, 0);
    auto accepted = 0.0, rejected = 0.0;
    for (auto s = std::size_t { 0 }; s < m.cells.size(); ++s)
    {
        auto all = true;
        for (auto c = std::size_t { 0 }; c < cases; ++c)
        {
            auto const ok = m.compiles[s] && passes(m.cells[s][c]);
            all = all && ok;
            if (s < correct && ok)
                ++out.correctPassing[c];
            if (s >= correct && !ok)
                ++out.incorrectFailing[c];
        }
        if (s < correct)
            accepted += all ? 1 : 0;
        else
            rejected += all ? 0 : 1;
    }
    out.tpr = accepted / static_cast<double>(correct);
    out.tnr = rejected / static_cast<double>(m.cells.size() - correct);
    return out;
}

auto criterionMetricOracle() -> std::string
{
    auto const start = Clock::now();
    auto rng = tt::Rng(1001);
    auto worst = 0.0;
    for (auto i = 0; i < microProblems; ++i)
    {
        auto m = randomMicro(rng, 10, 5);
        auto const e = judge::evaluate(*m.box, m.problem, m.suite, judge::EvalOptions {});
        auto const o = oracle(m);
        worst = std::max({ worst, std::abs(e.metrics.tpr - o.tpr), std::abs(e.metrics.tnr - o.tnr) });
        require(std::abs(e.metrics.tpr - o.tpr) <= metricTolerance, "TPR differs on micro-problem " + std::to_string(i));
        require(std::abs(e.metrics.tnr - o.tnr) <= metricTolerance, "TNR differs on micro-problem " + std::to_string(i));
        require(e.metrics.per_case_stats.size() == m.suite.size(), "per-case stats size");
        for (auto c = std::size_t { 0 }; c < m.suite.size(); ++c)
        {
            require(e.metrics.per_case_stats[c].pass_count_correct == o.correctPassing[c], "per-case correct pass count");
            require(e.metrics.per_case_stats[c].fail_count_incorrect == o.incorrectFailing[c],
                    "per-case incorrect fail count");
        }
    }
    auto const ms = elapsedMs(start);
    require(ms < oracleBudgetMs, "took " + std::to_string(ms) + " ms");
    auto delta = std::array<char, 32> {};
    std::snprintf(delta.data(), delta.size(), "%.3g", worst);
    return std::to_string(microProblems) + " problems, max |delta| " + delta.data() + " <= 1e-12, "
           + std::to_string(ms) + " ms < 30 s";
}

auto criterionDefinitionalFidelity() -> std::string
{
    auto rng = tt::Rng(2002);
    auto rejectedSeen = std::size_t { 0 };
    auto acceptedSeen = std::size_t { 0 };
    for (auto i = 0; i < definitionGrids; ++i)
    {
        auto m = randomMicro(rng, 8, 6);
        auto const e = judge::evaluate(*m.box, m.problem, m.suite, judge::EvalOptions {});
        require(e.outcomes.size() == m.cells.size(), "one outcome per solution");
        for (auto s = std::size_t { 0 }; s < e.outcomes.size(); ++s)
        {
            auto const& o = e.outcomes[s];
            require(o.per_case.size() == m.suite.size(), "one verdict per case");
            auto const allAccepted = std::all_of(o.per_case.begin(), o.per_case.end(),
                                                 [](Verdict const& v) { return v.accepted(); });
            auto const anyFailing = std::any_of(o.per_case.begin(), o.per_case.end(),
                                                [](Verdict const& v) { return !v.accepted(); });
            require((o.overall == judge::Overall::accepted) == allAccepted, "accepted iff every case accepted");
            require((o.overall == judge::Overall::rejected) == anyFailing, "rejected iff some case fails");
            // And the verdicts themselves agree with the planted behaviour.
            for (auto c = std::size_t { 0 }; c < m.suite.size(); ++c)
                require(o.per_case[c].accepted() == (m.compiles[s] && passes(m.cells[s][c])), "planted verdict");
            (allAccepted ? acceptedSeen : rejectedSeen) += 1;
        }
    }
    return std::to_string(definitionGrids) + " grids, " + std::to_string(acceptedSeen) + " accepted / "
           + std::to_string(rejectedSeen) + " rejected outcomes";
}

// ---------------------------------------------------------------------------------------------

auto occurrences(std::string const& haystack, std::string const& needle) -> std::vector<std::size_t>
{
    auto at = std::vector<std::size_t> {};
    for (auto i = std::size_t { 0 }; i + needle.size() <= haystack.size(); ++i)
        if (haystack.compare(i, needle.size(), needle) == 0)
            at.push_back(i);
    return at;
}

auto criterionPatchSemantics() -> std::string
{
    auto rng = tt::Rng(3003);
    auto applied = std::size_t { 0 }, noMatch = std::size_t { 0 }, ambiguous = std::size_t { 0 };
    for (auto trial = 0; trial < patchTrials; ++trial)
    {
        auto source = std::string {};
        auto const tokens = rng.between(3, 12);
        for (auto i = 0; i < tokens; ++i)
        {
            source += rng.chance(0.2) ? "dup" : "t" + std::to_string(i);
            source += rng.text(static_cast<std::size_t>(rng.between(0, 3)), " \n.");
        }
        auto blocks = std::vector<genkit::PatchBlock> {};
        auto const n = rng.between(1, 5);
        for (auto i = 0; i < n; ++i)
        {
            auto const pick = rng.between(0, 3);
            auto search = pick == 0 ? "t" + std::to_string(rng.between(0, tokens + 2))
                        : pick == 1 ? std::string("dup")
                        : pick == 2 ? "R" + std::to_string(rng.between(0, n)) + "!" // may hit an earlier replacement
                                    : "absent" + std::to_string(i);
            blocks.push_back({ search, "R" + std::to_string(i) + "!" });
        }

        auto const out = genkit::apply_patches(source, blocks);

        // Sequential reference: each block sees the result of the ones before it.
        auto current = source;
        auto expectApplied = std::vector<std::size_t> {};
        auto expectSkipped = std::vector<genkit::SkippedBlock> {};
        for (auto i = std::size_t { 0 }; i < blocks.size(); ++i)
        {
            auto const at = occurrences(current, blocks[i].search);
            if (at.size() != 1)
            {
                expectSkipped.push_back({ i, at.empty() ? genkit::SkipReason::no_match : genkit::SkipReason::ambiguous_match });
                continue;
            }
            auto const before = current;
            current = before.substr(0, at[0]) + blocks[i].replace + before.substr(at[0] + blocks[i].search.size());
            // Locality: bytes outside the match are untouched.
            require(current.compare(0, at[0], before, 0, at[0]) == 0, "prefix changed");
            auto const tail = before.size() - at[0] - blocks[i].search.size();
            require(current.compare(current.size() - tail, tail, before, before.size() - tail, tail) == 0, "suffix changed");
            expectApplied.push_back(i);
        }
        require(out.patched_source == current, "patched source differs from sequential reference");
        require(out.applied == expectApplied, "applied list");
        require(out.skipped == expectSkipped, "skipped list");

        // Skipped blocks on their own change nothing.
        for (auto const& s: out.skipped)
        {
            auto const alone = genkit::apply_patches(source, std::span(&blocks[s.index], 1));
            if (!alone.applied.empty())
                continue; // it only failed against the partially patched source
            require(alone.patched_source == source, "a skipped block modified the source");
        }
        applied += out.applied.size();
        for (auto const& s: out.skipped)
            (s.reason == genkit::SkipReason::no_match ? noMatch : ambiguous) += 1;
    }
    require(applied > 0 && noMatch > 0 && ambiguous > 0, "generator did not exercise every path");

    // Order is respected: the same two blocks in the opposite order give a different result.
    auto const forward = genkit::apply_patches("x", std::vector<genkit::PatchBlock> { { "x", "y" }, { "y", "z" } });
    auto const backward = genkit::apply_patches("x", std::vector<genkit::PatchBlock> { { "y", "z" }, { "x", "y" } });
    require(forward.patched_source == "z" && backward.patched_source == "y", "ordered application");

    return std::to_string(patchTrials) + " trials: " + std::to_string(applied) + " applied, " + std::to_string(noMatch)
           + " skipped (no match), " + std::to_string(ambiguous) + " skipped (ambiguous)";
}

// ---------------------------------------------------------------------------------------------

auto runFixture(std::string const& name, judge::EvalMode mode, std::optional<loop::Session>* last = nullptr)
    -> loop::LoopTrace
{
    auto box = tt::local_sandbox();
    auto provider = tt::scripted_provider({ name });
    auto gateway = llm::Gateway(*provider);
    auto config = loop::LoopConfig {};
    config.mode = mode;
    auto context = loop::Context { *box, gateway, config };
    return loop::run_loop(context, tt::load_problem(name), last);
}

auto criterionLoopContract() -> std::string
{
    auto const start = Clock::now();
    auto const config = loop::LoopConfig {};
    auto runs = 0;
    auto summary = std::string {};
    for (auto const mode: { judge::EvalMode::string, judge::EvalMode::checker })
        for (auto const& name: tt::fixture_names())
        {
            auto const where = name + " (" + std::string(judge::to_string(mode)) + ")";
            auto const first = runFixture(name, mode);
            auto const second = runFixture(name, mode);
            runs += 2;
            require(!first.iterations.empty(), where + ": no iteration");
            require(first.iterations.size() <= static_cast<std::size_t>(config.n_max + 1), where + ": too many iterations");
            for (auto const& it: first.iterations)
                require(it.state.metrics.has_value(), where + ": unevaluated iteration");
            auto const met = loop::thresholds_met(*first.iterations.back().state.metrics, config);
            require(met == (first.termination == loop::Termination::thresholds_met), where + ": termination label");
            require(strip_timing(loop::trace_to_json(first)).dump() == strip_timing(loop::trace_to_json(second)).dump(),
                    where + ": traces differ between runs");
            if (mode == judge::EvalMode::string)
                summary += (summary.empty() ? "" : ", ") + name + " " + std::to_string(first.iterations.size()) + " it "
                           + std::string(loop::to_string(first.termination));
        }
    auto const ms = elapsedMs(start);
    require(ms < loopBudgetMs, "took " + std::to_string(ms) + " ms");
    return std::to_string(runs) + " runs; " + summary + "; " + std::to_string(ms) + " ms < 120 s";
}

auto criterionIterationImprovement() -> std::string
{
    auto const trace = runFixture("sum", judge::EvalMode::string);
    require(trace.iterations.size() >= 3, "fewer than 3 iterations");
    auto text = std::string {};
    for (auto i = std::size_t { 0 }; i < 3; ++i)
    {
        auto const& m = *trace.iterations[i].state.metrics;
        text += (i ? " -> " : "") + std::string("(") + judge::format_percent(m.tpr) + ", " + judge::format_percent(m.tnr) + ")";
        if (i == 0)
            continue;
        auto const& prev = *trace.iterations[i - 1].state.metrics;
        require(m.tpr >= prev.tpr && m.tnr >= prev.tnr, "rates decreased at iteration " + std::to_string(i));
    }
    auto const& first = *trace.iterations[0].state.metrics;
    auto const& third = *trace.iterations[2].state.metrics;
    require(third.tpr > first.tpr || third.tnr > first.tnr, "no improvement");
    return "sum: " + text;
}

// ---------------------------------------------------------------------------------------------

struct Grid
{
    std::size_t correct = 0;
    std::vector<std::vector<bool>> pass;
};

auto randomGrid(tt::Rng& rng, std::size_t maxCases) -> Grid
{
    auto g = Grid {};
    g.correct = static_cast<std::size_t>(rng.between(1, 6));
    auto const incorrect = static_cast<std::size_t>(rng.between(1, 7));
    auto const cases = static_cast<std::size_t>(rng.between(1, static_cast<std::int64_t>(maxCases)));
    auto const correctRate = 0.6 + 0.4 * rng.unit();
    auto const incorrectRate = 0.3 + 0.6 * rng.unit();
    for (auto s = std::size_t { 0 }; s < g.correct + incorrect; ++s)
    {
        g.pass.emplace_back();
        for (auto c = std::size_t { 0 }; c < cases; ++c)
            g.pass.back().push_back(rng.chance(s < g.correct ? correctRate : incorrectRate));
    }
    return g;
}

auto statsOf(Grid const& g) -> std::vector<analytics::CaseQuality>
{
    auto outcomes = std::vector<judge::SolutionOutcome> {};
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
        outcomes.push_back(std::move(o));
    }
    return analytics::per_case_quality(outcomes, g.pass.front().size());
}

/// Rank, prefix rates and maximal set, all recomputed from the pass grid.
auto bruteFrontier(Grid const& g, analytics::RankKey key) -> std::vector<analytics::FrontierPoint>
{
    auto const cases = g.pass.front().size();
    auto const incorrect = g.pass.size() - g.correct;
    auto caseTpr = std::vector<double>(cases), caseTnr = std::vector<double>(cases);
    for (auto c = std::size_t { 0 }; c < cases; ++c)
    {
        auto p = 0.0, f = 0.0;
        for (auto s = std::size_t { 0 }; s < g.pass.size(); ++s)
            (s < g.correct ? p : f) += (s < g.correct) == g.pass[s][c] ? 1 : 0;
        caseTpr[c] = p / static_cast<double>(g.correct);
        caseTnr[c] = f / static_cast<double>(incorrect);
    }
    auto order = std::vector<std::size_t>(cases);
    for (auto c = std::size_t { 0 }; c < cases; ++c)
        order[c] = c;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        auto const ka = key == analytics::RankKey::tnr_first ? std::pair(caseTnr[a], caseTpr[a]) : std::pair(caseTpr[a], caseTnr[a]);
        auto const kb = key == analytics::RankKey::tnr_first ? std::pair(caseTnr[b], caseTpr[b]) : std::pair(caseTpr[b], caseTnr[b]);
        return ka > kb;
    });

    auto prefixes = std::vector<analytics::FrontierPoint> {};
    for (auto k = std::size_t { 1 }; k <= cases; ++k)
    {
        auto accepted = 0.0, rejected = 0.0;
        for (auto s = std::size_t { 0 }; s < g.pass.size(); ++s)
        {
            auto all = true;
            for (auto i = std::size_t { 0 }; i < k; ++i)
                all = all && g.pass[s][order[i]];
            if (s < g.correct)
                accepted += all ? 1 : 0;
            else
                rejected += all ? 0 : 1;
        }
        prefixes.push_back({ k, accepted / static_cast<double>(g.correct), rejected / static_cast<double>(incorrect) });
    }

    auto out = std::vector<analytics::FrontierPoint> {};
    for (auto const& p: prefixes)
    {
        auto beaten = false;
        for (auto const& q: prefixes)
        {
            auto const dominates = q.tpr >= p.tpr && q.tnr >= p.tnr && (q.tpr > p.tpr || q.tnr > p.tnr);
            auto const earlierTwin = q.tpr == p.tpr && q.tnr == p.tnr && q.k < p.k;
            beaten = beaten || dominates || earlierTwin;
        }
        if (!beaten)
            out.push_back(p);
    }
    return out;
}

auto samePoints(std::vector<analytics::FrontierPoint> const& a, std::vector<analytics::FrontierPoint> const& b) -> bool
{
    if (a.size() != b.size())
        return false;
    for (auto i = std::size_t { 0 }; i < a.size(); ++i)
        if (a[i].k != b[i].k || std::abs(a[i].tpr - b[i].tpr) > metricTolerance
            || std::abs(a[i].tnr - b[i].tnr) > metricTolerance)
            return false;
    return true;
}

auto criterionPareto() -> std::string
{
    auto rng = tt::Rng(6006);
    auto grids = 0;
    for (auto cases = std::size_t { 1 }; cases <= exhaustiveMaxCases; ++cases)
        for (auto rep = 0; rep < 25; ++rep, ++grids)
        {
            auto g = randomGrid(rng, cases);
            auto const stats = statsOf(g);
            for (auto const key: { analytics::RankKey::tnr_first, analytics::RankKey::tpr_first })
            {
                auto const frontier = analytics::pareto_frontier(stats, key);
                require(samePoints(frontier, bruteFrontier(g, key)),
                        "frontier differs from exhaustive prefix enumeration (" + std::to_string(g.pass.front().size())
                            + " cases)");
            }
        }

    for (auto set = 0; set < frontierStatSets; ++set)
    {
        auto const g = randomGrid(rng, 30);
        auto const stats = statsOf(g);
        for (auto const key: { analytics::RankKey::tnr_first, analytics::RankKey::tpr_first })
        {
            auto const prefix = analytics::prefix_aggregates(stats, key);
            for (auto k = std::size_t { 1 }; k < prefix.size(); ++k)
            {
                // A longer prefix can only reject more solutions.
                require(prefix[k].tpr <= prefix[k - 1].tpr, "prefix TPR increased");
                require(prefix[k].tnr >= prefix[k - 1].tnr, "prefix TNR decreased");
            }
            auto const frontier = analytics::pareto_frontier(stats, key);
            require(!frontier.empty(), "empty frontier");
            for (auto i = std::size_t { 1 }; i < frontier.size(); ++i)
                require(frontier[i].k > frontier[i - 1].k && frontier[i].tpr < frontier[i - 1].tpr
                            && frontier[i].tnr > frontier[i - 1].tnr,
                        "frontier is not a strict trade-off curve");
        }
    }
    return std::to_string(grids) + " exhaustive grids (1.." + std::to_string(exhaustiveMaxCases) + " cases), "
           + std::to_string(frontierStatSets) + " random stat sets";
}

// ---------------------------------------------------------------------------------------------

auto criterionCheckerDominance() -> std::string
{
    auto text = std::string {};
    auto strictOnMultiAnswer = false;
    for (auto const& name: tt::fixture_names())
    {
        auto last = std::optional<loop::Session> {};
        auto const trace = runFixture(name, judge::EvalMode::checker, &last);
        require(last.has_value(), name + ": no evaluated iteration");
        auto const& state = last->snapshot.state;
        require(state.checker_source.has_value(), name + ": no checker was synthesized");

        auto box = tt::local_sandbox();
        auto const problem = tt::load_problem(name);
        auto options = judge::EvalOptions {};
        auto const plain = judge::evaluate(*box, problem, state.suite, options);
        options.mode = judge::EvalMode::checker;
        options.checker = sandbox::compile_or_throw(*box, *state.checker_source, Language {});
        auto const checked = judge::evaluate(*box, problem, state.suite, options);

        require(checked.metrics.tpr >= plain.metrics.tpr, name + ": checker lowered TPR");
        if (name == "anypair")
        {
            require(checked.metrics.tpr > plain.metrics.tpr, "anypair: no strict TPR gain");
            strictOnMultiAnswer = true;
        }
        text += (text.empty() ? "" : ", ") + name + " " + judge::format_percent(plain.metrics.tpr) + " -> "
                + judge::format_percent(checked.metrics.tpr);
    }
    require(strictOnMultiAnswer, "multi-answer fixture missing");
    return "TPR string -> checker: " + text;
}

// ---------------------------------------------------------------------------------------------

auto aliveMask(std::vector<Solution> const& pool) -> std::vector<bool>
{
    auto mask = std::vector<bool> {};
    for (auto const& s: pool)
        mask.push_back(s.alive);
    return mask;
}

auto maskOf(Json const& j) -> std::vector<bool>
{
    auto mask = std::vector<bool> {};
    for (auto const& v: j)
        mask.push_back(v.get<bool>());
    return mask;
}

auto criterionCuration() -> std::string
{
    auto const dir = tt::fixtures_dir() / "curation";
    auto const expected = Json::parse(read_file(dir / "expected.json"));
    auto const data = io::ingest(dir / "problems.jsonl", io::Format::codecontests_jsonl);
    require(data.problems.size() == 12, "fixture has " + std::to_string(data.problems.size()) + " problems");

    auto const filtered = curation::filter_problems(data.problems);
    auto keptIds = std::vector<std::string> {};
    for (auto const& p: filtered.kept)
        keptIds.push_back(p.id);
    require(keptIds == expected["kept"].get<std::vector<std::string>>(), "kept set differs");

    auto rules = std::map<std::string, int> {};
    require(filtered.rejected.size() == expected["rejected"].size(), "rejected count differs");
    for (auto const& r: filtered.rejected)
    {
        require(expected["rejected"].contains(r.problem_id), r.problem_id + " wrongly rejected");
        require(expected["rejected"][r.problem_id] == curation::to_string(r.rule),
                r.problem_id + " rejected as " + std::string(curation::to_string(r.rule)));
        ++rules[std::string(curation::to_string(r.rule))];
    }
    require(rules.size() == curation::all_rules.size(), "not every exclusion rule was exercised");

    auto box = tt::local_sandbox();
    auto const correctMask = maskOf(expected["correct_alive"]);
    auto const incorrectMask = maskOf(expected["incorrect_alive"]);
    auto killed = std::size_t { 0 }, wrongAlive = std::size_t { 0 };
    for (auto const& p: filtered.kept)
    {
        auto const out = curation::purify_pools(*box, p);
        require(out.usable, p.id + " unusable: " + out.reason);
        require(aliveMask(out.problem.correct_pool) == correctMask, p.id + ": correct pool alive set differs");
        require(aliveMask(out.problem.incorrect_pool) == incorrectMask, p.id + ": incorrect pool alive set differs");
        for (auto const alive: correctMask)
            killed += alive ? 0 : 1;
        for (auto const alive: incorrectMask)
            (alive ? wrongAlive : killed) += 1;
    }
    return std::to_string(keptIds.size()) + " kept, " + std::to_string(filtered.rejected.size()) + " rejected over "
           + std::to_string(rules.size()) + " rules; " + std::to_string(killed) + " planted failures killed, "
           + std::to_string(wrongAlive) + " wrong-but-running kept";
}

// ---------------------------------------------------------------------------------------------

auto criterionGroundTruthPurity() -> std::string
{
    auto checkedCases = std::size_t { 0 };
    auto problems = std::size_t { 0 };
    auto const dataset = tt::fixtures_dir() / "datasets" / "fixtures.codecontests.jsonl";
    for (auto const mode: { judge::EvalMode::string, judge::EvalMode::checker })
    {
        auto out = TempDir(fs::temp_directory_path(), "tcforge-accept-");
        auto box = tt::local_sandbox();
        auto provider = tt::scripted_provider(tt::fixture_names());
        auto gateway = llm::Gateway(*provider);
        auto config = io::Config {};
        config.loop.mode = mode;
        (void) io::run_dataset(io::ingest(dataset).problems, config, *box, gateway, io::RunOptions { out.path(), false, true });

        for (auto line: split_lines(read_file(out.path() / "dataset.jsonl")))
        {
            if (trim(line).empty())
                continue;
            auto const record = Json::parse(line);
            if (record["status"] != "ok")
                continue;
            auto const problem = io::problem_from_native(record);
            require(problem.reference_solution.has_value(), problem.id + ": no reference");
            auto const suite = record["suite"].get<std::vector<TestCase>>();
            require(!suite.empty(), problem.id + ": empty exported suite");
            auto const reference = sandbox::compile_or_throw(*box, problem.reference_solution->source,
                                                             problem.reference_solution->language);
            for (auto i = std::size_t { 0 }; i < suite.size(); ++i)
            {
                auto spec = sandbox::ExecSpec {};
                spec.program = reference;
                spec.stdin_data = suite[i].input;
                spec.time_limit_ms = problem.time_limit_ms;
                spec.memory_limit_mb = problem.memory_limit_mb;
                auto const r = box->run(spec);
                require(r.ok(), problem.id + " case " + std::to_string(i) + ": reference " + std::string(sandbox::to_string(r.outcome)));
                require(judge::normalize_output(r.stdout_data) == judge::normalize_output(suite[i].expected_output),
                        problem.id + " case " + std::to_string(i) + ": output differs from expected_output");
                ++checkedCases;
            }
            ++problems;
        }
    }
    require(problems == 2 * tt::fixture_names().size(), "not every fixture was exported");
    return std::to_string(checkedCases) + "/" + std::to_string(checkedCases) + " exported cases reproduced over "
           + std::to_string(problems) + " problem runs";
}

// ---------------------------------------------------------------------------------------------

constexpr auto echoSource = R"(#include <iostream>
#include <string>
int main()
{
    std::string line;
    while (std::getline(std::cin, line))
        std::cout << line << "!\n";
}
)";

constexpr auto exitSource = "int main() { return 3; }\n";
constexpr auto abortSource = "#include <cstdlib>\nint main() { std::abort(); }\n";
constexpr auto spinSource = "int main() { volatile unsigned long x = 0; for (;;) x = x + 1; }\n";
constexpr auto hogSource = R"(#include <cstdlib>
#include <cstring>
int main()
{
    for (int i = 0; i < 64; ++i)
    {
        char* p = static_cast<char*>(std::malloc(16 << 20));
        if (!p)
            return 4;
        std::memset(p, 1, 16 << 20);
    }
}
)";

auto criterionSandboxLimits() -> std::string
{
    auto box = tt::local_sandbox();
    auto const build = [&](char const* source) { return sandbox::compile_or_throw(*box, source, Language {}); };
    auto const echo = build(echoSource), exits = build(exitSource), aborts = build(abortSource),
               spin = build(spinSource), hog = build(hogSource);

    auto const limit = std::int64_t { 300 };
    auto const grace = sandbox::timing_grace_ms(limit);
    auto timeout = sandbox::ExecSpec {};
    timeout.program = spin;
    timeout.time_limit_ms = limit;
    auto const t = box->run(timeout);
    require(t.outcome == sandbox::ExecOutcome::timeout, "spin reported " + std::string(sandbox::to_string(t.outcome)));
    require(t.wall_time_ms <= limit + grace, "spin ran " + std::to_string(t.wall_time_ms) + " ms");

    auto oom = sandbox::ExecSpec {};
    oom.program = hog;
    oom.memory_limit_mb = 64;
    oom.time_limit_ms = 5000;
    auto const o = box->run(oom);
    require(o.outcome == sandbox::ExecOutcome::oom, "hog reported " + std::string(sandbox::to_string(o.outcome)));

    auto specs = std::vector<sandbox::ExecSpec> {};
    for (auto i = 0; i < batchSize; ++i)
    {
        auto s = sandbox::ExecSpec {};
        s.time_limit_ms = 2000;
        switch (i % 5)
        {
            case 0: s.program = echo; s.stdin_data = "line " + std::to_string(i) + "\n"; break;
            case 1: s.program = exits; break;
            case 2: s.program = aborts; break;
            case 3: s.program = spin; s.time_limit_ms = 150; break;
            default: s.program = hog; s.memory_limit_mb = 64; s.time_limit_ms = 5000; break;
        }
        specs.push_back(std::move(s));
    }
    auto sequential = std::vector<sandbox::ExecRecord> {};
    for (auto const& s: specs)
        sequential.push_back(box->run(s));
    auto const batch = box->run_batch(specs, batchWorkers);
    require(batch.size() == specs.size(), "batch result count");
    auto tally = std::map<std::string, int> {};
    for (auto i = std::size_t { 0 }; i < specs.size(); ++i)
    {
        auto const& a = sequential[i];
        auto const& b = batch[i];
        require(a.outcome == b.outcome && a.stdout_data == b.stdout_data && a.exit_status == b.exit_status
                    && a.term_signal == b.term_signal,
                "spec " + std::to_string(i) + ": " + std::string(sandbox::to_string(a.outcome)) + " sequentially, "
                    + std::string(sandbox::to_string(b.outcome)) + " in the batch");
        ++tally[std::string(sandbox::to_string(b.outcome))];
    }
    auto mix = std::string {};
    for (auto const& [k, v]: tally)
        mix += (mix.empty() ? "" : " ") + k + "=" + std::to_string(v);
    return "timeout after " + std::to_string(t.wall_time_ms) + " ms <= " + std::to_string(limit + grace)
           + " ms, oom reported, batch of " + std::to_string(batchSize) + " on " + std::to_string(batchWorkers)
           + " workers matches sequential (" + mix + ")";
}

struct Criterion
{
    int id;
    char const* name;
    std::function<std::string()> run;
};

} // namespace

auto main() -> int
{
    // The fixtures plant warnings on purpose; only errors are worth showing here.
    spdlog::set_level(spdlog::level::err);
    auto const criteria = std::vector<Criterion> {
        { 1, "metric-oracle-equivalence", criterionMetricOracle },
        { 2, "definitional-fidelity", criterionDefinitionalFidelity },
        { 3, "patch-semantics", criterionPatchSemantics },
        { 4, "loop-contract", criterionLoopContract },
        { 5, "iteration-improvement", criterionIterationImprovement },
        { 6, "pareto-correctness", criterionPareto },
        { 7, "checker-dominance", criterionCheckerDominance },
        { 8, "curation-rules", criterionCuration },
        { 9, "ground-truth-purity", criterionGroundTruthPurity },
        { 10, "sandbox-limits", criterionSandboxLimits },
    };
    auto failures = 0;
    for (auto const& c: criteria)
    {
        auto const start = Clock::now();
        auto status = "PASS";
        auto detail = std::string {};
        try
        {
            detail = c.run();
        }
        catch (Failed const& f)
        {
            status = "FAIL";
            detail = f.why;
        }
        catch (std::exception const& e)
        {
            status = "FAIL";
            detail = std::string("unexpected error: ") + e.what();
        }
        failures += status[0] == 'F' ? 1 : 0;
        std::printf("%s %2d %-26s %s [%lld ms]\n", status, c.id, c.name, detail.c_str(),
                    static_cast<long long>(elapsedMs(start)));
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
