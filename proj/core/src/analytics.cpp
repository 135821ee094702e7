// SPDX-License-Identifier: Apache-2.0
#include <tcforge/analytics.hpp>
#include <tcforge/errors.hpp>
#include <tcforge/serialize.hpp>

#include <algorithm>
#include <cstdio>
#include <numeric>

namespace tcforge::analytics
{

namespace
{

auto ratio(std::size_t num, std::size_t den) -> double
{
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

/// Strict weak ordering for ranking; true when a ranks before b.
auto ranksBefore(CaseQuality const& a, CaseQuality const& b, RankKey key) -> bool
{
    auto const primaryA = key == RankKey::tnr_first ? a.case_tnr : a.case_tpr;
    auto const primaryB = key == RankKey::tnr_first ? b.case_tnr : b.case_tpr;
    if (primaryA != primaryB)
        return primaryA > primaryB;
    auto const secondaryA = key == RankKey::tnr_first ? a.case_tpr : a.case_tnr;
    auto const secondaryB = key == RankKey::tnr_first ? b.case_tpr : b.case_tnr;
    if (secondaryA != secondaryB)
        return secondaryA > secondaryB;
    return a.case_index < b.case_index;
}

auto pool(std::string_view text) -> PoolKind
{
    if (text == "correct")
        return PoolKind::correct;
    if (text == "incorrect")
        return PoolKind::incorrect;
    throw Error(ErrorKind::schema_violation, "unknown pool: " + std::string(text));
}

} // namespace

auto per_case_quality(std::span<judge::SolutionOutcome const> outcomes, std::size_t case_count)
    -> std::vector<CaseQuality>
{
    auto stats = std::vector<CaseQuality>(case_count);
    for (auto c = std::size_t { 0 }; c < case_count; ++c)
        stats[c].case_index = c;

    for (auto const& o: outcomes)
    {
        if (o.per_case.size() != case_count)
            throw Error(ErrorKind::evaluation, "verdict grid does not match the case count");
        for (auto c = std::size_t { 0 }; c < case_count; ++c)
        {
            auto& target = o.pool == PoolKind::correct ? stats[c].correct_pass : stats[c].incorrect_pass;
            target.push_back(o.per_case[c].accepted());
        }
    }
    if (case_count > 0 && (stats[0].correct_pass.empty() || stats[0].incorrect_pass.empty()))
        throw Error(ErrorKind::evaluation, "per-case quality needs both solution pools");

    for (auto& s: stats)
    {
        auto const passing = static_cast<std::size_t>(std::count(s.correct_pass.begin(), s.correct_pass.end(), true));
        auto const failing =
            static_cast<std::size_t>(std::count(s.incorrect_pass.begin(), s.incorrect_pass.end(), false));
        s.case_tpr = ratio(passing, s.correct_pass.size());
        s.case_tnr = ratio(failing, s.incorrect_pass.size());
    }
    return stats;
}

auto to_string(RankKey key) -> std::string_view
{
    return key == RankKey::tnr_first ? "tnr_first" : "tpr_first";
}

auto parse_rank_key(std::string_view text) -> RankKey
{
    if (text == "tnr_first")
        return RankKey::tnr_first;
    if (text == "tpr_first")
        return RankKey::tpr_first;
    throw Error(ErrorKind::config, "unknown rank key: " + std::string(text));
}

auto rank_cases(std::span<CaseQuality const> stats, RankKey key) -> std::vector<std::size_t>
{
    auto order = std::vector<std::size_t>(stats.size());
    std::iota(order.begin(), order.end(), std::size_t { 0 });
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return ranksBefore(stats[a], stats[b], key); });
    return order;
}

auto aggregate_subset(std::span<CaseQuality const> stats, std::span<std::size_t const> cases) -> FrontierPoint
{
    auto point = FrontierPoint { cases.size(), 1.0, 0.0 };
    if (stats.empty() || cases.empty())
        return point;

    auto const correct = stats.front().correct_pass.size();
    auto const incorrect = stats.front().incorrect_pass.size();
    auto accepted = std::size_t { 0 };
    for (auto j = std::size_t { 0 }; j < correct; ++j)
        accepted += std::all_of(cases.begin(), cases.end(), [&](std::size_t c) { return stats[c].correct_pass[j]; })
                        ? 1
                        : 0;
    auto rejected = std::size_t { 0 };
    for (auto j = std::size_t { 0 }; j < incorrect; ++j)
        rejected += std::all_of(cases.begin(), cases.end(),
                                [&](std::size_t c) { return stats[c].incorrect_pass[j]; })
                        ? 0
                        : 1;
    point.tpr = ratio(accepted, correct);
    point.tnr = ratio(rejected, incorrect);
    return point;
}

auto prefix_aggregates(std::span<CaseQuality const> stats, RankKey key) -> std::vector<FrontierPoint>
{
    auto const order = rank_cases(stats, key);
    auto points = std::vector<FrontierPoint> {};
    points.reserve(order.size());
    if (stats.empty())
        return points;

    // Running conjunction per solution keeps this linear in the grid size.
    auto correctAlive = std::vector<bool>(stats.front().correct_pass.size(), true);
    auto incorrectAlive = std::vector<bool>(stats.front().incorrect_pass.size(), true);
    for (auto k = std::size_t { 0 }; k < order.size(); ++k)
    {
        auto const& s = stats[order[k]];
        for (auto j = std::size_t { 0 }; j < correctAlive.size(); ++j)
            correctAlive[j] = correctAlive[j] && s.correct_pass[j];
        for (auto j = std::size_t { 0 }; j < incorrectAlive.size(); ++j)
            incorrectAlive[j] = incorrectAlive[j] && s.incorrect_pass[j];
        auto const accepted = static_cast<std::size_t>(std::count(correctAlive.begin(), correctAlive.end(), true));
        auto const rejected =
            static_cast<std::size_t>(std::count(incorrectAlive.begin(), incorrectAlive.end(), false));
        points.push_back({ k + 1, ratio(accepted, correctAlive.size()), ratio(rejected, incorrectAlive.size()) });
    }
    return points;
}

auto undominated(std::span<FrontierPoint const> points) -> std::vector<FrontierPoint>
{
    auto out = std::vector<FrontierPoint> {};
    for (auto i = std::size_t { 0 }; i < points.size(); ++i)
    {
        auto const& p = points[i];
        auto keep = true;
        for (auto j = std::size_t { 0 }; j < points.size() && keep; ++j)
        {
            if (i == j)
                continue;
            auto const& q = points[j];
            auto const geq = q.tpr >= p.tpr && q.tnr >= p.tnr;
            auto const strict = q.tpr > p.tpr || q.tnr > p.tnr;
            if (geq && strict)
                keep = false;
            else if (geq && (q.k < p.k || (q.k == p.k && j < i)))
                keep = false; // same coordinates: the smaller suite wins
        }
        if (keep)
            out.push_back(p);
    }
    std::stable_sort(out.begin(), out.end(), [](FrontierPoint const& a, FrontierPoint const& b) { return a.k < b.k; });
    return out;
}

auto pareto_frontier(std::span<CaseQuality const> stats, RankKey key) -> std::vector<FrontierPoint>
{
    if (stats.empty())
        throw Error(ErrorKind::evaluation, "no case statistics");
    auto const points = prefix_aggregates(stats, key);
    return undominated(points);
}

auto dataset_frontier(std::span<std::vector<CaseQuality> const> problems, RankKey key, FrontierAveraging averaging)
    -> std::vector<FrontierPoint>
{
    auto usable = std::vector<std::vector<CaseQuality> const*> {};
    for (auto const& p: problems)
        if (!p.empty())
            usable.push_back(&p);
    if (usable.empty())
        throw Error(ErrorKind::evaluation, "no case statistics");
    auto const count = static_cast<double>(usable.size());

    auto curve = std::vector<FrontierPoint> {};
    if (averaging == FrontierAveraging::per_problem)
    {
        auto curves = std::vector<std::vector<FrontierPoint>> {};
        auto longest = std::size_t { 0 };
        for (auto const* p: usable)
        {
            curves.push_back(prefix_aggregates(*p, key));
            longest = std::max(longest, curves.back().size());
        }
        for (auto k = std::size_t { 1 }; k <= longest; ++k)
        {
            auto point = FrontierPoint { k, 0, 0 };
            for (auto const& c: curves)
            {
                auto const& at = c[std::min(k, c.size()) - 1];
                point.tpr += at.tpr / count;
                point.tnr += at.tnr / count;
            }
            curve.push_back(point);
        }
        return undominated(curve);
    }

    struct Ref
    {
        std::size_t problem;
        std::size_t index;
    };
    auto refs = std::vector<Ref> {};
    for (auto p = std::size_t { 0 }; p < usable.size(); ++p)
        for (auto c = std::size_t { 0 }; c < usable[p]->size(); ++c)
            refs.push_back({ p, c });
    std::stable_sort(refs.begin(), refs.end(), [&](Ref const& a, Ref const& b) {
        auto const& sa = (*usable[a.problem])[a.index];
        auto const& sb = (*usable[b.problem])[b.index];
        if (ranksBefore(sa, sb, key) != ranksBefore(sb, sa, key))
            return ranksBefore(sa, sb, key);
        return a.problem < b.problem;
    });

    auto chosen = std::vector<std::vector<std::size_t>>(usable.size());
    for (auto k = std::size_t { 0 }; k < refs.size(); ++k)
    {
        chosen[refs[k].problem].push_back(refs[k].index);
        auto point = FrontierPoint { k + 1, 0, 0 };
        for (auto p = std::size_t { 0 }; p < usable.size(); ++p)
        {
            auto const at = aggregate_subset(*usable[p], chosen[p]);
            point.tpr += at.tpr / count;
            point.tnr += at.tnr / count;
        }
        curve.push_back(point);
    }
    return undominated(curve);
}

auto frontier_csv(std::string_view label, std::span<FrontierPoint const> points, RankKey key) -> std::string
{
    auto quoted = std::string(label);
    if (quoted.find_first_of(",\"\n") != std::string::npos)
    {
        auto escaped = std::string("\"");
        for (auto c: quoted)
        {
            if (c == '"')
                escaped += '"';
            escaped += c;
        }
        quoted = escaped + '"';
    }

    auto out = "# rank_key=" + std::string(to_string(key)) + "\nlabel,k,tpr,tnr\n";
    for (auto const& p: points)
    {
        auto line = std::array<char, 96> {};
        std::snprintf(line.data(), line.size(), ",%zu,%.6f,%.6f\n", p.k, p.tpr, p.tnr);
        out += quoted;
        out += line.data();
    }
    return out;
}

auto iteration_progression(std::span<loop::LoopTrace const> traces, std::optional<int> n_max)
    -> std::vector<ProgressRow>
{
    if (traces.empty())
        throw Error(ErrorKind::evaluation, "no traces");

    auto last = 0;
    for (auto const& t: traces)
        for (auto const& s: t.iterations)
            last = std::max(last, s.state.iteration);
    last = n_max.value_or(last);

    auto rows = std::vector<ProgressRow> {};
    for (auto i = 0; i <= last; ++i)
    {
        auto row = ProgressRow { i, 0, 0, 0 };
        for (auto const& t: traces)
        {
            auto const* metrics = static_cast<QualityMetrics const*>(nullptr);
            for (auto const& s: t.iterations)
                if (s.state.iteration <= i && s.state.metrics)
                    metrics = &*s.state.metrics;
            if (!metrics)
                continue;
            row.mean_tpr += metrics->tpr;
            row.mean_tnr += metrics->tnr;
            ++row.problems;
        }
        if (row.problems > 0)
        {
            row.mean_tpr /= static_cast<double>(row.problems);
            row.mean_tnr /= static_cast<double>(row.problems);
        }
        rows.push_back(row);
    }
    return rows;
}

auto checker_effect(std::span<TestCase const> suite_string, judge::Evaluation const& string_eval,
                    std::span<TestCase const> suite_checker, judge::Evaluation const& checker_eval) -> CheckerEffect
{
    auto const sameSuite = std::equal(suite_string.begin(), suite_string.end(), suite_checker.begin(),
                                      suite_checker.end(), [](TestCase const& a, TestCase const& b) {
                                          return a.input == b.input && a.expected_output == b.expected_output;
                                      });
    if (!sameSuite)
        throw Error(ErrorKind::evaluation, "checker effect needs both evaluations on the same suite");
    auto const samePools = std::equal(
        string_eval.outcomes.begin(), string_eval.outcomes.end(), checker_eval.outcomes.begin(),
        checker_eval.outcomes.end(), [](judge::SolutionOutcome const& a, judge::SolutionOutcome const& b) {
            return a.pool == b.pool && a.pool_index == b.pool_index;
        });
    if (!samePools)
        throw Error(ErrorKind::evaluation, "checker effect needs both evaluations on the same solutions");

    return { checker_eval.metrics.tpr - string_eval.metrics.tpr, checker_eval.metrics.tnr - string_eval.metrics.tnr };
}

auto evaluation_to_json(std::string const& problem_id, std::size_t case_count, judge::Evaluation const& evaluation)
    -> Json
{
    auto outcomes = Json::array();
    for (auto const& o: evaluation.outcomes)
    {
        auto verdicts = Json::array();
        for (auto const& v: o.per_case)
            verdicts.push_back(to_string(v.kind));
        auto entry = Json {
            { "pool", to_string(o.pool) },
            { "pool_index", o.pool_index },
            { "overall", o.overall == judge::Overall::accepted ? "accepted" : "rejected" },
            { "verdicts", verdicts },
        };
        if (o.compile_diagnostics)
            entry["compile_diagnostics"] = *o.compile_diagnostics;
        outcomes.push_back(std::move(entry));
    }
    return Json {
        { "problem_id", problem_id },
        { "case_count", case_count },
        { "metrics", evaluation.metrics },
        { "report", evaluation.report },
        { "outcomes", outcomes },
    };
}

auto evaluation_from_json(Json const& j) -> ExportedEvaluation
{
    auto e = ExportedEvaluation {};
    try
    {
        e.problem_id = j.at("problem_id").get<std::string>();
        e.case_count = j.at("case_count").get<std::size_t>();
        e.metrics = j.at("metrics").get<QualityMetrics>();
        for (auto const& o: j.at("outcomes"))
        {
            auto outcome = judge::SolutionOutcome {};
            outcome.pool = pool(o.at("pool").get<std::string>());
            outcome.pool_index = o.at("pool_index").get<std::size_t>();
            for (auto const& v: o.at("verdicts"))
                outcome.per_case.push_back(Verdict { parse_verdict_kind(v.get<std::string>()), {}, 0, 0 });
            outcome.overall = std::all_of(outcome.per_case.begin(), outcome.per_case.end(),
                                          [](Verdict const& v) { return v.accepted(); })
                                  ? judge::Overall::accepted
                                  : judge::Overall::rejected;
            if (auto const it = o.find("compile_diagnostics"); it != o.end())
                outcome.compile_diagnostics = it->get<std::string>();
            e.outcomes.push_back(std::move(outcome));
        }
    }
    catch (Json::exception const& ex)
    {
        throw Error(ErrorKind::schema_violation, std::string("malformed evaluation export: ") + ex.what());
    }
    return e;
}

} // namespace tcforge::analytics
