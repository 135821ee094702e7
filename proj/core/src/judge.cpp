// SPDX-License-Identifier: Apache-2.0
#include <tcforge/errors.hpp>
#include <tcforge/judge.hpp>
#include <tcforge/temp_dir.hpp>
#include <tcforge/text.hpp>

#include <cmath>
#include <cstdio>

namespace tcforge::judge
{

namespace
{

constexpr std::size_t stderrExcerpt = 300;

auto verdictFromRecord(sandbox::ExecRecord const& r) -> Verdict
{
    auto v = Verdict {};
    v.wall_time_ms = r.wall_time_ms;
    v.peak_memory_mb = r.peak_memory_mb;
    switch (r.outcome)
    {
        case sandbox::ExecOutcome::ok: v.kind = VerdictKind::accepted; break;
        case sandbox::ExecOutcome::timeout: v.kind = VerdictKind::time_limit; break;
        case sandbox::ExecOutcome::oom: v.kind = VerdictKind::memory_limit; break;
        case sandbox::ExecOutcome::nonzero_exit: v.kind = VerdictKind::runtime_error; break;
        case sandbox::ExecOutcome::spawn_failure: v.kind = VerdictKind::infrastructure_error; break;
    }
    v.detail = r.detail;
    if (v.kind == VerdictKind::runtime_error && !r.stderr_data.empty())
        v.detail += ": " + sanitize_utf8(std::string_view(r.stderr_data).substr(0, stderrExcerpt));
    return v;
}

struct CheckerJob
{
    std::size_t outcome = 0;
    std::size_t caseIndex = 0;
};

} // namespace

auto to_string(EvalMode mode) -> std::string_view
{
    return mode == EvalMode::string ? "string" : "checker";
}

auto parse_eval_mode(std::string_view text) -> EvalMode
{
    if (text == "string")
        return EvalMode::string;
    if (text == "checker")
        return EvalMode::checker;
    throw Error(ErrorKind::config, "unknown evaluation mode: " + std::string(text));
}

auto normalize_output(std::string_view output) -> std::string
{
    auto lines = split_lines(output);
    auto out = std::string {};
    out.reserve(output.size());

    auto const isBlank = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\v' || c == '\f'; };
    auto trimmed = std::vector<std::string_view> {};
    trimmed.reserve(lines.size());
    for (auto line: lines)
    {
        while (!line.empty() && isBlank(line.back()))
            line.remove_suffix(1);
        trimmed.push_back(line);
    }
    while (!trimmed.empty() && trimmed.back().empty())
        trimmed.pop_back();

    for (auto i = std::size_t { 0 }; i < trimmed.size(); ++i)
    {
        if (i != 0)
            out.push_back('\n');
        out.append(trimmed[i]);
    }
    return out;
}

auto compare_string(std::string_view expected, std::string_view actual) -> VerdictKind
{
    if (expected == actual)
        return VerdictKind::accepted;
    return normalize_output(expected) == normalize_output(actual) ? VerdictKind::accepted : VerdictKind::wrong_answer;
}

auto checker_verdict(sandbox::ExecRecord const& r) -> Verdict
{
    auto v = Verdict {};
    v.wall_time_ms = r.wall_time_ms;
    v.peak_memory_mb = r.peak_memory_mb;
    auto const message = sanitize_utf8(std::string_view(r.stderr_data).substr(0, stderrExcerpt));

    if (r.outcome == sandbox::ExecOutcome::ok)
    {
        v.kind = VerdictKind::accepted;
        return v;
    }
    if (r.outcome == sandbox::ExecOutcome::nonzero_exit && r.term_signal == 0
        && (r.exit_status == 1 || r.exit_status == 2))
    {
        v.kind = VerdictKind::wrong_answer;
        v.detail = message;
        return v;
    }
    v.kind = VerdictKind::checker_error;
    v.detail = std::string(sandbox::to_string(r.outcome)) + (r.detail.empty() ? "" : " (" + r.detail + ")");
    if (!message.empty())
        v.detail += ": " + message;
    return v;
}

auto compare_checker(sandbox::Sandbox& sandbox, sandbox::ProgramHandle const& checker, std::string_view input,
                     std::string_view expected, std::string_view actual, CheckerLimits const& limits) -> Verdict
{
    if (compare_string(expected, actual) == VerdictKind::accepted)
        return Verdict { VerdictKind::accepted, {}, 0, 0 };

    auto dir = TempDir(std::filesystem::temp_directory_path(), "tcforge-check-");
    write_file(dir.path() / "input.txt", input);
    write_file(dir.path() / "output.txt", actual);
    write_file(dir.path() / "answer.txt", expected);

    auto spec = sandbox::ExecSpec {};
    spec.program = checker;
    spec.argv = { (dir.path() / "input.txt").string(), (dir.path() / "output.txt").string(),
                  (dir.path() / "answer.txt").string() };
    spec.time_limit_ms = limits.time_ms;
    spec.memory_limit_mb = limits.memory_mb;
    spec.output_cap = 1 << 20;
    return checker_verdict(sandbox.run(spec));
}

auto summarize(std::span<SolutionOutcome const> outcomes, std::size_t case_count) -> QualityMetrics
{
    auto m = QualityMetrics {};
    m.per_case_stats.resize(case_count);
    for (auto c = std::size_t { 0 }; c < case_count; ++c)
        m.per_case_stats[c].case_index = c;

    for (auto const& o: outcomes)
    {
        auto const accepted = o.overall == Overall::accepted;
        if (o.pool == PoolKind::correct)
        {
            ++m.correct_total;
            m.correct_accepted += accepted ? 1 : 0;
        }
        else
        {
            ++m.incorrect_total;
            m.incorrect_rejected += accepted ? 0 : 1;
        }
        for (auto c = std::size_t { 0 }; c < case_count && c < o.per_case.size(); ++c)
        {
            auto const ok = o.per_case[c].accepted();
            if (o.pool == PoolKind::correct && ok)
                ++m.per_case_stats[c].pass_count_correct;
            if (o.pool == PoolKind::incorrect && !ok)
                ++m.per_case_stats[c].fail_count_incorrect;
        }
    }

    m.tpr = m.correct_total == 0 ? 0.0 : static_cast<double>(m.correct_accepted) / static_cast<double>(m.correct_total);
    m.tnr = m.incorrect_total == 0 ? 0.0
                                   : static_cast<double>(m.incorrect_rejected) / static_cast<double>(m.incorrect_total);
    return m;
}

auto evaluate(sandbox::Sandbox& sandbox, Problem const& problem, std::span<TestCase const> suite,
              EvalOptions const& options) -> Evaluation
{
    if (suite.empty())
        throw Error(ErrorKind::evaluation, "no test cases");

    auto evaluation = Evaluation {};
    auto& outcomes = evaluation.outcomes;
    auto const enlist = [&](std::vector<Solution> const& pool, PoolKind kind) {
        auto alive = 0;
        for (auto i = std::size_t { 0 }; i < pool.size(); ++i)
            if (pool[i].alive)
            {
                outcomes.push_back(SolutionOutcome { kind, i, {}, Overall::accepted, std::nullopt });
                ++alive;
            }
        if (alive == 0)
            throw Error(ErrorKind::evaluation, "alive " + std::string(to_string(kind)) + " pool is empty");
    };
    enlist(problem.correct_pool, PoolKind::correct);
    enlist(problem.incorrect_pool, PoolKind::incorrect);

    auto const solutionOf = [&](SolutionOutcome const& o) -> Solution const& {
        return o.pool == PoolKind::correct ? problem.correct_pool[o.pool_index] : problem.incorrect_pool[o.pool_index];
    };

    // Grid of (solution, case) runs for every solution that compiles.
    auto specs = std::vector<sandbox::ExecSpec> {};
    auto cellOutcome = std::vector<std::size_t> {};
    auto cellCase = std::vector<std::size_t> {};
    for (auto oi = std::size_t { 0 }; oi < outcomes.size(); ++oi)
    {
        auto& o = outcomes[oi];
        auto const& solution = solutionOf(o);
        auto compiled = sandbox.compile(solution.source, solution.language);
        if (auto const* failure = std::get_if<sandbox::CompileFailure>(&compiled))
        {
            o.compile_diagnostics = failure->diagnostics;
            o.per_case.assign(suite.size(), Verdict { VerdictKind::compile_error, "compilation failed", 0, 0 });
            continue;
        }
        o.per_case.resize(suite.size());
        auto const handle = std::get<sandbox::ProgramHandle>(compiled);
        for (auto c = std::size_t { 0 }; c < suite.size(); ++c)
        {
            auto spec = sandbox::ExecSpec {};
            spec.program = handle;
            spec.stdin_data = suite[c].input;
            spec.time_limit_ms = problem.time_limit_ms;
            spec.memory_limit_mb = problem.memory_limit_mb;
            specs.push_back(std::move(spec));
            cellOutcome.push_back(oi);
            cellCase.push_back(c);
        }
    }

    auto records = sandbox.run_batch(specs, options.workers);

    auto const useChecker = options.mode == EvalMode::checker && options.checker != nullptr;
    auto checkerJobs = std::vector<CheckerJob> {};
    auto cellRecord = std::vector<std::vector<std::size_t>>(outcomes.size());
    for (auto& row: cellRecord)
        row.assign(suite.size(), SIZE_MAX);

    for (auto k = std::size_t { 0 }; k < records.size(); ++k)
    {
        auto const oi = cellOutcome[k];
        auto const c = cellCase[k];
        auto const& r = records[k];
        cellRecord[oi][c] = k;

        auto verdict = verdictFromRecord(r);
        if (verdict.kind == VerdictKind::accepted)
        {
            if (r.stdout_truncated)
            {
                verdict.kind = VerdictKind::wrong_answer;
                verdict.detail = "output limit exceeded";
            }
            else if (compare_string(suite[c].expected_output, r.stdout_data) != VerdictKind::accepted)
            {
                verdict.kind = VerdictKind::wrong_answer;
                if (useChecker)
                    checkerJobs.push_back({ oi, c });
            }
        }
        outcomes[oi].per_case[c] = std::move(verdict);
    }

    if (!checkerJobs.empty())
    {
        auto dir = TempDir(std::filesystem::temp_directory_path(), "tcforge-check-");
        auto checkerSpecs = std::vector<sandbox::ExecSpec> {};
        for (auto c = std::size_t { 0 }; c < suite.size(); ++c)
        {
            write_file(dir.path() / ("input" + std::to_string(c)), suite[c].input);
            write_file(dir.path() / ("answer" + std::to_string(c)), suite[c].expected_output);
        }
        for (auto j = std::size_t { 0 }; j < checkerJobs.size(); ++j)
        {
            auto const& job = checkerJobs[j];
            auto const outputPath = dir.path() / ("output" + std::to_string(j));
            write_file(outputPath, records[cellRecord[job.outcome][job.caseIndex]].stdout_data);
            auto spec = sandbox::ExecSpec {};
            spec.program = options.checker;
            spec.argv = { (dir.path() / ("input" + std::to_string(job.caseIndex))).string(), outputPath.string(),
                          (dir.path() / ("answer" + std::to_string(job.caseIndex))).string() };
            spec.time_limit_ms = options.checker_limits.time_ms;
            spec.memory_limit_mb = options.checker_limits.memory_mb;
            spec.output_cap = 1 << 20;
            checkerSpecs.push_back(std::move(spec));
        }

        auto const checkerRecords = sandbox.run_batch(checkerSpecs, options.workers);
        for (auto j = std::size_t { 0 }; j < checkerJobs.size(); ++j)
        {
            auto const& job = checkerJobs[j];
            auto& verdict = outcomes[job.outcome].per_case[job.caseIndex];
            auto checked = checker_verdict(checkerRecords[j]);
            checked.wall_time_ms = verdict.wall_time_ms;
            checked.peak_memory_mb = verdict.peak_memory_mb;
            if (checked.kind == VerdictKind::checker_error)
                evaluation.report.error_logs.push_back(ErrorLog { ErrorSource::checker,
                                                                  "case " + std::to_string(job.caseIndex),
                                                                  checked.detail, suite[job.caseIndex].input });
            verdict = std::move(checked);
        }
    }

    for (auto oi = std::size_t { 0 }; oi < outcomes.size(); ++oi)
    {
        auto& o = outcomes[oi];
        auto firstFailure = std::optional<std::size_t> {};
        for (auto c = std::size_t { 0 }; c < o.per_case.size(); ++c)
            if (!o.per_case[c].accepted())
            {
                firstFailure = c;
                break;
            }
        o.overall = firstFailure ? Overall::rejected : Overall::accepted;

        auto const outputAt = [&](std::size_t c) -> Bytes {
            auto const k = cellRecord[oi][c];
            return k == SIZE_MAX ? Bytes {} : records[k].stdout_data;
        };

        if (o.pool == PoolKind::correct && firstFailure)
            evaluation.report.false_negatives.push_back(
                FalseNegative { o.pool_index, *firstFailure, o.per_case[*firstFailure], outputAt(*firstFailure) });
        else if (o.pool == PoolKind::incorrect && !firstFailure)
            evaluation.report.false_positives.push_back(FalsePositive { o.pool_index, outputAt(0) });
    }

    evaluation.metrics = summarize(outcomes, suite.size());
    return evaluation;
}

auto aggregate_dataset(std::span<QualityMetrics const> per_problem, Averaging averaging) -> DatasetRates
{
    if (per_problem.empty())
        throw Error(ErrorKind::evaluation, "cannot aggregate an empty list of problems");

    auto rates = DatasetRates {};
    if (averaging == Averaging::macro)
    {
        for (auto const& m: per_problem)
        {
            rates.tpr += m.tpr;
            rates.tnr += m.tnr;
        }
        rates.tpr /= static_cast<double>(per_problem.size());
        rates.tnr /= static_cast<double>(per_problem.size());
        return rates;
    }

    auto correctTotal = std::size_t { 0 }, correctAccepted = std::size_t { 0 };
    auto incorrectTotal = std::size_t { 0 }, incorrectRejected = std::size_t { 0 };
    for (auto const& m: per_problem)
    {
        correctTotal += m.correct_total;
        correctAccepted += m.correct_accepted;
        incorrectTotal += m.incorrect_total;
        incorrectRejected += m.incorrect_rejected;
    }
    rates.tpr = correctTotal ? static_cast<double>(correctAccepted) / static_cast<double>(correctTotal) : 0.0;
    rates.tnr = incorrectTotal ? static_cast<double>(incorrectRejected) / static_cast<double>(incorrectTotal) : 0.0;
    return rates;
}

auto format_percent(double fraction) -> std::string
{
    auto buffer = std::array<char, 32> {};
    std::snprintf(buffer.data(), buffer.size(), "%.2f%%", std::round(fraction * 10000.0) / 100.0);
    return buffer.data();
}

} // namespace tcforge::judge
