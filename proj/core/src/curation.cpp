// SPDX-License-Identifier: Apache-2.0
#include <tcforge/curation.hpp>
#include <tcforge/errors.hpp>
#include <tcforge/judge.hpp>
#include <tcforge/text.hpp>

#include <algorithm>

namespace tcforge::curation
{

namespace
{

auto containsAny(std::string const& haystackLower, std::vector<std::string> const& needles) -> bool
{
    return std::any_of(needles.begin(), needles.end(), [&](std::string const& n) {
        return !n.empty() && haystackLower.find(to_lower(n)) != std::string::npos;
    });
}

auto hasTag(Problem const& p, std::vector<std::string> const& wanted) -> bool
{
    for (auto const& tag: p.tags)
    {
        auto const lower = to_lower(trim(tag));
        for (auto const& w: wanted)
            if (lower == to_lower(w))
                return true;
    }
    return false;
}

// A heading is a short line such as "Input", "## Output", "**Input format:**".
auto headingWord(std::string_view line) -> std::string
{
    auto text = to_lower(trim(line));
    auto const strip = [](char c) { return c == '#' || c == '*' || c == ':' || c == '_' || c == ' ' || c == '\t'; };
    while (!text.empty() && strip(text.front()))
        text.erase(text.begin());
    while (!text.empty() && strip(text.back()))
        text.pop_back();
    return text;
}

auto hasIoHeadings(std::string_view statement) -> bool
{
    auto input = false;
    auto output = false;
    for (auto line: split_lines(statement))
    {
        if (line.size() > 40)
            continue;
        auto const word = headingWord(line);
        if (word.starts_with("input"))
            input = true;
        else if (word.starts_with("output"))
            output = true;
    }
    return input && output;
}

auto runsCleanly(sandbox::ExecRecord const& r) -> bool
{
    return r.ok() && r.exit_status == 0 && !r.stdout_truncated;
}

} // namespace

auto to_string(Rule rule) -> std::string_view
{
    switch (rule)
    {
        case Rule::incomplete_description: return "incomplete_description";
        case Rule::no_reference_solution: return "no_reference_solution";
        case Rule::multimodal: return "multimodal";
        case Rule::function_only: return "function_only";
        case Rule::interactive: return "interactive";
    }
    return "incomplete_description";
}

auto parse_rule(std::string_view text) -> Rule
{
    for (auto const rule: all_rules)
        if (to_string(rule) == text)
            return rule;
    throw Error(ErrorKind::config, "unknown curation rule: " + std::string(text));
}

auto classify(Problem const& p, FilterOptions const& options) -> std::optional<Rule>
{
    auto const statement = trim(p.statement);
    if (statement.size() < options.min_statement_chars
        || (options.require_io_headings && !hasIoHeadings(statement)))
        return Rule::incomplete_description;

    if (!p.reference_solution || trim(p.reference_solution->source).empty())
        return Rule::no_reference_solution;

    auto const lower = to_lower(statement);
    if (containsAny(lower, options.image_markers))
        return Rule::multimodal;

    if (hasTag(p, options.function_only_tags) || containsAny(lower, options.function_only_keywords))
        return Rule::function_only;

    if (hasTag(p, options.interactive_tags) || containsAny(lower, options.interactive_keywords))
        return Rule::interactive;

    return std::nullopt;
}

auto filter_problems(std::span<Problem const> dataset, FilterOptions const& options) -> FilterResult
{
    auto result = FilterResult {};
    for (auto const& p: dataset)
    {
        if (auto const rule = classify(p, options))
            result.rejected.push_back({ p.id, *rule });
        else
            result.kept.push_back(p);
    }
    return result;
}

auto purify_pools(sandbox::Sandbox& sandbox, Problem const& problem, PurifyOptions const& options) -> PurifyResult
{
    auto result = PurifyResult { problem, true, {} };
    auto& p = result.problem;
    if (p.public_tests.empty())
    {
        result.usable = false;
        result.reason = "no public tests";
        return result;
    }
    if (!p.reference_solution)
    {
        result.usable = false;
        result.reason = "no reference solution";
        return result;
    }

    struct Candidate
    {
        Solution* solution = nullptr;
        bool mustMatch = true;
        bool isReference = false;
    };
    auto candidates = std::vector<Candidate> {};
    candidates.push_back({ &*p.reference_solution, true, true });
    for (auto& s: p.correct_pool)
        if (s.alive)
            candidates.push_back({ &s, true, false });
    for (auto& s: p.incorrect_pool)
        if (s.alive)
            candidates.push_back({ &s, false, false });

    auto specs = std::vector<sandbox::ExecSpec> {};
    auto owners = std::vector<std::size_t> {};
    auto dead = std::vector<bool>(candidates.size(), false);
    auto referenceDiagnostic = std::string {};
    for (auto ci = std::size_t { 0 }; ci < candidates.size(); ++ci)
    {
        auto compiled = sandbox.compile(candidates[ci].solution->source, candidates[ci].solution->language);
        if (auto const* failure = std::get_if<sandbox::CompileFailure>(&compiled))
        {
            dead[ci] = true;
            if (candidates[ci].isReference)
                referenceDiagnostic = "reference solution failed to compile: " + failure->diagnostics;
            continue;
        }
        auto const handle = std::get<sandbox::ProgramHandle>(compiled);
        for (auto const& tc: p.public_tests)
        {
            auto spec = sandbox::ExecSpec {};
            spec.program = handle;
            spec.stdin_data = tc.input;
            spec.time_limit_ms = p.time_limit_ms;
            spec.memory_limit_mb = p.memory_limit_mb;
            specs.push_back(std::move(spec));
            owners.push_back(ci);
        }
    }

    auto const records = sandbox.run_batch(specs, options.workers);
    for (auto k = std::size_t { 0 }; k < records.size(); ++k)
    {
        auto const ci = owners[k];
        auto const caseIndex = k % p.public_tests.size();
        auto const& r = records[k];
        auto failed = !runsCleanly(r);
        if (!failed && candidates[ci].mustMatch)
            failed = judge::compare_string(p.public_tests[caseIndex].expected_output, r.stdout_data)
                     != VerdictKind::accepted;
        if (failed && !dead[ci])
        {
            dead[ci] = true;
            if (candidates[ci].isReference)
                referenceDiagnostic = "reference solution failed public test " + std::to_string(caseIndex) + " ("
                                      + std::string(sandbox::to_string(r.outcome)) + ")";
        }
    }

    for (auto ci = std::size_t { 0 }; ci < candidates.size(); ++ci)
    {
        if (candidates[ci].isReference)
            continue;
        if (dead[ci])
            candidates[ci].solution->alive = false;
    }
    if (dead[0])
    {
        result.usable = false;
        result.reason = referenceDiagnostic;
    }
    return result;
}

auto pool_sizes(PurifyResult const& result) -> PoolSizes
{
    auto sizes = PoolSizes {};
    sizes.problem_id = result.problem.id;
    sizes.correct_total = result.problem.correct_pool.size();
    sizes.incorrect_total = result.problem.incorrect_pool.size();
    for (auto const& s: result.problem.correct_pool)
        sizes.correct_alive += s.alive ? 1 : 0;
    for (auto const& s: result.problem.incorrect_pool)
        sizes.incorrect_alive += s.alive ? 1 : 0;
    sizes.usable = result.usable;
    sizes.reason = result.reason;
    return sizes;
}

auto curation_report(std::size_t input_count, std::span<Rejection const> rejected, std::span<PoolSizes const> pools)
    -> Json
{
    auto report = Json::object();
    report["problems_in"] = input_count;
    report["kept"] = input_count - rejected.size();

    auto byRule = Json::object();
    for (auto const rule: all_rules)
        byRule[std::string(to_string(rule))] = 0;
    auto rejections = Json::array();
    for (auto const& r: rejected)
    {
        byRule[std::string(to_string(r.rule))] = byRule[std::string(to_string(r.rule))].get<std::size_t>() + 1;
        rejections.push_back({ { "id", r.problem_id }, { "reason", to_string(r.rule) } });
    }
    report["rejected_by_rule"] = byRule;
    report["rejected"] = rejections;

    auto perProblem = Json::array();
    auto usable = std::size_t { 0 };
    auto sumCorrect = 0.0;
    auto sumIncorrect = 0.0;
    for (auto const& s: pools)
    {
        auto entry = Json { { "id", s.problem_id },
                            { "correct_alive", s.correct_alive },
                            { "correct_total", s.correct_total },
                            { "incorrect_alive", s.incorrect_alive },
                            { "incorrect_total", s.incorrect_total },
                            { "usable", s.usable } };
        if (!s.usable)
            entry["reason"] = s.reason;
        perProblem.push_back(std::move(entry));
        if (s.usable)
        {
            ++usable;
            sumCorrect += static_cast<double>(s.correct_alive);
            sumIncorrect += static_cast<double>(s.incorrect_alive);
        }
    }
    report["usable"] = usable;
    report["mean_correct_alive"] = usable ? sumCorrect / static_cast<double>(usable) : 0.0;
    report["mean_incorrect_alive"] = usable ? sumIncorrect / static_cast<double>(usable) : 0.0;
    report["pools"] = perProblem;
    return report;
}

} // namespace tcforge::curation
