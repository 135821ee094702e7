// SPDX-License-Identifier: Apache-2.0
#include <tcforge/llm/prompts.hpp>
#include <tcforge/text.hpp>

#include <algorithm>
#include <stdexcept>

namespace tcforge::llm
{

namespace
{

#include "templates.inc"

constexpr std::string_view bootstrapNote =
    "Note: no generation program exists yet for this problem, so the program above is empty. "
    "Write a complete program from scratch and return it as a single search-replace block whose SEARCH "
    "fragment is empty and whose REPLACE fragment is the whole program.\n";

constexpr std::string_view checkerNote =
    "Note: the checker is run as `checker <input-file> <output-file> <answer-file>` and should use "
    "registerTestlibCmd(argc, argv). `inf` reads the test input, `ouf` the contestant output and `ans` the "
    "reference output. It must exit with quitf(_ok, ...) when the contestant output is a valid answer for the "
    "input and with quitf(_wa, ...) otherwise. The command lists are not used for checkers and may be empty.\n";

auto replaceAll(std::string text, std::string_view from, std::string_view to) -> std::string
{
    for (auto pos = text.find(from); pos != std::string::npos; pos = text.find(from, pos + to.size()))
        text.replace(pos, from.size(), to);
    return text;
}

auto swapRole(std::string_view text, Role role) -> std::string
{
    auto out = std::string(text);
    if (role == Role::generator)
        return out;
    out = replaceAll(std::move(out), "search_replace_generator_blocks", "search_replace_checker_blocks");
    out = replaceAll(std::move(out), "generation program", "checker program");
    out = replaceAll(std::move(out), "Generation Program", "Checker Program");
    out = replaceAll(std::move(out), "generator", "checker");
    return out;
}

auto clip(Bytes const& data, std::size_t threshold, std::string_view token) -> std::string
{
    return data.size() > threshold ? std::string(token) : sanitize_utf8(data);
}

auto clipLog(std::string const& log, std::size_t threshold) -> std::string
{
    if (log.size() <= threshold)
        return sanitize_utf8(log);
    return sanitize_utf8(std::string_view(log).substr(0, threshold)) + "\n...";
}

auto stdinField(TestCase const& tc, std::size_t threshold) -> std::string
{
    if (tc.input.size() <= threshold)
        return sanitize_utf8(tc.input);
    if (tc.provenance.command)
        return *tc.provenance.command + std::string(command_tag);
    return std::string(input_token);
}

/// Takes up to `cap` items, cycling through groups (in order of first appearance) so that
/// as many distinct kinds as possible are represented.
template <typename T, typename KeyFn>
auto pickDistinct(std::vector<T> const& items, std::size_t cap, KeyFn key) -> std::vector<T const*>
{
    auto groups = std::vector<std::vector<T const*>> {};
    auto keys = std::vector<decltype(key(items.front()))> {};
    for (auto const& item: items)
    {
        auto const k = key(item);
        auto it = std::find(keys.begin(), keys.end(), k);
        if (it == keys.end())
        {
            keys.push_back(k);
            groups.emplace_back();
            it = keys.end() - 1;
        }
        groups[static_cast<std::size_t>(it - keys.begin())].push_back(&item);
    }
    auto picked = std::vector<T const*> {};
    for (auto round = std::size_t { 0 }; picked.size() < cap; ++round)
    {
        auto any = false;
        for (auto const& g: groups)
            if (round < g.size() && picked.size() < cap)
            {
                picked.push_back(g[round]);
                any = true;
            }
        if (!any)
            break;
    }
    // Keep report order so the prompt stays readable.
    std::sort(picked.begin(), picked.end());
    return picked;
}

} // namespace

auto to_string(Role role) -> std::string_view
{
    return role == Role::generator ? "generator" : "checker";
}

auto blocks_key(Role role) -> std::string_view
{
    return role == Role::generator ? "search_replace_generator_blocks" : "search_replace_checker_blocks";
}

auto render_template(std::string_view text, std::map<std::string, std::string, std::less<>> const& slots)
    -> std::string
{
    auto out = std::string {};
    out.reserve(text.size());
    for (auto i = std::size_t { 0 }; i < text.size(); ++i)
    {
        auto const c = text[i];
        if ((c == '{' || c == '}') && i + 1 < text.size() && text[i + 1] == c)
        {
            out.push_back(c);
            ++i;
            continue;
        }
        if (c == '{')
        {
            auto const close = text.find('}', i + 1);
            if (close != std::string_view::npos)
            {
                auto const name = text.substr(i + 1, close - i - 1);
                auto const isName = !name.empty() && name.find_first_not_of("abcdefghijklmnopqrstuvwxyz_") == std::string_view::npos;
                if (isName)
                {
                    auto const it = slots.find(name);
                    if (it == slots.end())
                        throw std::invalid_argument("template slot without a value: " + std::string(name));
                    out += it->second;
                    i = close;
                    continue;
                }
            }
        }
        out.push_back(c);
    }
    return out;
}

auto initial_template(Role role) -> std::string
{
    return swapRole(initialTemplate, role);
}

auto refinement_template(Role role) -> std::string
{
    return swapRole(refinementTemplate, role);
}

auto build_initial_prompt(Problem const& problem, std::string_view source, Role role) -> std::string
{
    auto const text = initial_template(role);
    auto const slot = role == Role::generator ? std::string_view("{generator}\n") : std::string_view("{checker}\n");
    auto const split = text.find(slot);

    auto const slots = std::map<std::string, std::string, std::less<>> {
        { "problem_statement", problem.statement },
        { "generator", std::string(source) },
        { "checker", std::string(source) },
    };
    auto prompt = render_template(std::string_view(text).substr(0, split + slot.size()), slots);
    if (source.empty())
        prompt += bootstrapNote;
    if (role == Role::checker)
        prompt += checkerNote;
    prompt += render_template(std::string_view(text).substr(split + slot.size()), slots);
    return prompt;
}

auto build_refinement_prompt(Problem const& problem, IterationState const& state, FeedbackReport const& report,
                             TruncationPolicy const& policy, Role role) -> std::string
{
    auto const& artifact = role == Role::generator ? state.generator_source : state.checker_source.value_or("");

    auto commands = Json::array();
    for (auto const& c: state.commands)
        commands.push_back(sanitize_utf8(c));

    auto inputMap = Json::object();
    for (auto const& tc: state.suite)
        if (tc.provenance.command && !inputMap.contains(*tc.provenance.command))
            inputMap[sanitize_utf8(*tc.provenance.command)] = clip(tc.input, policy.input_threshold, input_token);
    for (auto const& log: report.error_logs)
        if (log.source == ErrorSource::reference && log.input && !inputMap.contains(log.subject))
            inputMap[sanitize_utf8(log.subject)] = clip(*log.input, policy.input_threshold, input_token);

    auto const pickedLogs =
        pickDistinct(report.error_logs, policy.max_error_logs, [](ErrorLog const& l) { return l.source; });
    auto runErrors = Json::array();
    auto referenceOutputs = Json::array();
    for (auto const* log: pickedLogs)
    {
        switch (log->source)
        {
            case ErrorSource::generator:
                runErrors.push_back({ { "command", sanitize_utf8(log->subject) },
                                      { "error", clipLog(log->log, policy.output_threshold) } });
                break;
            case ErrorSource::checker:
                runErrors.push_back({ { "checker", sanitize_utf8(log->subject) },
                                      { "error", clipLog(log->log, policy.output_threshold) } });
                break;
            case ErrorSource::reference:
            {
                auto stdinText = std::string {};
                if (log->input && log->input->size() <= policy.input_threshold)
                    stdinText = sanitize_utf8(*log->input);
                else
                    stdinText = sanitize_utf8(log->subject) + std::string(command_tag);
                referenceOutputs.push_back({ { "stdin", stdinText },
                                             { "error", clipLog(log->log, policy.output_threshold) },
                                             { "passed", false } });
                break;
            }
        }
    }

    auto const caseAt = [&](std::size_t index) -> TestCase const* {
        return index < state.suite.size() ? &state.suite[index] : nullptr;
    };

    auto correctResults = Json::array();
    for (auto const* fn: pickDistinct(report.false_negatives, policy.max_false_negatives,
                                      [](FalseNegative const& f) { return f.verdict.kind; }))
    {
        auto entry = Json::object();
        entry["solution"] = fn->pool_index < problem.correct_pool.size()
                                ? sanitize_utf8(problem.correct_pool[fn->pool_index].source)
                                : std::string {};
        if (auto const* tc = caseAt(fn->case_index))
        {
            entry["stdin"] = stdinField(*tc, policy.input_threshold);
            entry["stdout"] = clip(fn->actual_output, policy.output_threshold, output_token);
            entry["expected_output"] = clip(tc->expected_output, policy.output_threshold, expected_output_token);
        }
        entry["verdict"] = to_string(fn->verdict.kind);
        entry["passed"] = false;
        correctResults.push_back(std::move(entry));
    }

    auto incorrectResults = Json::array();
    for (auto const* fp: pickDistinct(report.false_positives, policy.max_false_positives,
                                      [](FalsePositive const&) { return 0; }))
    {
        auto entry = Json::object();
        entry["solution"] = fp->pool_index < problem.incorrect_pool.size()
                                ? sanitize_utf8(problem.incorrect_pool[fp->pool_index].source)
                                : std::string {};
        if (auto const* tc = caseAt(0))
        {
            entry["stdin"] = stdinField(*tc, policy.input_threshold);
            entry["stdout"] = clip(fp->sample_output, policy.output_threshold, output_token);
            entry["expected_output"] = clip(tc->expected_output, policy.output_threshold, expected_output_token);
        }
        entry["passed"] = true;
        incorrectResults.push_back(std::move(entry));
    }

    auto const slots = std::map<std::string, std::string, std::less<>> {
        { "improved_generator", artifact },
        { "improved_checker", artifact },
        { "current_command_list", commands.dump() },
        { "command_to_input_map", inputMap.dump(2) },
        { "command_run_errors", runErrors.dump(2) },
        { "correct_results", correctResults.dump(2) },
        { "incorrect_results", incorrectResults.dump(2) },
        { "outputs", referenceOutputs.dump(2) },
        { "input_constraints_summary", state.constraints_summary },
    };
    auto prompt = render_template(refinement_template(role), slots);
    if (role == Role::checker)
        prompt += "\n\n" + std::string(checkerNote);
    return prompt;
}

} // namespace tcforge::llm
