// SPDX-License-Identifier: Apache-2.0
#include <tcforge/argv.hpp>
#include <tcforge/errors.hpp>
#include <tcforge/genkit.hpp>
#include <tcforge/text.hpp>

#include <unordered_set>

namespace tcforge::genkit
{

auto normalize_command(std::string_view command) -> std::string
{
    return collapse_whitespace(command);
}

auto generator_arguments(std::string_view command) -> std::vector<std::string>
{
    auto words = split_command(command);
    if (words.empty() || words.front() != generator_name)
        throw Error(ErrorKind::usage, "command must start with " + std::string(generator_name) + ": "
                                          + std::string(command));
    words.erase(words.begin());
    return words;
}

auto is_generator_command(std::string_view command) -> bool
{
    try
    {
        (void) generator_arguments(command);
        return true;
    }
    catch (Error const&)
    {
        return false;
    }
}

auto materialize_inputs(sandbox::Sandbox& sandbox, sandbox::ProgramHandle const& generator,
                        std::span<std::string const> commands, GeneratorLimits const& limits, int workers)
    -> std::vector<CommandRun>
{
    auto runs = std::vector<CommandRun>(commands.size());
    auto specs = std::vector<sandbox::ExecSpec> {};
    auto specOwner = std::vector<std::size_t> {};

    for (auto i = std::size_t { 0 }; i < commands.size(); ++i)
    {
        runs[i].command = commands[i];
        try
        {
            auto spec = sandbox::ExecSpec {};
            spec.program = generator;
            spec.argv = generator_arguments(commands[i]);
            spec.time_limit_ms = limits.time_ms;
            spec.memory_limit_mb = limits.memory_mb;
            spec.output_cap = limits.output_cap;
            specs.push_back(std::move(spec));
            specOwner.push_back(i);
        }
        catch (Error const& e)
        {
            runs[i].error = e.what();
        }
    }

    auto const records = sandbox.run_batch(specs, workers);
    for (auto k = std::size_t { 0 }; k < records.size(); ++k)
    {
        auto& run = runs[specOwner[k]];
        auto const& r = records[k];
        if (r.ok() && !r.stdout_truncated)
        {
            run.input = r.stdout_data;
            continue;
        }

        auto message = std::string(sandbox::to_string(r.outcome));
        if (r.stdout_truncated)
            message = "output exceeded " + std::to_string(limits.output_cap) + " bytes";
        if (!r.detail.empty())
            message += " (" + r.detail + ")";
        if (!r.stderr_data.empty())
            message += "\n" + sanitize_utf8(r.stderr_data);
        run.error = std::move(message);
    }
    return runs;
}

auto materialize_inputs(sandbox::Sandbox& sandbox, std::string_view generator_source,
                        std::span<std::string const> commands, GeneratorLimits const& limits, int workers)
    -> std::vector<CommandRun>
{
    auto const generator = sandbox::compile_or_throw(sandbox, generator_source, Language { LanguageKind::cpp, {} });
    return materialize_inputs(sandbox, generator, commands, limits, workers);
}

auto ground_truth(sandbox::Sandbox& sandbox, Problem const& problem, std::span<CommandRun const> runs,
                  int iteration, int workers) -> GroundTruth
{
    if (!problem.reference_solution)
        throw Error(ErrorKind::generation, "problem " + problem.id + " has no reference solution");

    auto compiled = sandbox.compile(problem.reference_solution->source, problem.reference_solution->language);
    if (auto const* failure = std::get_if<sandbox::CompileFailure>(&compiled))
        throw Error(ErrorKind::generation, "reference solution failed to compile:\n" + failure->diagnostics);
    auto const reference = std::get<sandbox::ProgramHandle>(compiled);

    auto specs = std::vector<sandbox::ExecSpec> {};
    auto owners = std::vector<std::size_t> {};
    for (auto i = std::size_t { 0 }; i < runs.size(); ++i)
    {
        if (!runs[i].input)
            continue;
        auto spec = sandbox::ExecSpec {};
        spec.program = reference;
        spec.stdin_data = *runs[i].input;
        spec.time_limit_ms = problem.time_limit_ms;
        spec.memory_limit_mb = problem.memory_limit_mb;
        specs.push_back(std::move(spec));
        owners.push_back(i);
    }

    auto result = GroundTruth {};
    auto const records = sandbox.run_batch(specs, workers);
    for (auto k = std::size_t { 0 }; k < records.size(); ++k)
    {
        auto const index = owners[k];
        auto const& run = runs[index];
        auto const& r = records[k];
        if (r.ok() && !r.stdout_truncated)
        {
            auto tc = TestCase {};
            tc.input = *run.input;
            tc.expected_output = r.stdout_data;
            tc.provenance.origin = CaseOrigin::generated;
            tc.provenance.command_index = static_cast<int>(index);
            tc.provenance.iteration = iteration;
            tc.provenance.command = run.command;
            result.cases.push_back(std::move(tc));
            continue;
        }

        auto log = std::string(sandbox::to_string(r.outcome));
        if (r.stdout_truncated)
            log = "output exceeded the output cap";
        if (!r.detail.empty())
            log += " (" + r.detail + ")";
        if (!r.stderr_data.empty())
            log += "\n" + r.stderr_data;
        result.errors.push_back(ErrorLog { ErrorSource::reference, run.command, std::move(log), *run.input });
    }
    return result;
}

auto dedupe_suite(std::span<TestCase const> suite) -> std::vector<TestCase>
{
    auto seen = std::unordered_set<std::string_view> {};
    auto out = std::vector<TestCase> {};
    for (auto const& tc: suite)
        if (seen.insert(tc.input).second)
            out.push_back(tc);
    return out;
}

} // namespace tcforge::genkit
