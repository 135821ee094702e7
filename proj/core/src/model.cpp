// SPDX-License-Identifier: Apache-2.0
#include <tcforge/errors.hpp>
#include <tcforge/model.hpp>

#include <array>
#include <utility>

namespace tcforge
{

auto to_string(ErrorKind kind) -> std::string_view
{
    switch (kind)
    {
        case ErrorKind::usage: return "usage";
        case ErrorKind::config: return "config";
        case ErrorKind::io: return "io";
        case ErrorKind::toolchain_missing: return "toolchain_missing";
        case ErrorKind::transport: return "transport";
        case ErrorKind::schema_violation: return "schema_violation";
        case ErrorKind::token_budget: return "token_budget";
        case ErrorKind::evaluation: return "evaluation";
        case ErrorKind::generation: return "generation";
        case ErrorKind::infrastructure: return "infrastructure";
    }
    return "unknown";
}

auto Language::name() const -> std::string
{
    switch (kind)
    {
        case LanguageKind::cpp: return "cpp";
        case LanguageKind::python: return "python";
        case LanguageKind::java: return "java";
        case LanguageKind::other: return tag;
    }
    return tag;
}

auto Language::parse(std::string_view name) -> Language
{
    if (name == "cpp" || name == "c++")
        return { LanguageKind::cpp, {} };
    if (name == "python" || name == "python3")
        return { LanguageKind::python, {} };
    if (name == "java")
        return { LanguageKind::java, {} };
    return { LanguageKind::other, std::string(name) };
}

namespace
{

constexpr auto verdictNames = std::array<std::pair<VerdictKind, std::string_view>, 8> { {
    { VerdictKind::accepted, "accepted" },
    { VerdictKind::wrong_answer, "wrong_answer" },
    { VerdictKind::time_limit, "time_limit" },
    { VerdictKind::memory_limit, "memory_limit" },
    { VerdictKind::runtime_error, "runtime_error" },
    { VerdictKind::compile_error, "compile_error" },
    { VerdictKind::checker_error, "checker_error" },
    { VerdictKind::infrastructure_error, "infrastructure_error" },
} };

void checkSolution(Solution const& s, std::string const& where, SolutionLabel expected,
                   std::vector<std::string>& out)
{
    if (s.source.empty())
        out.push_back(where + " source empty");
    if (s.label != expected)
        out.push_back(where + " labeled " + std::string(to_string(s.label)) + ", expected "
                      + std::string(to_string(expected)));
}

} // namespace

auto to_string(VerdictKind kind) -> std::string_view
{
    for (auto const& [k, name]: verdictNames)
        if (k == kind)
            return name;
    return "unknown";
}

auto parse_verdict_kind(std::string_view text) -> VerdictKind
{
    for (auto const& [k, name]: verdictNames)
        if (name == text)
            return k;
    throw Error(ErrorKind::io, "unknown verdict kind: " + std::string(text));
}

auto to_string(SolutionLabel label) -> std::string_view
{
    switch (label)
    {
        case SolutionLabel::correct: return "correct";
        case SolutionLabel::incorrect: return "incorrect";
        case SolutionLabel::reference: return "reference";
    }
    return "unknown";
}

auto parse_solution_label(std::string_view text) -> SolutionLabel
{
    if (text == "correct")
        return SolutionLabel::correct;
    if (text == "incorrect")
        return SolutionLabel::incorrect;
    if (text == "reference")
        return SolutionLabel::reference;
    throw Error(ErrorKind::io, "unknown solution label: " + std::string(text));
}

auto to_string(ErrorSource source) -> std::string_view
{
    switch (source)
    {
        case ErrorSource::generator: return "generator";
        case ErrorSource::reference: return "reference";
        case ErrorSource::checker: return "checker";
    }
    return "unknown";
}

auto parse_error_source(std::string_view text) -> ErrorSource
{
    if (text == "generator")
        return ErrorSource::generator;
    if (text == "reference")
        return ErrorSource::reference;
    if (text == "checker")
        return ErrorSource::checker;
    throw Error(ErrorKind::io, "unknown error source: " + std::string(text));
}

auto to_string(PoolKind pool) -> std::string_view
{
    return pool == PoolKind::correct ? "correct" : "incorrect";
}

auto validate_problem(Problem const& problem) -> std::vector<std::string>
{
    auto violations = std::vector<std::string> {};

    if (problem.id.empty())
        violations.emplace_back("id empty");
    if (problem.statement.empty())
        violations.emplace_back("statement empty");
    if (!problem.reference_solution)
        violations.emplace_back("reference solution missing");
    else if (problem.reference_solution->source.empty())
        violations.emplace_back("reference solution source empty");

    for (auto i = std::size_t { 0 }; i < problem.correct_pool.size(); ++i)
        checkSolution(problem.correct_pool[i], "correct_pool[" + std::to_string(i) + "]",
                      SolutionLabel::correct, violations);
    for (auto i = std::size_t { 0 }; i < problem.incorrect_pool.size(); ++i)
        checkSolution(problem.incorrect_pool[i], "incorrect_pool[" + std::to_string(i) + "]",
                      SolutionLabel::incorrect, violations);

    if (problem.public_tests.empty())
        violations.emplace_back("public tests empty");
    for (auto i = std::size_t { 0 }; i < problem.public_tests.size(); ++i)
    {
        auto const& p = problem.public_tests[i].provenance;
        if (p.origin == CaseOrigin::generated && (!p.command_index || !p.iteration))
            violations.push_back("public_tests[" + std::to_string(i) + "] generated without command/iteration");
    }

    if (problem.time_limit_ms <= 0)
        violations.emplace_back("time limit not positive");
    if (problem.memory_limit_mb <= 0)
        violations.emplace_back("memory limit not positive");

    return violations;
}

} // namespace tcforge
