// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <tcforge/model.hpp>
#include <tcforge/patch.hpp>
#include <tcforge/sandbox.hpp>

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace tcforge::genkit
{

/// Generator programs are always invoked as this executable name in command strings.
inline constexpr std::string_view generator_name = "./gen";

struct GeneratorLimits
{
    std::int64_t time_ms = 10'000;
    std::int64_t memory_mb = 1024;
    std::int64_t output_cap = 64 << 20;
};

/// Whitespace-normalized command text; the identity used when matching commands.
[[nodiscard]] auto normalize_command(std::string_view command) -> std::string;

/// Arguments following "./gen". Throws Error(usage) for anything else or for shell syntax.
[[nodiscard]] auto generator_arguments(std::string_view command) -> std::vector<std::string>;

[[nodiscard]] auto is_generator_command(std::string_view command) -> bool;

struct CommandRun
{
    std::string command;
    std::optional<Bytes> input;
    std::optional<std::string> error;
};

/// Runs each command once against the compiled generator; one stdout becomes one test input.
/// Failures are recorded per command and never abort the batch.
[[nodiscard]] auto materialize_inputs(sandbox::Sandbox& sandbox, sandbox::ProgramHandle const& generator,
                                      std::span<std::string const> commands, GeneratorLimits const& limits,
                                      int workers) -> std::vector<CommandRun>;

/// Compiles the generator first; a compile failure throws Error(generation) with the diagnostics.
[[nodiscard]] auto materialize_inputs(sandbox::Sandbox& sandbox, std::string_view generator_source,
                                      std::span<std::string const> commands, GeneratorLimits const& limits,
                                      int workers) -> std::vector<CommandRun>;

struct GroundTruth
{
    std::vector<TestCase> cases;
    /// One entry per input the reference solution could not answer; that input is dropped.
    std::vector<ErrorLog> errors;
};

/// Pairs every successfully generated input with the reference solution's stdout.
/// Throws Error(generation) when the reference solution does not compile.
[[nodiscard]] auto ground_truth(sandbox::Sandbox& sandbox, Problem const& problem,
                                std::span<CommandRun const> runs, int iteration, int workers) -> GroundTruth;

/// Collapses byte-identical inputs, keeping the first occurrence and the original order.
[[nodiscard]] auto dedupe_suite(std::span<TestCase const> suite) -> std::vector<TestCase>;

} // namespace tcforge::genkit
