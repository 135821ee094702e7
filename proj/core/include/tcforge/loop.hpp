// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <tcforge/genkit.hpp>
#include <tcforge/judge.hpp>
#include <tcforge/llm/gateway.hpp>
#include <tcforge/model.hpp>
#include <tcforge/sandbox.hpp>

#include <optional>
#include <string>
#include <vector>

namespace tcforge::loop
{

struct LoopConfig
{
    double alpha = 0.95;
    double beta = 0.90;
    int n_max = 3;
    /// checker: a checker is synthesized and refined alongside the generator and used for
    /// evaluation whenever it compiles; string: plain output comparison only.
    judge::EvalMode mode = judge::EvalMode::string;
    bool compression_enabled = true;
    llm::TruncationPolicy truncation;
    genkit::GeneratorLimits generator_limits;
    judge::CheckerLimits checker_limits;
    int workers = 1;
    /// Extra model calls allowed to fix a generator that does not compile.
    int compile_repair_attempts = 2;
};

/// Throws Error(config) unless 0 < alpha, beta <= 1, n_max >= 0, workers >= 1.
void validate(LoopConfig const& config);

[[nodiscard]] auto thresholds_met(QualityMetrics const& metrics, LoopConfig const& config) -> bool;

enum class Termination
{
    thresholds_met,
    iteration_cap,
    unrecoverable_error,
};

[[nodiscard]] auto to_string(Termination reason) -> std::string_view;
[[nodiscard]] auto parse_termination(std::string_view text) -> Termination;

struct IterationSnapshot
{
    IterationState state;
    FeedbackReport report;
    /// Comparison actually used; checker mode falls back to string while no checker compiles.
    judge::EvalMode eval_mode = judge::EvalMode::string;
    std::size_t blocks_applied = 0;
    std::size_t blocks_skipped = 0;
    /// replace_command_list entries that named no current command.
    std::vector<std::string> unknown_replacements;
    int model_calls = 0;
    friend auto operator==(IterationSnapshot const&, IterationSnapshot const&) -> bool = default;
};

struct LoopTrace
{
    std::string problem_id;
    std::vector<IterationSnapshot> iterations;
    Termination termination = Termination::iteration_cap;
    std::optional<std::string> error;
    friend auto operator==(LoopTrace const&, LoopTrace const&) -> bool = default;
};

[[nodiscard]] auto trace_to_json(LoopTrace const& trace) -> Json;
[[nodiscard]] auto trace_from_json(Json const& j) -> LoopTrace;

/// Everything carried from one iteration to the next.
struct Session
{
    IterationSnapshot snapshot;
    llm::Conversation generator_history;
    llm::Conversation checker_history;
};

/// Services the loop talks to.
struct Context
{
    sandbox::Sandbox& sandbox;
    llm::Gateway& gateway;
    LoopConfig config;
};

/// Iteration 0: prompt, patch the seed (or empty) generator, materialize, ground truth, evaluate.
/// Throws Error(generation) for an empty command list or a generator that still does not compile
/// after the repair budget; model and sandbox errors propagate.
[[nodiscard]] auto run_initial(Context& context, Problem const& problem, std::optional<std::string> const& seed_generator)
    -> Session;

/// One dual-track refinement: patch the generator, drop replaced commands, append new ones, then
/// rebuild and re-evaluate the whole suite. Throws like run_initial; the caller keeps `session`.
[[nodiscard]] auto step(Context& context, Session const& session, Problem const& problem) -> Session;

/// Runs until both thresholds hold or n_max refinements were made. Never throws for
/// problem-level failures; they end the trace with Termination::unrecoverable_error.
/// When `last` is given it receives the session of the final evaluated iteration.
[[nodiscard]] auto run_loop(Context& context, Problem const& problem, std::optional<Session>* last = nullptr)
    -> LoopTrace;

} // namespace tcforge::loop
