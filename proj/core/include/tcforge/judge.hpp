// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <tcforge/model.hpp>
#include <tcforge/sandbox.hpp>

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace tcforge::judge
{

enum class EvalMode
{
    string,
    checker,
};

[[nodiscard]] auto to_string(EvalMode mode) -> std::string_view;
[[nodiscard]] auto parse_eval_mode(std::string_view text) -> EvalMode;

/// Token-insensitive only at line ends: trailing whitespace on each line and trailing blank
/// lines are ignored; everything else must match byte for byte.
[[nodiscard]] auto normalize_output(std::string_view output) -> std::string;

[[nodiscard]] auto compare_string(std::string_view expected, std::string_view actual) -> VerdictKind;

struct CheckerLimits
{
    std::int64_t time_ms = 10'000;
    std::int64_t memory_mb = 1024;
};

/// Maps a testlib-convention checker's exit to a verdict: 0 accepted, 1 and 2 (presentation
/// error) wrong answer, anything else or a limit breach a checker error.
[[nodiscard]] auto checker_verdict(sandbox::ExecRecord const& record) -> Verdict;

/// Runs the checker as `checker <input> <actual> <expected>` after an exact-match short circuit,
/// so it can only ever turn a string-mode rejection into an acceptance.
[[nodiscard]] auto compare_checker(sandbox::Sandbox& sandbox, sandbox::ProgramHandle const& checker,
                                   std::string_view input, std::string_view expected, std::string_view actual,
                                   CheckerLimits const& limits) -> Verdict;

enum class Overall
{
    accepted,
    rejected,
};

struct SolutionOutcome
{
    PoolKind pool = PoolKind::correct;
    std::size_t pool_index = 0;
    std::vector<Verdict> per_case;
    Overall overall = Overall::accepted;
    /// Set when the solution did not compile; every per-case verdict is then compile_error.
    std::optional<std::string> compile_diagnostics;
};

struct EvalOptions
{
    EvalMode mode = EvalMode::string;
    /// Used only in checker mode; string comparison applies when absent.
    sandbox::ProgramHandle checker;
    CheckerLimits checker_limits;
    int workers = 1;
};

struct Evaluation
{
    std::vector<SolutionOutcome> outcomes;
    QualityMetrics metrics;
    FeedbackReport report;
};

/// Runs every alive solution of both pools on every case and distills the feedback report.
/// Throws Error(evaluation) for an empty suite or an empty alive pool.
[[nodiscard]] auto evaluate(sandbox::Sandbox& sandbox, Problem const& problem, std::span<TestCase const> suite,
                            EvalOptions const& options) -> Evaluation;

/// Rebuilds metrics and report from per-case verdicts (plus the outputs needed for the report).
/// Pure; evaluate() delegates to it after execution.
[[nodiscard]] auto summarize(std::span<SolutionOutcome const> outcomes, std::size_t case_count) -> QualityMetrics;

enum class Averaging
{
    macro,
    micro,
};

struct DatasetRates
{
    double tpr = 0;
    double tnr = 0;
};

/// Unweighted mean over problems (macro) or pooled over solutions (micro). Throws on an empty list.
[[nodiscard]] auto aggregate_dataset(std::span<QualityMetrics const> per_problem,
                                     Averaging averaging = Averaging::macro) -> DatasetRates;

/// 0.8937 -> "89.37%".
[[nodiscard]] auto format_percent(double fraction) -> std::string;

} // namespace tcforge::judge
