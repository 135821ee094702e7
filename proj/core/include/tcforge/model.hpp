// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <nlohmann/json.hpp>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tcforge
{

using Json = nlohmann::ordered_json;

/// Raw program I/O. Not assumed to be valid UTF-8.
using Bytes = std::string;

enum class LanguageKind
{
    cpp,
    python,
    java,
    other,
};

struct Language
{
    LanguageKind kind = LanguageKind::cpp;
    std::string tag; // only meaningful for LanguageKind::other

    /// Toolchain table key: "cpp", "python", "java", or the tag.
    [[nodiscard]] auto name() const -> std::string;
    [[nodiscard]] static auto parse(std::string_view name) -> Language;

    friend auto operator==(Language const&, Language const&) -> bool = default;
};

enum class SolutionLabel
{
    correct,
    incorrect,
    reference,
};

struct Solution
{
    std::string source;
    Language language;
    SolutionLabel label = SolutionLabel::correct;
    bool alive = true;

    friend auto operator==(Solution const&, Solution const&) -> bool = default;
};

enum class CaseOrigin
{
    public_test,
    generated,
};

struct Provenance
{
    CaseOrigin origin = CaseOrigin::public_test;
    std::optional<int> command_index;
    std::optional<int> iteration;
    std::optional<std::string> command;

    friend auto operator==(Provenance const&, Provenance const&) -> bool = default;
};

struct TestCase
{
    Bytes input;
    Bytes expected_output;
    Provenance provenance;

    friend auto operator==(TestCase const&, TestCase const&) -> bool = default;
};

struct Problem
{
    std::string id;
    std::string statement;
    std::optional<Solution> reference_solution;
    std::vector<Solution> correct_pool;
    std::vector<Solution> incorrect_pool;
    std::vector<TestCase> public_tests;
    std::int64_t time_limit_ms = 2000;
    std::int64_t memory_limit_mb = 256;
    std::vector<std::string> tags;
    std::optional<int> difficulty;
    /// Existing generator to start from, if the dataset ships one.
    std::optional<std::string> seed_generator;
    /// Dataset fields this tool does not interpret, kept verbatim for export.
    Json passthrough = Json::object();

    friend auto operator==(Problem const&, Problem const&) -> bool = default;
};

enum class VerdictKind
{
    accepted,
    wrong_answer,
    time_limit,
    memory_limit,
    runtime_error,
    compile_error,
    checker_error,
    infrastructure_error,
};

struct Verdict
{
    VerdictKind kind = VerdictKind::accepted;
    std::string detail;
    std::int64_t wall_time_ms = 0;
    double peak_memory_mb = 0;

    [[nodiscard]] auto accepted() const noexcept -> bool { return kind == VerdictKind::accepted; }

    friend auto operator==(Verdict const&, Verdict const&) -> bool = default;
};

struct CaseStat
{
    std::size_t case_index = 0;
    std::size_t pass_count_correct = 0;
    std::size_t fail_count_incorrect = 0;

    friend auto operator==(CaseStat const&, CaseStat const&) -> bool = default;
};

struct QualityMetrics
{
    double tpr = 0;
    double tnr = 0;
    std::size_t correct_total = 0;
    std::size_t correct_accepted = 0;
    std::size_t incorrect_total = 0;
    std::size_t incorrect_rejected = 0;
    std::vector<CaseStat> per_case_stats;

    friend auto operator==(QualityMetrics const&, QualityMetrics const&) -> bool = default;
};

struct IterationState
{
    int iteration = 0;
    std::string generator_source;
    std::optional<std::string> checker_source;
    std::vector<std::string> commands;
    std::vector<TestCase> suite;
    std::string constraints_summary;
    /// Absent when the suite could not be evaluated (for example, it came out empty).
    std::optional<QualityMetrics> metrics;

    friend auto operator==(IterationState const&, IterationState const&) -> bool = default;
};

enum class PoolKind
{
    correct,
    incorrect,
};

/// A correct solution rejected by the suite, with its earliest failing case.
struct FalseNegative
{
    std::size_t pool_index = 0;
    std::size_t case_index = 0;
    Verdict verdict;
    Bytes actual_output;

    friend auto operator==(FalseNegative const&, FalseNegative const&) -> bool = default;
};

/// An incorrect solution that passed every case.
struct FalsePositive
{
    std::size_t pool_index = 0;
    /// Output on the first case, shown to the model as a sample.
    Bytes sample_output;

    friend auto operator==(FalsePositive const&, FalsePositive const&) -> bool = default;
};

enum class ErrorSource
{
    generator,
    reference,
    checker,
};

struct ErrorLog
{
    ErrorSource source = ErrorSource::generator;
    /// The command string, or a case description.
    std::string subject;
    std::string log;
    /// Input that triggered the failure (reference and checker failures).
    std::optional<Bytes> input;

    friend auto operator==(ErrorLog const&, ErrorLog const&) -> bool = default;
};

struct FeedbackReport
{
    std::vector<FalseNegative> false_negatives;
    std::vector<FalsePositive> false_positives;
    std::vector<ErrorLog> error_logs;

    [[nodiscard]] auto empty() const noexcept -> bool
    {
        return false_negatives.empty() && false_positives.empty() && error_logs.empty();
    }

    friend auto operator==(FeedbackReport const&, FeedbackReport const&) -> bool = default;
};

/// Returns one human-readable description per broken invariant; empty when the problem is well formed.
[[nodiscard]] auto validate_problem(Problem const& problem) -> std::vector<std::string>;

[[nodiscard]] auto to_string(VerdictKind kind) -> std::string_view;
[[nodiscard]] auto to_string(SolutionLabel label) -> std::string_view;
[[nodiscard]] auto to_string(ErrorSource source) -> std::string_view;
[[nodiscard]] auto to_string(PoolKind pool) -> std::string_view;

[[nodiscard]] auto parse_verdict_kind(std::string_view text) -> VerdictKind;
[[nodiscard]] auto parse_solution_label(std::string_view text) -> SolutionLabel;
[[nodiscard]] auto parse_error_source(std::string_view text) -> ErrorSource;

} // namespace tcforge
