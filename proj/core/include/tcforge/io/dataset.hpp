// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <tcforge/io/config.hpp>
#include <tcforge/loop.hpp>
#include <tcforge/model.hpp>

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace tcforge::io
{

inline constexpr int schema_version = 1;

enum class Format
{
    /// Detect per line: records carrying "schema_version" are native, the rest CodeContests.
    automatic,
    codecontests_jsonl,
    native_jsonl,
};

[[nodiscard]] auto parse_format(std::string_view text) -> Format;

struct IngestStats
{
    std::size_t lines = 0;
    std::size_t records = 0;
    std::size_t malformed = 0;
    std::vector<std::string> warnings;
};

/// Maps one CodeContests record. Language codes: 1 and 3 python, 2 cpp, 4 java, others
/// other("unknown"). The first correct C++ solution (else the first correct one) becomes
/// the reference. Unmapped fields land in Problem::passthrough.
[[nodiscard]] auto problem_from_codecontests(Json const& record, FieldMapping const& mapping,
                                             std::vector<std::string>* warnings = nullptr) -> Problem;

/// Reads the problem part of a native record; unknown fields land in passthrough.
[[nodiscard]] auto problem_from_native(Json const& record, std::vector<std::string>* warnings = nullptr) -> Problem;

/// Streams a JSONL file one line at a time. Blank lines are ignored; lines that fail to parse
/// or map are counted as malformed and skipped. Throws Error(io) if the file cannot be read.
auto ingest_each(std::filesystem::path const& path, Format format, FieldMapping const& mapping,
                 std::function<void(Problem&&)> const& sink) -> IngestStats;

struct Ingested
{
    std::vector<Problem> problems;
    IngestStats stats;
};

/// ingest_each into a vector. Throws Error(io) when no record could be read.
[[nodiscard]] auto ingest(std::filesystem::path const& path, Format format = Format::automatic,
                          FieldMapping const& mapping = {}) -> Ingested;

enum class RecordStatus
{
    ok,
    failed,
    rejected,
};

[[nodiscard]] auto to_string(RecordStatus status) -> std::string_view;
[[nodiscard]] auto parse_record_status(std::string_view text) -> RecordStatus;

/// One problem's outcome: the (purified) problem and, unless rejected, its trace.
struct ProblemResult
{
    Problem problem;
    RecordStatus status = RecordStatus::ok;
    std::string reason;
    std::optional<loop::LoopTrace> trace;
};

/// The final evaluated iteration of a trace, if any.
[[nodiscard]] auto final_snapshot(loop::LoopTrace const& trace) -> loop::IterationSnapshot const*;

/// Native JSONL record: schema_version, status, the problem fields, the final generator,
/// checker, commands, suite and metrics, a trace summary, then pass-through fields at top level.
[[nodiscard]] auto to_record(ProblemResult const& result) -> Json;

struct Summary
{
    std::size_t problems = 0;
    double mean_cases = 0;
    double mean_correct_alive = 0;
    double mean_incorrect_alive = 0;
    std::size_t failed = 0;
    std::size_t rejected = 0;
};

/// Means are taken over problems with status ok.
[[nodiscard]] auto summarize_results(std::span<ProblemResult const> results) -> Summary;

/// "problems / mean cases / mean alive correct / mean alive incorrect", e.g. "2 / 4.00 / 3.00 / 2.50".
[[nodiscard]] auto format_summary(Summary const& summary) -> std::string;
[[nodiscard]] auto summary_to_json(Summary const& summary) -> Json;

/// Writes one record per result (atomically) and returns the summary. Throws Error(io).
auto export_dataset(std::filesystem::path const& path, std::span<ProblemResult const> results) -> Summary;

} // namespace tcforge::io
