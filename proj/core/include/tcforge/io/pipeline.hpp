// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <tcforge/io/config.hpp>
#include <tcforge/io/dataset.hpp>
#include <tcforge/llm/gateway.hpp>
#include <tcforge/loop.hpp>

#include <filesystem>
#include <optional>
#include <vector>

namespace tcforge::io
{

struct CurationOutcome
{
    /// Kept and usable problems with alive flags set.
    std::vector<Problem> usable;
    /// Rejected by a rule, or unusable after purification.
    std::vector<ProblemResult> dropped;
    Json report;
};

/// Filters, then purifies every kept problem (problem_workers at a time).
[[nodiscard]] auto curate_dataset(std::vector<Problem> const& problems, Config const& config,
                                  sandbox::Sandbox& sandbox) -> CurationOutcome;

/// Per-problem state file inside an output directory: results/<id stem>.json.
[[nodiscard]] auto result_path(std::filesystem::path const& output_dir, std::string const& problem_id)
    -> std::filesystem::path;

struct StoredResult
{
    ProblemResult result;
    std::optional<loop::Session> session;
};

void save_result(std::filesystem::path const& path, StoredResult const& stored);
[[nodiscard]] auto load_result(std::filesystem::path const& path) -> StoredResult;

struct RunOptions
{
    std::filesystem::path output_dir;
    /// Reuse results/<id>.json files instead of recomputing those problems.
    bool resume = false;
    /// Filter and purify first; off when the input is already curated.
    bool curate = true;
};

struct RunOutcome
{
    std::vector<ProblemResult> results;
    Summary summary;
    std::size_t resumed = 0;
};

/// The whole pipeline over a dataset: curation, the refinement loop per problem (problem_workers
/// in parallel), and the export of dataset.jsonl, summary.json and curation.json into output_dir.
/// A problem without any evaluated iteration is recorded with status failed; a failure after
/// that keeps status ok and ends its trace with unrecoverable_error. No problem stops the run. Resumed problems
/// cost no model calls and no sandbox runs.
[[nodiscard]] auto run_dataset(std::vector<Problem> const& problems, Config const& config, sandbox::Sandbox& sandbox,
                               llm::Gateway& gateway, RunOptions const& options) -> RunOutcome;

/// One refinement step for every stored result in output_dir that has a session and has not met
/// its thresholds. Results are written back and the export refreshed.
[[nodiscard]] auto refine_stored(Config const& config, sandbox::Sandbox& sandbox, llm::Gateway& gateway,
                                 std::filesystem::path const& output_dir) -> RunOutcome;

/// Every stored result in output_dir, ordered by problem id.
[[nodiscard]] auto load_results(std::filesystem::path const& output_dir) -> std::vector<StoredResult>;

/// Writes dataset.jsonl, summary.json and curation.json for `results` into output_dir.
auto write_exports(std::filesystem::path const& output_dir, std::span<ProblemResult const> results,
                   std::size_t input_count) -> Summary;

/// Evaluates the suites stored in native records. Problems without a suite or without alive
/// solutions are listed under "skipped". In checker mode a record's "checker" is compiled and
/// used when present.
[[nodiscard]] auto evaluate_records(std::filesystem::path const& dataset, Config const& config,
                                    sandbox::Sandbox& sandbox) -> Json;

} // namespace tcforge::io
