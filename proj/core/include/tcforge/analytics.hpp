// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <tcforge/judge.hpp>
#include <tcforge/loop.hpp>
#include <tcforge/model.hpp>

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace tcforge::analytics
{

struct CaseQuality
{
    std::size_t case_index = 0;
    double case_tpr = 0;
    double case_tnr = 0;
    /// Per alive solution, in outcome order: did it accept (pass) this case?
    std::vector<bool> correct_pass;
    std::vector<bool> incorrect_pass;
    friend auto operator==(CaseQuality const&, CaseQuality const&) -> bool = default;
};

/// case_tpr: share of correct solutions passing the case; case_tnr: share of incorrect
/// solutions failing it. Throws Error(evaluation) when either pool is empty.
[[nodiscard]] auto per_case_quality(std::span<judge::SolutionOutcome const> outcomes, std::size_t case_count)
    -> std::vector<CaseQuality>;

enum class RankKey
{
    /// case_tnr descending, then case_tpr descending, then case_index.
    tnr_first,
    /// case_tpr descending, then case_tnr descending, then case_index.
    tpr_first,
};

[[nodiscard]] auto to_string(RankKey key) -> std::string_view;
[[nodiscard]] auto parse_rank_key(std::string_view text) -> RankKey;

/// Case indices (positions in `stats`) in rank order.
[[nodiscard]] auto rank_cases(std::span<CaseQuality const> stats, RankKey key = RankKey::tnr_first)
    -> std::vector<std::size_t>;

struct FrontierPoint
{
    std::size_t k = 0;
    double tpr = 0;
    double tnr = 0;
    friend auto operator==(FrontierPoint const&, FrontierPoint const&) -> bool = default;
};

/// Aggregate rates of the suite made of `cases` only: a solution is accepted iff it passes all of them.
[[nodiscard]] auto aggregate_subset(std::span<CaseQuality const> stats, std::span<std::size_t const> cases)
    -> FrontierPoint;

/// One point per prefix size k = 1..n of the ranked cases.
[[nodiscard]] auto prefix_aggregates(std::span<CaseQuality const> stats, RankKey key = RankKey::tnr_first)
    -> std::vector<FrontierPoint>;

/// Drops every point dominated by another (>= in both rates, > in one) and repeated
/// coordinates (keeping the smallest k). Result ordered by k.
[[nodiscard]] auto undominated(std::span<FrontierPoint const> points) -> std::vector<FrontierPoint>;

/// undominated(prefix_aggregates(stats, key)). Throws Error(evaluation) on empty stats.
[[nodiscard]] auto pareto_frontier(std::span<CaseQuality const> stats, RankKey key = RankKey::tnr_first)
    -> std::vector<FrontierPoint>;

enum class FrontierAveraging
{
    /// Each problem's prefix curve (held at its full suite beyond its size), averaged per k.
    per_problem,
    /// Cases of all problems ranked together; a problem with no case in the prefix accepts everything.
    pooled,
};

[[nodiscard]] auto dataset_frontier(std::span<std::vector<CaseQuality> const> problems, RankKey key,
                                    FrontierAveraging averaging = FrontierAveraging::per_problem)
    -> std::vector<FrontierPoint>;

/// "# rank_key=<key>" then "label,k,tpr,tnr" rows.
[[nodiscard]] auto frontier_csv(std::string_view label, std::span<FrontierPoint const> points, RankKey key)
    -> std::string;

struct ProgressRow
{
    int iteration = 0;
    double mean_tpr = 0;
    double mean_tnr = 0;
    std::size_t problems = 0;
    friend auto operator==(ProgressRow const&, ProgressRow const&) -> bool = default;
};

/// Macro averages per iteration 0..n_max (default: the longest trace). A trace that stopped early
/// contributes its last evaluated metrics to later rows. Traces without any metrics are skipped.
/// Throws Error(evaluation) on an empty list.
[[nodiscard]] auto iteration_progression(std::span<loop::LoopTrace const> traces, std::optional<int> n_max = {})
    -> std::vector<ProgressRow>;

struct CheckerEffect
{
    double delta_tpr = 0;
    double delta_tnr = 0;
};

/// Checker metrics minus string metrics. Throws Error(evaluation) unless both evaluations
/// ran on the same suite and the same solutions.
[[nodiscard]] auto checker_effect(std::span<TestCase const> suite_string, judge::Evaluation const& string_eval,
                                  std::span<TestCase const> suite_checker, judge::Evaluation const& checker_eval)
    -> CheckerEffect;

/// Evaluation export: metrics, report and the verdict grid, readable back by outcomes_from_json.
[[nodiscard]] auto evaluation_to_json(std::string const& problem_id, std::size_t case_count,
                                      judge::Evaluation const& evaluation) -> Json;

struct ExportedEvaluation
{
    std::string problem_id;
    std::size_t case_count = 0;
    std::vector<judge::SolutionOutcome> outcomes;
    QualityMetrics metrics;
};

[[nodiscard]] auto evaluation_from_json(Json const& j) -> ExportedEvaluation;

} // namespace tcforge::analytics
