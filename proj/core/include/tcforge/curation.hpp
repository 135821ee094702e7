// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <tcforge/model.hpp>
#include <tcforge/sandbox.hpp>

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace tcforge::curation
{

/// Exclusion rules, checked in this order; a rejection names the first one that matches.
enum class Rule
{
    incomplete_description,
    no_reference_solution,
    multimodal,
    function_only,
    interactive,
};

inline constexpr std::array all_rules = { Rule::incomplete_description, Rule::no_reference_solution,
                                          Rule::multimodal, Rule::function_only, Rule::interactive };

[[nodiscard]] auto to_string(Rule rule) -> std::string_view;
[[nodiscard]] auto parse_rule(std::string_view text) -> Rule;

/// Keyword lists are matched case-insensitively as substrings of the statement.
/// Tag lists are matched case-insensitively against Problem::tags and take priority.
struct FilterOptions
{
    std::size_t min_statement_chars = 50;
    bool require_io_headings = true;
    std::vector<std::string> image_markers = { "<image>", "<img", "![", ".png", ".jpg", ".jpeg", ".gif", ".svg" };
    std::vector<std::string> function_only_tags = { "function", "function-only" };
    std::vector<std::string> function_only_keywords = { "implement the function", "complete the function",
                                                        "class solution", "your function should return" };
    std::vector<std::string> interactive_tags = { "interactive" };
    std::vector<std::string> interactive_keywords = { "this is an interactive problem", "interactor",
                                                      "flush the output" };
};

struct Rejection
{
    std::string problem_id;
    Rule rule = Rule::incomplete_description;
    friend auto operator==(Rejection const&, Rejection const&) -> bool = default;
};

struct FilterResult
{
    std::vector<Problem> kept;
    std::vector<Rejection> rejected;
};

/// First matching exclusion rule, if any.
[[nodiscard]] auto classify(Problem const& problem, FilterOptions const& options = {}) -> std::optional<Rule>;

[[nodiscard]] auto filter_problems(std::span<Problem const> dataset, FilterOptions const& options = {})
    -> FilterResult;

struct PurifyOptions
{
    int workers = 1;
};

struct PurifyResult
{
    Problem problem;
    bool usable = true;
    /// Why the problem is unusable; empty when usable.
    std::string reason;
};

/// Marks dead every solution that fails to compile or to exit cleanly on a public input, and
/// every correct solution that gives a wrong answer on one. Incorrect solutions stay alive on
/// wrong answers. Dead solutions are never re-run, so the operation is monotone and idempotent.
/// A reference solution that fails a public test, or a problem without public tests, is unusable.
[[nodiscard]] auto purify_pools(sandbox::Sandbox& sandbox, Problem const& problem, PurifyOptions const& options = {})
    -> PurifyResult;

struct PoolSizes
{
    std::string problem_id;
    std::size_t correct_alive = 0;
    std::size_t correct_total = 0;
    std::size_t incorrect_alive = 0;
    std::size_t incorrect_total = 0;
    bool usable = true;
    std::string reason;
};

[[nodiscard]] auto pool_sizes(PurifyResult const& result) -> PoolSizes;

/// Counts per rule, the rejection list, pool sizes per problem and their means over usable problems.
[[nodiscard]] auto curation_report(std::size_t input_count, std::span<Rejection const> rejected,
                                   std::span<PoolSizes const> pools) -> Json;

} // namespace tcforge::curation
