// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <tcforge/model.hpp>

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace tcforge::llm
{

/// Which artifact a conversation edits. Checker prompts are the generator prompts with the
/// role words swapped, plus a note on the checker calling convention.
enum class Role
{
    generator,
    checker,
};

[[nodiscard]] auto to_string(Role role) -> std::string_view;

/// JSON key holding the patch blocks for a role.
[[nodiscard]] auto blocks_key(Role role) -> std::string_view;

struct TruncationPolicy
{
    std::size_t input_threshold = 4096;
    std::size_t output_threshold = 4096;
    std::size_t max_false_negatives = 10;
    std::size_t max_false_positives = 10;
    std::size_t max_error_logs = 10;
};

inline constexpr std::string_view input_token = "[input]";
inline constexpr std::string_view output_token = "[output]";
inline constexpr std::string_view expected_output_token = "[expected output]";
inline constexpr std::string_view command_tag = " [command]";

/// Single pass over `text`: {name} becomes slots[name], {{ and }} become single braces.
/// Slot values are copied verbatim, so braces inside them are never interpreted.
/// Throws std::invalid_argument for a slot name missing from `slots`.
[[nodiscard]] auto render_template(std::string_view text, std::map<std::string, std::string, std::less<>> const& slots)
    -> std::string;

[[nodiscard]] auto initial_template(Role role = Role::generator) -> std::string;
[[nodiscard]] auto refinement_template(Role role = Role::generator) -> std::string;

/// An empty artifact source switches to bootstrap mode: the prompt keeps the empty program
/// section and asks for a complete program as one block with an empty SEARCH fragment.
[[nodiscard]] auto build_initial_prompt(Problem const& problem, std::string_view source, Role role = Role::generator)
    -> std::string;

/// Feedback prompt for the artifact in `state` (generator, or checker for Role::checker).
/// Solution sources come from `problem`; case inputs and outputs from `state.suite`.
[[nodiscard]] auto build_refinement_prompt(Problem const& problem, IterationState const& state,
                                           FeedbackReport const& report, TruncationPolicy const& policy = {},
                                           Role role = Role::generator) -> std::string;

} // namespace tcforge::llm
