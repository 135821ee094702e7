// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tcforge::genkit
{

inline constexpr std::string_view search_marker = "<<<<<<< SEARCH";
inline constexpr std::string_view divider_marker = "=======";
inline constexpr std::string_view replace_marker = ">>>>>>> REPLACE";

/// One search-and-replace edit.
///
/// An empty search fragment only matches an empty source (it occurs once in "" and
/// n + 1 times in a string of length n), which is how whole files are created from scratch.
struct PatchBlock
{
    std::string search;
    std::string replace;

    friend auto operator==(PatchBlock const&, PatchBlock const&) -> bool = default;
};

struct ParseError
{
    std::size_t index = 0;
    std::string message;
};

struct ParsedBlocks
{
    std::vector<PatchBlock> blocks;
    /// Position of each block in the raw input list.
    std::vector<std::size_t> source_indices;
    std::vector<ParseError> errors;
};

/// Parses raw model-emitted blocks. Each marker must appear exactly once, on a line of its own,
/// in SEARCH / divider / REPLACE order; malformed entries are reported individually.
[[nodiscard]] auto parse_blocks(std::span<std::string const> raw) -> ParsedBlocks;

/// Parses a single raw block; throws Error(schema_violation) with the reason when malformed.
[[nodiscard]] auto parse_block(std::string_view raw) -> PatchBlock;

[[nodiscard]] auto format_block(PatchBlock const& block) -> std::string;

enum class SkipReason
{
    no_match,
    ambiguous_match,
};

struct SkippedBlock
{
    std::size_t index = 0;
    SkipReason reason = SkipReason::no_match;

    friend auto operator==(SkippedBlock const&, SkippedBlock const&) -> bool = default;
};

struct PatchOutcome
{
    std::string patched_source;
    std::vector<std::size_t> applied;
    std::vector<SkippedBlock> skipped;
};

/// Number of (possibly overlapping) occurrences of needle in haystack, counting at most `limit`.
[[nodiscard]] auto count_occurrences(std::string_view haystack, std::string_view needle, std::size_t limit = 2)
    -> std::size_t;

/// Applies blocks in order. A block applies iff its search fragment occurs exactly once in the
/// current, already partially patched, source.
[[nodiscard]] auto apply_patches(std::string_view source, std::span<PatchBlock const> blocks) -> PatchOutcome;

[[nodiscard]] auto to_string(SkipReason reason) -> std::string_view;

} // namespace tcforge::genkit
