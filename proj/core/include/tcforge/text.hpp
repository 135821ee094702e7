// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace tcforge
{

[[nodiscard]] auto sha256_hex(std::string_view data) -> std::string;

[[nodiscard]] auto base64_encode(std::string_view data) -> std::string;
[[nodiscard]] auto base64_decode(std::string_view text) -> std::string;

[[nodiscard]] auto is_valid_utf8(std::string_view data) -> bool;

/// Replaces invalid UTF-8 sequences with U+FFFD so the text can be embedded in JSON or a prompt.
[[nodiscard]] auto sanitize_utf8(std::string_view data) -> std::string;

/// Trims both ends and collapses every whitespace run to one space.
[[nodiscard]] auto collapse_whitespace(std::string_view text) -> std::string;

[[nodiscard]] auto trim(std::string_view text) -> std::string_view;

[[nodiscard]] auto split_lines(std::string_view text) -> std::vector<std::string_view>;

[[nodiscard]] auto replace_all(std::string text, std::string_view from, std::string_view to) -> std::string;

[[nodiscard]] auto to_lower(std::string_view text) -> std::string;

/// Rough token estimate (four bytes per token), shared by budget checks and compression.
[[nodiscard]] auto estimate_tokens(std::string_view text) -> std::size_t;

} // namespace tcforge
