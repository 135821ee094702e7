// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace tcforge
{

/// Splits a shell-like command line into words without any shell evaluation.
///
/// Supports whitespace separation, single quotes, double quotes and backslash escapes.
/// Unquoted redirection, pipes, command separators and substitutions are rejected with
/// ErrorKind::usage rather than interpreted. Glob characters are ordinary literals.
[[nodiscard]] auto split_command(std::string_view command) -> std::vector<std::string>;

/// Quotes a word so split_command() yields it back unchanged.
[[nodiscard]] auto quote_word(std::string_view word) -> std::string;

} // namespace tcforge
