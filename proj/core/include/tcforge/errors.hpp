// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tcforge
{

/// Broad failure category. The CLI maps each category onto a distinct exit code.
enum class ErrorKind
{
    usage,
    config,
    io,
    toolchain_missing,
    transport,
    schema_violation,
    token_budget,
    evaluation,
    generation,
    infrastructure,
};

class Error: public std::runtime_error
{
  public:
    Error(ErrorKind kind, std::string const& message): std::runtime_error(message), _kind(kind) {}

    [[nodiscard]] auto kind() const noexcept -> ErrorKind { return _kind; }

  private:
    ErrorKind _kind;
};

[[nodiscard]] auto to_string(ErrorKind kind) -> std::string_view;

} // namespace tcforge
