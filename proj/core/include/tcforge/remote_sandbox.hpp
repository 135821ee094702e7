// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <tcforge/sandbox.hpp>

#include <string>

namespace tcforge::sandbox
{

struct RemoteSandboxOptions
{
    /// Full URL of the execution endpoint, e.g. "http://127.0.0.1:8080/run".
    std::string endpoint;
    /// Environment variable holding a bearer token; unset or empty means no Authorization header.
    std::string token_env = "TCFORGE_SANDBOX_TOKEN";
    std::int64_t connect_timeout_ms = 5'000;
    /// Added on top of each run's own time limit when waiting for the response.
    std::int64_t response_slack_ms = 30'000;
};

/// Client for an execution service speaking the JSON protocol below.
///
/// Request:  {"source", "language", "stdin", "argv", "limits": {"time_ms", "memory_mb", "output_cap"},
///            "compile_only"}
/// Response: {"stdout", "stderr", "stdout_truncated", "stderr_truncated", "status", "exit_status",
///            "signal", "timing": {"wall_ms"}, "peak_memory_mb", "detail"}
///
/// "status" is one of ok, timeout, oom, nonzero_exit, spawn_failure, or compile_error for
/// compile_only requests. Byte fields use the same encoding as dataset files.
class RemoteSandbox final: public Sandbox
{
  public:
    explicit RemoteSandbox(RemoteSandboxOptions options);

    auto compile(std::string_view source, Language const& language) -> CompileResult override;
    auto run(ExecSpec const& spec) -> ExecRecord override;

  private:
    auto post(Json const& request, std::int64_t timeout_ms) -> Json;

    RemoteSandboxOptions _options;
    std::string _base;
    std::string _path;
};

/// Serves one protocol request against a local sandbox; the body of an execution service.
[[nodiscard]] auto handle_remote_request(Sandbox& backend, std::string const& body) -> std::string;

[[nodiscard]] auto record_to_json(ExecRecord const& record) -> Json;
[[nodiscard]] auto record_from_json(Json const& j) -> ExecRecord;

} // namespace tcforge::sandbox
