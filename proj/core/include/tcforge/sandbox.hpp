// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <tcforge/model.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace tcforge::sandbox
{

/// How to build and launch one language. Templates are split with split_command() and
/// then have {src}, {exe}, {dir} and {assets} substituted word by word.
struct Toolchain
{
    std::string source_name = "main.cpp";
    std::string compile_template; // empty: nothing to compile
    std::string run_template = "{exe}";
    std::string version;
};

using ToolchainTable = std::map<std::string, Toolchain>;

/// g++ for cpp, python3 for python, sh for shell scripts.
[[nodiscard]] auto default_toolchains() -> ToolchainTable;

struct CompiledProgram
{
    Language language;
    std::string key;          // hash of (source, language, toolchain version)
    std::string source;
    std::filesystem::path dir;
    std::vector<std::string> run_argv;
};

using ProgramHandle = std::shared_ptr<CompiledProgram const>;

struct CompileFailure
{
    std::string diagnostics;
};

using CompileResult = std::variant<ProgramHandle, CompileFailure>;

struct ExecSpec
{
    ProgramHandle program;
    Bytes stdin_data;
    std::vector<std::string> argv;
    std::int64_t time_limit_ms = 2000;
    std::int64_t memory_limit_mb = 256;
    std::int64_t output_cap = 64 << 20;
};

enum class ExecOutcome
{
    ok,
    timeout,
    oom,
    nonzero_exit,
    spawn_failure,
};

[[nodiscard]] auto to_string(ExecOutcome outcome) -> std::string_view;
[[nodiscard]] auto parse_exec_outcome(std::string_view text) -> ExecOutcome;

struct ExecRecord
{
    Bytes stdout_data;
    bool stdout_truncated = false;
    Bytes stderr_data;
    bool stderr_truncated = false;
    int exit_status = 0;
    int term_signal = 0;
    std::int64_t wall_time_ms = 0;
    double peak_memory_mb = 0;
    ExecOutcome outcome = ExecOutcome::spawn_failure;
    std::string detail;

    [[nodiscard]] auto ok() const noexcept -> bool { return outcome == ExecOutcome::ok; }
};

/// max(10% of the limit, 100 ms).
[[nodiscard]] auto timing_grace_ms(std::int64_t time_limit_ms) -> std::int64_t;

class Sandbox
{
  public:
    virtual ~Sandbox() = default;

    /// Returns a reusable handle or the compiler diagnostics. Throws Error(toolchain_missing)
    /// when the language has no configured toolchain or the compiler cannot be launched.
    virtual auto compile(std::string_view source, Language const& language) -> CompileResult = 0;

    /// Runs one program. Never throws for program misbehaviour; infrastructure problems
    /// come back as ExecOutcome::spawn_failure.
    virtual auto run(ExecSpec const& spec) -> ExecRecord = 0;

    /// Runs every spec on up to worker_budget threads; results are positionally aligned.
    virtual auto run_batch(std::span<ExecSpec const> specs, int worker_budget) -> std::vector<ExecRecord>;
};

/// Compiles or rethrows: a CompileFailure becomes Error(ErrorKind::generation) carrying the diagnostics.
[[nodiscard]] auto compile_or_throw(Sandbox& sandbox, std::string_view source, Language const& language)
    -> ProgramHandle;

} // namespace tcforge::sandbox
