// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <tcforge/sandbox.hpp>
#include <tcforge/temp_dir.hpp>

#include <future>
#include <memory>
#include <mutex>
#include <optional>

namespace tcforge::sandbox
{

struct LocalSandboxOptions
{
    ToolchainTable toolchains = default_toolchains();
    /// Scratch space for compiled artifacts and per-run directories; a temp dir when empty.
    std::filesystem::path work_dir;
    /// Directory substituted for {assets}; holds the testlib-compatible header.
    std::filesystem::path assets_dir;
    std::int64_t compile_time_limit_ms = 60'000;
    std::int64_t compile_memory_limit_mb = 2048;
    /// The address-space rlimit is 2 * memory_limit + this slack; 0 disables the rlimit.
    std::int64_t address_space_slack_mb = 256;
    int poll_interval_ms = 2;
};

/// Runs programs as resource-limited child processes of this process.
///
/// Wall-clock time is enforced by killing the child's process group, memory by sampling the
/// child's resident high-water mark, with an address-space rlimit as a hard backstop.
/// No syscall filtering is performed.
class LocalSandbox final: public Sandbox
{
  public:
    explicit LocalSandbox(LocalSandboxOptions options = {});
    ~LocalSandbox() override;

    auto compile(std::string_view source, Language const& language) -> CompileResult override;
    auto run(ExecSpec const& spec) -> ExecRecord override;

    [[nodiscard]] auto options() const -> LocalSandboxOptions const& { return _options; }

  private:
    struct Limits
    {
        std::int64_t time_ms;
        std::int64_t memory_mb;
        std::int64_t output_cap;
    };

    auto execute(std::vector<std::string> const& argv, Bytes const& input,
                 std::optional<std::filesystem::path> const& cwd, Limits limits) -> ExecRecord;
    auto compileUncached(std::string source, Language language, Toolchain toolchain, std::string key)
        -> CompileResult;

    LocalSandboxOptions _options;
    std::optional<TempDir> _ownedWorkDir;
    std::filesystem::path _workDir;
    std::mutex _cacheMutex;
    std::map<std::string, std::shared_future<CompileResult>> _cache;
};

} // namespace tcforge::sandbox
