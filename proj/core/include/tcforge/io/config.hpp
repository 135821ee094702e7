// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <tcforge/analytics.hpp>
#include <tcforge/curation.hpp>
#include <tcforge/judge.hpp>
#include <tcforge/llm/provider.hpp>
#include <tcforge/local_sandbox.hpp>
#include <tcforge/loop.hpp>
#include <tcforge/remote_sandbox.hpp>

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>

namespace tcforge::io
{

/// Dataset field names read by the CodeContests importer, overridable with ingest.field.<name>.
struct FieldMapping
{
    std::string id = "name";
    std::string statement = "description";
    std::string correct_solutions = "solutions";
    std::string incorrect_solutions = "incorrect_solutions";
    std::string unlabeled_solutions = "unlabeled_solutions";
    std::string public_tests = "public_tests";
    std::string time_limit = "time_limit";
    std::string memory_limit = "memory_limit_bytes";
    std::string tags = "cf_tags";
    std::string difficulty = "difficulty";
    std::string generator = "generator";
};

enum class ProviderKind
{
    chat,
    replay,
    scripted,
};

struct Config
{
    sandbox::ToolchainTable toolchains = sandbox::default_toolchains();
    std::filesystem::path assets_dir;
    std::filesystem::path work_dir;
    std::string sandbox_backend = "local";
    sandbox::RemoteSandboxOptions remote;

    /// Override every problem's own limits when set.
    std::optional<std::int64_t> time_limit_ms;
    std::optional<std::int64_t> memory_limit_mb;

    loop::LoopConfig loop;
    /// Problems processed concurrently by the pipeline.
    int problem_workers = 1;

    ProviderKind provider_kind = ProviderKind::chat;
    llm::ProviderConfig provider;
    std::filesystem::path replay_dir;
    std::filesystem::path script_path;

    curation::FilterOptions curation;
    FieldMapping mapping;

    judge::Averaging averaging = judge::Averaging::macro;
    analytics::RankKey rank_key = analytics::RankKey::tnr_first;
    analytics::FrontierAveraging frontier = analytics::FrontierAveraging::per_problem;
};

/// The build-tree (or install-tree) directory holding testlib.h.
[[nodiscard]] auto default_assets_dir() -> std::filesystem::path;

/// Applies one "key = value" setting. Throws Error(config) for unknown keys, bad values,
/// and anything that looks like a secret (those belong in environment variables).
void apply_setting(Config& config, std::string_view key, std::string_view value,
                   std::filesystem::path const& base_dir = {});

/// Plain text, one "key = value" per line, '#' starts a comment line. Relative paths are
/// resolved against the file's directory. Throws Error(io) or Error(config).
[[nodiscard]] auto load_config(std::filesystem::path const& path) -> Config;

/// Every documented key with its current value, in file syntax.
[[nodiscard]] auto describe_config(Config const& config) -> std::string;

[[nodiscard]] auto make_sandbox(Config const& config) -> std::unique_ptr<sandbox::Sandbox>;
[[nodiscard]] auto make_provider(Config const& config) -> std::unique_ptr<llm::Provider>;

/// Applies the configured limit overrides.
[[nodiscard]] auto with_limits(Problem problem, Config const& config) -> Problem;

} // namespace tcforge::io
