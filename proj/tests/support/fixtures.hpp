// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <tcforge/llm/provider.hpp>
#include <tcforge/local_sandbox.hpp>
#include <tcforge/model.hpp>

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

namespace tcforge::test
{

namespace fs = std::filesystem;

[[nodiscard]] auto fixtures_dir() -> fs::path;
[[nodiscard]] auto assets_dir() -> fs::path;
/// Shared, persistent sandbox work dir so compiled fixtures are reused across test binaries.
[[nodiscard]] auto cache_dir() -> fs::path;
[[nodiscard]] auto cli_path() -> fs::path;

[[nodiscard]] auto local_sandbox() -> std::unique_ptr<sandbox::LocalSandbox>;

[[nodiscard]] auto read_text(fs::path const& path) -> std::string;

[[nodiscard]] auto cpp(std::string source, SolutionLabel label = SolutionLabel::correct) -> Solution;

/// The problem directories: sum, parity and anypair.
[[nodiscard]] auto fixture_names() -> std::vector<std::string>;
[[nodiscard]] auto problem_dir(std::string const& name) -> fs::path;

/// Reads a problem directory: problem.json, statement.md, reference.cpp, correct/, incorrect/
/// and public/<n>.in|out. The reference solution is also the first member of the correct pool.
[[nodiscard]] auto load_problem(std::string const& name) -> Problem;

[[nodiscard]] auto checker_source(std::string const& name) -> std::string;

/// script.json of each named problem, merged, with "@bootstrap:<file>" strings replaced by a
/// whole-program patch block and "@file:<file>" by the file contents.
[[nodiscard]] auto fixture_script(std::vector<std::string> const& names) -> Json;
[[nodiscard]] auto scripted_provider(std::vector<std::string> const& names) -> std::unique_ptr<llm::ScriptedProvider>;

} // namespace tcforge::test
