// SPDX-License-Identifier: Apache-2.0
#include <tcforge/errors.hpp>
#include <tcforge/sandbox.hpp>

#include <algorithm>
#include <atomic>
#include <thread>

namespace tcforge::sandbox
{

auto default_toolchains() -> ToolchainTable
{
    return {
        { "cpp",
          Toolchain { .source_name = "main.cpp",
                      .compile_template = "g++ -std=gnu++17 -O2 -pipe -I{assets} -o {exe} {src}",
                      .run_template = "{exe}",
                      .version = "g++/gnu++17/O2" } },
        { "python",
          Toolchain { .source_name = "main.py",
                      .compile_template = "python3 -m py_compile {src}",
                      .run_template = "python3 {src}",
                      .version = "python3" } },
        { "java",
          Toolchain { .source_name = "Main.java",
                      .compile_template = "javac {src}",
                      .run_template = "java -Xss64m -cp {dir} Main",
                      .version = "javac" } },
        { "sh",
          Toolchain {
              .source_name = "main.sh", .compile_template = "", .run_template = "sh {src}", .version = "sh" } },
    };
}

auto to_string(ExecOutcome outcome) -> std::string_view
{
    switch (outcome)
    {
        case ExecOutcome::ok: return "ok";
        case ExecOutcome::timeout: return "timeout";
        case ExecOutcome::oom: return "oom";
        case ExecOutcome::nonzero_exit: return "nonzero_exit";
        case ExecOutcome::spawn_failure: return "spawn_failure";
    }
    return "spawn_failure";
}

auto parse_exec_outcome(std::string_view text) -> ExecOutcome
{
    for (auto o: { ExecOutcome::ok, ExecOutcome::timeout, ExecOutcome::oom, ExecOutcome::nonzero_exit,
                   ExecOutcome::spawn_failure })
        if (to_string(o) == text)
            return o;
    throw Error(ErrorKind::infrastructure, "unknown execution status: " + std::string(text));
}

auto timing_grace_ms(std::int64_t time_limit_ms) -> std::int64_t
{
    return std::max<std::int64_t>(time_limit_ms / 10, 100);
}

auto Sandbox::run_batch(std::span<ExecSpec const> specs, int worker_budget) -> std::vector<ExecRecord>
{
    if (worker_budget < 1)
        throw Error(ErrorKind::config, "worker budget must be at least 1");

    auto results = std::vector<ExecRecord>(specs.size());
    if (specs.empty())
        return results;

    auto next = std::atomic<std::size_t> { 0 };
    auto const work = [&] {
        for (auto i = next.fetch_add(1); i < specs.size(); i = next.fetch_add(1))
        {
            try
            {
                results[i] = run(specs[i]);
            }
            catch (std::exception const& e)
            {
                results[i] = ExecRecord {};
                results[i].outcome = ExecOutcome::spawn_failure;
                results[i].detail = e.what();
            }
        }
    };

    auto const threads = std::min<std::size_t>(static_cast<std::size_t>(worker_budget), specs.size());
    if (threads == 1)
    {
        work();
        return results;
    }

    auto pool = std::vector<std::jthread> {};
    pool.reserve(threads);
    for (auto t = std::size_t { 0 }; t < threads; ++t)
        pool.emplace_back(work);
    pool.clear();
    return results;
}

auto compile_or_throw(Sandbox& sandbox, std::string_view source, Language const& language) -> ProgramHandle
{
    auto result = sandbox.compile(source, language);
    if (auto* failure = std::get_if<CompileFailure>(&result))
        throw Error(ErrorKind::generation, "compilation failed:\n" + failure->diagnostics);
    return std::get<ProgramHandle>(std::move(result));
}

} // namespace tcforge::sandbox
