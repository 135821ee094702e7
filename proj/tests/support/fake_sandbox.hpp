// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <tcforge/sandbox.hpp>

#include <atomic>
#include <functional>
#include <map>
#include <mutex>

namespace tcforge::test
{

/// Programs are looked up by source text; behaviour is a function of the run spec.
/// Sources starting with "#error" fail to compile; unknown sources run as spawn failures.
class FakeSandbox final: public sandbox::Sandbox
{
  public:
    using Behavior = std::function<sandbox::ExecRecord(sandbox::ExecSpec const&)>;

    void define(std::string const& source, Behavior behavior);

    auto compile(std::string_view source, Language const& language) -> sandbox::CompileResult override;
    auto run(sandbox::ExecSpec const& spec) -> sandbox::ExecRecord override;

    std::atomic<std::size_t> compiles { 0 };
    std::atomic<std::size_t> runs { 0 };

  private:
    std::mutex _mutex;
    std::map<std::string, Behavior, std::less<>> _programs;
};

[[nodiscard]] auto exited(std::string out, int status = 0, std::string err = {}) -> sandbox::ExecRecord;
[[nodiscard]] auto timed_out() -> sandbox::ExecRecord;

/// Forwards to another sandbox and counts calls.
class CountingSandbox final: public sandbox::Sandbox
{
  public:
    explicit CountingSandbox(sandbox::Sandbox& inner): _inner(inner) {}

    auto compile(std::string_view source, Language const& language) -> sandbox::CompileResult override
    {
        ++compiles;
        return _inner.compile(source, language);
    }

    auto run(sandbox::ExecSpec const& spec) -> sandbox::ExecRecord override
    {
        ++runs;
        return _inner.run(spec);
    }

    std::atomic<std::size_t> compiles { 0 };
    std::atomic<std::size_t> runs { 0 };

  private:
    sandbox::Sandbox& _inner;
};

} // namespace tcforge::test
