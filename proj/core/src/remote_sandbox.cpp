// SPDX-License-Identifier: Apache-2.0
#include <tcforge/errors.hpp>
#include <tcforge/remote_sandbox.hpp>
#include <tcforge/serialize.hpp>
#include <tcforge/text.hpp>

#include <httplib.h>

#include <cstdlib>

namespace tcforge::sandbox
{

namespace
{

auto programFromRequest(Json const& j) -> std::pair<std::string, Language>
{
    return { j.at("source").get<std::string>(), Language::parse(j.at("language").get<std::string>()) };
}

} // namespace

auto record_to_json(ExecRecord const& r) -> Json
{
    return Json {
        { "stdout", bytes_to_json(r.stdout_data) },
        { "stderr", bytes_to_json(r.stderr_data) },
        { "stdout_truncated", r.stdout_truncated },
        { "stderr_truncated", r.stderr_truncated },
        { "status", to_string(r.outcome) },
        { "exit_status", r.exit_status },
        { "signal", r.term_signal },
        { "timing", { { "wall_ms", r.wall_time_ms } } },
        { "peak_memory_mb", r.peak_memory_mb },
        { "detail", r.detail },
    };
}

auto record_from_json(Json const& j) -> ExecRecord
{
    auto r = ExecRecord {};
    r.stdout_data = bytes_from_json(j.value("stdout", Json("")));
    r.stderr_data = bytes_from_json(j.value("stderr", Json("")));
    r.stdout_truncated = j.value("stdout_truncated", false);
    r.stderr_truncated = j.value("stderr_truncated", false);
    r.outcome = parse_exec_outcome(j.at("status").get<std::string>());
    r.exit_status = j.value("exit_status", 0);
    r.term_signal = j.value("signal", 0);
    if (auto it = j.find("timing"); it != j.end())
        r.wall_time_ms = it->value("wall_ms", std::int64_t { 0 });
    r.peak_memory_mb = j.value("peak_memory_mb", 0.0);
    r.detail = j.value("detail", std::string {});
    return r;
}

RemoteSandbox::RemoteSandbox(RemoteSandboxOptions options): _options(std::move(options))
{
    auto const scheme = _options.endpoint.find("://");
    if (scheme == std::string::npos)
        throw Error(ErrorKind::config, "remote sandbox endpoint must be an absolute URL: " + _options.endpoint);
    auto const slash = _options.endpoint.find('/', scheme + 3);
    _base = _options.endpoint.substr(0, slash);
    _path = slash == std::string::npos ? "/" : _options.endpoint.substr(slash);
}

auto RemoteSandbox::post(Json const& request, std::int64_t timeout_ms) -> Json
{
    auto client = httplib::Client(_base);
    client.set_connection_timeout(std::chrono::milliseconds(_options.connect_timeout_ms));
    client.set_read_timeout(std::chrono::milliseconds(timeout_ms));

    auto headers = httplib::Headers {};
    if (char const* token = std::getenv(_options.token_env.c_str()); token && *token)
        headers.emplace("Authorization", std::string("Bearer ") + token);

    auto const response = client.Post(_path, headers, request.dump(), "application/json");
    if (!response)
        throw Error(ErrorKind::transport, "sandbox service unreachable: " + httplib::to_string(response.error()));
    if (response->status != 200)
        throw Error(ErrorKind::transport,
                    "sandbox service returned HTTP " + std::to_string(response->status) + ": " + response->body);
    return Json::parse(response->body);
}

auto RemoteSandbox::compile(std::string_view source, Language const& language) -> CompileResult
{
    auto const request = Json {
        { "source", std::string(source) },
        { "language", language.name() },
        { "compile_only", true },
    };
    auto const reply = post(request, _options.response_slack_ms);
    auto const status = reply.value("status", std::string {});
    if (status == "compile_error")
        return CompileFailure { bytes_from_json(reply.value("stderr", Json(""))) };
    if (status == "toolchain_missing")
        throw Error(ErrorKind::toolchain_missing, reply.value("detail", std::string("remote toolchain missing")));
    if (status != "ok")
        throw Error(ErrorKind::transport, "unexpected compile status from sandbox service: " + status);

    auto program = std::make_shared<CompiledProgram>();
    program->language = language;
    program->source = std::string(source);
    program->key = sha256_hex(language.name() + '\0' + program->source);
    return ProgramHandle(std::move(program));
}

auto RemoteSandbox::run(ExecSpec const& spec) -> ExecRecord
{
    if (!spec.program)
    {
        auto r = ExecRecord {};
        r.detail = "no program";
        return r;
    }

    auto const request = Json {
        { "source", spec.program->source },
        { "language", spec.program->language.name() },
        { "stdin", bytes_to_json(spec.stdin_data) },
        { "argv", spec.argv },
        { "limits",
          { { "time_ms", spec.time_limit_ms }, { "memory_mb", spec.memory_limit_mb }, { "output_cap", spec.output_cap } } },
        { "compile_only", false },
    };

    try
    {
        return record_from_json(post(request, spec.time_limit_ms + _options.response_slack_ms));
    }
    catch (std::exception const& e)
    {
        auto r = ExecRecord {};
        r.outcome = ExecOutcome::spawn_failure;
        r.detail = e.what();
        return r;
    }
}

auto handle_remote_request(Sandbox& backend, std::string const& body) -> std::string
{
    auto const request = Json::parse(body);
    auto const [source, language] = programFromRequest(request);

    auto compiled = CompileResult {};
    try
    {
        compiled = backend.compile(source, language);
    }
    catch (Error const& e)
    {
        if (e.kind() != ErrorKind::toolchain_missing)
            throw;
        return Json { { "status", "toolchain_missing" }, { "detail", e.what() } }.dump();
    }

    if (auto const* failure = std::get_if<CompileFailure>(&compiled))
        return Json { { "status", "compile_error" }, { "stderr", bytes_to_json(failure->diagnostics) } }.dump();
    if (request.value("compile_only", false))
        return Json { { "status", "ok" } }.dump();

    auto const& limits = request.at("limits");
    auto spec = ExecSpec {};
    spec.program = std::get<ProgramHandle>(compiled);
    spec.stdin_data = bytes_from_json(request.value("stdin", Json("")));
    spec.argv = request.value("argv", std::vector<std::string> {});
    spec.time_limit_ms = limits.at("time_ms").get<std::int64_t>();
    spec.memory_limit_mb = limits.at("memory_mb").get<std::int64_t>();
    spec.output_cap = limits.at("output_cap").get<std::int64_t>();
    return record_to_json(backend.run(spec)).dump();
}

} // namespace tcforge::sandbox
