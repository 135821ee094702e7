// SPDX-License-Identifier: Apache-2.0
#include <tcforge/errors.hpp>
#include <tcforge/io/config.hpp>
#include <tcforge/temp_dir.hpp>
#include <tcforge/text.hpp>

#include <charconv>
#include <functional>
#include <sstream>

#ifndef TCFORGE_DEFAULT_ASSET_DIR
#define TCFORGE_DEFAULT_ASSET_DIR ""
#endif

namespace tcforge::io
{

namespace fs = std::filesystem;

namespace
{

[[noreturn]] void bad(std::string_view key, std::string_view value, std::string_view expected)
{
    throw Error(ErrorKind::config,
                "invalid value \"" + std::string(value) + "\" for " + std::string(key) + ": expected " + std::string(expected));
}

auto toInt(std::string_view key, std::string_view value) -> std::int64_t
{
    auto result = std::int64_t { 0 };
    auto const [end, ec] = std::from_chars(value.data(), value.data() + value.size(), result);
    if (ec != std::errc {} || end != value.data() + value.size())
        bad(key, value, "an integer");
    return result;
}

auto toDouble(std::string_view key, std::string_view value) -> double
{
    try
    {
        auto consumed = std::size_t { 0 };
        auto const text = std::string(value);
        auto const result = std::stod(text, &consumed);
        if (consumed != text.size())
            bad(key, value, "a number");
        return result;
    }
    catch (std::logic_error const&)
    {
        bad(key, value, "a number");
    }
}

auto toBool(std::string_view key, std::string_view value) -> bool
{
    auto const v = to_lower(value);
    if (v == "true" || v == "yes" || v == "on" || v == "1")
        return true;
    if (v == "false" || v == "no" || v == "off" || v == "0")
        return false;
    bad(key, value, "true or false");
}

auto toList(std::string_view value) -> std::vector<std::string>
{
    auto out = std::vector<std::string> {};
    auto rest = value;
    while (!rest.empty())
    {
        auto const comma = rest.find(',');
        auto const item = trim(rest.substr(0, comma));
        if (!item.empty())
            out.emplace_back(item);
        if (comma == std::string_view::npos)
            break;
        rest.remove_prefix(comma + 1);
    }
    return out;
}

auto joinList(std::vector<std::string> const& items) -> std::string
{
    auto out = std::string {};
    for (auto const& item: items)
        out += (out.empty() ? "" : ", ") + item;
    return out;
}

auto resolve(fs::path const& base, std::string_view value) -> fs::path
{
    // An empty value leaves the path unset.
    auto const p = fs::path(std::string(value));
    return p.is_relative() && !p.empty() && !base.empty() ? base / p : p;
}

auto number(double v) -> std::string
{
    auto out = std::ostringstream {};
    out << v;
    return out.str();
}

struct Key
{
    std::string name;
    std::function<void(Config&, std::string_view, fs::path const&)> set;
    std::function<std::string(Config const&)> get;
};

auto keys() -> std::vector<Key> const&
{
    static auto const table = std::vector<Key> {
        { "assets.dir", [](Config& c, std::string_view v, fs::path const& b) { c.assets_dir = resolve(b, v); },
          [](Config const& c) { return c.assets_dir.string(); } },
        { "sandbox.backend",
          [](Config& c, std::string_view v, fs::path const&) {
              if (v != "local" && v != "remote")
                  bad("sandbox.backend", v, "local or remote");
              c.sandbox_backend = std::string(v);
          },
          [](Config const& c) { return c.sandbox_backend; } },
        { "sandbox.work_dir", [](Config& c, std::string_view v, fs::path const& b) { c.work_dir = resolve(b, v); },
          [](Config const& c) { return c.work_dir.string(); } },
        { "sandbox.endpoint", [](Config& c, std::string_view v, fs::path const&) { c.remote.endpoint = v; },
          [](Config const& c) { return c.remote.endpoint; } },
        { "sandbox.token_env", [](Config& c, std::string_view v, fs::path const&) { c.remote.token_env = v; },
          [](Config const& c) { return c.remote.token_env; } },
        { "limits.time_ms",
          [](Config& c, std::string_view v, fs::path const&) {
              c.time_limit_ms = v.empty() ? std::nullopt : std::optional(toInt("limits.time_ms", v));
          },
          [](Config const& c) { return c.time_limit_ms ? std::to_string(*c.time_limit_ms) : std::string {}; } },
        { "limits.memory_mb",
          [](Config& c, std::string_view v, fs::path const&) {
              c.memory_limit_mb = v.empty() ? std::nullopt : std::optional(toInt("limits.memory_mb", v));
          },
          [](Config const& c) { return c.memory_limit_mb ? std::to_string(*c.memory_limit_mb) : std::string {}; } },
        { "limits.generator_time_ms",
          [](Config& c, std::string_view v, fs::path const&) {
              c.loop.generator_limits.time_ms = toInt("limits.generator_time_ms", v);
          },
          [](Config const& c) { return std::to_string(c.loop.generator_limits.time_ms); } },
        { "limits.generator_memory_mb",
          [](Config& c, std::string_view v, fs::path const&) {
              c.loop.generator_limits.memory_mb = toInt("limits.generator_memory_mb", v);
          },
          [](Config const& c) { return std::to_string(c.loop.generator_limits.memory_mb); } },
        { "limits.generator_output_bytes",
          [](Config& c, std::string_view v, fs::path const&) {
              c.loop.generator_limits.output_cap = toInt("limits.generator_output_bytes", v);
          },
          [](Config const& c) { return std::to_string(c.loop.generator_limits.output_cap); } },
        { "limits.checker_time_ms",
          [](Config& c, std::string_view v, fs::path const&) {
              c.loop.checker_limits.time_ms = toInt("limits.checker_time_ms", v);
          },
          [](Config const& c) { return std::to_string(c.loop.checker_limits.time_ms); } },
        { "limits.checker_memory_mb",
          [](Config& c, std::string_view v, fs::path const&) {
              c.loop.checker_limits.memory_mb = toInt("limits.checker_memory_mb", v);
          },
          [](Config const& c) { return std::to_string(c.loop.checker_limits.memory_mb); } },
        { "loop.alpha", [](Config& c, std::string_view v, fs::path const&) { c.loop.alpha = toDouble("loop.alpha", v); },
          [](Config const& c) { return number(c.loop.alpha); } },
        { "loop.beta", [](Config& c, std::string_view v, fs::path const&) { c.loop.beta = toDouble("loop.beta", v); },
          [](Config const& c) { return number(c.loop.beta); } },
        { "loop.n_max",
          [](Config& c, std::string_view v, fs::path const&) {
              c.loop.n_max = static_cast<int>(toInt("loop.n_max", v));
          },
          [](Config const& c) { return std::to_string(c.loop.n_max); } },
        { "loop.mode",
          [](Config& c, std::string_view v, fs::path const&) { c.loop.mode = judge::parse_eval_mode(v); },
          [](Config const& c) { return std::string(judge::to_string(c.loop.mode)); } },
        { "loop.compression",
          [](Config& c, std::string_view v, fs::path const&) {
              c.loop.compression_enabled = toBool("loop.compression", v);
          },
          [](Config const& c) { return std::string(c.loop.compression_enabled ? "true" : "false"); } },
        { "loop.compile_repair_attempts",
          [](Config& c, std::string_view v, fs::path const&) {
              c.loop.compile_repair_attempts = static_cast<int>(toInt("loop.compile_repair_attempts", v));
          },
          [](Config const& c) { return std::to_string(c.loop.compile_repair_attempts); } },
        { "run.workers",
          [](Config& c, std::string_view v, fs::path const&) {
              c.problem_workers = static_cast<int>(toInt("run.workers", v));
          },
          [](Config const& c) { return std::to_string(c.problem_workers); } },
        { "run.sandbox_workers",
          [](Config& c, std::string_view v, fs::path const&) {
              c.loop.workers = static_cast<int>(toInt("run.sandbox_workers", v));
          },
          [](Config const& c) { return std::to_string(c.loop.workers); } },
        { "truncation.input_bytes",
          [](Config& c, std::string_view v, fs::path const&) {
              c.loop.truncation.input_threshold = static_cast<std::size_t>(toInt("truncation.input_bytes", v));
          },
          [](Config const& c) { return std::to_string(c.loop.truncation.input_threshold); } },
        { "truncation.output_bytes",
          [](Config& c, std::string_view v, fs::path const&) {
              c.loop.truncation.output_threshold = static_cast<std::size_t>(toInt("truncation.output_bytes", v));
          },
          [](Config const& c) { return std::to_string(c.loop.truncation.output_threshold); } },
        { "feedback.max_false_negatives",
          [](Config& c, std::string_view v, fs::path const&) {
              c.loop.truncation.max_false_negatives =
                  static_cast<std::size_t>(toInt("feedback.max_false_negatives", v));
          },
          [](Config const& c) { return std::to_string(c.loop.truncation.max_false_negatives); } },
        { "feedback.max_false_positives",
          [](Config& c, std::string_view v, fs::path const&) {
              c.loop.truncation.max_false_positives =
                  static_cast<std::size_t>(toInt("feedback.max_false_positives", v));
          },
          [](Config const& c) { return std::to_string(c.loop.truncation.max_false_positives); } },
        { "feedback.max_error_logs",
          [](Config& c, std::string_view v, fs::path const&) {
              c.loop.truncation.max_error_logs = static_cast<std::size_t>(toInt("feedback.max_error_logs", v));
          },
          [](Config const& c) { return std::to_string(c.loop.truncation.max_error_logs); } },
        { "provider.kind",
          [](Config& c, std::string_view v, fs::path const&) {
              if (v == "chat")
                  c.provider_kind = ProviderKind::chat;
              else if (v == "replay")
                  c.provider_kind = ProviderKind::replay;
              else if (v == "scripted")
                  c.provider_kind = ProviderKind::scripted;
              else
                  bad("provider.kind", v, "chat, replay or scripted");
          },
          [](Config const& c) {
              return std::string(c.provider_kind == ProviderKind::chat     ? "chat"
                                 : c.provider_kind == ProviderKind::replay ? "replay"
                                                                           : "scripted");
          } },
        { "provider.endpoint", [](Config& c, std::string_view v, fs::path const&) { c.provider.endpoint = v; },
          [](Config const& c) { return c.provider.endpoint; } },
        { "provider.model", [](Config& c, std::string_view v, fs::path const&) { c.provider.model = v; },
          [](Config const& c) { return c.provider.model; } },
        { "provider.token_env", [](Config& c, std::string_view v, fs::path const&) { c.provider.token_env = v; },
          [](Config const& c) { return c.provider.token_env; } },
        { "provider.max_attempts",
          [](Config& c, std::string_view v, fs::path const&) {
              c.provider.max_attempts = static_cast<int>(toInt("provider.max_attempts", v));
              if (c.provider.max_attempts < 1)
                  bad("provider.max_attempts", v, "at least 1");
          },
          [](Config const& c) { return std::to_string(c.provider.max_attempts); } },
        { "provider.token_budget",
          [](Config& c, std::string_view v, fs::path const&) {
              c.provider.token_budget = static_cast<std::size_t>(toInt("provider.token_budget", v));
          },
          [](Config const& c) { return std::to_string(c.provider.token_budget); } },
        { "provider.temperature",
          [](Config& c, std::string_view v, fs::path const&) {
              c.provider.temperature = toDouble("provider.temperature", v);
          },
          [](Config const& c) { return number(c.provider.temperature); } },
        { "provider.transport_retries",
          [](Config& c, std::string_view v, fs::path const&) {
              c.provider.transport_retries = static_cast<int>(toInt("provider.transport_retries", v));
          },
          [](Config const& c) { return std::to_string(c.provider.transport_retries); } },
        { "provider.timeout_ms",
          [](Config& c, std::string_view v, fs::path const&) {
              c.provider.timeout_ms = toInt("provider.timeout_ms", v);
          },
          [](Config const& c) { return std::to_string(c.provider.timeout_ms); } },
        { "provider.requests_per_minute",
          [](Config& c, std::string_view v, fs::path const&) {
              c.provider.requests_per_minute = toDouble("provider.requests_per_minute", v);
          },
          [](Config const& c) { return number(c.provider.requests_per_minute); } },
        { "provider.replay_dir",
          [](Config& c, std::string_view v, fs::path const& b) { c.replay_dir = resolve(b, v); },
          [](Config const& c) { return c.replay_dir.string(); } },
        { "provider.script",
          [](Config& c, std::string_view v, fs::path const& b) { c.script_path = resolve(b, v); },
          [](Config const& c) { return c.script_path.string(); } },
        { "curation.min_statement_chars",
          [](Config& c, std::string_view v, fs::path const&) {
              c.curation.min_statement_chars = static_cast<std::size_t>(toInt("curation.min_statement_chars", v));
          },
          [](Config const& c) { return std::to_string(c.curation.min_statement_chars); } },
        { "curation.require_io_headings",
          [](Config& c, std::string_view v, fs::path const&) {
              c.curation.require_io_headings = toBool("curation.require_io_headings", v);
          },
          [](Config const& c) { return std::string(c.curation.require_io_headings ? "true" : "false"); } },
        { "curation.image_markers",
          [](Config& c, std::string_view v, fs::path const&) { c.curation.image_markers = toList(v); },
          [](Config const& c) { return joinList(c.curation.image_markers); } },
        { "curation.function_only_tags",
          [](Config& c, std::string_view v, fs::path const&) { c.curation.function_only_tags = toList(v); },
          [](Config const& c) { return joinList(c.curation.function_only_tags); } },
        { "curation.function_only_keywords",
          [](Config& c, std::string_view v, fs::path const&) { c.curation.function_only_keywords = toList(v); },
          [](Config const& c) { return joinList(c.curation.function_only_keywords); } },
        { "curation.interactive_tags",
          [](Config& c, std::string_view v, fs::path const&) { c.curation.interactive_tags = toList(v); },
          [](Config const& c) { return joinList(c.curation.interactive_tags); } },
        { "curation.interactive_keywords",
          [](Config& c, std::string_view v, fs::path const&) { c.curation.interactive_keywords = toList(v); },
          [](Config const& c) { return joinList(c.curation.interactive_keywords); } },
        { "metrics.averaging",
          [](Config& c, std::string_view v, fs::path const&) {
              if (v == "macro")
                  c.averaging = judge::Averaging::macro;
              else if (v == "micro")
                  c.averaging = judge::Averaging::micro;
              else
                  bad("metrics.averaging", v, "macro or micro");
          },
          [](Config const& c) { return std::string(c.averaging == judge::Averaging::macro ? "macro" : "micro"); } },
        { "analytics.rank_key",
          [](Config& c, std::string_view v, fs::path const&) { c.rank_key = analytics::parse_rank_key(v); },
          [](Config const& c) { return std::string(analytics::to_string(c.rank_key)); } },
        { "analytics.frontier",
          [](Config& c, std::string_view v, fs::path const&) {
              if (v == "per_problem")
                  c.frontier = analytics::FrontierAveraging::per_problem;
              else if (v == "pooled")
                  c.frontier = analytics::FrontierAveraging::pooled;
              else
                  bad("analytics.frontier", v, "per_problem or pooled");
          },
          [](Config const& c) {
              return std::string(c.frontier == analytics::FrontierAveraging::per_problem ? "per_problem" : "pooled");
          } },
    };
    return table;
}

auto mappingField(FieldMapping& m, std::string_view name) -> std::string*
{
    if (name == "id") return &m.id;
    if (name == "statement") return &m.statement;
    if (name == "correct_solutions") return &m.correct_solutions;
    if (name == "incorrect_solutions") return &m.incorrect_solutions;
    if (name == "unlabeled_solutions") return &m.unlabeled_solutions;
    if (name == "public_tests") return &m.public_tests;
    if (name == "time_limit") return &m.time_limit;
    if (name == "memory_limit") return &m.memory_limit;
    if (name == "tags") return &m.tags;
    if (name == "difficulty") return &m.difficulty;
    if (name == "generator") return &m.generator;
    return nullptr;
}

constexpr std::array mappingNames = { "id",          "statement", "correct_solutions", "incorrect_solutions",
                                      "unlabeled_solutions", "public_tests", "time_limit", "memory_limit",
                                      "tags",        "difficulty", "generator" };

} // namespace

auto default_assets_dir() -> fs::path
{
    if (char const* env = std::getenv("TCFORGE_ASSETS_DIR"); env && *env)
        return env;
    return TCFORGE_DEFAULT_ASSET_DIR;
}

void apply_setting(Config& config, std::string_view key, std::string_view value, fs::path const& base_dir)
{
    value = trim(value);
    auto const lowerKey = to_lower(key);
    for (auto const secret: { "token", "api_key", "apikey", "password", "secret" })
        if (lowerKey.find(secret) != std::string::npos && !lowerKey.ends_with("_env") && !lowerKey.ends_with("budget"))
            throw Error(ErrorKind::config, "refusing secret-looking key " + std::string(key)
                                               + "; pass secrets through environment variables");

    if (key.starts_with("toolchain."))
    {
        auto const rest = key.substr(10);
        auto const dot = rest.rfind('.');
        if (dot == std::string_view::npos || dot == 0)
            throw Error(ErrorKind::config, "expected toolchain.<language>.<field>: " + std::string(key));
        auto& tc = config.toolchains[std::string(rest.substr(0, dot))];
        auto const field = rest.substr(dot + 1);
        if (field == "compile")
            tc.compile_template = value;
        else if (field == "run")
            tc.run_template = value;
        else if (field == "source")
            tc.source_name = value;
        else if (field == "version")
            tc.version = value;
        else
            throw Error(ErrorKind::config, "unknown toolchain field: " + std::string(key));
        return;
    }
    if (key.starts_with("ingest.field."))
    {
        auto* field = mappingField(config.mapping, key.substr(13));
        if (!field)
            throw Error(ErrorKind::config, "unknown ingest field: " + std::string(key));
        *field = value;
        return;
    }
    for (auto const& k: keys())
        if (k.name == key)
        {
            k.set(config, value, base_dir);
            return;
        }
    throw Error(ErrorKind::config, "unknown configuration key: " + std::string(key));
}

auto load_config(fs::path const& path) -> Config
{
    auto text = std::string {};
    try
    {
        text = read_file(path);
    }
    catch (std::exception const& e)
    {
        throw Error(ErrorKind::io, "cannot read config " + path.string() + ": " + e.what());
    }

    auto config = Config {};
    auto const base = fs::absolute(path).parent_path();
    auto lineNo = 0;
    for (auto line: split_lines(text))
    {
        ++lineNo;
        line = trim(line);
        if (line.empty() || line.front() == '#')
            continue;
        auto const eq = line.find('=');
        if (eq == std::string_view::npos)
            throw Error(ErrorKind::config, path.string() + ":" + std::to_string(lineNo) + ": expected key = value");
        try
        {
            apply_setting(config, trim(line.substr(0, eq)), line.substr(eq + 1), base);
        }
        catch (Error const& e)
        {
            throw Error(ErrorKind::config, path.string() + ":" + std::to_string(lineNo) + ": " + e.what());
        }
    }
    return config;
}

auto describe_config(Config const& config) -> std::string
{
    auto out = std::string {};
    for (auto const& [lang, tc]: config.toolchains)
    {
        out += "toolchain." + lang + ".source = " + tc.source_name + "\n";
        out += "toolchain." + lang + ".compile = " + tc.compile_template + "\n";
        out += "toolchain." + lang + ".run = " + tc.run_template + "\n";
        out += "toolchain." + lang + ".version = " + tc.version + "\n";
    }
    for (auto const& k: keys())
        out += k.name + " = " + k.get(config) + "\n";
    auto mapping = config.mapping;
    for (auto const* name: mappingNames)
        out += std::string("ingest.field.") + name + " = " + *mappingField(mapping, name) + "\n";
    return out;
}

auto make_sandbox(Config const& config) -> std::unique_ptr<sandbox::Sandbox>
{
    if (config.sandbox_backend == "remote")
    {
        if (config.remote.endpoint.empty())
            throw Error(ErrorKind::config, "sandbox.endpoint is required for the remote backend");
        return std::make_unique<sandbox::RemoteSandbox>(config.remote);
    }
    auto options = sandbox::LocalSandboxOptions {};
    options.toolchains = config.toolchains;
    options.work_dir = config.work_dir;
    options.assets_dir = config.assets_dir.empty() ? default_assets_dir() : config.assets_dir;
    return std::make_unique<sandbox::LocalSandbox>(std::move(options));
}

auto make_provider(Config const& config) -> std::unique_ptr<llm::Provider>
{
    switch (config.provider_kind)
    {
        case ProviderKind::replay:
            if (config.replay_dir.empty())
                throw Error(ErrorKind::config, "provider.replay_dir is required for the replay provider");
            return std::make_unique<llm::ReplayProvider>(config.replay_dir);
        case ProviderKind::scripted:
            if (config.script_path.empty())
                throw Error(ErrorKind::config, "provider.script is required for the scripted provider");
            return llm::ScriptedProvider::from_file(config.script_path);
        case ProviderKind::chat: break;
    }
    return std::make_unique<llm::ChatCompletionsProvider>(config.provider);
}

auto with_limits(Problem problem, Config const& config) -> Problem
{
    if (config.time_limit_ms)
        problem.time_limit_ms = *config.time_limit_ms;
    if (config.memory_limit_mb)
        problem.memory_limit_mb = *config.memory_limit_mb;
    return problem;
}

} // namespace tcforge::io
