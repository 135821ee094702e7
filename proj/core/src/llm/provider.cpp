// SPDX-License-Identifier: Apache-2.0
#include <tcforge/errors.hpp>
#include <tcforge/llm/provider.hpp>
#include <tcforge/temp_dir.hpp>
#include <tcforge/text.hpp>

#include <httplib.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <fstream>
#include <thread>

namespace tcforge::llm
{

namespace
{

// One process-wide limiter: requests are spaced at least 60/rpm seconds apart.
class RateLimiter
{
  public:
    void acquire(double requestsPerMinute)
    {
        if (requestsPerMinute <= 0)
            return;
        auto const spacing = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
            std::chrono::duration<double>(60.0 / requestsPerMinute));
        auto slot = std::chrono::steady_clock::time_point {};
        {
            auto lock = std::lock_guard(_mutex);
            auto const now = std::chrono::steady_clock::now();
            slot = std::max(now, _next);
            _next = slot + spacing;
        }
        std::this_thread::sleep_until(slot);
    }

  private:
    std::mutex _mutex;
    std::chrono::steady_clock::time_point _next {};
};

auto limiter() -> RateLimiter&
{
    static auto instance = RateLimiter {};
    return instance;
}

auto splitUrl(std::string const& url) -> std::pair<std::string, std::string>
{
    auto const scheme = url.find("://");
    if (scheme == std::string::npos)
        throw Error(ErrorKind::config, "provider endpoint must be an absolute URL: " + url);
    auto const slash = url.find('/', scheme + 3);
    if (slash == std::string::npos)
        return { url, "/" };
    return { url.substr(0, slash), url.substr(slash) };
}

auto textOf(Json const& response) -> std::string
{
    return response.is_string() ? response.get<std::string>() : response.dump(2);
}

} // namespace

auto conversation_to_json(Conversation const& conversation) -> Json
{
    auto j = Json::array();
    for (auto const& m: conversation)
        j.push_back({ { "role", m.role }, { "content", sanitize_utf8(m.content) } });
    return j;
}

auto conversation_from_json(Json const& j) -> Conversation
{
    auto conversation = Conversation {};
    for (auto const& m: j)
        conversation.push_back({ m.at("role").get<std::string>(), m.at("content").get<std::string>() });
    return conversation;
}

auto render_conversation(Conversation const& conversation) -> std::string
{
    auto out = std::string {};
    for (auto const& m: conversation)
    {
        out += "<|" + m.role + "|>\n";
        out += m.content;
        out += "\n";
    }
    return out;
}

auto conversation_hash(Conversation const& conversation) -> std::string
{
    return sha256_hex(render_conversation(conversation));
}

ChatCompletionsProvider::ChatCompletionsProvider(ProviderConfig config): _config(std::move(config))
{
    if (_config.endpoint.empty())
        throw Error(ErrorKind::config, "provider.endpoint is not set");
    (void) splitUrl(_config.endpoint);
}

auto ChatCompletionsProvider::complete(Conversation const& conversation) -> std::string
{
    count_call();
    auto const [base, path] = splitUrl(_config.endpoint);

    auto body = Json::object();
    body["model"] = _config.model;
    body["messages"] = conversation_to_json(conversation);
    body["temperature"] = _config.temperature;

    auto headers = httplib::Headers {};
    if (char const* token = std::getenv(_config.token_env.c_str()); token && *token)
        headers.emplace("Authorization", std::string("Bearer ") + token);

    auto lastError = std::string {};
    for (auto attempt = 0; attempt <= _config.transport_retries; ++attempt)
    {
        if (attempt > 0)
            std::this_thread::sleep_for(std::chrono::milliseconds(500) * (1 << std::min(attempt - 1, 6)));
        limiter().acquire(_config.requests_per_minute);

        auto client = httplib::Client(base);
        client.set_connection_timeout(std::chrono::seconds(30));
        client.set_read_timeout(std::chrono::milliseconds(_config.timeout_ms));
        auto const response = client.Post(path, headers, body.dump(), "application/json");
        if (!response)
        {
            lastError = "provider unreachable: " + httplib::to_string(response.error());
            spdlog::warn("{} (attempt {})", lastError, attempt + 1);
            continue;
        }
        if (response->status == 429 || response->status >= 500)
        {
            lastError = "provider returned HTTP " + std::to_string(response->status);
            spdlog::warn("{} (attempt {})", lastError, attempt + 1);
            continue;
        }
        if (response->status != 200)
            throw Error(ErrorKind::transport,
                        "provider returned HTTP " + std::to_string(response->status) + ": " + response->body);

        try
        {
            auto const reply = Json::parse(response->body);
            auto const& content = reply.at("choices").at(0).at("message").at("content");
            return content.is_string() ? content.get<std::string>() : std::string {};
        }
        catch (Json::exception const& e)
        {
            throw Error(ErrorKind::transport, std::string("unexpected provider response: ") + e.what());
        }
    }
    throw Error(ErrorKind::transport, lastError);
}

ReplayProvider::ReplayProvider(std::filesystem::path dir): _dir(std::move(dir))
{
    if (!std::filesystem::is_directory(_dir))
        throw Error(ErrorKind::config, "replay directory does not exist: " + _dir.string());
}

auto ReplayProvider::complete(Conversation const& conversation) -> std::string
{
    count_call();
    auto const key = conversation_hash(conversation);
    auto const path = _dir / (key + ".json");
    if (!std::filesystem::exists(path))
        throw Error(ErrorKind::transport, "no recorded response for conversation " + key);
    try
    {
        return textOf(Json::parse(read_file(path)).at("response"));
    }
    catch (Json::exception const& e)
    {
        throw Error(ErrorKind::io, "malformed replay fixture " + path.string() + ": " + e.what());
    }
}

RecordingProvider::RecordingProvider(Provider& inner, std::filesystem::path dir): _inner(inner), _dir(std::move(dir))
{
    std::filesystem::create_directories(_dir);
}

auto RecordingProvider::complete(Conversation const& conversation) -> std::string
{
    count_call();
    auto response = _inner.complete(conversation);
    auto record = Json::object();
    record["response"] = response;
    record["conversation"] = conversation_to_json(conversation);
    auto lock = std::lock_guard(_mutex);
    write_file_atomic(_dir / (conversation_hash(conversation) + ".json"), record.dump(2) + "\n");
    return response;
}

ScriptedProvider::ScriptedProvider(std::vector<Rule> rules): _rules(std::move(rules)) {}

auto ScriptedProvider::from_json(Json const& j) -> std::unique_ptr<ScriptedProvider>
{
    auto rules = std::vector<Rule> {};
    try
    {
        for (auto const& script: j.at("scripts"))
        {
            auto rule = Rule {};
            auto const& match = script.at("match");
            if (match.is_string())
                rule.match.push_back(match.get<std::string>());
            else
                for (auto const& m: match)
                    rule.match.push_back(m.get<std::string>());
            for (auto const& r: script.at("responses"))
                rule.responses.push_back(textOf(r));
            rules.push_back(std::move(rule));
        }
    }
    catch (Json::exception const& e)
    {
        throw Error(ErrorKind::config, std::string("malformed script: ") + e.what());
    }
    return std::make_unique<ScriptedProvider>(std::move(rules));
}

auto ScriptedProvider::from_file(std::filesystem::path const& path) -> std::unique_ptr<ScriptedProvider>
{
    auto text = std::string {};
    try
    {
        text = read_file(path);
    }
    catch (std::exception const& e)
    {
        throw Error(ErrorKind::io, "cannot read script " + path.string() + ": " + e.what());
    }
    try
    {
        return from_json(Json::parse(text));
    }
    catch (Json::exception const& e)
    {
        throw Error(ErrorKind::config, "script " + path.string() + " is not valid JSON: " + e.what());
    }
}

void ScriptedProvider::add_rule(Rule rule)
{
    auto lock = std::lock_guard(_mutex);
    _rules.push_back(std::move(rule));
}

auto ScriptedProvider::complete(Conversation const& conversation) -> std::string
{
    count_call();
    auto const text = render_conversation(conversation);
    auto lock = std::lock_guard(_mutex);
    for (auto& rule: _rules)
    {
        if (rule.responses.empty())
            continue;
        auto const matches = std::all_of(rule.match.begin(), rule.match.end(),
                                         [&](std::string const& m) { return text.find(m) != std::string::npos; });
        if (!matches)
            continue;
        auto response = std::move(rule.responses.front());
        rule.responses.pop_front();
        return response;
    }
    throw Error(ErrorKind::transport, "scripted provider has no response left for this conversation");
}

} // namespace tcforge::llm
