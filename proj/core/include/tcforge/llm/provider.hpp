// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <tcforge/model.hpp>

#include <atomic>
#include <chrono>
#include <deque>
#include <filesystem>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

namespace tcforge::llm
{

struct Message
{
    std::string role; // "system", "user" or "assistant"
    std::string content;
    friend auto operator==(Message const&, Message const&) -> bool = default;
};

using Conversation = std::vector<Message>;

[[nodiscard]] auto conversation_to_json(Conversation const& conversation) -> Json;
[[nodiscard]] auto conversation_from_json(Json const& j) -> Conversation;

/// Stable text form of a conversation; replay fixtures are keyed by its sha256.
[[nodiscard]] auto render_conversation(Conversation const& conversation) -> std::string;
[[nodiscard]] auto conversation_hash(Conversation const& conversation) -> std::string;

/// Produces the assistant reply for a conversation. Implementations must be safe to call
/// concurrently. Transport-level failures throw Error(ErrorKind::transport).
class Provider
{
  public:
    virtual ~Provider() = default;
    virtual auto complete(Conversation const& conversation) -> std::string = 0;
    [[nodiscard]] auto calls() const noexcept -> std::size_t { return _calls.load(); }

  protected:
    void count_call() noexcept { ++_calls; }

  private:
    std::atomic<std::size_t> _calls { 0 };
};

struct ProviderConfig
{
    /// Full URL of a chat-completions endpoint, e.g. https://host/v1/chat/completions.
    std::string endpoint;
    std::string model;
    /// Environment variable holding the bearer token; the token itself is never configured.
    std::string token_env = "TCFORGE_LLM_TOKEN";
    int max_attempts = 3;
    std::size_t token_budget = 200'000;
    double temperature = 0.0;
    int transport_retries = 3;
    std::int64_t timeout_ms = 600'000;
    /// Shared across every provider in the process; 0 disables rate limiting.
    double requests_per_minute = 0;
};

class ChatCompletionsProvider final : public Provider
{
  public:
    explicit ChatCompletionsProvider(ProviderConfig config);
    auto complete(Conversation const& conversation) -> std::string override;

  private:
    ProviderConfig _config;
};

/// Answers from a directory of <conversation hash>.json files ({"response": "..."}).
class ReplayProvider final : public Provider
{
  public:
    explicit ReplayProvider(std::filesystem::path dir);
    auto complete(Conversation const& conversation) -> std::string override;

  private:
    std::filesystem::path _dir;
};

/// Forwards to another provider and writes each exchange as a replay fixture.
class RecordingProvider final : public Provider
{
  public:
    RecordingProvider(Provider& inner, std::filesystem::path dir);
    auto complete(Conversation const& conversation) -> std::string override;

  private:
    Provider& _inner;
    std::filesystem::path _dir;
    std::mutex _mutex;
};

/// Rule-driven canned replies for tests and demos. A rule fires when every one of its match
/// strings occurs in the rendered conversation; each firing consumes its next response. Rules
/// are tried in order and exhausted rules are skipped.
class ScriptedProvider final : public Provider
{
  public:
    struct Rule
    {
        std::vector<std::string> match;
        std::deque<std::string> responses;
    };

    ScriptedProvider() = default;
    explicit ScriptedProvider(std::vector<Rule> rules);

    /// {"scripts": [{"match": "text" | ["a", "b"], "responses": ["raw text" | {json}, ...]}]}
    [[nodiscard]] static auto from_json(Json const& j) -> std::unique_ptr<ScriptedProvider>;
    [[nodiscard]] static auto from_file(std::filesystem::path const& path) -> std::unique_ptr<ScriptedProvider>;

    void add_rule(Rule rule);
    auto complete(Conversation const& conversation) -> std::string override;

  private:
    std::vector<Rule> _rules;
    std::mutex _mutex;
};

} // namespace tcforge::llm
