// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <tcforge/llm/prompts.hpp>
#include <tcforge/llm/provider.hpp>

#include <string>
#include <variant>
#include <vector>

namespace tcforge::llm
{

enum class Schema
{
    generation,
    refinement,
};

struct GenerationResponse
{
    std::string input_constraints_summary;
    std::vector<std::string> blocks;
    std::vector<std::string> command_list;
    friend auto operator==(GenerationResponse const&, GenerationResponse const&) -> bool = default;
};

struct RefinementResponse
{
    std::vector<std::string> blocks;
    std::vector<std::string> replace_command_list;
    std::vector<std::string> add_command_list;
    friend auto operator==(RefinementResponse const&, RefinementResponse const&) -> bool = default;
};

using Response = std::variant<GenerationResponse, RefinementResponse>;

/// The JSON object in a reply: the whole text, else a fenced block, else the outermost braces.
/// Throws Error(schema_violation) when none parses.
[[nodiscard]] auto extract_json(std::string_view raw) -> Json;

/// Parses and validates one reply. Every block must satisfy the patch grammar; for the
/// generator role every command must start with "./gen" (entries of replace_command_list are
/// only matched later, so they are not checked here). Throws Error(schema_violation).
[[nodiscard]] auto parse_response(std::string_view raw, Schema schema, Role role = Role::generator) -> Response;

struct GatewayOptions
{
    int max_attempts = 3;
    /// Estimated tokens allowed in one request (history plus prompt); 0 means unlimited.
    std::size_t token_budget = 200'000;
};

struct CallResult
{
    Response response;
    int attempts = 1;
    /// The accepted reply text, as it should be appended to the conversation.
    std::string raw;
};

class Gateway
{
  public:
    Gateway(Provider& provider, GatewayOptions options = {});

    /// Sends history + prompt. A reply that fails to parse is retried with a corrective note
    /// appended to the prompt, up to max_attempts in total; the last failure throws
    /// Error(schema_violation) carrying the raw text. Exceeding the token budget throws
    /// Error(token_budget) before anything is sent.
    auto call(Conversation const& history, std::string const& prompt, Schema schema, Role role = Role::generator)
        -> CallResult;

    [[nodiscard]] auto provider() -> Provider& { return _provider; }
    [[nodiscard]] auto options() const -> GatewayOptions const& { return _options; }

  private:
    Provider& _provider;
    GatewayOptions _options;
};

/// Number of user/assistant exchanges in a conversation.
[[nodiscard]] auto turn_count(Conversation const& history) -> std::size_t;

/// Collapses a multi-turn history into one exchange: the initial prompt built from the problem
/// statement and the latest artifact, answered by the latest command list. A history of at most
/// one turn is returned unchanged.
[[nodiscard]] auto compress_context(Conversation const& history, Problem const& problem,
                                    IterationState const& latest, Role role = Role::generator) -> Conversation;

} // namespace tcforge::llm
