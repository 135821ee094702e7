// SPDX-License-Identifier: Apache-2.0
#include <tcforge/errors.hpp>
#include <tcforge/genkit.hpp>
#include <tcforge/llm/gateway.hpp>
#include <tcforge/patch.hpp>
#include <tcforge/text.hpp>

namespace tcforge::llm
{

namespace
{

auto tryParse(std::string_view text) -> std::optional<Json>
{
    auto j = Json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.is_object())
        return std::nullopt;
    return j;
}

auto stringList(Json const& object, std::string_view key, bool required) -> std::vector<std::string>
{
    auto const it = object.find(std::string(key));
    if (it == object.end() || it->is_null())
    {
        if (required)
            throw Error(ErrorKind::schema_violation, "missing field \"" + std::string(key) + "\"");
        return {};
    }
    if (!it->is_array())
        throw Error(ErrorKind::schema_violation, "field \"" + std::string(key) + "\" must be a list");
    auto out = std::vector<std::string> {};
    for (auto const& item: *it)
    {
        if (!item.is_string())
            throw Error(ErrorKind::schema_violation, "field \"" + std::string(key) + "\" must contain only strings");
        out.push_back(item.get<std::string>());
    }
    return out;
}

void checkBlocks(std::vector<std::string> const& blocks)
{
    for (auto i = std::size_t { 0 }; i < blocks.size(); ++i)
    {
        try
        {
            (void) genkit::parse_block(blocks[i]);
        }
        catch (Error const& e)
        {
            throw Error(ErrorKind::schema_violation, "block " + std::to_string(i) + ": " + e.what());
        }
    }
}

void checkCommands(std::vector<std::string> const& commands, std::string_view key)
{
    for (auto const& c: commands)
        if (!genkit::is_generator_command(c))
            throw Error(ErrorKind::schema_violation, "entry of \"" + std::string(key)
                                                         + "\" is not a valid ./gen command: " + c);
}

auto conversationTokens(Conversation const& history, std::string const& prompt) -> std::size_t
{
    auto total = estimate_tokens(prompt);
    for (auto const& m: history)
        total += estimate_tokens(m.content);
    return total;
}

} // namespace

auto extract_json(std::string_view raw) -> Json
{
    if (auto j = tryParse(trim(raw)))
        return *j;

    if (auto const fence = raw.find("```"); fence != std::string_view::npos)
    {
        auto const bodyStart = raw.find('\n', fence);
        auto const close = bodyStart == std::string_view::npos ? bodyStart : raw.find("```", bodyStart);
        if (close != std::string_view::npos)
            if (auto j = tryParse(raw.substr(bodyStart + 1, close - bodyStart - 1)))
                return *j;
    }

    auto const open = raw.find('{');
    auto const close = raw.rfind('}');
    if (open != std::string_view::npos && close != std::string_view::npos && open < close)
        if (auto j = tryParse(raw.substr(open, close - open + 1)))
            return *j;

    throw Error(ErrorKind::schema_violation, "reply does not contain a JSON object");
}

auto parse_response(std::string_view raw, Schema schema, Role role) -> Response
{
    auto const j = extract_json(raw);
    auto const key = blocks_key(role);
    auto const isGenerator = role == Role::generator;

    if (schema == Schema::generation)
    {
        auto r = GenerationResponse {};
        if (auto const it = j.find("input_constraints_summary"); it != j.end() && !it->is_null())
        {
            if (!it->is_string())
                throw Error(ErrorKind::schema_violation, "field \"input_constraints_summary\" must be a string");
            r.input_constraints_summary = it->get<std::string>();
        }
        else if (isGenerator)
            throw Error(ErrorKind::schema_violation, "missing field \"input_constraints_summary\"");
        r.blocks = stringList(j, key, false);
        r.command_list = stringList(j, "command_list", isGenerator);
        checkBlocks(r.blocks);
        if (isGenerator)
            checkCommands(r.command_list, "command_list");
        return r;
    }

    auto r = RefinementResponse {};
    r.blocks = stringList(j, key, false);
    r.replace_command_list = stringList(j, "replace_command_list", isGenerator);
    r.add_command_list = stringList(j, "add_command_list", isGenerator);
    checkBlocks(r.blocks);
    if (isGenerator)
        checkCommands(r.add_command_list, "add_command_list");
    return r;
}

Gateway::Gateway(Provider& provider, GatewayOptions options): _provider(provider), _options(options)
{
    if (_options.max_attempts < 1)
        throw Error(ErrorKind::config, "max attempts must be at least 1");
}

auto Gateway::call(Conversation const& history, std::string const& prompt, Schema schema, Role role) -> CallResult
{
    auto problem = std::string {};
    auto raw = std::string {};
    for (auto attempt = 1; attempt <= _options.max_attempts; ++attempt)
    {
        auto text = prompt;
        if (attempt > 1)
            text += "\n\nYour previous reply could not be used (" + problem
                    + "). Reply again with only the JSON object in exactly the required format.";

        if (_options.token_budget != 0)
            if (auto const tokens = conversationTokens(history, text); tokens > _options.token_budget)
                throw Error(ErrorKind::token_budget, "request needs about " + std::to_string(tokens)
                                                         + " tokens, budget is "
                                                         + std::to_string(_options.token_budget));

        auto conversation = history;
        conversation.push_back({ "user", std::move(text) });
        raw = _provider.complete(conversation);
        try
        {
            return CallResult { parse_response(raw, schema, role), attempt, raw };
        }
        catch (Error const& e)
        {
            if (e.kind() != ErrorKind::schema_violation)
                throw;
            problem = e.what();
        }
    }
    throw Error(ErrorKind::schema_violation, "no usable reply after " + std::to_string(_options.max_attempts)
                                                 + " attempts (" + problem + "); last reply:\n" + raw);
}

auto turn_count(Conversation const& history) -> std::size_t
{
    return static_cast<std::size_t>(
        std::count_if(history.begin(), history.end(), [](Message const& m) { return m.role == "assistant"; }));
}

auto compress_context(Conversation const& history, Problem const& problem, IterationState const& latest, Role role)
    -> Conversation
{
    if (turn_count(history) <= 1)
        return history;

    auto const& artifact = role == Role::generator ? latest.generator_source : latest.checker_source.value_or("");
    auto reply = Json::object();
    if (role == Role::generator)
        reply["input_constraints_summary"] = latest.constraints_summary;
    reply[std::string(blocks_key(role))] = Json::array();
    auto commands = Json::array();
    if (role == Role::generator)
        for (auto const& c: latest.commands)
            commands.push_back(sanitize_utf8(c));
    reply["command_list"] = commands;

    auto compressed = Conversation {};
    for (auto const& m: history)
        if (m.role == "system")
            compressed.push_back(m);
    compressed.push_back({ "user", build_initial_prompt(problem, artifact, role) });
    compressed.push_back({ "assistant", reply.dump(4) });
    return compressed;
}

} // namespace tcforge::llm
