// SPDX-License-Identifier: Apache-2.0
#include <tcforge/argv.hpp>
#include <tcforge/errors.hpp>

#include <cctype>

namespace tcforge
{

namespace
{

// No shell ever sees these strings, so only operators that would change the meaning
// of the command (redirection, pipes, sequencing, substitution) are refused.
constexpr std::string_view forbidden = "<>|;&$`";

} // namespace

auto split_command(std::string_view command) -> std::vector<std::string>
{
    auto words = std::vector<std::string> {};
    auto current = std::string {};
    auto inWord = false;

    for (auto i = std::size_t { 0 }; i < command.size(); ++i)
    {
        auto const c = command[i];
        if (std::isspace(static_cast<unsigned char>(c)))
        {
            if (inWord)
                words.push_back(std::move(current));
            current.clear();
            inWord = false;
            continue;
        }

        inWord = true;
        if (c == '\\')
        {
            if (i + 1 >= command.size())
                throw Error(ErrorKind::usage, "dangling backslash in command");
            current.push_back(command[++i]);
        }
        else if (c == '\'')
        {
            auto const end = command.find('\'', i + 1);
            if (end == std::string_view::npos)
                throw Error(ErrorKind::usage, "unterminated single quote in command");
            current.append(command.substr(i + 1, end - i - 1));
            i = end;
        }
        else if (c == '"')
        {
            auto j = i + 1;
            for (; j < command.size() && command[j] != '"'; ++j)
            {
                if (command[j] == '\\' && j + 1 < command.size()
                    && (command[j + 1] == '"' || command[j + 1] == '\\'))
                    ++j;
                else if (command[j] == '$' || command[j] == '`')
                    throw Error(ErrorKind::usage, "substitution is not supported in commands");
                current.push_back(command[j]);
            }
            if (j >= command.size())
                throw Error(ErrorKind::usage, "unterminated double quote in command");
            i = j;
        }
        else if (forbidden.find(c) != std::string_view::npos)
        {
            throw Error(ErrorKind::usage, std::string("unsupported shell syntax '") + c + "' in command");
        }
        else
        {
            current.push_back(c);
        }
    }
    if (inWord)
        words.push_back(std::move(current));
    return words;
}

auto quote_word(std::string_view word) -> std::string
{
    auto plain = !word.empty();
    for (auto c: word)
        if (std::isspace(static_cast<unsigned char>(c)) || c == '\'' || c == '"' || c == '\\'
            || forbidden.find(c) != std::string_view::npos)
            plain = false;
    if (plain)
        return std::string(word);

    auto out = std::string("'");
    for (auto c: word)
    {
        if (c == '\'')
            out += "'\\''";
        else
            out.push_back(c);
    }
    out.push_back('\'');
    return out;
}

} // namespace tcforge
