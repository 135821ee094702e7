// SPDX-License-Identifier: Apache-2.0
#include <tcforge/errors.hpp>
#include <tcforge/text.hpp>

#include <openssl/evp.h>
#include <openssl/sha.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdint>

namespace tcforge
{

auto sha256_hex(std::string_view data) -> std::string
{
    auto digest = std::array<unsigned char, SHA256_DIGEST_LENGTH> {};
    SHA256(reinterpret_cast<unsigned char const*>(data.data()), data.size(), digest.data());

    static constexpr char hex[] = "0123456789abcdef";
    auto out = std::string {};
    out.reserve(digest.size() * 2);
    for (auto b: digest)
    {
        out.push_back(hex[b >> 4]);
        out.push_back(hex[b & 0xF]);
    }
    return out;
}

auto base64_encode(std::string_view data) -> std::string
{
    auto out = std::string(4 * ((data.size() + 2) / 3), '\0');
    auto const n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                   reinterpret_cast<unsigned char const*>(data.data()),
                                   static_cast<int>(data.size()));
    out.resize(static_cast<std::size_t>(n));
    return out;
}

auto base64_decode(std::string_view text) -> std::string
{
    if (text.size() % 4 != 0)
        throw Error(ErrorKind::io, "base64 length not a multiple of 4");
    auto out = std::string(3 * (text.size() / 4), '\0');
    auto const n = EVP_DecodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                   reinterpret_cast<unsigned char const*>(text.data()),
                                   static_cast<int>(text.size()));
    if (n < 0)
        throw Error(ErrorKind::io, "invalid base64 payload");
    // EVP_DecodeBlock keeps the zero bytes produced by '=' padding.
    auto padding = std::size_t { 0 };
    if (!text.empty() && text.back() == '=')
        ++padding;
    if (text.size() >= 2 && text[text.size() - 2] == '=')
        ++padding;
    out.resize(static_cast<std::size_t>(n) - padding);
    return out;
}

namespace
{

// Length of the valid UTF-8 sequence starting at data[i], or 0 if invalid.
auto utf8SequenceLength(std::string_view data, std::size_t i) -> std::size_t
{
    auto const c = static_cast<unsigned char>(data[i]);
    if (c < 0x80)
        return 1;

    auto len = std::size_t { 0 };
    auto codepoint = std::uint32_t { 0 };
    if ((c & 0xE0) == 0xC0)
    {
        len = 2;
        codepoint = c & 0x1F;
    }
    else if ((c & 0xF0) == 0xE0)
    {
        len = 3;
        codepoint = c & 0x0F;
    }
    else if ((c & 0xF8) == 0xF0)
    {
        len = 4;
        codepoint = c & 0x07;
    }
    else
        return 0;

    if (i + len > data.size())
        return 0;
    for (auto k = std::size_t { 1 }; k < len; ++k)
    {
        auto const cc = static_cast<unsigned char>(data[i + k]);
        if ((cc & 0xC0) != 0x80)
            return 0;
        codepoint = (codepoint << 6) | (cc & 0x3F);
    }

    // Overlong encodings, surrogates, out of range.
    if ((len == 2 && codepoint < 0x80) || (len == 3 && codepoint < 0x800) || (len == 4 && codepoint < 0x10000))
        return 0;
    if (codepoint >= 0xD800 && codepoint <= 0xDFFF)
        return 0;
    if (codepoint > 0x10FFFF)
        return 0;
    return len;
}

} // namespace

auto is_valid_utf8(std::string_view data) -> bool
{
    for (auto i = std::size_t { 0 }; i < data.size();)
    {
        auto const len = utf8SequenceLength(data, i);
        if (len == 0)
            return false;
        i += len;
    }
    return true;
}

auto sanitize_utf8(std::string_view data) -> std::string
{
    auto out = std::string {};
    out.reserve(data.size());
    for (auto i = std::size_t { 0 }; i < data.size();)
    {
        auto const len = utf8SequenceLength(data, i);
        if (len == 0)
        {
            out += "\xEF\xBF\xBD";
            ++i;
        }
        else
        {
            out.append(data.substr(i, len));
            i += len;
        }
    }
    return out;
}

auto trim(std::string_view text) -> std::string_view
{
    auto const isSpace = [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; };
    while (!text.empty() && isSpace(text.front()))
        text.remove_prefix(1);
    while (!text.empty() && isSpace(text.back()))
        text.remove_suffix(1);
    return text;
}

auto collapse_whitespace(std::string_view text) -> std::string
{
    auto out = std::string {};
    auto pendingSpace = false;
    for (auto c: trim(text))
    {
        if (std::isspace(static_cast<unsigned char>(c)))
        {
            pendingSpace = true;
            continue;
        }
        if (pendingSpace)
            out.push_back(' ');
        pendingSpace = false;
        out.push_back(c);
    }
    return out;
}

auto split_lines(std::string_view text) -> std::vector<std::string_view>
{
    auto lines = std::vector<std::string_view> {};
    auto start = std::size_t { 0 };
    while (start <= text.size())
    {
        auto const end = text.find('\n', start);
        if (end == std::string_view::npos)
        {
            lines.push_back(text.substr(start));
            break;
        }
        lines.push_back(text.substr(start, end - start));
        start = end + 1;
    }
    return lines;
}

auto to_lower(std::string_view text) -> std::string
{
    auto out = std::string(text);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

auto estimate_tokens(std::string_view text) -> std::size_t
{
    return (text.size() + 3) / 4;
}

auto replace_all(std::string text, std::string_view from, std::string_view to) -> std::string
{
    if (from.empty())
        return text;
    for (auto pos = text.find(from); pos != std::string::npos; pos = text.find(from, pos + to.size()))
        text.replace(pos, from.size(), to);
    return text;
}

} // namespace tcforge
