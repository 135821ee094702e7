// SPDX-License-Identifier: Apache-2.0
#include <tcforge/errors.hpp>
#include <tcforge/patch.hpp>
#include <tcforge/text.hpp>

namespace tcforge::genkit
{

namespace
{

auto stripCr(std::string_view line) -> std::string_view
{
    if (!line.empty() && line.back() == '\r')
        line.remove_suffix(1);
    return line;
}

auto isMarker(std::string_view line, std::string_view marker) -> bool
{
    return trim(stripCr(line)) == marker;
}

auto joinLines(std::vector<std::string_view> const& lines, std::size_t begin, std::size_t end) -> std::string
{
    auto out = std::string {};
    for (auto i = begin; i < end; ++i)
    {
        if (i != begin)
            out.push_back('\n');
        out.append(lines[i]);
    }
    return out;
}

} // namespace

auto parse_block(std::string_view raw) -> PatchBlock
{
    auto const lines = split_lines(raw);

    auto searchAt = std::vector<std::size_t> {};
    auto dividerAt = std::vector<std::size_t> {};
    auto replaceAt = std::vector<std::size_t> {};
    for (auto i = std::size_t { 0 }; i < lines.size(); ++i)
    {
        if (isMarker(lines[i], search_marker))
            searchAt.push_back(i);
        else if (isMarker(lines[i], divider_marker))
            dividerAt.push_back(i);
        else if (isMarker(lines[i], replace_marker))
            replaceAt.push_back(i);
    }

    auto const expectOnce = [](std::vector<std::size_t> const& at, std::string_view marker) {
        if (at.empty())
            throw Error(ErrorKind::schema_violation, "missing marker \"" + std::string(marker) + "\"");
        if (at.size() > 1)
            throw Error(ErrorKind::schema_violation, "duplicated marker \"" + std::string(marker) + "\"");
    };
    expectOnce(searchAt, search_marker);
    expectOnce(dividerAt, divider_marker);
    expectOnce(replaceAt, replace_marker);

    auto const s = searchAt.front();
    auto const d = dividerAt.front();
    auto const r = replaceAt.front();
    if (!(s < d && d < r))
        throw Error(ErrorKind::schema_violation, "markers out of order");

    for (auto i = std::size_t { 0 }; i < s; ++i)
        if (!trim(lines[i]).empty())
            throw Error(ErrorKind::schema_violation, "text before the SEARCH marker");
    for (auto i = r + 1; i < lines.size(); ++i)
        if (!trim(lines[i]).empty())
            throw Error(ErrorKind::schema_violation, "text after the REPLACE marker");

    return PatchBlock { joinLines(lines, s + 1, d), joinLines(lines, d + 1, r) };
}

auto parse_blocks(std::span<std::string const> raw) -> ParsedBlocks
{
    auto parsed = ParsedBlocks {};
    for (auto i = std::size_t { 0 }; i < raw.size(); ++i)
    {
        try
        {
            parsed.blocks.push_back(parse_block(raw[i]));
            parsed.source_indices.push_back(i);
        }
        catch (Error const& e)
        {
            parsed.errors.push_back({ i, e.what() });
        }
    }
    return parsed;
}

auto format_block(PatchBlock const& block) -> std::string
{
    auto out = std::string(search_marker);
    out += '\n';
    if (!block.search.empty())
        out += block.search + '\n';
    out += divider_marker;
    out += '\n';
    if (!block.replace.empty())
        out += block.replace + '\n';
    out += replace_marker;
    return out;
}

auto count_occurrences(std::string_view haystack, std::string_view needle, std::size_t limit) -> std::size_t
{
    if (needle.empty())
        return std::min(haystack.size() + 1, limit);
    auto count = std::size_t { 0 };
    for (auto pos = haystack.find(needle); pos != std::string_view::npos && count < limit;
         pos = haystack.find(needle, pos + 1))
        ++count;
    return count;
}

auto apply_patches(std::string_view source, std::span<PatchBlock const> blocks) -> PatchOutcome
{
    auto outcome = PatchOutcome { std::string(source), {}, {} };
    for (auto i = std::size_t { 0 }; i < blocks.size(); ++i)
    {
        auto const& block = blocks[i];
        auto const n = count_occurrences(outcome.patched_source, block.search);
        if (n == 0)
        {
            outcome.skipped.push_back({ i, SkipReason::no_match });
            continue;
        }
        if (n > 1)
        {
            outcome.skipped.push_back({ i, SkipReason::ambiguous_match });
            continue;
        }
        auto const pos = outcome.patched_source.find(block.search);
        outcome.patched_source.replace(pos, block.search.size(), block.replace);
        outcome.applied.push_back(i);
    }
    return outcome;
}

auto to_string(SkipReason reason) -> std::string_view
{
    return reason == SkipReason::no_match ? "no_match" : "ambiguous_match";
}

} // namespace tcforge::genkit
