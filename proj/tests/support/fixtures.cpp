// SPDX-License-Identifier: Apache-2.0
#include "fixtures.hpp"

#include <tcforge/patch.hpp>
#include <tcforge/temp_dir.hpp>

#include <algorithm>
#include <stdexcept>

namespace tcforge::test
{

auto fixtures_dir() -> fs::path
{
    return TCFORGE_TEST_FIXTURES;
}

auto assets_dir() -> fs::path
{
    return TCFORGE_TEST_ASSETS;
}

auto cache_dir() -> fs::path
{
    return TCFORGE_TEST_CACHE;
}

auto cli_path() -> fs::path
{
    return TCFORGE_TEST_CLI;
}

auto local_sandbox() -> std::unique_ptr<sandbox::LocalSandbox>
{
    auto options = sandbox::LocalSandboxOptions {};
    options.assets_dir = assets_dir();
    options.work_dir = cache_dir();
    fs::create_directories(options.work_dir);
    return std::make_unique<sandbox::LocalSandbox>(options);
}

auto read_text(fs::path const& path) -> std::string
{
    return read_file(path);
}

auto cpp(std::string source, SolutionLabel label) -> Solution
{
    auto s = Solution {};
    s.source = std::move(source);
    s.language = Language { LanguageKind::cpp, {} };
    s.label = label;
    return s;
}

auto fixture_names() -> std::vector<std::string>
{
    return { "sum", "parity", "anypair" };
}

auto problem_dir(std::string const& name) -> fs::path
{
    return fixtures_dir() / "problems" / name;
}

namespace
{

auto languageOf(fs::path const& file) -> Language
{
    if (file.extension() == ".py")
        return Language { LanguageKind::python, {} };
    return Language { LanguageKind::cpp, {} };
}

auto solutionsIn(fs::path const& dir, SolutionLabel label) -> std::vector<Solution>
{
    auto files = std::vector<fs::path> {};
    if (fs::is_directory(dir))
        for (auto const& e: fs::directory_iterator(dir))
            files.push_back(e.path());
    std::sort(files.begin(), files.end());
    auto out = std::vector<Solution> {};
    for (auto const& f: files)
    {
        auto s = Solution { read_text(f), languageOf(f), label, true };
        out.push_back(std::move(s));
    }
    return out;
}

void expand(Json& j, fs::path const& dir)
{
    if (j.is_string())
    {
        auto const text = j.get<std::string>();
        if (text.rfind("@bootstrap:", 0) == 0)
            j = genkit::format_block({ "", read_text(dir / text.substr(11)) });
        else if (text.rfind("@file:", 0) == 0)
            j = read_text(dir / text.substr(6));
        return;
    }
    if (j.is_structured())
        for (auto& item: j)
            expand(item, dir);
}

} // namespace

auto load_problem(std::string const& name) -> Problem
{
    auto const dir = problem_dir(name);
    auto const meta = Json::parse(read_text(dir / "problem.json"));

    auto p = Problem {};
    p.id = meta.at("id").get<std::string>();
    p.statement = read_text(dir / "statement.md");
    p.time_limit_ms = meta.value("time_limit_ms", std::int64_t { 2000 });
    p.memory_limit_mb = meta.value("memory_limit_mb", std::int64_t { 256 });
    p.tags = meta.value("tags", std::vector<std::string> {});
    if (meta.contains("difficulty"))
        p.difficulty = meta.at("difficulty").get<int>();

    auto reference = Solution { read_text(dir / "reference.cpp"), Language { LanguageKind::cpp, {} },
                                SolutionLabel::reference, true };
    p.reference_solution = reference;
    auto correct = reference;
    correct.label = SolutionLabel::correct;
    p.correct_pool.push_back(correct);
    for (auto& s: solutionsIn(dir / "correct", SolutionLabel::correct))
        p.correct_pool.push_back(std::move(s));
    p.incorrect_pool = solutionsIn(dir / "incorrect", SolutionLabel::incorrect);

    for (auto i = 1; fs::exists(dir / "public" / (std::to_string(i) + ".in")); ++i)
    {
        auto tc = TestCase {};
        tc.input = read_text(dir / "public" / (std::to_string(i) + ".in"));
        tc.expected_output = read_text(dir / "public" / (std::to_string(i) + ".out"));
        tc.provenance.origin = CaseOrigin::public_test;
        p.public_tests.push_back(std::move(tc));
    }
    return p;
}

auto checker_source(std::string const& name) -> std::string
{
    return read_text(problem_dir(name) / "checker.cpp");
}

auto fixture_script(std::vector<std::string> const& names) -> Json
{
    auto scripts = Json::array();
    for (auto const& name: names)
    {
        auto j = Json::parse(read_text(problem_dir(name) / "script.json"));
        expand(j, problem_dir(name));
        for (auto& rule: j.at("scripts"))
            scripts.push_back(std::move(rule));
    }
    return Json { { "scripts", scripts } };
}

auto scripted_provider(std::vector<std::string> const& names) -> std::unique_ptr<llm::ScriptedProvider>
{
    return llm::ScriptedProvider::from_json(fixture_script(names));
}

} // namespace tcforge::test
