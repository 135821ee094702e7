// SPDX-License-Identifier: Apache-2.0
#include "fixtures.hpp"

#include <tcforge/argv.hpp>
#include <tcforge/temp_dir.hpp>
#include <tcforge/text.hpp>

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>

using namespace tcforge;
namespace tt = tcforge::test;
namespace fs = std::filesystem;

namespace
{

struct Invocation
{
    int status = -1;
    std::string output;
};

// Everything the binary needs lives in one scratch directory: config, script and outputs.
class CliTest: public ::testing::Test
{
  protected:
    void SetUp() override
    {
        if (tt::cli_path().empty())
            GTEST_SKIP() << "command-line tool not built";
        write_file(_dir.path() / "script.json", tt::fixture_script(tt::fixture_names()).dump(2));
        write_file(_dir.path() / "tcforge.conf", "provider.kind = scripted\n"
                                                 "provider.script = script.json\n"
                                                 "assets.dir = " + tt::assets_dir().string() + "\n"
                                                 "sandbox.work_dir = " + tt::cache_dir().string() + "\n");
    }

    auto tcforge(std::string const& args) -> Invocation
    {
        auto const log = _dir.path() / "cli.log";
        auto const command = quote_word(tt::cli_path().string()) + " " + args + " > " + quote_word(log.string()) + " 2>&1";
        auto const raw = std::system(command.c_str());
        auto out = Invocation {};
        out.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
        out.output = read_file(log);
        return out;
    }

    [[nodiscard]] auto path(std::string const& name) const -> std::string
    {
        return quote_word((_dir.path() / name).string());
    }

    [[nodiscard]] auto config() const -> std::string
    {
        return "-q -c " + path("tcforge.conf");
    }

    [[nodiscard]] auto dataset() const -> std::string
    {
        return quote_word((tt::fixtures_dir() / "datasets" / "fixtures.codecontests.jsonl").string());
    }

    TempDir _dir { fs::temp_directory_path(), "tcforge-cli-" };
};

auto records(fs::path const& file) -> std::vector<Json>
{
    auto out = std::vector<Json> {};
    for (auto line: split_lines(read_file(file)))
        if (!trim(line).empty())
            out.push_back(Json::parse(line));
    return out;
}

} // namespace

TEST_F(CliTest, GenerationOnlyRunKeepsIterationZero)
{
    auto const r = tcforge(config() + " --n-max 0 run -i " + dataset() + " -o " + path("out"));
    ASSERT_EQ(r.status, 0) << r.output;
    auto const rows = records(_dir.path() / "out" / "dataset.jsonl");
    ASSERT_EQ(rows.size(), 3u);
    for (auto const& row: rows)
    {
        EXPECT_EQ(row["status"], "ok") << row["name"];
        EXPECT_EQ(row["trace_summary"]["iterations"].size(), 1u);
        EXPECT_FALSE(row["suite"].empty());
    }
    EXPECT_TRUE(fs::exists(_dir.path() / "out" / "summary.json"));
}

TEST_F(CliTest, EvaluateThenParetoCsv)
{
    ASSERT_EQ(tcforge(config() + " run -i " + dataset() + " -o " + path("out")).status, 0);
    auto const eval = tcforge(config() + " evaluate -i " + path("out/dataset.jsonl") + " -o " + path("eval.json"));
    ASSERT_EQ(eval.status, 0) << eval.output;
    EXPECT_NE(eval.output.find("%"), std::string::npos);

    auto const pareto = tcforge(config() + " pareto -i " + path("eval.json") + " --label fixtures -o " + path("f.csv"));
    ASSERT_EQ(pareto.status, 0) << pareto.output;
    auto const csv = read_file(_dir.path() / "f.csv");
    EXPECT_TRUE(csv.starts_with("# rank_key=tnr_first\nlabel,k,tpr,tnr\nfixtures,")) << csv;

    auto const report = tcforge(config() + " report -o " + path("out"));
    ASSERT_EQ(report.status, 0) << report.output;
    EXPECT_NE(report.output.find("iteration,mean_tpr,mean_tnr,problems"), std::string::npos);
}

TEST_F(CliTest, ResumeMakesNoModelCalls)
{
    ASSERT_EQ(tcforge(config() + " run -i " + dataset() + " -o " + path("out")).status, 0);
    auto const before = read_file(_dir.path() / "out" / "summary.json");
    // An empty script would fail any model call.
    write_file(_dir.path() / "script.json", R"({"scripts": []})");
    auto const again = tcforge(config() + " --resume run -i " + dataset() + " -o " + path("out"));
    ASSERT_EQ(again.status, 0) << again.output;
    EXPECT_EQ(read_file(_dir.path() / "out" / "summary.json"), before);
}

TEST_F(CliTest, UsageErrorsExitWithTwo)
{
    EXPECT_EQ(tcforge(config() + " evaluate").status, 2);
    EXPECT_EQ(tcforge(config() + " run --bogus-flag -i " + dataset() + " -o " + path("o")).status, 2);
    EXPECT_EQ(tcforge(config() + " frobnicate").status, 2);
    EXPECT_EQ(tcforge(config()).status, 2);
    EXPECT_EQ(tcforge(config() + " run -i " + path("absent.jsonl") + " -o " + path("o")).status, 2);
    EXPECT_EQ(tcforge("--help").status, 0);
}

TEST_F(CliTest, ConfigErrorsExitWithThree)
{
    EXPECT_EQ(tcforge(config() + " --set provider.api_key=abc run -i " + dataset() + " -o " + path("o")).status, 3);
    EXPECT_EQ(tcforge(config() + " --set loop.alpha=2 run -i " + dataset() + " -o " + path("o")).status, 3);
    EXPECT_EQ(tcforge(config() + " --set no.such.key=1 run -i " + dataset() + " -o " + path("o")).status, 3);
}
