// SPDX-License-Identifier: Apache-2.0
#include "fixtures.hpp"
#include "random.hpp"

#include <tcforge/serialize.hpp>
#include <tcforge/text.hpp>

#include <gtest/gtest.h>

using namespace tcforge;
namespace tt = tcforge::test;

namespace
{

auto sampleProblem() -> Problem
{
    auto p = tt::load_problem("sum");
    p.tags = { "math", "implementation" };
    p.difficulty = 3;
    p.seed_generator = "int main() {}";
    p.passthrough = Json { { "cf_rating", 800 }, { "source", "unit" }, { "nested", { { "x", Json::array({ 1, 2 }) } } } };
    auto generated = TestCase {};
    generated.input = std::string("\x00\xff binary", 9);
    generated.expected_output = "3\n";
    generated.provenance.origin = CaseOrigin::generated;
    generated.provenance.command_index = 2;
    generated.provenance.iteration = 1;
    generated.provenance.command = "./gen --n 5";
    p.public_tests.push_back(generated);
    return p;
}

} // namespace

TEST(Model, LanguageNames)
{
    EXPECT_EQ(Language::parse("c++").name(), "cpp");
    EXPECT_EQ(Language::parse("python3").kind, LanguageKind::python);
    EXPECT_EQ(Language::parse("rust").name(), "rust");
    EXPECT_EQ(Language::parse("rust").kind, LanguageKind::other);
}

TEST(Model, ProblemJsonRoundTrip)
{
    auto const p = sampleProblem();
    auto const j = Json(p);
    EXPECT_EQ(j.at("id"), "sum");
    EXPECT_EQ(j.at("public_tests").back().at("input").at("base64"), base64_encode(p.public_tests.back().input));
    auto const back = j.get<Problem>();
    EXPECT_EQ(back, p);
    EXPECT_EQ(Json(back).dump(), j.dump());
}

TEST(Model, BytesUseBase64OnlyWhenNeeded)
{
    EXPECT_EQ(bytes_to_json("plain\n"), Json("plain\n"));
    EXPECT_TRUE(bytes_to_json("\xff").is_object());
    auto rng = tt::Rng(3);
    for (auto i = 0; i < 200; ++i)
    {
        auto bytes = std::string {};
        for (auto k = rng.between(0, 20); k > 0; --k)
            bytes.push_back(static_cast<char>(rng.between(0, 255)));
        EXPECT_EQ(bytes_from_json(Json::parse(bytes_to_json(bytes).dump())), bytes);
    }
}

TEST(Model, VerdictAndMetricsRoundTrip)
{
    auto v = Verdict { VerdictKind::time_limit, "killed", 1234, 12.5 };
    EXPECT_EQ(Json(v).get<Verdict>(), v);
    EXPECT_EQ(Json(v).at("kind"), "time_limit");

    auto m = QualityMetrics {};
    m.tpr = 0.75;
    m.tnr = 0.5;
    m.correct_total = 4;
    m.correct_accepted = 3;
    m.incorrect_total = 2;
    m.incorrect_rejected = 1;
    m.per_case_stats = { CaseStat { 0, 3, 1 } };
    EXPECT_EQ(Json(m).get<QualityMetrics>(), m);
}

TEST(Model, FeedbackReportRoundTrip)
{
    auto r = FeedbackReport {};
    r.false_negatives.push_back({ 1, 2, Verdict { VerdictKind::wrong_answer, "diff", 3, 4 }, "out" });
    r.false_positives.push_back({ 0, "sample" });
    r.error_logs.push_back({ ErrorSource::reference, "./gen --n 1", "crashed", std::string("in\xff", 3) });
    r.error_logs.push_back({ ErrorSource::generator, "./gen --bad", "bad flag", std::nullopt });
    EXPECT_EQ(Json(r).get<FeedbackReport>(), r);
}

TEST(Model, StripTimingRemovesTimingFieldsEverywhere)
{
    auto const j = Json::parse(R"({"a": {"wall_time_ms": 5, "peak_memory_mb": 1.5, "kind": "accepted"},
                                   "list": [{"wall_time_ms": 9, "x": 1}], "wall_time_ms": 3})");
    auto const stripped = strip_timing(j);
    EXPECT_EQ(stripped, Json::parse(R"({"a": {"kind": "accepted"}, "list": [{"x": 1}]})"));
}

TEST(Model, ValidateProblemReportsBrokenInvariants)
{
    EXPECT_TRUE(validate_problem(tt::load_problem("sum")).empty());
    auto p = Problem {};
    p.time_limit_ms = 0;
    auto const issues = validate_problem(p);
    EXPECT_GE(issues.size(), 4u);
}
