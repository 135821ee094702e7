// SPDX-License-Identifier: Apache-2.0
#include <tcforge/errors.hpp>
#include <tcforge/serialize.hpp>
#include <tcforge/text.hpp>

namespace tcforge
{

namespace
{

template <typename T>
auto optionalToJson(std::optional<T> const& v) -> Json
{
    return v ? Json(*v) : Json(nullptr);
}

template <typename T>
auto optionalFromJson(Json const& j, char const* key) -> std::optional<T>
{
    auto const it = j.find(key);
    if (it == j.end() || it->is_null())
        return std::nullopt;
    return it->template get<T>();
}

auto bytesFromKey(Json const& j, char const* key) -> Bytes
{
    return bytes_from_json(j.at(key));
}

auto caseOriginName(CaseOrigin o) -> char const*
{
    return o == CaseOrigin::public_test ? "public" : "generated";
}

} // namespace

auto bytes_to_json(Bytes const& bytes) -> Json
{
    if (is_valid_utf8(bytes))
        return Json(bytes);
    return Json { { "base64", base64_encode(bytes) } };
}

auto bytes_from_json(Json const& j) -> Bytes
{
    if (j.is_string())
        return j.get<std::string>();
    if (j.is_object() && j.contains("base64"))
        return base64_decode(j.at("base64").get<std::string>());
    throw Error(ErrorKind::io, "expected a byte string");
}

void to_json(Json& j, Language const& v)
{
    j = v.name();
}

void from_json(Json const& j, Language& v)
{
    v = Language::parse(j.get<std::string>());
}

void to_json(Json& j, Solution const& v)
{
    j = Json {
        { "source", v.source },
        { "language", v.language },
        { "label", to_string(v.label) },
        { "alive", v.alive },
    };
}

void from_json(Json const& j, Solution& v)
{
    v.source = j.at("source").get<std::string>();
    v.language = j.at("language").get<Language>();
    v.label = parse_solution_label(j.at("label").get<std::string>());
    v.alive = j.value("alive", true);
}

void to_json(Json& j, Provenance const& v)
{
    j = Json {
        { "origin", caseOriginName(v.origin) },
        { "command_index", optionalToJson(v.command_index) },
        { "iteration", optionalToJson(v.iteration) },
        { "command", optionalToJson(v.command) },
    };
}

void from_json(Json const& j, Provenance& v)
{
    auto const origin = j.at("origin").get<std::string>();
    if (origin == "public")
        v.origin = CaseOrigin::public_test;
    else if (origin == "generated")
        v.origin = CaseOrigin::generated;
    else
        throw Error(ErrorKind::io, "unknown case origin: " + origin);
    v.command_index = optionalFromJson<int>(j, "command_index");
    v.iteration = optionalFromJson<int>(j, "iteration");
    v.command = optionalFromJson<std::string>(j, "command");
}

void to_json(Json& j, TestCase const& v)
{
    j = Json {
        { "input", bytes_to_json(v.input) },
        { "expected_output", bytes_to_json(v.expected_output) },
        { "provenance", v.provenance },
    };
}

void from_json(Json const& j, TestCase& v)
{
    v.input = bytesFromKey(j, "input");
    v.expected_output = bytesFromKey(j, "expected_output");
    v.provenance = j.contains("provenance") ? j.at("provenance").get<Provenance>() : Provenance {};
}

void to_json(Json& j, Problem const& v)
{
    j = Json {
        { "id", v.id },
        { "statement", v.statement },
        { "reference_solution", optionalToJson(v.reference_solution) },
        { "correct_pool", v.correct_pool },
        { "incorrect_pool", v.incorrect_pool },
        { "public_tests", v.public_tests },
        { "time_limit_ms", v.time_limit_ms },
        { "memory_limit_mb", v.memory_limit_mb },
        { "tags", v.tags },
        { "difficulty", optionalToJson(v.difficulty) },
        { "seed_generator", optionalToJson(v.seed_generator) },
        { "passthrough", v.passthrough },
    };
}

void from_json(Json const& j, Problem& v)
{
    v.id = j.at("id").get<std::string>();
    v.statement = j.at("statement").get<std::string>();
    v.reference_solution = optionalFromJson<Solution>(j, "reference_solution");
    v.correct_pool = j.value("correct_pool", std::vector<Solution> {});
    v.incorrect_pool = j.value("incorrect_pool", std::vector<Solution> {});
    v.public_tests = j.value("public_tests", std::vector<TestCase> {});
    v.time_limit_ms = j.value("time_limit_ms", std::int64_t { 2000 });
    v.memory_limit_mb = j.value("memory_limit_mb", std::int64_t { 256 });
    v.tags = j.value("tags", std::vector<std::string> {});
    v.difficulty = optionalFromJson<int>(j, "difficulty");
    v.seed_generator = optionalFromJson<std::string>(j, "seed_generator");
    v.passthrough = j.contains("passthrough") ? j.at("passthrough") : Json::object();
}

void to_json(Json& j, Verdict const& v)
{
    j = Json {
        { "kind", to_string(v.kind) },
        { "detail", v.detail },
        { "wall_time_ms", v.wall_time_ms },
        { "peak_memory_mb", v.peak_memory_mb },
    };
}

void from_json(Json const& j, Verdict& v)
{
    v.kind = parse_verdict_kind(j.at("kind").get<std::string>());
    v.detail = j.value("detail", std::string {});
    v.wall_time_ms = j.value("wall_time_ms", std::int64_t { 0 });
    v.peak_memory_mb = j.value("peak_memory_mb", 0.0);
}

void to_json(Json& j, CaseStat const& v)
{
    j = Json {
        { "case_index", v.case_index },
        { "pass_count_correct", v.pass_count_correct },
        { "fail_count_incorrect", v.fail_count_incorrect },
    };
}

void from_json(Json const& j, CaseStat& v)
{
    v.case_index = j.at("case_index").get<std::size_t>();
    v.pass_count_correct = j.at("pass_count_correct").get<std::size_t>();
    v.fail_count_incorrect = j.at("fail_count_incorrect").get<std::size_t>();
}

void to_json(Json& j, QualityMetrics const& v)
{
    j = Json {
        { "tpr", v.tpr },
        { "tnr", v.tnr },
        { "correct_total", v.correct_total },
        { "correct_accepted", v.correct_accepted },
        { "incorrect_total", v.incorrect_total },
        { "incorrect_rejected", v.incorrect_rejected },
        { "per_case_stats", v.per_case_stats },
    };
}

void from_json(Json const& j, QualityMetrics& v)
{
    v.tpr = j.at("tpr").get<double>();
    v.tnr = j.at("tnr").get<double>();
    v.correct_total = j.value("correct_total", std::size_t { 0 });
    v.correct_accepted = j.value("correct_accepted", std::size_t { 0 });
    v.incorrect_total = j.value("incorrect_total", std::size_t { 0 });
    v.incorrect_rejected = j.value("incorrect_rejected", std::size_t { 0 });
    v.per_case_stats = j.value("per_case_stats", std::vector<CaseStat> {});
}

void to_json(Json& j, IterationState const& v)
{
    j = Json {
        { "iteration", v.iteration },
        { "generator_source", v.generator_source },
        { "checker_source", optionalToJson(v.checker_source) },
        { "commands", v.commands },
        { "suite", v.suite },
        { "constraints_summary", v.constraints_summary },
        { "metrics", optionalToJson(v.metrics) },
    };
}

void from_json(Json const& j, IterationState& v)
{
    v.iteration = j.at("iteration").get<int>();
    v.generator_source = j.at("generator_source").get<std::string>();
    v.checker_source = optionalFromJson<std::string>(j, "checker_source");
    v.commands = j.at("commands").get<std::vector<std::string>>();
    v.suite = j.at("suite").get<std::vector<TestCase>>();
    v.constraints_summary = j.value("constraints_summary", std::string {});
    v.metrics = optionalFromJson<QualityMetrics>(j, "metrics");
}

void to_json(Json& j, FalseNegative const& v)
{
    j = Json {
        { "pool_index", v.pool_index },
        { "case_index", v.case_index },
        { "verdict", v.verdict },
        { "actual_output", bytes_to_json(v.actual_output) },
    };
}

void from_json(Json const& j, FalseNegative& v)
{
    v.pool_index = j.at("pool_index").get<std::size_t>();
    v.case_index = j.at("case_index").get<std::size_t>();
    v.verdict = j.at("verdict").get<Verdict>();
    v.actual_output = bytesFromKey(j, "actual_output");
}

void to_json(Json& j, FalsePositive const& v)
{
    j = Json {
        { "pool_index", v.pool_index },
        { "sample_output", bytes_to_json(v.sample_output) },
    };
}

void from_json(Json const& j, FalsePositive& v)
{
    v.pool_index = j.at("pool_index").get<std::size_t>();
    v.sample_output = bytesFromKey(j, "sample_output");
}

void to_json(Json& j, ErrorLog const& v)
{
    j = Json {
        { "source", to_string(v.source) },
        { "subject", v.subject },
        { "log", bytes_to_json(v.log) },
        { "input", v.input ? bytes_to_json(*v.input) : Json(nullptr) },
    };
}

void from_json(Json const& j, ErrorLog& v)
{
    v.source = parse_error_source(j.at("source").get<std::string>());
    v.subject = j.at("subject").get<std::string>();
    v.log = bytesFromKey(j, "log");
    if (auto it = j.find("input"); it != j.end() && !it->is_null())
        v.input = bytes_from_json(*it);
    else
        v.input.reset();
}

void to_json(Json& j, FeedbackReport const& v)
{
    j = Json {
        { "false_negatives", v.false_negatives },
        { "false_positives", v.false_positives },
        { "error_logs", v.error_logs },
    };
}

void from_json(Json const& j, FeedbackReport& v)
{
    v.false_negatives = j.value("false_negatives", std::vector<FalseNegative> {});
    v.false_positives = j.value("false_positives", std::vector<FalsePositive> {});
    v.error_logs = j.value("error_logs", std::vector<ErrorLog> {});
}

auto strip_timing(Json j) -> Json
{
    if (j.is_object())
    {
        j.erase("wall_time_ms");
        j.erase("peak_memory_mb");
        for (auto& [key, value]: j.items())
            value = strip_timing(std::move(value));
    }
    else if (j.is_array())
    {
        for (auto& value: j)
            value = strip_timing(std::move(value));
    }
    return j;
}

} // namespace tcforge
