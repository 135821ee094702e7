// SPDX-License-Identifier: Apache-2.0
#include <tcforge/errors.hpp>
#include <tcforge/io/dataset.hpp>
#include <tcforge/serialize.hpp>
#include <tcforge/temp_dir.hpp>
#include <tcforge/text.hpp>

#include <spdlog/spdlog.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

namespace tcforge::io
{

namespace
{

auto languageFromCode(Json const& code) -> Language
{
    if (code.is_number_integer())
    {
        switch (code.get<int>())
        {
            case 1:
            case 3: return { LanguageKind::python, {} };
            case 2: return { LanguageKind::cpp, {} };
            case 4: return { LanguageKind::java, {} };
            default: return { LanguageKind::other, "unknown" };
        }
    }
    if (code.is_string())
    {
        auto const name = to_lower(code.get<std::string>());
        if (name == "cpp" || name == "c++")
            return { LanguageKind::cpp, {} };
        if (name == "python" || name == "python3")
            return { LanguageKind::python, {} };
        if (name == "java")
            return { LanguageKind::java, {} };
        return Language::parse(name);
    }
    return { LanguageKind::other, "unknown" };
}

/// Accepts {"language": [...], "solution": [...]} or [{"language", "solution"}, ...].
auto solutionsFrom(Json const& field, SolutionLabel label) -> std::vector<Solution>
{
    auto out = std::vector<Solution> {};
    if (field.is_null())
        return out;
    if (field.is_object())
    {
        auto const& languages = field.at("language");
        auto const& sources = field.at("solution");
        if (languages.size() != sources.size())
            throw Error(ErrorKind::schema_violation, "solution and language lists differ in length");
        for (auto i = std::size_t { 0 }; i < sources.size(); ++i)
            out.push_back({ sources[i].get<std::string>(), languageFromCode(languages[i]), label, true });
        return out;
    }
    for (auto const& entry: field)
        out.push_back({ entry.at("solution").get<std::string>(), languageFromCode(entry.at("language")), label, true });
    return out;
}

auto testsFrom(Json const& field) -> std::vector<TestCase>
{
    auto out = std::vector<TestCase> {};
    if (field.is_null())
        return out;
    if (field.is_object())
    {
        auto const& inputs = field.at("input");
        auto const& outputs = field.at("output");
        if (inputs.size() != outputs.size())
            throw Error(ErrorKind::schema_violation, "public test input and output lists differ in length");
        for (auto i = std::size_t { 0 }; i < inputs.size(); ++i)
            out.push_back({ bytes_from_json(inputs[i]), bytes_from_json(outputs[i]), {} });
        return out;
    }
    for (auto const& entry: field)
        out.push_back({ bytes_from_json(entry.at("input")), bytes_from_json(entry.at("output")), {} });
    return out;
}

auto timeLimitMs(Json const& field) -> std::int64_t
{
    auto ms = std::int64_t { 0 };
    if (field.is_object())
        ms = field.value("seconds", std::int64_t { 0 }) * 1000 + field.value("nanos", std::int64_t { 0 }) / 1'000'000;
    else if (field.is_number())
        ms = static_cast<std::int64_t>(std::llround(field.get<double>() * 1000.0));
    return ms > 0 ? ms : 2000;
}

auto memoryLimitMb(Json const& field) -> std::int64_t
{
    auto const bytes = field.is_number() ? field.get<std::int64_t>() : 0;
    auto const mb = bytes / (1024 * 1024);
    return mb > 0 ? mb : 256;
}

auto pickReference(std::vector<Solution> const& correct) -> std::optional<Solution>
{
    auto const* chosen = static_cast<Solution const*>(nullptr);
    for (auto const& s: correct)
        if (s.language.kind == LanguageKind::cpp)
        {
            chosen = &s;
            break;
        }
    if (!chosen && !correct.empty())
        chosen = &correct.front();
    if (!chosen)
        return std::nullopt;
    auto reference = *chosen;
    reference.label = SolutionLabel::reference;
    return reference;
}

std::set<std::string, std::less<>> const nativeProblemKeys = {
    "id",          "statement",       "reference_solution", "correct_pool", "incorrect_pool",
    "public_tests", "time_limit_ms",  "memory_limit_mb",    "tags",         "difficulty",
    "seed_generator",
};

std::set<std::string, std::less<>> const nativeRecordKeys = {
    "schema_version", "status", "reason", "passthrough", "generator", "checker", "commands",
    "input_constraints_summary", "suite", "metrics", "trace_summary", "unlabeled_solutions",
};

auto isNative(Json const& record) -> bool
{
    return record.contains("schema_version");
}

} // namespace

auto parse_format(std::string_view text) -> Format
{
    if (text == "auto")
        return Format::automatic;
    if (text == "codecontests" || text == "codecontests_jsonl")
        return Format::codecontests_jsonl;
    if (text == "native" || text == "native_jsonl")
        return Format::native_jsonl;
    throw Error(ErrorKind::usage, "unknown dataset format: " + std::string(text));
}

auto problem_from_codecontests(Json const& record, FieldMapping const& m, std::vector<std::string>* warnings)
    -> Problem
{
    if (!record.is_object())
        throw Error(ErrorKind::schema_violation, "record is not a JSON object");

    auto p = Problem {};
    auto const field = [&](std::string const& name) -> Json const& {
        static Json const null = nullptr;
        auto const it = record.find(name);
        return it == record.end() ? null : *it;
    };

    auto const& id = field(m.id);
    if (!id.is_string() && !id.is_number())
        throw Error(ErrorKind::schema_violation, "record has no \"" + m.id + "\" field");
    p.id = id.is_string() ? id.get<std::string>() : id.dump();
    if (auto const& statement = field(m.statement); statement.is_string())
        p.statement = statement.get<std::string>();

    p.correct_pool = solutionsFrom(field(m.correct_solutions), SolutionLabel::correct);
    p.incorrect_pool = solutionsFrom(field(m.incorrect_solutions), SolutionLabel::incorrect);
    p.reference_solution = pickReference(p.correct_pool);
    p.public_tests = testsFrom(field(m.public_tests));
    p.time_limit_ms = timeLimitMs(field(m.time_limit));
    p.memory_limit_mb = memoryLimitMb(field(m.memory_limit));

    if (auto const& tags = field(m.tags); tags.is_array())
        for (auto const& t: tags)
            if (t.is_string())
                p.tags.push_back(t.get<std::string>());
    if (auto const& difficulty = field(m.difficulty); difficulty.is_number_integer())
        p.difficulty = difficulty.get<int>();
    if (auto const& generator = field(m.generator); generator.is_string() && !generator.get<std::string>().empty())
        p.seed_generator = generator.get<std::string>();

    if (auto const& unlabeled = field(m.unlabeled_solutions); !unlabeled.is_null() && warnings)
        warnings->push_back("problem " + p.id + ": solutions without correctness labels were ignored");

    auto const consumed = std::set<std::string, std::less<>> {
        m.id,   m.statement,  m.correct_solutions, m.incorrect_solutions, m.unlabeled_solutions, m.public_tests,
        m.time_limit, m.memory_limit, m.tags, m.difficulty, m.generator,
    };
    for (auto const& [key, value]: record.items())
        if (!consumed.contains(key))
            p.passthrough[key] = value;
    return p;
}

auto problem_from_native(Json const& record, std::vector<std::string>* warnings) -> Problem
{
    if (!record.is_object())
        throw Error(ErrorKind::schema_violation, "record is not a JSON object");
    if (auto const version = record.value("schema_version", schema_version); version != schema_version)
        throw Error(ErrorKind::schema_violation, "unsupported schema_version " + std::to_string(version));

    auto core = Json::object();
    auto passthrough = record.contains("passthrough") && record.at("passthrough").is_object()
                           ? record.at("passthrough")
                           : Json::object();
    for (auto const& [key, value]: record.items())
    {
        if (nativeProblemKeys.contains(key))
            core[key] = value;
        else if (!nativeRecordKeys.contains(key))
            passthrough[key] = value;
    }
    auto p = core.get<Problem>();
    p.passthrough = std::move(passthrough);
    if (record.contains("unlabeled_solutions") && warnings)
        warnings->push_back("problem " + p.id + ": solutions without correctness labels were ignored");
    return p;
}

auto ingest_each(std::filesystem::path const& path, Format format, FieldMapping const& mapping,
                 std::function<void(Problem&&)> const& sink) -> IngestStats
{
    auto in = std::ifstream(path, std::ios::binary);
    if (!in)
        throw Error(ErrorKind::io, "cannot read dataset " + path.string());

    auto stats = IngestStats {};
    auto line = std::string {};
    while (std::getline(in, line))
    {
        ++stats.lines;
        if (trim(line).empty())
            continue;
        try
        {
            auto const record = Json::parse(line);
            auto const native = format == Format::native_jsonl || (format == Format::automatic && isNative(record));
            auto problem = native ? problem_from_native(record, &stats.warnings)
                                  : problem_from_codecontests(record, mapping, &stats.warnings);
            ++stats.records;
            sink(std::move(problem));
        }
        catch (Json::exception const& e)
        {
            ++stats.malformed;
            stats.warnings.push_back(path.string() + ":" + std::to_string(stats.lines) + ": skipped: " + e.what());
        }
        catch (Error const& e)
        {
            if (e.kind() != ErrorKind::schema_violation)
                throw;
            ++stats.malformed;
            stats.warnings.push_back(path.string() + ":" + std::to_string(stats.lines) + ": skipped: " + e.what());
        }
    }
    if (in.bad())
        throw Error(ErrorKind::io, "error while reading " + path.string());
    if (stats.malformed > 0)
        spdlog::warn("{}: skipped {} malformed line(s)", path.string(), stats.malformed);
    return stats;
}

auto ingest(std::filesystem::path const& path, Format format, FieldMapping const& mapping) -> Ingested
{
    auto result = Ingested {};
    result.stats = ingest_each(path, format, mapping, [&](Problem&& p) { result.problems.push_back(std::move(p)); });
    if (result.problems.empty())
        throw Error(ErrorKind::io, "no parseable records in " + path.string());
    return result;
}

auto to_string(RecordStatus status) -> std::string_view
{
    switch (status)
    {
        case RecordStatus::ok: return "ok";
        case RecordStatus::failed: return "failed";
        case RecordStatus::rejected: return "rejected";
    }
    return "failed";
}

auto parse_record_status(std::string_view text) -> RecordStatus
{
    for (auto const s: { RecordStatus::ok, RecordStatus::failed, RecordStatus::rejected })
        if (to_string(s) == text)
            return s;
    throw Error(ErrorKind::schema_violation, "unknown record status: " + std::string(text));
}

auto final_snapshot(loop::LoopTrace const& trace) -> loop::IterationSnapshot const*
{
    return trace.iterations.empty() ? nullptr : &trace.iterations.back();
}

auto to_record(ProblemResult const& result) -> Json
{
    auto record = Json::object();
    record["schema_version"] = schema_version;
    record["status"] = to_string(result.status);
    if (!result.reason.empty())
        record["reason"] = result.reason;

    auto problem = Json(result.problem);
    for (auto const& [key, value]: problem.items())
        if (key != "passthrough")
            record[key] = value;

    auto const* last = result.trace ? final_snapshot(*result.trace) : nullptr;
    record["generator"] = last ? Json(last->state.generator_source) : Json(nullptr);
    record["checker"] = last && last->state.checker_source ? Json(*last->state.checker_source) : Json(nullptr);
    record["commands"] = last ? Json(last->state.commands) : Json::array();
    record["input_constraints_summary"] = last ? Json(last->state.constraints_summary) : Json(nullptr);
    record["suite"] = last ? Json(last->state.suite) : Json::array();
    record["metrics"] = last && last->state.metrics ? Json(*last->state.metrics) : Json(nullptr);

    if (result.trace)
    {
        auto iterations = Json::array();
        for (auto const& s: result.trace->iterations)
        {
            auto row = Json { { "iteration", s.state.iteration }, { "cases", s.state.suite.size() } };
            row["tpr"] = s.state.metrics ? Json(s.state.metrics->tpr) : Json(nullptr);
            row["tnr"] = s.state.metrics ? Json(s.state.metrics->tnr) : Json(nullptr);
            iterations.push_back(std::move(row));
        }
        record["trace_summary"] = Json {
            { "termination", loop::to_string(result.trace->termination) },
            { "error", result.trace->error ? Json(*result.trace->error) : Json(nullptr) },
            { "iterations", iterations },
        };
    }
    else
        record["trace_summary"] = nullptr;

    for (auto const& [key, value]: result.problem.passthrough.items())
        if (!record.contains(key))
            record[key] = value;
    return record;
}

auto summarize_results(std::span<ProblemResult const> results) -> Summary
{
    auto s = Summary {};
    auto cases = 0.0;
    auto correct = 0.0;
    auto incorrect = 0.0;
    for (auto const& r: results)
    {
        if (r.status == RecordStatus::failed)
            ++s.failed;
        if (r.status == RecordStatus::rejected)
            ++s.rejected;
        if (r.status != RecordStatus::ok)
            continue;
        ++s.problems;
        auto const* last = r.trace ? final_snapshot(*r.trace) : nullptr;
        cases += last ? static_cast<double>(last->state.suite.size()) : 0.0;
        for (auto const& sol: r.problem.correct_pool)
            correct += sol.alive ? 1 : 0;
        for (auto const& sol: r.problem.incorrect_pool)
            incorrect += sol.alive ? 1 : 0;
    }
    if (s.problems > 0)
    {
        auto const n = static_cast<double>(s.problems);
        s.mean_cases = cases / n;
        s.mean_correct_alive = correct / n;
        s.mean_incorrect_alive = incorrect / n;
    }
    return s;
}

auto format_summary(Summary const& s) -> std::string
{
    auto buffer = std::array<char, 128> {};
    std::snprintf(buffer.data(), buffer.size(), "%zu / %.2f / %.2f / %.2f", s.problems, s.mean_cases,
                  s.mean_correct_alive, s.mean_incorrect_alive);
    return buffer.data();
}

auto summary_to_json(Summary const& s) -> Json
{
    return Json {
        { "problems", s.problems },
        { "mean_cases", s.mean_cases },
        { "mean_correct_alive", s.mean_correct_alive },
        { "mean_incorrect_alive", s.mean_incorrect_alive },
        { "failed", s.failed },
        { "rejected", s.rejected },
        { "table", format_summary(s) },
    };
}

auto export_dataset(std::filesystem::path const& path, std::span<ProblemResult const> results) -> Summary
{
    auto text = std::string {};
    for (auto const& r: results)
        text += to_record(r).dump() + "\n";
    try
    {
        if (path.has_parent_path())
            std::filesystem::create_directories(path.parent_path());
        write_file_atomic(path, text);
    }
    catch (std::exception const& e)
    {
        throw Error(ErrorKind::io, "cannot write " + path.string() + ": " + e.what());
    }
    return summarize_results(results);
}

} // namespace tcforge::io
