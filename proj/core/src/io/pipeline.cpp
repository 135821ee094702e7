// SPDX-License-Identifier: Apache-2.0
#include <tcforge/analytics.hpp>
#include <tcforge/curation.hpp>
#include <tcforge/errors.hpp>
#include <tcforge/io/pipeline.hpp>
#include <tcforge/serialize.hpp>
#include <tcforge/temp_dir.hpp>
#include <tcforge/text.hpp>

#include <spdlog/spdlog.h>

#include <algorithm>
#include <atomic>
#include <fstream>
#include <functional>
#include <mutex>
#include <thread>

namespace tcforge::io
{

namespace fs = std::filesystem;

namespace
{

void forEachIndex(std::size_t count, int workers, std::function<void(std::size_t)> const& body)
{
    auto next = std::atomic<std::size_t> { 0 };
    auto const work = [&] {
        for (auto i = next++; i < count; i = next++)
            body(i);
    };
    auto const threads = std::min<std::size_t>(static_cast<std::size_t>(std::max(workers, 1)), count);
    if (threads <= 1)
    {
        work();
        return;
    }
    auto pool = std::vector<std::jthread> {};
    for (auto t = std::size_t { 0 }; t < threads; ++t)
        pool.emplace_back(work);
}

auto statusFor(loop::LoopTrace const& trace) -> RecordStatus
{
    return trace.iterations.empty() ? RecordStatus::failed : RecordStatus::ok;
}

auto curationReportFor(std::span<ProblemResult const> results, std::size_t input_count) -> Json
{
    auto rejections = std::vector<curation::Rejection> {};
    auto pools = std::vector<curation::PoolSizes> {};
    for (auto const& r: results)
    {
        if (r.status == RecordStatus::rejected)
        {
            rejections.push_back({ r.problem.id, curation::parse_rule(r.reason) });
            continue;
        }
        auto purified = curation::PurifyResult { r.problem, true, {} };
        if (r.status == RecordStatus::failed && !r.trace)
        {
            purified.usable = false;
            purified.reason = r.reason;
        }
        pools.push_back(curation::pool_sizes(purified));
    }
    return curation::curation_report(input_count, rejections, pools);
}

auto readRecords(fs::path const& path) -> std::vector<Json>
{
    auto in = std::ifstream(path, std::ios::binary);
    if (!in)
        throw Error(ErrorKind::io, "cannot read " + path.string());
    auto records = std::vector<Json> {};
    auto line = std::string {};
    auto lineNo = 0;
    while (std::getline(in, line))
    {
        ++lineNo;
        if (trim(line).empty())
            continue;
        auto j = Json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object())
        {
            spdlog::warn("{}:{}: skipped malformed record", path.string(), lineNo);
            continue;
        }
        records.push_back(std::move(j));
    }
    return records;
}

} // namespace

auto curate_dataset(std::vector<Problem> const& problems, Config const& config, sandbox::Sandbox& sandbox)
    -> CurationOutcome
{
    auto outcome = CurationOutcome {};
    auto kept = std::vector<Problem> {};
    for (auto const& p: problems)
    {
        if (auto const rule = curation::classify(p, config.curation))
            outcome.dropped.push_back({ p, RecordStatus::rejected, std::string(curation::to_string(*rule)), {} });
        else
            kept.push_back(with_limits(p, config));
    }

    auto purified = std::vector<curation::PurifyResult>(kept.size());
    forEachIndex(kept.size(), config.problem_workers, [&](std::size_t i) {
        try
        {
            purified[i] = curation::purify_pools(sandbox, kept[i], { config.loop.workers });
        }
        catch (std::exception const& e)
        {
            purified[i] = { kept[i], false, e.what() };
        }
    });

    auto results = outcome.dropped;
    for (auto& r: purified)
    {
        if (r.usable)
            outcome.usable.push_back(r.problem);
        else
        {
            auto failed = ProblemResult { r.problem, RecordStatus::failed, r.reason, {} };
            outcome.dropped.push_back(failed);
        }
        results.push_back({ r.problem, r.usable ? RecordStatus::ok : RecordStatus::failed, r.reason, {} });
    }
    outcome.report = curationReportFor(results, problems.size());
    return outcome;
}

auto result_path(fs::path const& output_dir, std::string const& problem_id) -> fs::path
{
    auto stem = std::string {};
    for (auto c: problem_id.substr(0, 80))
        stem += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.') ? c : '_';
    return output_dir / "results" / (stem + "-" + sha256_hex(problem_id).substr(0, 8) + ".json");
}

void save_result(fs::path const& path, StoredResult const& stored)
{
    auto j = Json::object();
    j["problem"] = stored.result.problem;
    j["status"] = to_string(stored.result.status);
    j["reason"] = stored.result.reason;
    j["trace"] = stored.result.trace ? loop::trace_to_json(*stored.result.trace) : Json(nullptr);
    if (stored.session)
        j["session"] = Json {
            { "generator_history", llm::conversation_to_json(stored.session->generator_history) },
            { "checker_history", llm::conversation_to_json(stored.session->checker_history) },
        };
    try
    {
        fs::create_directories(path.parent_path());
        write_file_atomic(path, j.dump(1) + "\n");
    }
    catch (std::exception const& e)
    {
        throw Error(ErrorKind::io, "cannot write " + path.string() + ": " + e.what());
    }
}

auto load_result(fs::path const& path) -> StoredResult
{
    try
    {
        auto const j = Json::parse(read_file(path));
        auto stored = StoredResult {};
        stored.result.problem = j.at("problem").get<Problem>();
        stored.result.status = parse_record_status(j.at("status").get<std::string>());
        stored.result.reason = j.value("reason", std::string {});
        if (!j.at("trace").is_null())
            stored.result.trace = loop::trace_from_json(j.at("trace"));
        if (auto const it = j.find("session"); it != j.end() && stored.result.trace
                                                && !stored.result.trace->iterations.empty())
        {
            auto session = loop::Session {};
            session.snapshot = stored.result.trace->iterations.back();
            session.generator_history = llm::conversation_from_json(it->at("generator_history"));
            session.checker_history = llm::conversation_from_json(it->at("checker_history"));
            stored.session = std::move(session);
        }
        return stored;
    }
    catch (Json::exception const& e)
    {
        throw Error(ErrorKind::io, "corrupt result file " + path.string() + ": " + e.what());
    }
    catch (std::ios_base::failure const& e)
    {
        throw Error(ErrorKind::io, "cannot read " + path.string() + ": " + e.what());
    }
}

auto load_results(fs::path const& output_dir) -> std::vector<StoredResult>
{
    auto const dir = output_dir / "results";
    if (!fs::is_directory(dir))
        throw Error(ErrorKind::io, "no results directory in " + output_dir.string());
    auto paths = std::vector<fs::path> {};
    for (auto const& entry: fs::directory_iterator(dir))
        if (entry.path().extension() == ".json")
            paths.push_back(entry.path());
    auto stored = std::vector<StoredResult> {};
    for (auto const& p: paths)
        stored.push_back(load_result(p));
    std::sort(stored.begin(), stored.end(), [](StoredResult const& a, StoredResult const& b) {
        return a.result.problem.id < b.result.problem.id;
    });
    return stored;
}

auto write_exports(fs::path const& output_dir, std::span<ProblemResult const> results, std::size_t input_count)
    -> Summary
{
    auto const summary = export_dataset(output_dir / "dataset.jsonl", results);
    try
    {
        write_file_atomic(output_dir / "summary.json", summary_to_json(summary).dump(2) + "\n");
        write_file_atomic(output_dir / "curation.json", curationReportFor(results, input_count).dump(2) + "\n");
    }
    catch (std::exception const& e)
    {
        throw Error(ErrorKind::io, std::string("cannot write exports: ") + e.what());
    }
    return summary;
}

auto run_dataset(std::vector<Problem> const& problems, Config const& config, sandbox::Sandbox& sandbox,
                 llm::Gateway& gateway, RunOptions const& options) -> RunOutcome
{
    loop::validate(config.loop);
    auto outcome = RunOutcome {};
    outcome.results.resize(problems.size());

    auto pending = std::vector<std::size_t> {};
    for (auto i = std::size_t { 0 }; i < problems.size(); ++i)
    {
        auto const& p = problems[i];
        if (options.curate)
            if (auto const rule = curation::classify(p, config.curation))
            {
                outcome.results[i] = { p, RecordStatus::rejected, std::string(curation::to_string(*rule)), {} };
                continue;
            }
        auto const path = result_path(options.output_dir, p.id);
        if (options.resume && fs::exists(path))
        {
            outcome.results[i] = load_result(path).result;
            ++outcome.resumed;
            continue;
        }
        pending.push_back(i);
    }
    if (outcome.resumed > 0)
        spdlog::info("resuming: {} problem(s) already done", outcome.resumed);

    auto done = std::atomic<std::size_t> { 0 };
    forEachIndex(pending.size(), config.problem_workers, [&](std::size_t k) {
        auto const index = pending[k];
        auto problem = with_limits(problems[index], config);
        auto stored = StoredResult {};
        try
        {
            if (options.curate)
            {
                auto purified = curation::purify_pools(sandbox, problem, { config.loop.workers });
                problem = std::move(purified.problem);
                if (!purified.usable)
                {
                    stored.result = { problem, RecordStatus::failed, purified.reason, {} };
                    save_result(result_path(options.output_dir, problem.id), stored);
                    outcome.results[index] = stored.result;
                    return;
                }
            }
            auto context = loop::Context { sandbox, gateway, config.loop };
            auto session = std::optional<loop::Session> {};
            auto trace = loop::run_loop(context, problem, &session);
            stored.result = { problem, statusFor(trace), trace.error.value_or(""), std::move(trace) };
            stored.session = std::move(session);
        }
        catch (std::exception const& e)
        {
            spdlog::warn("{}: {}", problem.id, e.what());
            stored.result = { problem, RecordStatus::failed, e.what(), {} };
        }
        save_result(result_path(options.output_dir, problem.id), stored);
        outcome.results[index] = stored.result;
        spdlog::info("[{}/{}] {}: {}", ++done, pending.size(), problem.id, to_string(stored.result.status));
    });

    outcome.summary = write_exports(options.output_dir, outcome.results, problems.size());
    return outcome;
}

auto refine_stored(Config const& config, sandbox::Sandbox& sandbox, llm::Gateway& gateway, fs::path const& output_dir)
    -> RunOutcome
{
    loop::validate(config.loop);
    auto stored = load_results(output_dir);
    forEachIndex(stored.size(), config.problem_workers, [&](std::size_t i) {
        auto& s = stored[i];
        if (!s.session || !s.result.trace || s.result.trace->termination == loop::Termination::thresholds_met)
            return;
        auto& trace = *s.result.trace;
        auto context = loop::Context { sandbox, gateway, config.loop };
        try
        {
            auto next = loop::step(context, *s.session, s.result.problem);
            trace.iterations.push_back(next.snapshot);
            auto const& metrics = next.snapshot.state.metrics;
            trace.termination = metrics && loop::thresholds_met(*metrics, config.loop)
                                    ? loop::Termination::thresholds_met
                                    : loop::Termination::iteration_cap;
            trace.error.reset();
            s.session = std::move(next);
        }
        catch (std::exception const& e)
        {
            spdlog::warn("{}: refinement failed: {}", s.result.problem.id, e.what());
            trace.termination = loop::Termination::unrecoverable_error;
            trace.error = e.what();
        }
        s.result.reason = trace.error.value_or("");
        save_result(result_path(output_dir, s.result.problem.id), s);
    });

    auto outcome = RunOutcome {};
    for (auto& s: stored)
        outcome.results.push_back(std::move(s.result));
    outcome.summary = write_exports(output_dir, outcome.results, outcome.results.size());
    return outcome;
}

auto evaluate_records(fs::path const& dataset, Config const& config, sandbox::Sandbox& sandbox) -> Json
{
    auto problems = Json::array();
    auto skipped = Json::array();
    auto metrics = std::vector<QualityMetrics> {};

    for (auto const& record: readRecords(dataset))
    {
        auto id = record.value("id", std::string("?"));
        try
        {
            auto problem = with_limits(problem_from_native(record), config);
            auto suite = record.value("suite", Json::array()).get<std::vector<TestCase>>();
            if (suite.empty())
            {
                skipped.push_back({ { "id", id }, { "reason", "no test cases" } });
                continue;
            }

            auto options = judge::EvalOptions {};
            options.mode = config.loop.mode;
            options.workers = config.loop.workers;
            options.checker_limits = config.loop.checker_limits;
            if (config.loop.mode == judge::EvalMode::checker)
                if (auto const it = record.find("checker"); it != record.end() && it->is_string())
                    options.checker =
                        sandbox::compile_or_throw(sandbox, it->get<std::string>(), Language { LanguageKind::cpp, {} });

            auto evaluation = judge::evaluate(sandbox, problem, suite, options);
            metrics.push_back(evaluation.metrics);
            problems.push_back(analytics::evaluation_to_json(problem.id, suite.size(), evaluation));
        }
        catch (Error const& e)
        {
            if (e.kind() != ErrorKind::evaluation && e.kind() != ErrorKind::generation)
                throw;
            skipped.push_back({ { "id", id }, { "reason", e.what() } });
        }
        catch (Json::exception const& e)
        {
            skipped.push_back({ { "id", id }, { "reason", e.what() } });
        }
    }

    auto out = Json::object();
    out["mode"] = judge::to_string(config.loop.mode);
    out["averaging"] = config.averaging == judge::Averaging::macro ? "macro" : "micro";
    if (!metrics.empty())
    {
        auto const rates = judge::aggregate_dataset(metrics, config.averaging);
        out["dataset"] = Json {
            { "problems", metrics.size() },
            { "tpr", rates.tpr },
            { "tnr", rates.tnr },
            { "tpr_percent", judge::format_percent(rates.tpr) },
            { "tnr_percent", judge::format_percent(rates.tnr) },
        };
    }
    else
        out["dataset"] = nullptr;
    out["problems"] = problems;
    out["skipped"] = skipped;
    return out;
}

} // namespace tcforge::io
