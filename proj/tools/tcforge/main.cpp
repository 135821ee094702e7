// SPDX-License-Identifier: Apache-2.0
#include <tcforge/analytics.hpp>
#include <tcforge/errors.hpp>
#include <tcforge/io/config.hpp>
#include <tcforge/io/dataset.hpp>
#include <tcforge/io/pipeline.hpp>
#include <tcforge/llm/gateway.hpp>
#include <tcforge/serialize.hpp>
#include <tcforge/temp_dir.hpp>
#include <tcforge/text.hpp>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdio>
#include <iostream>

namespace fs = std::filesystem;
using namespace tcforge;

namespace
{

// Exit statuses; kept stable for scripts.
constexpr int exitOk = 0;
constexpr int exitUnexpected = 1;
constexpr int exitUsage = 2;

auto exitCode(ErrorKind kind) -> int
{
    switch (kind)
    {
        case ErrorKind::usage: return exitUsage;
        case ErrorKind::config: return 3;
        case ErrorKind::io: return 4;
        case ErrorKind::toolchain_missing: return 5;
        case ErrorKind::transport: return 6;
        case ErrorKind::schema_violation: return 7;
        case ErrorKind::token_budget: return 8;
        case ErrorKind::evaluation:
        case ErrorKind::generation: return 9;
        case ErrorKind::infrastructure: return 10;
    }
    return exitUnexpected;
}

struct GlobalFlags
{
    std::string config;
    std::vector<std::string> settings;
    std::optional<int> workers;
    std::optional<std::string> mode;
    std::optional<double> alpha;
    std::optional<double> beta;
    std::optional<int> n_max;
    bool resume = false;
    bool verbose = false;
    bool quiet = false;
};

struct Paths
{
    std::string input;
    std::string output;
    std::string format = "auto";
    std::string label = "suite";
    std::string record_dir;
    std::optional<std::string> rank_key;
    std::optional<std::string> frontier;
    std::optional<std::string> averaging;
    bool no_curate = false;
};

auto formatDouble(double v) -> std::string
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

auto buildConfig(GlobalFlags const& flags, Paths const& paths) -> io::Config
{
    auto config = flags.config.empty() ? io::Config {} : io::load_config(flags.config);
    auto const set = [&](std::string_view key, std::string const& value) { io::apply_setting(config, key, value, fs::current_path()); };

    for (auto const& s: flags.settings)
    {
        auto const eq = s.find('=');
        if (eq == std::string::npos)
            throw Error(ErrorKind::usage, "--set expects key=value, got " + s);
        set(trim(std::string_view(s).substr(0, eq)), std::string(trim(std::string_view(s).substr(eq + 1))));
    }
    if (flags.workers)
        set("run.workers", std::to_string(*flags.workers));
    if (flags.mode)
        set("loop.mode", *flags.mode);
    if (flags.alpha)
        set("loop.alpha", formatDouble(*flags.alpha));
    if (flags.beta)
        set("loop.beta", formatDouble(*flags.beta));
    if (flags.n_max)
        set("loop.n_max", std::to_string(*flags.n_max));
    if (paths.rank_key)
        set("analytics.rank_key", *paths.rank_key);
    if (paths.frontier)
        set("analytics.frontier", *paths.frontier);
    if (paths.averaging)
        set("metrics.averaging", *paths.averaging);
    loop::validate(config.loop);
    return config;
}

void writeText(std::string const& path, std::string const& text)
{
    if (path.empty() || path == "-")
    {
        std::cout << text << std::flush;
        return;
    }
    try
    {
        write_file_atomic(path, text);
    }
    catch (std::exception const& e)
    {
        throw Error(ErrorKind::io, "cannot write " + path + ": " + e.what());
    }
}

auto readJson(std::string const& path) -> Json
{
    try
    {
        return Json::parse(read_file(path));
    }
    catch (Json::exception const& e)
    {
        throw Error(ErrorKind::io, path + " is not valid JSON: " + e.what());
    }
    catch (std::exception const& e)
    {
        throw Error(ErrorKind::io, "cannot read " + path + ": " + e.what());
    }
}

auto loadProblems(io::Config const& config, Paths const& paths) -> std::vector<Problem>
{
    auto ingested = io::ingest(paths.input, io::parse_format(paths.format), config.mapping);
    spdlog::info("ingested {} problem(s) from {} line(s), {} malformed", ingested.problems.size(),
                 ingested.stats.lines, ingested.stats.malformed);
    for (auto const& w: ingested.stats.warnings)
        spdlog::warn("{}", w);
    return std::move(ingested.problems);
}

void printSummary(io::Summary const& summary)
{
    std::cout << "problems / mean cases / mean alive correct / mean alive incorrect\n"
              << io::format_summary(summary) << "\n"
              << "failed " << summary.failed << ", rejected " << summary.rejected << "\n";
}

auto cmdCurate(io::Config const& config, Paths const& paths) -> int
{
    auto const problems = loadProblems(config, paths);
    auto sandbox = io::make_sandbox(config);
    auto const outcome = io::curate_dataset(problems, config, *sandbox);

    auto const out = fs::path(paths.output);
    fs::create_directories(out);
    auto usable = std::vector<io::ProblemResult> {};
    for (auto const& p: outcome.usable)
        usable.push_back({ p, io::RecordStatus::ok, {}, {} });
    (void) io::export_dataset(out / "curated.jsonl", usable);
    (void) io::export_dataset(out / "dropped.jsonl", outcome.dropped);
    writeText((out / "curation.json").string(), outcome.report.dump(2) + "\n");

    std::cout << outcome.report.at("kept").get<std::size_t>() << " kept, "
              << outcome.report.at("usable").get<std::size_t>() << " usable of "
              << problems.size() << " problem(s)\n";
    return exitOk;
}

auto cmdRun(io::Config const& config, Paths const& paths, bool resume) -> int
{
    auto const problems = loadProblems(config, paths);
    auto sandbox = io::make_sandbox(config);
    auto provider = io::make_provider(config);
    auto wrapped = std::unique_ptr<llm::Provider> {};
    if (!paths.record_dir.empty())
        wrapped = std::make_unique<llm::RecordingProvider>(*provider, paths.record_dir);
    auto gateway = llm::Gateway(wrapped ? *wrapped : *provider,
                                { config.provider.max_attempts, static_cast<std::size_t>(config.provider.token_budget) });

    auto options = io::RunOptions {};
    options.output_dir = paths.output;
    options.resume = resume;
    options.curate = !paths.no_curate;
    fs::create_directories(options.output_dir);

    auto const outcome = io::run_dataset(problems, config, *sandbox, gateway, options);
    spdlog::info("{} model call(s), {} problem(s) resumed", provider->calls(), outcome.resumed);
    printSummary(outcome.summary);
    return exitOk;
}

auto cmdRefine(io::Config const& config, Paths const& paths) -> int
{
    auto sandbox = io::make_sandbox(config);
    auto provider = io::make_provider(config);
    auto gateway = llm::Gateway(*provider, { config.provider.max_attempts,
                                             static_cast<std::size_t>(config.provider.token_budget) });
    auto const outcome = io::refine_stored(config, *sandbox, gateway, paths.output);
    printSummary(outcome.summary);
    return exitOk;
}

auto cmdEvaluate(io::Config const& config, Paths const& paths) -> int
{
    auto sandbox = io::make_sandbox(config);
    auto const result = io::evaluate_records(paths.input, config, *sandbox);
    if (!paths.output.empty())
        writeText(paths.output, result.dump(2) + "\n");
    if (result.at("dataset").is_null())
    {
        std::cerr << "no problem could be evaluated\n";
        return exitCode(ErrorKind::evaluation);
    }
    auto const& d = result.at("dataset");
    std::cout << "problems " << d.at("problems").get<std::size_t>() << "  TPR "
              << d.at("tpr_percent").get<std::string>() << "  TNR " << d.at("tnr_percent").get<std::string>() << "  ("
              << result.at("mode").get<std::string>() << ", " << result.at("averaging").get<std::string>() << ")\n";
    return exitOk;
}

auto cmdPareto(io::Config const& config, Paths const& paths) -> int
{
    auto const j = readJson(paths.input);
    auto exported = std::vector<analytics::ExportedEvaluation> {};
    try
    {
        if (j.is_object() && j.contains("problems"))
            for (auto const& p: j.at("problems"))
                exported.push_back(analytics::evaluation_from_json(p));
        else if (j.is_array())
            for (auto const& p: j)
                exported.push_back(analytics::evaluation_from_json(p));
        else
            exported.push_back(analytics::evaluation_from_json(j));
    }
    catch (Json::exception const& e)
    {
        throw Error(ErrorKind::io, paths.input + " is not an evaluation export: " + e.what());
    }

    auto stats = std::vector<std::vector<analytics::CaseQuality>> {};
    for (auto const& e: exported)
    {
        try
        {
            stats.push_back(analytics::per_case_quality(e.outcomes, e.case_count));
        }
        catch (Error const& err)
        {
            spdlog::warn("{}: skipped ({})", e.problem_id, err.what());
        }
    }
    if (stats.empty())
        throw Error(ErrorKind::evaluation, "no problem with both solution pools in " + paths.input);

    auto const frontier = analytics::dataset_frontier(stats, config.rank_key, config.frontier);
    writeText(paths.output, analytics::frontier_csv(paths.label, frontier, config.rank_key));
    return exitOk;
}

auto cmdReport(io::Config const& config, Paths const& paths) -> int
{
    auto const stored = io::load_results(paths.output);
    auto results = std::vector<io::ProblemResult> {};
    auto traces = std::vector<loop::LoopTrace> {};
    for (auto const& s: stored)
    {
        results.push_back(s.result);
        if (s.result.trace && s.result.status == io::RecordStatus::ok)
            traces.push_back(*s.result.trace);
    }
    printSummary(io::summarize_results(results));

    auto csv = std::string("iteration,mean_tpr,mean_tnr,problems\n");
    if (!traces.empty())
        for (auto const& row: analytics::iteration_progression(traces, config.loop.n_max))
        {
            char line[128];
            std::snprintf(line, sizeof line, "%d,%.6f,%.6f,%zu\n", row.iteration, row.mean_tpr, row.mean_tnr,
                          row.problems);
            csv += line;
        }
    if (paths.input.empty())
        std::cout << "\n" << csv;
    else
        writeText(paths.input, csv);

    auto metrics = std::vector<QualityMetrics> {};
    for (auto const& r: results)
        if (r.trace)
            if (auto const* last = io::final_snapshot(*r.trace); last && last->state.metrics)
                metrics.push_back(*last->state.metrics);
    if (!metrics.empty())
    {
        auto const rates = judge::aggregate_dataset(metrics, config.averaging);
        std::cout << "\nfinal TPR " << judge::format_percent(rates.tpr) << "  TNR "
                  << judge::format_percent(rates.tnr) << " over " << metrics.size() << " problem(s)\n";
    }
    return exitOk;
}

} // namespace

int main(int argc, char** argv)
{
    auto app = CLI::App { "Synthesize, refine and evaluate competitive-programming test suites.", "tcforge" };
    app.require_subcommand(1);
    app.fallthrough();

    auto flags = GlobalFlags {};
    auto paths = Paths {};
    app.add_option("-c,--config", flags.config, "key = value configuration file")->check(CLI::ExistingFile);
    app.add_option("--set", flags.settings, "Override a configuration key (key=value); repeatable");
    app.add_option("--workers", flags.workers, "Problems processed in parallel")->check(CLI::PositiveNumber);
    app.add_option("--mode", flags.mode, "Verdict mode: string or checker")->check(CLI::IsMember({ "string", "checker" }));
    app.add_option("--alpha", flags.alpha, "TPR threshold")->check(CLI::Range(0.0, 1.0));
    app.add_option("--beta", flags.beta, "TNR threshold")->check(CLI::Range(0.0, 1.0));
    app.add_option("--n-max", flags.n_max, "Refinement iteration cap")->check(CLI::NonNegativeNumber);
    app.add_flag("--resume", flags.resume, "Reuse finished per-problem results in the output directory");
    app.add_flag("-v,--verbose", flags.verbose, "Debug logging");
    app.add_flag("-q,--quiet", flags.quiet, "Warnings and errors only");

    auto const addInput = [&](CLI::App* cmd, std::string const& help) {
        cmd->add_option("-i,--input", paths.input, help)->required()->check(CLI::ExistingPath);
    };
    auto const addFormat = [&](CLI::App* cmd) {
        cmd->add_option("--format", paths.format, "Input format: auto, codecontests or native")
            ->check(CLI::IsMember({ "auto", "codecontests", "native" }));
    };

    auto* curate = app.add_subcommand("curate", "Filter a dataset and purify its solution pools");
    addInput(curate, "Dataset (JSONL)");
    addFormat(curate);
    curate->add_option("-o,--output", paths.output, "Output directory")->required();

    auto* generate = app.add_subcommand("generate", "Initial generation only (no refinement)");
    auto* run = app.add_subcommand("run", "Curation and the full refinement loop over a dataset");
    auto* record = app.add_subcommand("record-replay", "Like run, recording every model exchange as replay fixtures");
    for (auto* cmd: { generate, run, record })
    {
        addInput(cmd, "Dataset (JSONL)");
        addFormat(cmd);
        cmd->add_option("-o,--output", paths.output, "Output directory")->required();
        cmd->add_flag("--no-curate", paths.no_curate, "Skip filtering and pool purification");
    }
    record->add_option("--record-dir", paths.record_dir, "Directory for replay fixtures")->required();

    auto* refine = app.add_subcommand("refine", "One refinement step over the results in an output directory");
    refine->add_option("-o,--output", paths.output, "Output directory of a previous run")->required()->check(CLI::ExistingDirectory);

    auto* evaluate = app.add_subcommand("evaluate", "Evaluate the suites of an exported dataset against its pools");
    addInput(evaluate, "Exported dataset (native JSONL)");
    evaluate->add_option("-o,--output", paths.output, "Write the evaluation export (JSON) here");
    evaluate->add_option("--averaging", paths.averaging, "macro or micro")->check(CLI::IsMember({ "macro", "micro" }));

    auto* pareto = app.add_subcommand("pareto", "Pareto frontier CSV from an evaluation export");
    addInput(pareto, "Evaluation export (JSON)");
    pareto->add_option("-o,--output", paths.output, "CSV path (default stdout)");
    pareto->add_option("--label", paths.label, "Dataset label in the CSV");
    pareto->add_option("--rank-key", paths.rank_key, "tnr_first or tpr_first")
        ->check(CLI::IsMember({ "tnr_first", "tpr_first" }));
    pareto->add_option("--frontier", paths.frontier, "per_problem or pooled")
        ->check(CLI::IsMember({ "per_problem", "pooled" }));

    auto* report = app.add_subcommand("report", "Summary and per-iteration progression of an output directory");
    report->add_option("-o,--output", paths.output, "Output directory of a previous run")->required()->check(CLI::ExistingDirectory);
    report->add_option("--progress-csv", paths.input, "Write the progression CSV here instead of stdout");
    report->add_option("--averaging", paths.averaging, "macro or micro")->check(CLI::IsMember({ "macro", "micro" }));

    try
    {
        app.parse(argc, argv);
    }
    catch (CLI::ParseError const& e)
    {
        auto const code = app.exit(e);
        return code == 0 ? exitOk : exitUsage;
    }

    auto logger = spdlog::stderr_color_mt("tcforge");
    spdlog::set_default_logger(logger);
    spdlog::set_pattern("[%H:%M:%S] %^%l%$ %v");
    spdlog::set_level(flags.verbose ? spdlog::level::debug : flags.quiet ? spdlog::level::warn : spdlog::level::info);

    try
    {
        auto config = buildConfig(flags, paths);
        if (generate->parsed())
        {
            config.loop.n_max = 0;
            return cmdRun(config, paths, flags.resume);
        }
        if (run->parsed() || record->parsed())
            return cmdRun(config, paths, flags.resume);
        if (curate->parsed())
            return cmdCurate(config, paths);
        if (refine->parsed())
            return cmdRefine(config, paths);
        if (evaluate->parsed())
            return cmdEvaluate(config, paths);
        if (pareto->parsed())
            return cmdPareto(config, paths);
        if (report->parsed())
            return cmdReport(config, paths);
    }
    catch (Error const& e)
    {
        spdlog::error("{} error: {}", to_string(e.kind()), e.what());
        return exitCode(e.kind());
    }
    catch (fs::filesystem_error const& e)
    {
        spdlog::error("io error: {}", e.what());
        return exitCode(ErrorKind::io);
    }
    catch (std::exception const& e)
    {
        spdlog::error("unexpected error: {}", e.what());
        return exitUnexpected;
    }
    return exitUsage;
}
