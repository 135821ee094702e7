// SPDX-License-Identifier: Apache-2.0
#include <tcforge/errors.hpp>
#include <tcforge/loop.hpp>
#include <tcforge/patch.hpp>
#include <tcforge/serialize.hpp>

#include <spdlog/spdlog.h>

#include <unordered_set>

namespace tcforge::loop
{

namespace
{

Language const cpp { LanguageKind::cpp, {} };

auto uniqueCommands(std::vector<std::string> const& commands) -> std::vector<std::string>
{
    auto seen = std::unordered_set<std::string> {};
    auto out = std::vector<std::string> {};
    for (auto const& c: commands)
        if (seen.insert(genkit::normalize_command(c)).second)
            out.push_back(c);
    return out;
}

struct CommandEdit
{
    std::vector<std::string> commands;
    std::vector<std::string> unknown;
};

auto editCommands(std::vector<std::string> const& current, std::vector<std::string> const& replace,
                  std::vector<std::string> const& add) -> CommandEdit
{
    auto present = std::unordered_set<std::string> {};
    for (auto const& c: current)
        present.insert(genkit::normalize_command(c));

    auto edit = CommandEdit {};
    auto removed = std::unordered_set<std::string> {};
    for (auto const& r: replace)
    {
        auto const key = genkit::normalize_command(r);
        if (present.contains(key))
            removed.insert(key);
        else
            edit.unknown.push_back(r);
    }

    auto kept = std::vector<std::string> {};
    for (auto const& c: current)
        if (!removed.contains(genkit::normalize_command(c)))
            kept.push_back(c);
    kept.insert(kept.end(), add.begin(), add.end());
    edit.commands = uniqueCommands(kept);
    return edit;
}

auto applyBlocks(std::string const& source, std::vector<std::string> const& raw, IterationSnapshot& snapshot)
    -> std::string
{
    auto const parsed = genkit::parse_blocks(raw);
    auto const outcome = genkit::apply_patches(source, parsed.blocks);
    snapshot.blocks_applied += outcome.applied.size();
    snapshot.blocks_skipped += outcome.skipped.size() + parsed.errors.size();
    return outcome.patched_source;
}

void exchange(llm::Conversation& history, std::string prompt, std::string reply)
{
    history.push_back({ "user", std::move(prompt) });
    history.push_back({ "assistant", std::move(reply) });
}

void applyRefinement(Session& session, llm::RefinementResponse const& response)
{
    auto& snapshot = session.snapshot;
    auto& state = snapshot.state;
    state.generator_source = applyBlocks(state.generator_source, response.blocks, snapshot);
    auto edit = editCommands(state.commands, response.replace_command_list, response.add_command_list);
    for (auto const& u: edit.unknown)
        spdlog::warn("ignoring replacement of unknown command: {}", u);
    state.commands = std::move(edit.commands);
    snapshot.unknown_replacements.insert(snapshot.unknown_replacements.end(), edit.unknown.begin(),
                                         edit.unknown.end());
}

/// Compiles the generator, asking the model for fixes while the repair budget lasts.
auto compileGenerator(Context& context, Session& session, Problem const& problem) -> sandbox::ProgramHandle
{
    auto& state = session.snapshot.state;
    for (auto attempt = 0;; ++attempt)
    {
        auto compiled = context.sandbox.compile(state.generator_source, cpp);
        if (auto const* handle = std::get_if<sandbox::ProgramHandle>(&compiled))
            return *handle;

        auto const& diagnostics = std::get<sandbox::CompileFailure>(compiled).diagnostics;
        if (attempt >= context.config.compile_repair_attempts)
            throw Error(ErrorKind::generation, "generator does not compile:\n" + diagnostics);

        spdlog::info("{} iter {}: generator does not compile, requesting a fix", problem.id, state.iteration);
        auto report = FeedbackReport {};
        report.error_logs.push_back({ ErrorSource::generator, "compile", diagnostics, std::nullopt });
        auto prompt = llm::build_refinement_prompt(problem, state, report, context.config.truncation);
        auto result = context.gateway.call(session.generator_history, prompt, llm::Schema::refinement);
        ++session.snapshot.model_calls;
        exchange(session.generator_history, std::move(prompt), result.raw);
        applyRefinement(session, std::get<llm::RefinementResponse>(result.response));
        if (state.commands.empty())
            throw Error(ErrorKind::generation, "empty command list");
    }
}

/// Materializes inputs, produces ground truth and evaluates; fills suite, metrics and report.
void realize(Context& context, Session& session, Problem const& problem, sandbox::ProgramHandle const& generator)
{
    auto const& cfg = context.config;
    auto& snapshot = session.snapshot;
    auto& state = snapshot.state;

    auto logs = std::vector<ErrorLog> {};
    auto const runs = genkit::materialize_inputs(context.sandbox, generator, state.commands, cfg.generator_limits,
                                                 cfg.workers);
    for (auto const& run: runs)
        if (run.error)
            logs.push_back({ ErrorSource::generator, run.command, *run.error, std::nullopt });

    auto truth = genkit::ground_truth(context.sandbox, problem, runs, state.iteration, cfg.workers);
    logs.insert(logs.end(), truth.errors.begin(), truth.errors.end());
    state.suite = genkit::dedupe_suite(truth.cases);

    auto checker = sandbox::ProgramHandle {};
    if (cfg.mode == judge::EvalMode::checker && state.checker_source)
    {
        auto compiled = context.sandbox.compile(*state.checker_source, cpp);
        if (auto const* failure = std::get_if<sandbox::CompileFailure>(&compiled))
            logs.push_back({ ErrorSource::checker, "compile", failure->diagnostics, std::nullopt });
        else
            checker = std::get<sandbox::ProgramHandle>(compiled);
    }
    snapshot.eval_mode = checker ? judge::EvalMode::checker : judge::EvalMode::string;

    snapshot.report = FeedbackReport {};
    state.metrics.reset();
    if (!state.suite.empty())
    {
        auto options = judge::EvalOptions {};
        options.mode = snapshot.eval_mode;
        options.checker = checker;
        options.checker_limits = cfg.checker_limits;
        options.workers = cfg.workers;
        auto evaluation = judge::evaluate(context.sandbox, problem, state.suite, options);
        state.metrics = std::move(evaluation.metrics);
        snapshot.report = std::move(evaluation.report);
    }
    snapshot.report.error_logs.insert(snapshot.report.error_logs.begin(), logs.begin(), logs.end());

    if (state.metrics)
        spdlog::info("{} iter {}: {} cases, tpr {:.4f}, tnr {:.4f}, {} errors", problem.id, state.iteration,
                     state.suite.size(), state.metrics->tpr, state.metrics->tnr, snapshot.report.error_logs.size());
    else
        spdlog::info("{} iter {}: no usable cases, {} errors", problem.id, state.iteration,
                     snapshot.report.error_logs.size());
}

} // namespace

void validate(LoopConfig const& c)
{
    if (!(c.alpha > 0 && c.alpha <= 1))
        throw Error(ErrorKind::config, "alpha must be in (0, 1]");
    if (!(c.beta > 0 && c.beta <= 1))
        throw Error(ErrorKind::config, "beta must be in (0, 1]");
    if (c.n_max < 0)
        throw Error(ErrorKind::config, "n_max must not be negative");
    if (c.workers < 1)
        throw Error(ErrorKind::config, "workers must be at least 1");
    if (c.compile_repair_attempts < 0)
        throw Error(ErrorKind::config, "compile repair attempts must not be negative");
}

auto thresholds_met(QualityMetrics const& m, LoopConfig const& c) -> bool
{
    return m.tpr >= c.alpha && m.tnr >= c.beta;
}

auto to_string(Termination reason) -> std::string_view
{
    switch (reason)
    {
        case Termination::thresholds_met: return "thresholds_met";
        case Termination::iteration_cap: return "iteration_cap";
        case Termination::unrecoverable_error: return "unrecoverable_error";
    }
    return "unrecoverable_error";
}

auto parse_termination(std::string_view text) -> Termination
{
    for (auto const t: { Termination::thresholds_met, Termination::iteration_cap, Termination::unrecoverable_error })
        if (to_string(t) == text)
            return t;
    throw Error(ErrorKind::schema_violation, "unknown termination reason: " + std::string(text));
}

auto trace_to_json(LoopTrace const& trace) -> Json
{
    auto iterations = Json::array();
    for (auto const& s: trace.iterations)
        iterations.push_back({
            { "state", s.state },
            { "report", s.report },
            { "eval_mode", judge::to_string(s.eval_mode) },
            { "blocks_applied", s.blocks_applied },
            { "blocks_skipped", s.blocks_skipped },
            { "unknown_replacements", s.unknown_replacements },
            { "model_calls", s.model_calls },
        });
    return Json {
        { "problem_id", trace.problem_id },
        { "termination", to_string(trace.termination) },
        { "error", trace.error ? Json(*trace.error) : Json(nullptr) },
        { "iterations", iterations },
    };
}

auto trace_from_json(Json const& j) -> LoopTrace
{
    auto trace = LoopTrace {};
    trace.problem_id = j.at("problem_id").get<std::string>();
    trace.termination = parse_termination(j.at("termination").get<std::string>());
    if (auto const it = j.find("error"); it != j.end() && !it->is_null())
        trace.error = it->get<std::string>();
    for (auto const& s: j.at("iterations"))
    {
        auto snapshot = IterationSnapshot {};
        snapshot.state = s.at("state").get<IterationState>();
        snapshot.report = s.at("report").get<FeedbackReport>();
        snapshot.eval_mode = judge::parse_eval_mode(s.value("eval_mode", std::string("string")));
        snapshot.blocks_applied = s.value("blocks_applied", std::size_t { 0 });
        snapshot.blocks_skipped = s.value("blocks_skipped", std::size_t { 0 });
        snapshot.unknown_replacements = s.value("unknown_replacements", std::vector<std::string> {});
        snapshot.model_calls = s.value("model_calls", 0);
        trace.iterations.push_back(std::move(snapshot));
    }
    return trace;
}

auto run_initial(Context& context, Problem const& problem, std::optional<std::string> const& seed_generator)
    -> Session
{
    validate(context.config);
    auto session = Session {};
    auto& snapshot = session.snapshot;
    auto& state = snapshot.state;
    state.iteration = 0;

    auto const seed = seed_generator.value_or("");
    auto prompt = llm::build_initial_prompt(problem, seed);
    auto result = context.gateway.call({}, prompt, llm::Schema::generation);
    ++snapshot.model_calls;
    exchange(session.generator_history, std::move(prompt), result.raw);

    auto const& response = std::get<llm::GenerationResponse>(result.response);
    state.generator_source = applyBlocks(seed, response.blocks, snapshot);
    state.commands = uniqueCommands(response.command_list);
    state.constraints_summary = response.input_constraints_summary;
    if (state.commands.empty())
        throw Error(ErrorKind::generation, "empty command list");

    if (context.config.mode == judge::EvalMode::checker)
    {
        auto checkerPrompt = llm::build_initial_prompt(problem, "", llm::Role::checker);
        auto checkerResult =
            context.gateway.call({}, checkerPrompt, llm::Schema::generation, llm::Role::checker);
        ++snapshot.model_calls;
        exchange(session.checker_history, std::move(checkerPrompt), checkerResult.raw);
        auto const& checkerResponse = std::get<llm::GenerationResponse>(checkerResult.response);
        state.checker_source = applyBlocks("", checkerResponse.blocks, snapshot);
    }

    auto const generator = compileGenerator(context, session, problem);
    realize(context, session, problem, generator);
    return session;
}

auto step(Context& context, Session const& session, Problem const& problem) -> Session
{
    validate(context.config);
    auto next = session;
    auto& snapshot = next.snapshot;
    auto& state = snapshot.state;
    auto const& previous = session.snapshot;

    state.iteration = previous.state.iteration + 1;
    snapshot.blocks_applied = 0;
    snapshot.blocks_skipped = 0;
    snapshot.unknown_replacements.clear();
    snapshot.model_calls = 0;

    auto prompt = llm::build_refinement_prompt(problem, previous.state, previous.report, context.config.truncation);
    auto result = context.gateway.call(next.generator_history, prompt, llm::Schema::refinement);
    ++snapshot.model_calls;
    exchange(next.generator_history, std::move(prompt), result.raw);
    applyRefinement(next, std::get<llm::RefinementResponse>(result.response));
    if (state.commands.empty())
        throw Error(ErrorKind::generation, "empty command list");

    if (context.config.mode == judge::EvalMode::checker)
    {
        auto checkerPrompt = llm::build_refinement_prompt(problem, previous.state, previous.report,
                                                          context.config.truncation, llm::Role::checker);
        auto checkerResult =
            context.gateway.call(next.checker_history, checkerPrompt, llm::Schema::refinement, llm::Role::checker);
        ++snapshot.model_calls;
        exchange(next.checker_history, std::move(checkerPrompt), checkerResult.raw);
        auto const& response = std::get<llm::RefinementResponse>(checkerResult.response);
        state.checker_source = applyBlocks(state.checker_source.value_or(""), response.blocks, snapshot);
    }

    auto const generator = compileGenerator(context, next, problem);
    realize(context, next, problem, generator);

    if (context.config.compression_enabled)
    {
        next.generator_history = llm::compress_context(next.generator_history, problem, state);
        if (!next.checker_history.empty())
            next.checker_history = llm::compress_context(next.checker_history, problem, state, llm::Role::checker);
    }
    return next;
}

auto run_loop(Context& context, Problem const& problem, std::optional<Session>* last) -> LoopTrace
{
    auto trace = LoopTrace {};
    trace.problem_id = problem.id;

    auto session = std::optional<Session> {};
    try
    {
        session = run_initial(context, problem, problem.seed_generator);
    }
    catch (std::exception const& e)
    {
        spdlog::warn("{}: initial generation failed: {}", problem.id, e.what());
        trace.termination = Termination::unrecoverable_error;
        trace.error = e.what();
        return trace;
    }
    trace.iterations.push_back(session->snapshot);

    while (true)
    {
        auto const& metrics = session->snapshot.state.metrics;
        if (metrics && thresholds_met(*metrics, context.config))
        {
            trace.termination = Termination::thresholds_met;
            break;
        }
        if (session->snapshot.state.iteration >= context.config.n_max)
        {
            trace.termination = Termination::iteration_cap;
            break;
        }
        try
        {
            session = step(context, *session, problem);
        }
        catch (std::exception const& e)
        {
            spdlog::warn("{} iter {}: refinement failed: {}", problem.id, session->snapshot.state.iteration + 1,
                         e.what());
            trace.termination = Termination::unrecoverable_error;
            trace.error = e.what();
            break;
        }
        trace.iterations.push_back(session->snapshot);
    }
    if (last)
        *last = std::move(session);
    return trace;
}

} // namespace tcforge::loop
