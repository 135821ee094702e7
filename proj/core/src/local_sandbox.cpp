// SPDX-License-Identifier: Apache-2.0
#include <tcforge/argv.hpp>
#include <tcforge/errors.hpp>
#include <tcforge/local_sandbox.hpp>
#include <tcforge/text.hpp>

#include <algorithm>
#include <array>
#include <cerrno>
#include <chrono>
#include <cstdlib>
#include <cstring>
#include <fstream>

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/resource.h>
#include <sys/stat.h>
#include <sys/wait.h>
#include <unistd.h>

extern char** environ;

namespace tcforge::sandbox
{

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace
{

class Fd
{
  public:
    Fd() = default;
    explicit Fd(int fd): _fd(fd) {}
    ~Fd() { reset(); }
    Fd(Fd&& o) noexcept: _fd(std::exchange(o._fd, -1)) {}
    auto operator=(Fd&& o) noexcept -> Fd&
    {
        if (this != &o)
        {
            reset();
            _fd = std::exchange(o._fd, -1);
        }
        return *this;
    }
    Fd(Fd const&) = delete;
    auto operator=(Fd const&) -> Fd& = delete;

    [[nodiscard]] auto get() const noexcept -> int { return _fd; }
    [[nodiscard]] auto valid() const noexcept -> bool { return _fd >= 0; }
    void reset() noexcept
    {
        if (_fd >= 0)
            ::close(_fd);
        _fd = -1;
    }

  private:
    int _fd = -1;
};

struct Pipe
{
    Fd read;
    Fd write;
};

auto makePipe() -> Pipe
{
    auto fds = std::array<int, 2> {};
    if (::pipe2(fds.data(), O_CLOEXEC) != 0)
        throw Error(ErrorKind::infrastructure, std::string("pipe2 failed: ") + std::strerror(errno));
    return { Fd(fds[0]), Fd(fds[1]) };
}

auto resolveExecutable(std::string const& name) -> std::optional<std::string>
{
    auto const isExecutable = [](std::string const& path) {
        struct stat st {};
        return ::stat(path.c_str(), &st) == 0 && S_ISREG(st.st_mode) && ::access(path.c_str(), X_OK) == 0;
    };

    if (name.find('/') != std::string::npos)
        return isExecutable(name) ? std::optional(name) : std::nullopt;

    char const* path = std::getenv("PATH");
    auto const dirs = std::string(path ? path : "/usr/local/bin:/usr/bin:/bin");
    auto start = std::size_t { 0 };
    while (start <= dirs.size())
    {
        auto end = dirs.find(':', start);
        if (end == std::string::npos)
            end = dirs.size();
        auto dir = dirs.substr(start, end - start);
        auto candidate = (dir.empty() ? std::string(".") : dir) + "/" + name;
        if (isExecutable(candidate))
            return candidate;
        start = end + 1;
    }
    return std::nullopt;
}

// Resident high-water mark of a live process in KiB, or 0 when unavailable.
auto readPeakRssKib(pid_t pid) -> std::int64_t
{
    auto in = std::ifstream("/proc/" + std::to_string(pid) + "/status");
    auto line = std::string {};
    while (std::getline(in, line))
        if (line.rfind("VmHWM:", 0) == 0)
            return std::strtoll(line.c_str() + 6, nullptr, 10);
    return 0;
}

void appendCapped(Bytes& buffer, bool& truncated, char const* data, std::size_t n, std::int64_t cap)
{
    auto const room = static_cast<std::size_t>(cap) > buffer.size() ? static_cast<std::size_t>(cap) - buffer.size()
                                                                    : std::size_t { 0 };
    if (n > room)
    {
        truncated = true;
        n = room;
    }
    buffer.append(data, n);
}

auto looksLikeAllocationFailure(Bytes const& stderrData) -> bool
{
    for (auto const* marker: { "std::bad_alloc", "MemoryError", "Cannot allocate memory", "out of memory",
                               "OutOfMemoryError" })
        if (stderrData.find(marker) != Bytes::npos)
            return true;
    return false;
}

auto substitute(std::string word, std::map<std::string, std::string> const& values) -> std::string
{
    for (auto const& [key, value]: values)
    {
        auto const token = "{" + key + "}";
        for (auto pos = word.find(token); pos != std::string::npos; pos = word.find(token, pos + value.size()))
            word.replace(pos, token.size(), value);
    }
    return word;
}

auto expandTemplate(std::string const& tmpl, std::map<std::string, std::string> const& values)
    -> std::vector<std::string>
{
    auto words = split_command(tmpl);
    for (auto& w: words)
        w = substitute(std::move(w), values);
    return words;
}

} // namespace

LocalSandbox::LocalSandbox(LocalSandboxOptions options): _options(std::move(options))
{
    if (_options.work_dir.empty())
    {
        _ownedWorkDir.emplace(fs::temp_directory_path(), "tcforge-sandbox-");
        _workDir = _ownedWorkDir->path();
    }
    else
    {
        fs::create_directories(_options.work_dir);
        _workDir = fs::absolute(_options.work_dir);
    }
    fs::create_directories(_workDir / "compile");
    fs::create_directories(_workDir / "runs");
}

LocalSandbox::~LocalSandbox() = default;

auto LocalSandbox::compile(std::string_view source, Language const& language) -> CompileResult
{
    auto const it = _options.toolchains.find(language.name());
    if (it == _options.toolchains.end())
        throw Error(ErrorKind::toolchain_missing, "no toolchain configured for language '" + language.name() + "'");
    auto const& toolchain = it->second;

    auto const key = sha256_hex(language.name() + '\0' + toolchain.version + '\0' + toolchain.compile_template
                                + '\0' + toolchain.run_template + '\0' + _options.assets_dir.string() + '\0'
                                + std::string(source));

    auto promise = std::promise<CompileResult> {};
    auto future = std::shared_future<CompileResult> {};
    auto owner = false;
    {
        auto lock = std::lock_guard(_cacheMutex);
        if (auto const cached = _cache.find(key); cached != _cache.end())
            future = cached->second;
        else
        {
            future = promise.get_future().share();
            _cache.emplace(key, future);
            owner = true;
        }
    }

    if (owner)
    {
        try
        {
            promise.set_value(compileUncached(std::string(source), language, toolchain, key));
        }
        catch (...)
        {
            // Configuration errors are not cached: a later call may run with a fixed PATH.
            {
                auto lock = std::lock_guard(_cacheMutex);
                _cache.erase(key);
            }
            promise.set_exception(std::current_exception());
        }
    }
    return future.get();
}

auto LocalSandbox::compileUncached(std::string source, Language language, Toolchain toolchain, std::string key)
    -> CompileResult
{
    auto const root = _workDir / "compile";
    auto const dir = root / key;
    auto const assets = _options.assets_dir.empty() ? dir.string() : fs::absolute(_options.assets_dir).string();
    auto const valuesFor = [&](fs::path const& d) {
        return std::map<std::string, std::string> {
            { "src", (d / toolchain.source_name).string() },
            { "exe", (d / "prog").string() },
            { "dir", d.string() },
            { "assets", assets },
        };
    };

    // Artifacts are built in a staging directory and renamed into place with a marker, so a
    // persistent work dir can be shared by concurrent processes and reused across runs.
    if (!fs::exists(dir / ".built"))
    {
        fs::create_directories(root);
        auto staging = TempDir(root, key.substr(0, 16) + ".staging-");
        auto const values = valuesFor(staging.path());
        write_file(staging.path() / toolchain.source_name, source);

        if (!toolchain.compile_template.empty())
        {
            auto const argv = expandTemplate(toolchain.compile_template, values);
            if (argv.empty())
                throw Error(ErrorKind::config, "empty compile command for language '" + language.name() + "'");
            if (!resolveExecutable(argv.front()))
                throw Error(ErrorKind::toolchain_missing, "compiler not found: " + argv.front());

            auto const record = execute(argv, {}, staging.path(),
                                        { _options.compile_time_limit_ms, _options.compile_memory_limit_mb, 1 << 20 });
            if (record.outcome == ExecOutcome::spawn_failure)
                throw Error(ErrorKind::toolchain_missing, "cannot launch compiler: " + record.detail);
            if (record.outcome != ExecOutcome::ok)
            {
                auto diagnostics = replace_all(record.stderr_data + record.stdout_data, staging.path().string(), dir.string());
                if (record.outcome == ExecOutcome::timeout)
                    diagnostics += "\ncompilation timed out";
                else if (record.outcome == ExecOutcome::oom)
                    diagnostics += "\ncompilation exceeded the memory limit";
                return CompileFailure { std::move(diagnostics) };
            }
        }
        write_file(staging.path() / ".built", "");

        auto ec = std::error_code {};
        fs::rename(staging.path(), dir, ec);
        if (ec && !fs::exists(dir / ".built"))
        {
            // A stale directory from an interrupted run; replace it.
            fs::remove_all(dir);
            fs::rename(staging.path(), dir);
        }
    }

    auto program = std::make_shared<CompiledProgram>();
    program->language = std::move(language);
    program->key = std::move(key);
    program->source = std::move(source);
    program->dir = dir;
    program->run_argv = expandTemplate(toolchain.run_template, valuesFor(dir));
    return ProgramHandle(std::move(program));
}

auto LocalSandbox::run(ExecSpec const& spec) -> ExecRecord
{
    auto failed = [](std::string detail) {
        auto r = ExecRecord {};
        r.outcome = ExecOutcome::spawn_failure;
        r.detail = std::move(detail);
        return r;
    };
    if (!spec.program)
        return failed("no program");
    if (spec.time_limit_ms <= 0 || spec.output_cap <= 0 || spec.memory_limit_mb <= 0)
        return failed("invalid limits");

    auto argv = spec.program->run_argv;
    argv.insert(argv.end(), spec.argv.begin(), spec.argv.end());
    return execute(argv, spec.stdin_data, std::nullopt, { spec.time_limit_ms, spec.memory_limit_mb, spec.output_cap });
}

auto LocalSandbox::execute(std::vector<std::string> const& argv, Bytes const& input,
                           std::optional<fs::path> const& cwd, Limits limits) -> ExecRecord
{
    auto record = ExecRecord {};
    auto const spawnFailure = [&](std::string detail) {
        record.outcome = ExecOutcome::spawn_failure;
        record.detail = std::move(detail);
        return record;
    };

    if (argv.empty())
        return spawnFailure("empty argv");
    auto const exe = resolveExecutable(argv.front());
    if (!exe)
        return spawnFailure("executable not found: " + argv.front());

    auto runDir = TempDir(_workDir / "runs", "run-");
    auto const stdinPath = runDir.path() / ".stdin";
    write_file(stdinPath, input);
    auto stdinFd = Fd(::open(stdinPath.c_str(), O_RDONLY | O_CLOEXEC));
    if (!stdinFd.valid())
        return spawnFailure(std::string("cannot open stdin file: ") + std::strerror(errno));

    auto out = makePipe();
    auto err = makePipe();
    auto execStatus = makePipe();

    // Everything the child touches is prepared up front: only async-signal-safe calls after fork().
    auto const workDir = (cwd ? *cwd : runDir.path()).string();
    auto argvStorage = argv;
    auto argvPtrs = std::vector<char*> {};
    for (auto& a: argvStorage)
        argvPtrs.push_back(a.data());
    argvPtrs.push_back(nullptr);

    auto const asLimit = _options.address_space_slack_mb > 0
                             ? static_cast<rlim_t>(2 * limits.memory_mb + _options.address_space_slack_mb) << 20
                             : RLIM_INFINITY;
    auto const cpuSeconds = static_cast<rlim_t>((limits.time_ms + 999) / 1000 + 1);

    auto const start = Clock::now();
    auto const pid = ::fork();
    if (pid < 0)
        return spawnFailure(std::string("fork failed: ") + std::strerror(errno));

    if (pid == 0)
    {
        ::setpgid(0, 0);
        ::dup2(stdinFd.get(), STDIN_FILENO);
        ::dup2(out.write.get(), STDOUT_FILENO);
        ::dup2(err.write.get(), STDERR_FILENO);
        if (::chdir(workDir.c_str()) != 0)
        {
            int e = errno;
            [[maybe_unused]] auto _ = ::write(execStatus.write.get(), &e, sizeof e);
            ::_exit(127);
        }
        auto rl = rlimit {};
        if (asLimit != RLIM_INFINITY)
        {
            rl.rlim_cur = rl.rlim_max = asLimit;
            ::setrlimit(RLIMIT_AS, &rl);
        }
        rl.rlim_cur = cpuSeconds;
        rl.rlim_max = cpuSeconds + 1;
        ::setrlimit(RLIMIT_CPU, &rl);
        rl.rlim_cur = rl.rlim_max = 0;
        ::setrlimit(RLIMIT_CORE, &rl);
        ::execve(exe->c_str(), argvPtrs.data(), environ);
        int e = errno;
        [[maybe_unused]] auto _ = ::write(execStatus.write.get(), &e, sizeof e);
        ::_exit(127);
    }

    ::setpgid(pid, pid);
    stdinFd.reset();
    out.write.reset();
    err.write.reset();
    execStatus.write.reset();

    auto childErrno = 0;
    auto const n = ::read(execStatus.read.get(), &childErrno, sizeof childErrno);
    if (n == static_cast<ssize_t>(sizeof childErrno))
    {
        ::kill(-pid, SIGKILL);
        auto status = 0;
        ::waitpid(pid, &status, 0);
        return spawnFailure(std::string("exec failed: ") + std::strerror(childErrno));
    }

    auto const limitBytes = limits.memory_mb * 1024;
    auto peakKib = std::int64_t { 0 };
    auto exited = false;
    auto killedForTime = false;
    auto killedForMemory = false;
    auto finish = start;
    auto status = 0;
    auto usage = rusage {};

    auto fds = std::array<pollfd, 2> { { { out.read.get(), POLLIN, 0 }, { err.read.get(), POLLIN, 0 } } };
    auto openStreams = 2;
    auto buffer = std::array<char, 65536> {};
    auto drainDeadline = std::optional<Clock::time_point> {};

    while (!exited || openStreams > 0)
    {
        auto const now = Clock::now();
        auto const elapsedMs = std::chrono::duration_cast<std::chrono::milliseconds>(now - start).count();

        if (!exited)
        {
            auto info = siginfo_t {};
            info.si_pid = 0;
            if (::waitid(P_PID, static_cast<id_t>(pid), &info, WEXITED | WNOHANG | WNOWAIT) == 0 && info.si_pid == pid)
            {
                finish = Clock::now();
                ::kill(-pid, SIGKILL); // stragglers in the process group
                ::wait4(pid, &status, 0, &usage);
                exited = true;
                drainDeadline = Clock::now() + std::chrono::milliseconds(500);
            }
            else
            {
                peakKib = std::max(peakKib, readPeakRssKib(pid));
                if (peakKib > limitBytes && !killedForMemory && !killedForTime)
                {
                    killedForMemory = true;
                    ::kill(-pid, SIGKILL);
                }
                else if (elapsedMs >= limits.time_ms && !killedForMemory && !killedForTime)
                {
                    killedForTime = true;
                    ::kill(-pid, SIGKILL);
                }
            }
        }
        else if (drainDeadline && now > *drainDeadline)
        {
            break;
        }

        if (openStreams == 0)
        {
            if (!exited)
                ::usleep(static_cast<useconds_t>(_options.poll_interval_ms * 1000));
            continue;
        }

        auto timeout = _options.poll_interval_ms;
        if (!exited && !killedForTime && !killedForMemory)
            timeout = static_cast<int>(std::clamp<std::int64_t>(limits.time_ms - elapsedMs, 0, timeout));
        if (::poll(fds.data(), fds.size(), timeout) < 0 && errno != EINTR)
            break;

        for (auto i = std::size_t { 0 }; i < fds.size(); ++i)
        {
            if (fds[i].fd < 0 || (fds[i].revents & (POLLIN | POLLHUP | POLLERR)) == 0)
                continue;
            auto const got = ::read(fds[i].fd, buffer.data(), buffer.size());
            if (got > 0)
            {
                if (i == 0)
                    appendCapped(record.stdout_data, record.stdout_truncated, buffer.data(),
                                 static_cast<std::size_t>(got), limits.output_cap);
                else
                    appendCapped(record.stderr_data, record.stderr_truncated, buffer.data(),
                                 static_cast<std::size_t>(got), limits.output_cap);
            }
            else if (got == 0 || (errno != EINTR && errno != EAGAIN))
            {
                fds[i].fd = -1;
                --openStreams;
            }
        }
    }

    record.wall_time_ms = std::chrono::duration_cast<std::chrono::milliseconds>(finish - start).count();
    record.peak_memory_mb = static_cast<double>(peakKib) / 1024.0;

    if (WIFEXITED(status))
        record.exit_status = WEXITSTATUS(status);
    else if (WIFSIGNALED(status))
        record.term_signal = WTERMSIG(status);

    if (killedForTime || record.term_signal == SIGXCPU)
    {
        record.outcome = ExecOutcome::timeout;
        record.detail = "time limit exceeded";
    }
    else if (killedForMemory || peakKib > limitBytes)
    {
        record.outcome = ExecOutcome::oom;
        record.detail = "memory limit exceeded";
    }
    else if (WIFEXITED(status) && record.exit_status == 0)
    {
        if (record.wall_time_ms > limits.time_ms)
        {
            record.outcome = ExecOutcome::timeout;
            record.detail = "time limit exceeded";
        }
        else
            record.outcome = ExecOutcome::ok;
    }
    else if (looksLikeAllocationFailure(record.stderr_data))
    {
        record.outcome = ExecOutcome::oom;
        record.detail = "allocation failed under the address-space limit";
    }
    else
    {
        record.outcome = ExecOutcome::nonzero_exit;
        record.detail = record.term_signal != 0 ? "killed by signal " + std::to_string(record.term_signal)
                                                : "exit code " + std::to_string(record.exit_status);
    }
    return record;
}

} // namespace tcforge::sandbox
