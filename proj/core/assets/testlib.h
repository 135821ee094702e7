// SPDX-License-Identifier: Apache-2.0
// A compact, source-compatible subset of the testlib API used by generators and checkers.
// Deterministic: the random stream depends only on the command line.
// Drop the upstream testlib.h into the assets directory to use the full library instead.
#ifndef TCFORGE_TESTLIB_H
#define TCFORGE_TESTLIB_H

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdarg>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <iostream>
#include <iterator>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

enum TResult
{
    _ok = 0,
    _wa = 1,
    _pe = 2,
    _fail = 3,
};

inline std::string __testlib_vformat(char const* fmt, va_list ap)
{
    va_list copy;
    va_copy(copy, ap);
    int const n = std::vsnprintf(nullptr, 0, fmt, copy);
    va_end(copy);
    std::string out(n > 0 ? static_cast<std::size_t>(n) : 0, '\0');
    if (n > 0)
        std::vsnprintf(&out[0], out.size() + 1, fmt, ap);
    return out;
}

inline std::string format(char const* fmt, ...)
{
    va_list ap;
    va_start(ap, fmt);
    std::string out = __testlib_vformat(fmt, ap);
    va_end(ap);
    return out;
}

[[noreturn]] inline void quit(TResult result, std::string const& message)
{
    static char const* const names[] = { "ok", "wrong answer", "wrong output format", "FAIL" };
    std::fflush(stdout);
    std::fprintf(stderr, "%s %s\n", names[result], message.c_str());
    std::exit(static_cast<int>(result));
}

[[noreturn]] inline void quit(TResult result, char const* message)
{
    quit(result, std::string(message));
}

[[noreturn]] inline void quitf(TResult result, char const* fmt, ...)
{
    va_list ap;
    va_start(ap, fmt);
    std::string message = __testlib_vformat(fmt, ap);
    va_end(ap);
    quit(result, message);
}

#define ensuref(cond, ...)                                                                          \
    do                                                                                              \
    {                                                                                               \
        if (!(cond))                                                                                \
            quitf(_fail, __VA_ARGS__);                                                              \
    } while (false)

#define ensure(cond)                                                                                \
    do                                                                                              \
    {                                                                                               \
        if (!(cond))                                                                                \
            quit(_fail, std::string("condition failed: ") + #cond);                                 \
    } while (false)

// splitmix64 seeding into xoshiro256**; stable across compilers and standard libraries.
class random_t
{
public:
    random_t() { setSeed(0x9e3779b97f4a7c15ULL); }

    void setSeed(std::uint64_t seed)
    {
        for (auto& s: state)
        {
            seed += 0x9e3779b97f4a7c15ULL;
            std::uint64_t z = seed;
            z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
            z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
            s = z ^ (z >> 31);
        }
    }

    void setSeed(int argc, char* argv[])
    {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (int i = 1; i < argc; ++i)
        {
            for (char const* p = argv[i]; *p; ++p)
                h = (h ^ static_cast<unsigned char>(*p)) * 0x100000001b3ULL;
            h = (h ^ 0xff) * 0x100000001b3ULL;
        }
        setSeed(h);
    }

    std::uint64_t nextBits()
    {
        std::uint64_t const result = rotl(state[1] * 5, 7) * 9;
        std::uint64_t const t = state[1] << 17;
        state[2] ^= state[0];
        state[3] ^= state[1];
        state[1] ^= state[2];
        state[0] ^= state[3];
        state[2] ^= t;
        state[3] = rotl(state[3], 45);
        return result;
    }

    // Uniform in [0, n).
    std::uint64_t nextBelow(std::uint64_t n)
    {
        if (n == 0)
            quit(_fail, "random_t: empty range");
        std::uint64_t const limit = std::numeric_limits<std::uint64_t>::max()
                                    - std::numeric_limits<std::uint64_t>::max() % n;
        std::uint64_t x;
        do
            x = nextBits();
        while (x >= limit);
        return x % n;
    }

    // Uniform in [0, 1).
    double next() { return static_cast<double>(nextBits() >> 11) * (1.0 / 9007199254740992.0); }

    template <class T, typename std::enable_if<std::is_integral<T>::value, int>::type = 0>
    T next(T n)
    {
        if (n <= 0)
            quit(_fail, "random_t::next(n): n must be positive");
        return static_cast<T>(nextBelow(static_cast<std::uint64_t>(n)));
    }

    double next(double n) { return next() * n; }

    template <class A, class B,
              typename std::enable_if<std::is_integral<A>::value && std::is_integral<B>::value, int>::type = 0>
    typename std::common_type<A, B>::type next(A from, B to)
    {
        using T = typename std::common_type<A, B>::type;
        if (static_cast<T>(from) > static_cast<T>(to))
            quit(_fail, "random_t::next(from, to): from > to");
        std::uint64_t const span = static_cast<std::uint64_t>(static_cast<T>(to))
                                   - static_cast<std::uint64_t>(static_cast<T>(from));
        std::uint64_t const offset = span == std::numeric_limits<std::uint64_t>::max() ? nextBits()
                                                                                       : nextBelow(span + 1);
        return static_cast<T>(static_cast<std::uint64_t>(static_cast<T>(from)) + offset);
    }

    template <class A, class B,
              typename std::enable_if<!(std::is_integral<A>::value && std::is_integral<B>::value), int>::type = 0>
    double next(A from, B to)
    {
        double const lo = static_cast<double>(from);
        double const hi = static_cast<double>(to);
        if (lo > hi)
            quit(_fail, "random_t::next(from, to): from > to");
        return lo + next() * (hi - lo);
    }

    // Patterns: literals, [a-z0-9_] classes, '.' (printable), with {n}, {n,m}, ?, *, + repetition.
    std::string next(std::string const& pattern) { return nextPattern(pattern); }
    std::string next(char const* pattern) { return nextPattern(pattern); }

    template <class T>
    T wnext(T n, int type)
    {
        T result = next(n);
        for (int i = 0; i < std::abs(type); ++i)
        {
            T const other = next(n);
            result = type > 0 ? std::max(result, other) : std::min(result, other);
        }
        return result;
    }

    template <class A, class B>
    auto wnext(A from, B to, int type) -> decltype(next(from, to))
    {
        auto result = next(from, to);
        for (int i = 0; i < std::abs(type); ++i)
        {
            auto const other = next(from, to);
            result = type > 0 ? std::max(result, other) : std::min(result, other);
        }
        return result;
    }

    template <class Container>
    auto any(Container const& c) -> decltype(*std::begin(c))
    {
        auto const size = static_cast<std::size_t>(std::distance(std::begin(c), std::end(c)));
        if (size == 0)
            quit(_fail, "random_t::any: empty container");
        auto it = std::begin(c);
        std::advance(it, static_cast<std::ptrdiff_t>(nextBelow(size)));
        return *it;
    }

    template <class T = int>
    std::vector<T> perm(T n, T first = 0)
    {
        std::vector<T> p(static_cast<std::size_t>(n));
        std::iota(p.begin(), p.end(), first);
        shuffle(p.begin(), p.end());
        return p;
    }

    // `size` distinct values from [from, to].
    template <class T>
    std::vector<T> distinct(int size, T from, T to)
    {
        if (size < 0 || static_cast<long double>(to) - from + 1 < size)
            quit(_fail, "random_t::distinct: range too small");
        std::set<T> seen;
        std::vector<T> out;
        while (static_cast<int>(out.size()) < size)
        {
            T const v = next(from, to);
            if (seen.insert(v).second)
                out.push_back(v);
        }
        return out;
    }

    template <class It>
    void shuffle(It first, It last)
    {
        auto const n = std::distance(first, last);
        for (decltype(std::distance(first, last)) i = n - 1; i > 0; --i)
            std::iter_swap(first + i, first + static_cast<decltype(i)>(nextBelow(static_cast<std::uint64_t>(i + 1))));
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::string nextPattern(std::string const& pattern)
    {
        std::string out;
        std::size_t i = 0;
        while (i < pattern.size())
        {
            std::string alphabet;
            if (pattern[i] == '[')
            {
                std::size_t const close = pattern.find(']', i + 1);
                if (close == std::string::npos)
                    quit(_fail, "random_t: unterminated class in pattern " + pattern);
                for (std::size_t k = i + 1; k < close; ++k)
                {
                    if (k + 2 < close && pattern[k + 1] == '-')
                    {
                        for (int c = static_cast<unsigned char>(pattern[k]); c <= static_cast<unsigned char>(pattern[k + 2]);
                             ++c)
                            alphabet.push_back(static_cast<char>(c));
                        k += 2;
                    }
                    else
                        alphabet.push_back(pattern[k] == '\\' && k + 1 < close ? pattern[++k] : pattern[k]);
                }
                i = close + 1;
            }
            else if (pattern[i] == '.')
            {
                for (char c = 33; c < 127; ++c)
                    alphabet.push_back(c);
                ++i;
            }
            else
            {
                if (pattern[i] == '\\' && i + 1 < pattern.size())
                    ++i;
                alphabet.push_back(pattern[i++]);
            }
            if (alphabet.empty())
                quit(_fail, "random_t: empty class in pattern " + pattern);

            long long lo = 1, hi = 1;
            if (i < pattern.size() && pattern[i] == '{')
            {
                std::size_t const close = pattern.find('}', i);
                if (close == std::string::npos)
                    quit(_fail, "random_t: unterminated repetition in pattern " + pattern);
                std::string const body = pattern.substr(i + 1, close - i - 1);
                std::size_t const comma = body.find(',');
                lo = std::atoll(body.substr(0, comma).c_str());
                hi = comma == std::string::npos ? lo : std::atoll(body.substr(comma + 1).c_str());
                i = close + 1;
            }
            else if (i < pattern.size() && (pattern[i] == '?' || pattern[i] == '*' || pattern[i] == '+'))
            {
                lo = pattern[i] == '+' ? 1 : 0;
                hi = pattern[i] == '?' ? 1 : 16;
                ++i;
            }
            long long const count = next(lo, hi);
            for (long long k = 0; k < count; ++k)
                out.push_back(alphabet[nextBelow(alphabet.size())]);
        }
        return out;
    }

    std::uint64_t state[4];
};

inline random_t rnd;

template <class It>
void shuffle(It first, It last)
{
    rnd.shuffle(first, last);
}

// Command-line options: "-n 5", "--n 5", "-n=5" and "--n=5" are all accepted.
inline std::vector<std::string> __testlib_argv;

inline bool __testlib_find_opt(std::string const& name, std::string* value)
{
    for (std::size_t i = 1; i < __testlib_argv.size(); ++i)
    {
        std::string arg = __testlib_argv[i];
        if (arg.size() < 2 || arg[0] != '-')
            continue;
        arg.erase(0, arg[1] == '-' ? 2 : 1);
        std::size_t const eq = arg.find('=');
        if (eq != std::string::npos)
        {
            if (arg.substr(0, eq) != name)
                continue;
            if (value)
                *value = arg.substr(eq + 1);
            return true;
        }
        if (arg != name)
            continue;
        if (value)
        {
            if (i + 1 >= __testlib_argv.size())
                quit(_fail, "option " + name + " has no value");
            *value = __testlib_argv[i + 1];
        }
        return true;
    }
    return false;
}

inline bool has_opt(std::string const& name)
{
    return __testlib_find_opt(name, nullptr);
}

template <class T>
T opt(std::string const& name)
{
    std::string raw;
    if (!__testlib_find_opt(name, &raw))
        quit(_fail, "missing option " + name);
    if (std::is_same<T, bool>::value)
        return static_cast<T>(raw == "1" || raw == "true");
    std::istringstream in(raw);
    T value{};
    if (!(in >> value))
        quit(_fail, "option " + name + " has an invalid value: " + raw);
    char extra;
    if (in >> extra)
        quit(_fail, "option " + name + " has an invalid value: " + raw);
    return value;
}

template <>
inline std::string opt<std::string>(std::string const& name)
{
    std::string raw;
    if (!__testlib_find_opt(name, &raw))
        quit(_fail, "missing option " + name);
    return raw;
}

template <class T>
T opt(std::string const& name, T const& fallback)
{
    return has_opt(name) ? opt<T>(name) : fallback;
}

inline std::string opt(std::string const& name, char const* fallback)
{
    return has_opt(name) ? opt<std::string>(name) : std::string(fallback);
}

// Positional argument, 1-based like argv.
template <class T>
T opt(int index)
{
    if (index <= 0 || static_cast<std::size_t>(index) >= __testlib_argv.size())
        quit(_fail, format("missing positional argument %d", index));
    std::istringstream in(__testlib_argv[static_cast<std::size_t>(index)]);
    T value{};
    if (!(in >> value))
        quit(_fail, format("positional argument %d is invalid", index));
    return value;
}

inline void registerGen(int argc, char* argv[], int /*randomGeneratorVersion*/ = 1)
{
    __testlib_argv.assign(argv, argv + argc);
    rnd.setSeed(argc, argv);
}

class InStream
{
public:
    InStream() = default;

    void init(std::string const& path, TResult on_error)
    {
        std::ifstream in(path, std::ios::binary);
        if (!in)
            quit(_fail, "cannot open " + path);
        data.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
        pos = 0;
        error = on_error;
    }

    bool eof() const { return pos >= data.size(); }

    bool seekEof()
    {
        while (!eof() && std::isspace(static_cast<unsigned char>(data[pos])))
            ++pos;
        return eof();
    }

    bool seekEoln()
    {
        while (!eof() && (data[pos] == ' ' || data[pos] == '\t' || data[pos] == '\r'))
            ++pos;
        return eof() || data[pos] == '\n';
    }

    bool eoln() const { return !eof() && (data[pos] == '\n' || data[pos] == '\r'); }

    void readEoln()
    {
        if (!eof() && data[pos] == '\r')
            ++pos;
        if (eof() || data[pos] != '\n')
            fail("expected end of line");
        ++pos;
    }

    void readSpace()
    {
        if (eof() || data[pos] != ' ')
            fail("expected a space");
        ++pos;
    }

    void readChar(char c)
    {
        if (eof() || data[pos] != c)
            fail(format("expected character '%c'", c));
        ++pos;
    }

    char readChar()
    {
        if (eof())
            fail("unexpected end of file");
        return data[pos++];
    }

    void readEof()
    {
        if (!eof())
            fail("expected end of file");
    }

    std::string readToken()
    {
        skipBlanks();
        if (eof())
            fail("unexpected end of file");
        std::size_t const begin = pos;
        while (!eof() && !std::isspace(static_cast<unsigned char>(data[pos])))
            ++pos;
        return data.substr(begin, pos - begin);
    }

    std::string readWord() { return readToken(); }
    std::string readString() { return readLine(); }

    std::string readLine()
    {
        std::size_t const begin = pos;
        while (!eof() && data[pos] != '\n')
            ++pos;
        std::string line = data.substr(begin, pos - begin);
        if (!eof())
            ++pos;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        return line;
    }

    long long readLong()
    {
        std::string const token = readToken();
        char* end = nullptr;
        errno = 0;
        long long const value = std::strtoll(token.c_str(), &end, 10);
        if (token.empty() || *end != '\0' || errno == ERANGE)
            fail("expected an integer, found \"" + clip(token) + "\"");
        return value;
    }

    long long readLong(long long lo, long long hi, std::string const& name = "")
    {
        long long const value = readLong();
        if (value < lo || value > hi)
            fail(format("%s=%lld is out of range [%lld, %lld]", label(name), value, lo, hi));
        return value;
    }

    int readInt()
    {
        long long const value = readLong();
        if (value < std::numeric_limits<int>::min() || value > std::numeric_limits<int>::max())
            fail(format("integer %lld does not fit in int", value));
        return static_cast<int>(value);
    }

    int readInt(int lo, int hi, std::string const& name = "")
    {
        return static_cast<int>(readLong(lo, hi, name));
    }

    std::vector<int> readInts(int count, int lo, int hi, std::string const& name = "")
    {
        std::vector<int> out;
        for (int i = 0; i < count; ++i)
            out.push_back(readInt(lo, hi, name));
        return out;
    }

    std::vector<long long> readLongs(int count, long long lo, long long hi, std::string const& name = "")
    {
        std::vector<long long> out;
        for (int i = 0; i < count; ++i)
            out.push_back(readLong(lo, hi, name));
        return out;
    }

    double readDouble()
    {
        std::string const token = readToken();
        char* end = nullptr;
        double const value = std::strtod(token.c_str(), &end);
        if (token.empty() || *end != '\0' || !std::isfinite(value))
            fail("expected a real number, found \"" + clip(token) + "\"");
        return value;
    }

    double readDouble(double lo, double hi, std::string const& name = "")
    {
        double const value = readDouble();
        if (value < lo || value > hi)
            fail(format("%s=%g is out of range [%g, %g]", label(name), value, lo, hi));
        return value;
    }

    double readReal() { return readDouble(); }
    double readReal(double lo, double hi, std::string const& name = "") { return readDouble(lo, hi, name); }

    [[noreturn]] void quitf(TResult result, char const* fmt, ...)
    {
        va_list ap;
        va_start(ap, fmt);
        std::string message = __testlib_vformat(fmt, ap);
        va_end(ap);
        quit(result, message);
    }

private:
    void skipBlanks()
    {
        while (!eof() && std::isspace(static_cast<unsigned char>(data[pos])))
            ++pos;
    }

    static std::string clip(std::string const& s) { return s.size() > 64 ? s.substr(0, 64) + "..." : s; }
    static char const* label(std::string const& name) { return name.empty() ? "value" : name.c_str(); }

    [[noreturn]] void fail(std::string const& message) { quit(error, message); }

    std::string data;
    std::size_t pos = 0;
    TResult error = _fail;
};

inline InStream inf;
inline InStream ouf;
inline InStream ans;

// Checker entry point: checker <input> <contestant output> <reference answer>.
inline void registerTestlibCmd(int argc, char* argv[])
{
    __testlib_argv.assign(argv, argv + argc);
    if (argc < 4)
        quit(_fail, "usage: checker <input> <output> <answer>");
    inf.init(argv[1], _fail);
    ouf.init(argv[2], _pe);
    ans.init(argv[3], _fail);
}

// Validators take the input file as their first argument.
inline void registerValidation(int argc, char* argv[])
{
    __testlib_argv.assign(argv, argv + argc);
    if (argc < 2)
        quit(_fail, "usage: validator <input>");
    inf.init(argv[1], _fail);
}

inline bool doubleCompare(double expected, double result, double maxDoubleError)
{
    if (std::isnan(expected) || std::isnan(result))
        return std::isnan(expected) && std::isnan(result);
    if (std::isinf(expected) || std::isinf(result))
        return expected == result;
    double const diff = std::fabs(result - expected);
    return diff <= maxDoubleError + 1e-15 || diff <= std::fabs(expected) * maxDoubleError + 1e-15;
}

inline void println() { std::cout << '\n'; }

template <class T>
void __testlib_print(T const& value)
{
    std::cout << value;
}

template <class T>
void __testlib_print(std::vector<T> const& values)
{
    for (std::size_t i = 0; i < values.size(); ++i)
    {
        if (i)
            std::cout << ' ';
        std::cout << values[i];
    }
}

template <class T, class... Rest>
void println(T const& first, Rest const&... rest)
{
    __testlib_print(first);
    ((std::cout << ' ', __testlib_print(rest)), ...);
    std::cout << '\n';
}

#endif
