// SPDX-License-Identifier: Apache-2.0
#include <tcforge/errors.hpp>
#include <tcforge/temp_dir.hpp>

#include <cerrno>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>
#include <system_error>

#include <unistd.h>

namespace tcforge
{

namespace fs = std::filesystem;

TempDir::TempDir(fs::path const& parent, std::string_view prefix)
{
    fs::create_directories(parent);
    auto pattern = (parent / (std::string(prefix) + "XXXXXX")).string();
    if (::mkdtemp(pattern.data()) == nullptr)
        throw Error(ErrorKind::io, "mkdtemp failed under " + parent.string() + ": " + std::strerror(errno));
    _path = pattern;
}

TempDir::~TempDir()
{
    if (!_path.empty())
    {
        auto ec = std::error_code {};
        fs::remove_all(_path, ec);
    }
}

TempDir::TempDir(TempDir&& other) noexcept: _path(std::exchange(other._path, {}))
{
}

auto TempDir::operator=(TempDir&& other) noexcept -> TempDir&
{
    if (this != &other)
    {
        if (!_path.empty())
        {
            auto ec = std::error_code {};
            fs::remove_all(_path, ec);
        }
        _path = std::exchange(other._path, {});
    }
    return *this;
}

void write_file(fs::path const& path, std::string_view contents)
{
    auto out = std::ofstream(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw Error(ErrorKind::io, "cannot open for writing: " + path.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out)
        throw Error(ErrorKind::io, "write failed: " + path.string());
}

auto read_file(fs::path const& path) -> std::string
{
    auto in = std::ifstream(path, std::ios::binary);
    if (!in)
        throw Error(ErrorKind::io, "cannot open for reading: " + path.string());
    auto buffer = std::ostringstream {};
    buffer << in.rdbuf();
    return std::move(buffer).str();
}

void write_file_atomic(fs::path const& path, std::string_view contents)
{
    if (path.has_parent_path())
        fs::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp." + std::to_string(::getpid());
    write_file(tmp, contents);
    auto ec = std::error_code {};
    fs::rename(tmp, path, ec);
    if (ec)
        throw Error(ErrorKind::io, "rename to " + path.string() + " failed: " + ec.message());
}

} // namespace tcforge
