// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace tcforge
{

/// Uniquely named directory removed recursively on destruction.
class TempDir
{
  public:
    explicit TempDir(std::filesystem::path const& parent = std::filesystem::temp_directory_path(),
                     std::string_view prefix = "tcforge-");
    ~TempDir();

    TempDir(TempDir const&) = delete;
    auto operator=(TempDir const&) -> TempDir& = delete;
    TempDir(TempDir&& other) noexcept;
    auto operator=(TempDir&& other) noexcept -> TempDir&;

    [[nodiscard]] auto path() const -> std::filesystem::path const& { return _path; }

  private:
    std::filesystem::path _path;
};

void write_file(std::filesystem::path const& path, std::string_view contents);
[[nodiscard]] auto read_file(std::filesystem::path const& path) -> std::string;

/// Writes to a sibling temporary file and renames it over the target.
void write_file_atomic(std::filesystem::path const& path, std::string_view contents);

} // namespace tcforge
