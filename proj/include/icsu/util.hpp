#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace icsu {

/// Lowercase hex SHA-256 of the raw bytes of `text`.
std::string sha256_hex(std::string_view text);

std::string_view trim(std::string_view s);
std::string ascii_lower(std::string_view s);

/// Collapses runs of ASCII whitespace to one space and strips both ends.
std::string collapse_whitespace(std::string_view s);

std::vector<std::string> split(std::string_view s, char sep);

/// Reads a whole file; throws IoError when it cannot be opened.
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

/// Lines of `contents` without their terminators ("\r\n" tolerated).
std::vector<std::string> split_lines(std::string_view contents);

/// Replaces characters that are unsafe in file names with '_'.
std::string safe_file_name(std::string_view id);

}  // namespace icsu
