#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace transbench::text {

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

/// True when `bytes` is well-formed UTF-8 (no overlongs, no surrogates).
bool is_valid_utf8(std::string_view bytes);

std::string_view rtrim(std::string_view s);
std::string_view trim(std::string_view s);
bool is_blank(std::string_view s);

/// Splits on '\n'. A trailing newline does not produce an empty last element.
std::vector<std::string_view> split_lines(std::string_view s);

std::string join(const std::vector<std::string>& parts, std::string_view sep);
std::vector<std::string> split(std::string_view s, char sep);

/// Lowercase hex SHA-256 of the given bytes.
std::string sha256_hex(std::string_view bytes);

/// Cuts `s` to at most `max_bytes`, never splitting a UTF-8 sequence.
std::string_view utf8_prefix(std::string_view s, std::size_t max_bytes);

}  // namespace transbench::text
