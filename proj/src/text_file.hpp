#pragma once

// Line-oriented file helpers shared by the loaders. Not part of the public API.

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace clarion::detail {

bool is_valid_utf8(std::string_view text);

/// Reads all lines, stripping a trailing '\r'. Throws MissingFile or
/// InvalidEncoding (with the 1-based line number).
std::vector<std::string> read_lines(const std::filesystem::path& path);

std::vector<std::string> split_tabs(std::string_view line);
std::vector<std::string> split_whitespace(std::string_view line);

std::string_view trim(std::string_view text);

/// Strict decimal parse: the whole field must be consumed.
bool parse_double(std::string_view field, double& out);
bool parse_int(std::string_view field, long long& out);

/// Throws MalformedRow when a field would break the TSV layout.
void check_tsv_field(std::string_view field, std::string_view what);

}  // namespace clarion::detail
