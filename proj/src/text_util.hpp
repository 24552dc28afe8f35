#ifndef PHONEVAL_SRC_TEXT_UTIL_HPP
#define PHONEVAL_SRC_TEXT_UTIL_HPP

// Small parsing helpers shared by the file readers. Not installed.

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "phoneval/types.hpp"

namespace phoneval::detail {

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

std::vector<std::string_view> split_lines(std::string_view text);
std::vector<std::string_view> split(std::string_view s, char sep);
std::vector<std::string_view> split_ws(std::string_view s);
std::string_view trim(std::string_view s);

bool is_valid_utf8(std::string_view s);

/// Whole-token integer parse; throws ValidationError mentioning `where`.
long parse_int(std::string_view token, const std::string& where);
double parse_double(std::string_view token, const std::string& where);

/// Decimal seconds to integer microseconds without going through binary
/// floating point (digits past the sixth decimal round half up).
Micros parse_seconds(std::string_view token, const std::string& where);

/// Inverse of parse_seconds: at least two decimals, trailing zeros trimmed.
std::string format_seconds(Micros t);

}  // namespace phoneval::detail

#endif  // PHONEVAL_SRC_TEXT_UTIL_HPP
