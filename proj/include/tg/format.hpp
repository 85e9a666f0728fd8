#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace tg {

/// Shortest round-trip decimal form, locale-independent (std::to_chars).
std::string format_double(double v);

/// Parses a full string as a double; throws Error(parse) on trailing
/// garbage, empty input, or out-of-range values.
double parse_double(std::string_view s, std::string_view what);

/// Parses a full string as a non-negative integer.
std::uint64_t parse_u64(std::string_view s, std::string_view what);

/// Splits one CSV line. Supports RFC-4180 style double-quoted fields with
/// doubled quotes; no embedded newlines.
std::vector<std::string> split_csv_line(std::string_view line);

/// Quotes a field when it contains a comma, quote, or leading '#'.
std::string csv_field(std::string_view value);

/// Comment lines start with '#'; loaders skip them.
bool is_comment_line(std::string_view line);

}  // namespace tg
