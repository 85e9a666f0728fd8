#include "tg/format.hpp"

#include <charconv>
#include <cstdint>

#include "tg/error.hpp"

namespace tg {

std::string format_double(double v) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

double parse_double(std::string_view s, std::string_view what) {
    double v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
        throw Error(ErrorKind::parse,
                    "malformed " + std::string(what) + " '" + std::string(s) + "'");
    }
    return v;
}

std::uint64_t parse_u64(std::string_view s, std::string_view what) {
    if (!s.empty() && s.front() == '-') {
        throw Error(ErrorKind::parse,
                    "negative " + std::string(what) + " '" + std::string(s) + "'");
    }
    std::uint64_t v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
        throw Error(ErrorKind::parse,
                    "malformed " + std::string(what) + " '" + std::string(s) + "'");
    }
    return v;
}

std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> fields;
    std::string current;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    current.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                current.push_back(c);
            }
        } else if (c == '"' && current.empty()) {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(current));
            current.clear();
        } else {
            current.push_back(c);
        }
    }
    if (quoted) throw Error(ErrorKind::parse, "unterminated quote in CSV line");
    fields.push_back(std::move(current));
    return fields;
}

std::string csv_field(std::string_view value) {
    const bool needs_quote =
        value.find_first_of(",\"") != std::string_view::npos ||
        (!value.empty() && value.front() == '#');
    if (!needs_quote) return std::string(value);
    std::string out = "\"";
    for (char c : value) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out.push_back('"');
    return out;
}

bool is_comment_line(std::string_view line) {
    return !line.empty() && line.front() == '#';
}

}  // namespace tg
