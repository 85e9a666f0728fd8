#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace tg {

/// UTC calendar day. All campaign timestamps are reduced to days; no
/// timezone arithmetic happens anywhere in the toolkit.
struct Date {
    int year = 0;
    int month = 0;  // 1..12
    int day = 0;    // 1..days_in_month

    auto operator<=>(const Date&) const = default;

    /// Strict "YYYY-MM-DD". Throws Error(parse) on anything else,
    /// including calendar-invalid dates.
    static Date parse(std::string_view s);

    std::string to_string() const;
};

struct DateRange {
    Date start;
    Date end;  // inclusive

    bool contains(const Date& d) const { return start <= d && d <= end; }
};

bool is_valid_date(int year, int month, int day);

}  // namespace tg
