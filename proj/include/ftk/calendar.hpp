#pragma once

#include <chrono>
#include <compare>
#include <string>
#include <string_view>

namespace ftk {

/// A calendar month. Ordered, hashable through `index()`.
struct YearMonth {
    int year = 1970;
    int month = 1;  // 1..12

    /// Months since January of year 0.
    int index() const noexcept { return year * 12 + (month - 1); }
    static YearMonth from_index(int idx) noexcept;

    YearMonth plus(int months) const noexcept { return from_index(index() + months); }
    int days() const noexcept;
    bool ok() const noexcept { return month >= 1 && month <= 12; }

    std::chrono::sys_days first_day() const noexcept;

    /// "YYYY-MM"
    std::string to_string() const;
    /// Parses "YYYY-MM"; throws std::invalid_argument.
    static YearMonth parse(std::string_view text);

    friend bool operator==(const YearMonth& a, const YearMonth& b) noexcept {
        return a.index() == b.index();
    }
    friend std::strong_ordering operator<=>(const YearMonth& a, const YearMonth& b) noexcept {
        return a.index() <=> b.index();
    }
};

/// Number of months from `a` to `b` (b - a).
inline int months_between(const YearMonth& a, const YearMonth& b) noexcept {
    return b.index() - a.index();
}

/// Calendar date with ISO parsing; thin wrapper over std::chrono.
class Date {
public:
    Date() = default;
    Date(int year, int month, int day);

    /// Parses "YYYY-MM-DD"; throws std::invalid_argument.
    static Date parse(std::string_view iso);

    int year() const noexcept { return static_cast<int>(ymd_.year()); }
    int month() const noexcept { return static_cast<int>(static_cast<unsigned>(ymd_.month())); }
    int day() const noexcept { return static_cast<int>(static_cast<unsigned>(ymd_.day())); }
    YearMonth year_month() const noexcept { return {year(), month()}; }
    std::chrono::sys_days sys_days() const noexcept { return std::chrono::sys_days{ymd_}; }

    std::string to_string() const;

    friend bool operator==(const Date& a, const Date& b) noexcept { return a.ymd_ == b.ymd_; }

private:
    std::chrono::year_month_day ymd_{std::chrono::year{1970}, std::chrono::month{1},
                                     std::chrono::day{1}};
};

/// ACT/365-fixed year fraction between two day points.
double year_fraction_act365(std::chrono::sys_days from, std::chrono::sys_days to) noexcept;

}  // namespace ftk
