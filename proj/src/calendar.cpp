#include "ftk/calendar.hpp"

#include <charconv>
#include <cstdio>
#include <stdexcept>

namespace ftk {

namespace {

int parse_digits(std::string_view text, std::string_view whole) {
    int value = 0;
    for (char c : text) {
        if (c < '0' || c > '9') {
            throw std::invalid_argument("non-digit in '" + std::string(whole) + "'");
        }
        value = value * 10 + (c - '0');
    }
    return value;
}

}  // namespace

YearMonth YearMonth::from_index(int idx) noexcept {
    // floor division so negative indices stay well defined
    int year = idx >= 0 ? idx / 12 : -((-idx + 11) / 12);
    return {year, idx - year * 12 + 1};
}

int YearMonth::days() const noexcept {
    using namespace std::chrono;
    year_month_day_last last{std::chrono::year{year} / std::chrono::month{static_cast<unsigned>(month)} / std::chrono::last};
    return static_cast<int>(static_cast<unsigned>(last.day()));
}

std::chrono::sys_days YearMonth::first_day() const noexcept {
    using namespace std::chrono;
    return sys_days{std::chrono::year{year} / std::chrono::month{static_cast<unsigned>(month)} / 1};
}

std::string YearMonth::to_string() const {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d", year, month);
    return buf;
}

YearMonth YearMonth::parse(std::string_view text) {
    if (text.size() != 7 || text[4] != '-') {
        throw std::invalid_argument("expected YYYY-MM, got '" + std::string(text) + "'");
    }
    YearMonth ym{parse_digits(text.substr(0, 4), text), parse_digits(text.substr(5, 2), text)};
    if (!ym.ok()) {
        throw std::invalid_argument("month out of range in '" + std::string(text) + "'");
    }
    return ym;
}

Date::Date(int year, int month, int day)
    : ymd_(std::chrono::year{year}, std::chrono::month{static_cast<unsigned>(month)},
           std::chrono::day{static_cast<unsigned>(day)}) {
    if (!ymd_.ok()) {
        throw std::invalid_argument("invalid calendar date");
    }
}

Date Date::parse(std::string_view iso) {
    if (iso.size() != 10 || iso[4] != '-' || iso[7] != '-') {
        throw std::invalid_argument("expected YYYY-MM-DD, got '" + std::string(iso) + "'");
    }
    int y = parse_digits(iso.substr(0, 4), iso);
    int m = parse_digits(iso.substr(5, 2), iso);
    int d = parse_digits(iso.substr(8, 2), iso);
    std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
                                    std::chrono::day{static_cast<unsigned>(d)}};
    if (!ymd.ok()) {
        throw std::invalid_argument("invalid calendar date '" + std::string(iso) + "'");
    }
    return Date(y, m, d);
}

std::string Date::to_string() const {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", year(), month(), day());
    return buf;
}

double year_fraction_act365(std::chrono::sys_days from, std::chrono::sys_days to) noexcept {
    return static_cast<double>((to - from).count()) / 365.0;
}

}  // namespace ftk
