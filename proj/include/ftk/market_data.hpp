#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ftk/calendar.hpp"

namespace ftk {

enum class ContractKind { Month, Quarter, Season, Year, MonthSpread, QuarterSpread };

/// File code: M, Q, S, Y, MS, QS.
std::string_view kind_code(ContractKind kind) noexcept;
std::optional<ContractKind> kind_from_code(std::string_view code) noexcept;

/// Delivery length in months of one leg.
int window_length(ContractKind kind) noexcept;
bool is_spread(ContractKind kind) noexcept;

/// Inclusive range of delivery months.
struct DeliveryWindow {
    YearMonth start;
    YearMonth end;

    int months() const noexcept { return months_between(start, end) + 1; }
    int days() const noexcept;
    bool overlaps(const DeliveryWindow& other) const noexcept {
        return !(end < other.start || other.end < start);
    }
    friend bool operator==(const DeliveryWindow&, const DeliveryWindow&) = default;
};

struct Quote {
    std::string id;
    ContractKind kind = ContractKind::Month;
    DeliveryWindow window;
    /// Second leg, spreads only.
    std::optional<DeliveryWindow> window2;
    double bid = 0.0;
    double ask = 0.0;

    double mid() const noexcept { return 0.5 * (bid + ask); }
};

/// One delivery month of a quote with its calendar day count.
/// `sign` is +1 for outright contracts and the later leg of a spread, -1 for the earlier leg.
struct DeliveryMonth {
    YearMonth month;
    int days = 0;
    int sign = 1;

    friend bool operator==(const DeliveryMonth&, const DeliveryMonth&) = default;
};

struct MarketSnapshot {
    Date observation_date;
    std::vector<Quote> quotes;
};

/// Throws ValidationError when a quote breaks its kind's invariants.
void validate_quote(const Quote& q);

/// Checks per-quote invariants plus id uniqueness and forward-only delivery.
void validate_snapshot(const MarketSnapshot& snapshot);

/// Expands a quote into its delivery months; spreads list the later leg (+1) first.
std::vector<DeliveryMonth> delivery_months(const Quote& q);

/// Months of an inclusive window, each with sign +1.
std::vector<DeliveryMonth> window_months(const DeliveryWindow& window);

/// Resolves a window code for `kind`: YYYY-MM, YYYY-Qn, SUM-YY/WIN-YY or YYYY.
/// Spread kinds take their leg's code (YYYY-MM for MS, YYYY-Qn for QS).
DeliveryWindow parse_window(ContractKind kind, std::string_view code);
std::string format_window(ContractKind kind, const DeliveryWindow& window);

/// CSV with header `kind,window,window2,bid,ask,id`.
MarketSnapshot parse_snapshot(const std::string& path, const Date& observation_date);
MarketSnapshot parse_snapshot(std::istream& in, const Date& observation_date);

std::string serialize_snapshot(const MarketSnapshot& snapshot);

/// Human-readable description of the CSV layout, used by `--help`.
std::string_view snapshot_csv_schema() noexcept;

}  // namespace ftk
