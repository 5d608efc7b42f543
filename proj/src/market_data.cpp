#include "ftk/market_data.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <set>
#include <sstream>

#include "ftk/errors.hpp"

namespace ftk {

namespace {

constexpr std::string_view kHeader = "kind,window,window2,bid,ask,id";

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_csv(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (true) {
        std::size_t comma = line.find(',', pos);
        if (comma == std::string_view::npos) {
            out.push_back(trim(line.substr(pos)));
            break;
        }
        out.push_back(trim(line.substr(pos, comma - pos)));
        pos = comma + 1;
    }
    return out;
}

int parse_int(std::string_view text, std::string_view what) {
    int value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty() || text.front() == '-') {
        throw std::invalid_argument("bad " + std::string(what) + " '" + std::string(text) + "'");
    }
    return value;
}

double parse_price(std::string_view text) {
    double value = 0.0;
    if (!text.empty() && text.front() == '+') text.remove_prefix(1);
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
        throw std::invalid_argument("bad price '" + std::string(text) + "'");
    }
    return value;
}

std::string format_price(double value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, ptr);
}

DeliveryWindow month_window(std::string_view code) {
    YearMonth ym = YearMonth::parse(code);
    return {ym, ym};
}

DeliveryWindow quarter_window(std::string_view code) {
    if (code.size() != 7 || code[4] != '-' || code[5] != 'Q') {
        throw std::invalid_argument("expected YYYY-Qn, got '" + std::string(code) + "'");
    }
    int year = parse_int(code.substr(0, 4), "year");
    int q = parse_int(code.substr(6, 1), "quarter");
    if (q < 1 || q > 4) throw std::invalid_argument("quarter out of range in '" + std::string(code) + "'");
    YearMonth start{year, 3 * (q - 1) + 1};
    return {start, start.plus(2)};
}

// Summer is April-September; winter is October through March of the following year.
DeliveryWindow season_window(std::string_view code) {
    if (code.size() != 6 || code[3] != '-') {
        throw std::invalid_argument("expected SUM-YY or WIN-YY, got '" + std::string(code) + "'");
    }
    int year = 2000 + parse_int(code.substr(4, 2), "season year");
    std::string_view tag = code.substr(0, 3);
    YearMonth start;
    if (tag == "SUM") {
        start = {year, 4};
    } else if (tag == "WIN") {
        start = {year, 10};
    } else {
        throw std::invalid_argument("unknown season '" + std::string(tag) + "'");
    }
    return {start, start.plus(5)};
}

DeliveryWindow year_window(std::string_view code) {
    if (code.size() != 4) throw std::invalid_argument("expected YYYY, got '" + std::string(code) + "'");
    int year = parse_int(code, "year");
    return {{year, 1}, {year, 12}};
}

std::string two_digits(int v) {
    char buf[8];
    std::snprintf(buf, sizeof(buf), "%02d", v % 100);
    return buf;
}

}  // namespace

std::string_view kind_code(ContractKind kind) noexcept {
    switch (kind) {
        case ContractKind::Month: return "M";
        case ContractKind::Quarter: return "Q";
        case ContractKind::Season: return "S";
        case ContractKind::Year: return "Y";
        case ContractKind::MonthSpread: return "MS";
        case ContractKind::QuarterSpread: return "QS";
    }
    return "?";
}

std::optional<ContractKind> kind_from_code(std::string_view code) noexcept {
    if (code == "M") return ContractKind::Month;
    if (code == "Q") return ContractKind::Quarter;
    if (code == "S") return ContractKind::Season;
    if (code == "Y") return ContractKind::Year;
    if (code == "MS") return ContractKind::MonthSpread;
    if (code == "QS") return ContractKind::QuarterSpread;
    return std::nullopt;
}

int window_length(ContractKind kind) noexcept {
    switch (kind) {
        case ContractKind::Month:
        case ContractKind::MonthSpread: return 1;
        case ContractKind::Quarter:
        case ContractKind::QuarterSpread: return 3;
        case ContractKind::Season: return 6;
        case ContractKind::Year: return 12;
    }
    return 0;
}

bool is_spread(ContractKind kind) noexcept {
    return kind == ContractKind::MonthSpread || kind == ContractKind::QuarterSpread;
}

int DeliveryWindow::days() const noexcept {
    int total = 0;
    for (int k = start.index(); k <= end.index(); ++k) total += YearMonth::from_index(k).days();
    return total;
}

DeliveryWindow parse_window(ContractKind kind, std::string_view code) {
    switch (kind) {
        case ContractKind::Month:
        case ContractKind::MonthSpread: return month_window(code);
        case ContractKind::Quarter:
        case ContractKind::QuarterSpread: return quarter_window(code);
        case ContractKind::Season: return season_window(code);
        case ContractKind::Year: return year_window(code);
    }
    throw std::invalid_argument("unknown contract kind");
}

std::string format_window(ContractKind kind, const DeliveryWindow& w) {
    switch (kind) {
        case ContractKind::Month:
        case ContractKind::MonthSpread: return w.start.to_string();
        case ContractKind::Quarter:
        case ContractKind::QuarterSpread:
            return std::to_string(w.start.year) + "-Q" + std::to_string((w.start.month - 1) / 3 + 1);
        case ContractKind::Season:
            return (w.start.month == 4 ? "SUM-" : "WIN-") + two_digits(w.start.year);
        case ContractKind::Year: return std::to_string(w.start.year);
    }
    return {};
}

void validate_quote(const Quote& q) {
    const std::string who = "quote '" + q.id + "': ";
    if (q.id.empty()) throw ValidationError("quote with empty id");
    if (!q.window.start.ok() || !q.window.end.ok() || q.window.end < q.window.start) {
        throw ValidationError(who + "delivery start after delivery end");
    }
    if (!(q.bid <= q.ask)) {
        throw ValidationError(who + "bid " + format_price(q.bid) + " above ask " + format_price(q.ask));
    }
    const int len = window_length(q.kind);
    if (q.window.months() != len) {
        throw ValidationError(who + "window of " + std::to_string(q.window.months()) +
                              " months, expected " + std::to_string(len));
    }
    if (is_spread(q.kind)) {
        if (!q.window2) throw ValidationError(who + "spread without second window");
        if (q.window2->months() != len) throw ValidationError(who + "spread legs differ in length");
        if (q.window.overlaps(*q.window2)) throw ValidationError(who + "spread legs overlap");
    } else if (q.window2) {
        throw ValidationError(who + "second window on an outright contract");
    }
    if (len == 3 && (q.window.start.month - 1) % 3 != 0) {
        throw ValidationError(who + "quarter not aligned to calendar quarter");
    }
}

void validate_snapshot(const MarketSnapshot& snapshot) {
    std::set<std::string> ids;
    const YearMonth obs = snapshot.observation_date.year_month();
    for (const auto& q : snapshot.quotes) {
        validate_quote(q);
        if (!ids.insert(q.id).second) throw ValidationError("duplicate quote id '" + q.id + "'");
        auto check_forward = [&](const DeliveryWindow& w) {
            if (!(obs < w.start)) {
                throw ValidationError("quote '" + q.id + "': delivery " + w.start.to_string() +
                                      " does not start after observation month " + obs.to_string());
            }
        };
        check_forward(q.window);
        if (q.window2) check_forward(*q.window2);
    }
}

std::vector<DeliveryMonth> window_months(const DeliveryWindow& window) {
    std::vector<DeliveryMonth> out;
    out.reserve(static_cast<std::size_t>(window.months()));
    for (int k = window.start.index(); k <= window.end.index(); ++k) {
        YearMonth ym = YearMonth::from_index(k);
        out.push_back({ym, ym.days(), 1});
    }
    return out;
}

std::vector<DeliveryMonth> delivery_months(const Quote& q) {
    if (!is_spread(q.kind)) return window_months(q.window);
    const DeliveryWindow& later = q.window.start < q.window2->start ? *q.window2 : q.window;
    const DeliveryWindow& earlier = q.window.start < q.window2->start ? q.window : *q.window2;
    auto out = window_months(later);
    for (auto m : window_months(earlier)) {
        m.sign = -1;
        out.push_back(m);
    }
    return out;
}

MarketSnapshot parse_snapshot(std::istream& in, const Date& observation_date) {
    MarketSnapshot snapshot;
    snapshot.observation_date = observation_date;

    std::string raw;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string_view line = trim(raw);
        if (line_no == 1 && line.size() >= 3 && line.substr(0, 3) == "\xEF\xBB\xBF") line.remove_prefix(3);
        if (line.empty() || line.front() == '#') continue;
        if (!header_seen) {
            if (line != kHeader) {
                throw ParseError(line_no, "expected header '" + std::string(kHeader) + "'");
            }
            header_seen = true;
            continue;
        }
        auto fields = split_csv(line);
        if (fields.size() != 5 && fields.size() != 6) {
            throw ParseError(line_no, "expected 6 fields, got " + std::to_string(fields.size()));
        }
        auto kind = kind_from_code(fields[0]);
        if (!kind) {
            throw ValidationError("line " + std::to_string(line_no) + ": unknown contract code '" +
                                  std::string(fields[0]) + "'");
        }
        Quote q;
        q.kind = *kind;
        try {
            q.window = parse_window(q.kind, fields[1]);
            if (is_spread(q.kind)) {
                q.window2 = parse_window(q.kind, fields[2]);
            } else if (!fields[2].empty() && parse_window(q.kind, fields[2]) != q.window) {
                throw std::invalid_argument("window2 must be empty for outright contracts");
            }
            q.bid = parse_price(fields[3]);
            q.ask = parse_price(fields[4]);
        } catch (const std::invalid_argument& e) {
            throw ParseError(line_no, e.what());
        }
        if (fields.size() == 6 && !fields[5].empty()) {
            q.id = std::string(fields[5]);
        } else {
            q.id = std::string(kind_code(q.kind)) + " " + format_window(q.kind, q.window);
            if (q.window2) q.id += "/" + format_window(q.kind, *q.window2);
        }
        try {
            validate_quote(q);
        } catch (const ValidationError& e) {
            throw ValidationError("line " + std::to_string(line_no) + ": " + e.what());
        }
        snapshot.quotes.push_back(std::move(q));
    }
    if (!header_seen) throw ParseError(line_no + 1, "missing header");
    validate_snapshot(snapshot);
    return snapshot;
}

MarketSnapshot parse_snapshot(const std::string& path, const Date& observation_date) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open input file '" + path + "'");
    return parse_snapshot(in, observation_date);
}

std::string serialize_snapshot(const MarketSnapshot& snapshot) {
    std::ostringstream out;
    out << kHeader << '\n';
    for (const auto& q : snapshot.quotes) {
        if (q.id.find(',') != std::string::npos) {
            throw ValidationError("quote id '" + q.id + "' contains a comma");
        }
        out << kind_code(q.kind) << ',' << format_window(q.kind, q.window) << ','
            << (q.window2 ? format_window(q.kind, *q.window2) : std::string{}) << ','
            << format_price(q.bid) << ',' << format_price(q.ask) << ',' << q.id << '\n';
    }
    return out.str();
}

std::string_view snapshot_csv_schema() noexcept {
    return R"(Quote file: CSV, UTF-8, header row `kind,window,window2,bid,ask,id`.
  kind     M (month), Q (quarter), S (season), Y (year), MS (month spread), QS (quarter spread)
  window   M/MS: YYYY-MM   Q/QS: YYYY-Qn   S: SUM-YY (Apr-Sep) or WIN-YY (Oct-Mar next year)   Y: YYYY
  window2  second leg for MS/QS, empty otherwise
  bid,ask  decimal prices with '.' separator; bid <= ask
  id       unique contract identifier (generated from kind and window when empty)
Spread prices are quoted as later leg minus earlier leg, whatever the column order.
Delivery must start after the observation month (--asof).)";
}

}  // namespace ftk
