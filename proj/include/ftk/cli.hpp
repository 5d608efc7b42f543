#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "ftk/benchmark.hpp"
#include "ftk/model_io.hpp"
#include "ftk/uncertainty.hpp"

namespace ftk {

enum class TableFormat { Csv, Json };

struct RunConfig {
    std::string input;
    Date asof;
    /// Unset means default_gamma() of the snapshot.
    std::optional<double> gamma;
    bool seasonality = true;
    bool refit_benchmark = false;
    std::uint64_t seed = 1;
    int n_samples = 10000;
    QuantilePair quantiles;
    std::string out_dir = ".";
    TableFormat format = TableFormat::Csv;
};

/// Throws ConfigError: gamma >= 0, n_samples >= 100, 0 < lower < upper < 1.
void validate_config(const RunConfig& config);

struct PriceRow {
    std::string id;
    double bid = 0.0;
    double ask = 0.0;
    double F = 0.0;    // penalized model
    double F_K = 0.0;  // unpenalized model
    double F_B = 0.0;  // benchmark
};

struct Calibration {
    PersistedModel model;
    BenchmarkModel benchmark;
    std::vector<PriceRow> table;  // input quote order
};

/// Both model variants and the benchmark. With seasonality off or gamma 0
/// the two variants coincide. A default gamma on a grid too short for the
/// penalty falls back to 0; an explicit one throws ConfigError.
Calibration calibrate_snapshot(const MarketSnapshot& snapshot, const RunConfig& config);

std::string format_table(const std::vector<PriceRow>& table, TableFormat format);
/// Per node: delivery_start, t (ACT/365 from the observation date), F, F_K, F_B.
std::string format_curve(const Calibration& calibration);

struct BandRow {
    YearMonth delivery_start;
    double t = 0.0;
    double lower = 0.0;
    double mean = 0.0;  // sample mean of the accepted draws
    double upper = 0.0;
    double map = 0.0;
};

struct BandSeries {
    int months = 1;
    std::vector<BandRow> rows;
};

inline constexpr int kBandPeriods[] = {1, 3, 6, 12};

/// Samples the posterior of one model variant and summarizes contracts of
/// 1, 3, 6 and 12 consecutive delivery months starting at every node.
std::vector<BandSeries> compute_bands(const PersistedModel& model, const RunConfig& config, bool unpenalized,
                                      PosteriorBand* band_out = nullptr);

std::string format_band(const BandSeries& series);

/// Parses "YYYY-MM:YYYY-MM" (inclusive) into delivery months.
std::vector<DeliveryMonth> parse_price_window(const std::string& text);

/// Entry point. Returns the process exit code; messages go to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ftk
