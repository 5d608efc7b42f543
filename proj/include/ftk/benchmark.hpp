#pragma once

#include <span>
#include <string>
#include <vector>

#include "ftk/curve.hpp"
#include "ftk/market_data.hpp"

namespace ftk {

/// Classical kriging of one-month mid prices: zero prior mean, Gaussian
/// kernel, tiny nugget. Bid/ask widths and longer delivery periods are ignored.
struct BenchmarkModel {
    std::vector<double> maturities;  // strictly increasing, grid time axis
    std::vector<double> mids;
    std::vector<std::string> source_ids;
    KernelParams params;
    double nugget = 0.0;  // absolute variance
    Vector weights;       // (K + nugget I)^-1 mids
};

inline constexpr double kDefaultNugget = 1e-10;

/// Fits on the given points; `relative_nugget` is in units of sigma^2.
/// Points are sorted by maturity first; duplicates throw ValidationError and
/// fewer than two points throw ConfigError.
BenchmarkModel fit_benchmark(std::span<const double> maturities, std::span<const double> mids,
                             const KernelParams& params, double relative_nugget = kDefaultNugget);

/// Fits on the snapshot's one-month quotes only, at their grid node times.
BenchmarkModel fit_benchmark(const MarketSnapshot& snapshot, const TimeGrid& grid, const KernelParams& params,
                             double relative_nugget = kDefaultNugget);

/// Refits (sigma, theta) by maximum likelihood on the one-month quotes alone,
/// for use instead of the main model's parameters.
KernelParams refit_benchmark_params(const MarketSnapshot& snapshot, const TimeGrid& grid);

/// k(T)' weights with k_a(T) = sigma^2 K(|T - T_a|, theta). Defined everywhere;
/// far from the data it decays to the zero prior mean.
double eval_benchmark(const BenchmarkModel& model, double T);

/// Benchmark price of a delivery window: day-count average over its node times.
double benchmark_window(const BenchmarkModel& model, const TimeGrid& grid, std::span<const DeliveryMonth> months);

}  // namespace ftk
