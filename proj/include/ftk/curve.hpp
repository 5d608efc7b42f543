#pragma once

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "ftk/calendar.hpp"
#include "ftk/market_data.hpp"

namespace ftk {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Node spacing of the monthly grid, in years.
inline constexpr double kMonthStep = 1.0 / 12.0;

/// Evenly spaced monthly grid. Node k (0-based) sits at t_k = k / 12 and
/// carries calendar month `origin + k`. Actual day counts only enter the
/// averaging weights, never the node spacing.
class TimeGrid {
public:
    TimeGrid() = default;
    TimeGrid(YearMonth origin, int size);

    /// Covers the first through the last delivery month of the snapshot.
    static TimeGrid covering(const MarketSnapshot& snapshot);

    int size() const noexcept { return size_; }
    double dt() const noexcept { return kMonthStep; }
    YearMonth origin() const noexcept { return origin_; }
    YearMonth month(int k) const noexcept { return origin_.plus(k); }
    double time(int k) const noexcept { return static_cast<double>(k) / 12.0; }
    double span() const noexcept { return size_ > 0 ? time(size_ - 1) : 0.0; }

    /// Node index for a calendar month, if on the grid.
    std::optional<int> index_of(const YearMonth& ym) const noexcept;

    std::vector<double> times() const;

private:
    YearMonth origin_{};
    int size_ = 0;
};

struct KernelParams {
    double sigma = 1.0;  // prior scale, price units
    double theta = 1.0;  // correlation length, years
};

/// Linear B-spline hat function (1 - |x|/dt)^+.
double basis_phi(double x, double dt) noexcept;

/// Gaussian radial kernel exp(-x^2 / (2 theta^2)).
double kernel(double x, double theta) noexcept;

/// Prior covariance of the node coefficients with its Cholesky factor.
struct PriorCovariance {
    Matrix gamma;
    Eigen::LLT<Matrix> factor;
    /// Diagonal jitter actually added, relative to sigma^2.
    double jitter = 0.0;

    Matrix lower() const { return factor.matrixL(); }
};

inline constexpr double kJitterStart = 1e-10;
inline constexpr double kJitterMax = 1e-6;

/// sigma^2 K(|t_i - t_j|, theta) plus diagonal jitter, starting at 1e-10 sigma^2
/// and escalating x10 up to 1e-6 sigma^2 until the factorization succeeds.
/// Throws NumericalError if it never does.
PriorCovariance prior_cov(const TimeGrid& grid, const KernelParams& params);

/// Covariance matrix only, at a fixed relative jitter.
Matrix prior_cov_matrix(const TimeGrid& grid, const KernelParams& params, double jitter);

/// Diagonal of the observation covariance: ((ask - bid)/2)^2, floored at
/// 1e-8 (median mid)^2 for zero-width quotes.
Vector obs_cov(std::span<const Quote> quotes);

struct CurveModel {
    TimeGrid grid;
    KernelParams params;
    Vector xi;
    double gamma_penalty = 0.0;
    bool seasonality_enabled = false;
};

/// F(T) = sum_k xi_k phi(T - t_k). Throws CoverageError outside [t_1 - dt, t_N + dt].
double eval_curve(const CurveModel& model, double T);

/// Averaging weights over grid nodes for a list of delivery months. Outright
/// windows sum to 1; spread legs are normalized per leg and signed.
/// Throws CoverageError for months off the grid.
Vector window_weights(const TimeGrid& grid, std::span<const DeliveryMonth> months);

/// Day-count weighted average of node prices over the months.
double price_window(const CurveModel& model, std::span<const DeliveryMonth> months);

}  // namespace ftk
