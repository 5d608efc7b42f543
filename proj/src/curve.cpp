#include "ftk/curve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ftk/errors.hpp"

namespace ftk {

TimeGrid::TimeGrid(YearMonth origin, int size) : origin_(origin), size_(size) {
    if (size < 1) throw ConfigError("time grid needs at least one node");
}

TimeGrid TimeGrid::covering(const MarketSnapshot& snapshot) {
    if (snapshot.quotes.empty()) throw ConfigError("snapshot has no quotes");
    YearMonth first = snapshot.quotes.front().window.start;
    YearMonth last = snapshot.quotes.front().window.end;
    for (const auto& q : snapshot.quotes) {
        for (const auto& m : delivery_months(q)) {
            first = std::min(first, m.month);
            last = std::max(last, m.month);
        }
    }
    return TimeGrid(first, months_between(first, last) + 1);
}

std::optional<int> TimeGrid::index_of(const YearMonth& ym) const noexcept {
    int k = months_between(origin_, ym);
    if (k < 0 || k >= size_) return std::nullopt;
    return k;
}

std::vector<double> TimeGrid::times() const {
    std::vector<double> out(static_cast<std::size_t>(size_));
    for (int k = 0; k < size_; ++k) out[static_cast<std::size_t>(k)] = time(k);
    return out;
}

double basis_phi(double x, double dt) noexcept {
    return std::max(0.0, 1.0 - std::abs(x) / dt);
}

double kernel(double x, double theta) noexcept {
    return std::exp(-(x * x) / (2.0 * theta * theta));
}

Matrix prior_cov_matrix(const TimeGrid& grid, const KernelParams& params, double jitter) {
    const int n = grid.size();
    const double s2 = params.sigma * params.sigma;
    // Stationary kernel on an even grid: one value per lag.
    std::vector<double> by_lag(static_cast<std::size_t>(n));
    for (int d = 0; d < n; ++d) by_lag[static_cast<std::size_t>(d)] = s2 * kernel(grid.time(d), params.theta);
    Matrix gamma(n, n);
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) gamma(i, j) = by_lag[static_cast<std::size_t>(std::abs(i - j))];
    }
    gamma.diagonal().array() += jitter * s2;
    return gamma;
}

PriorCovariance prior_cov(const TimeGrid& grid, const KernelParams& params) {
    if (!(params.sigma > 0.0) || !(params.theta > 0.0)) {
        throw ConfigError("kernel parameters must be positive");
    }
    PriorCovariance out;
    for (double jitter = kJitterStart; jitter <= kJitterMax * 1.0000001; jitter *= 10.0) {
        out.gamma = prior_cov_matrix(grid, params, jitter);
        out.factor.compute(out.gamma);
        if (out.factor.info() == Eigen::Success) {
            out.jitter = jitter;
            return out;
        }
    }
    throw NumericalError("prior covariance not positive definite after jitter escalation (sigma=" +
                         std::to_string(params.sigma) + ", theta=" + std::to_string(params.theta) + ")");
}

Vector obs_cov(std::span<const Quote> quotes) {
    const auto n = static_cast<Eigen::Index>(quotes.size());
    Vector diag(n);
    if (n == 0) return diag;
    std::vector<double> mids;
    mids.reserve(quotes.size());
    for (const auto& q : quotes) mids.push_back(std::abs(q.mid()));
    auto mid_it = mids.begin() + static_cast<std::ptrdiff_t>(mids.size() / 2);
    std::nth_element(mids.begin(), mid_it, mids.end());
    double median = *mid_it;
    if (mids.size() % 2 == 0) {
        median = 0.5 * (median + *std::max_element(mids.begin(), mid_it));
    }
    const double floor = std::max(1e-8 * median * median, std::numeric_limits<double>::min());
    for (Eigen::Index j = 0; j < n; ++j) {
        const auto& q = quotes[static_cast<std::size_t>(j)];
        const double half = 0.5 * (q.ask - q.bid);
        diag(j) = std::max(half * half, floor);
    }
    return diag;
}

double eval_curve(const CurveModel& model, double T) {
    const TimeGrid& grid = model.grid;
    const double dt = grid.dt();
    if (model.xi.size() != grid.size()) throw ConfigError("coefficient vector does not match grid");
    if (!(T >= grid.time(0) - dt && T <= grid.span() + dt)) {
        throw CoverageError("maturity " + std::to_string(T) + " outside the curve grid");
    }
    // Position in node units; snapped so that node times hit their coefficient exactly.
    double u = T * 12.0;
    if (std::abs(u - std::round(u)) < 1e-12) u = std::round(u);
    const int below = static_cast<int>(std::floor(u));
    const double frac = u - below;
    double value = 0.0;
    if (below >= 0 && below < grid.size()) value += (1.0 - frac) * model.xi(below);
    if (frac > 0.0 && below + 1 >= 0 && below + 1 < grid.size()) value += frac * model.xi(below + 1);
    return value;
}

Vector window_weights(const TimeGrid& grid, std::span<const DeliveryMonth> months) {
    Vector w = Vector::Zero(grid.size());
    double days_pos = 0.0;
    double days_neg = 0.0;
    for (const auto& m : months) (m.sign > 0 ? days_pos : days_neg) += m.days;
    for (const auto& m : months) {
        auto k = grid.index_of(m.month);
        if (!k) throw CoverageError("delivery month " + m.month.to_string() + " is not on the curve grid");
        w(*k) += m.sign > 0 ? m.days / days_pos : -m.days / days_neg;
    }
    return w;
}

double price_window(const CurveModel& model, std::span<const DeliveryMonth> months) {
    if (months.empty()) throw ConfigError("empty delivery window");
    if (model.xi.size() != model.grid.size()) throw ConfigError("coefficient vector does not match grid");
    return window_weights(model.grid, months).dot(model.xi);
}

}  // namespace ftk
