#include <cmath>

#include "ftk/calibrate.hpp"
#include "ftk/errors.hpp"

namespace ftk {

SeasonPenalty build_season_penalty(const TimeGrid& grid, double gamma) {
    if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw ConfigError("penalty weight must be finite and >= 0");
    const int n = grid.size();
    if (gamma > 0.0 && n <= 13) {
        throw ConfigError("seasonality penalty needs a grid longer than 13 months, got " + std::to_string(n));
    }
    SeasonPenalty p;
    p.gamma = gamma;
    p.dt = grid.dt();
    p.mismatch = Matrix::Zero(n, n);
    p.month_map.assign(static_cast<std::size_t>(n), -1);

    const double inv_dt2 = 1.0 / (grid.dt() * grid.dt());
    // 1-based k penalized for t_k > 1y, i.e. k >= 14, interior only (k <= N-1).
    // m(k) = k - 12 floor((k-2)/12) lands on nodes 2..13 with the same calendar month.
    for (int k1 = 14; k1 <= n - 1; ++k1) {
        const int m1 = k1 - 12 * ((k1 - 2) / 12);
        const int k = k1 - 1;
        const int m = m1 - 1;
        if (m < 1 || m > n - 2) continue;
        p.month_map[static_cast<std::size_t>(k)] = m;
        Vector d = Vector::Zero(n);
        d(k - 1) += inv_dt2;
        d(k) -= 2.0 * inv_dt2;
        d(k + 1) += inv_dt2;
        d(m - 1) -= inv_dt2;
        d(m) += 2.0 * inv_dt2;
        d(m + 1) -= inv_dt2;
        p.mismatch.noalias() += d * d.transpose();
    }
    return p;
}

double SeasonPenalty::statistic(const Vector& xi) const {
    if (xi.size() != mismatch.rows()) throw ConfigError("curve does not match the seasonality penalty");
    auto curvature = [&](Eigen::Index k) { return xi(k - 1) - 2.0 * xi(k) + xi(k + 1); };
    double sum = 0.0;
    for (Eigen::Index k = 0; k < xi.size(); ++k) {
        const int m = month_map[static_cast<std::size_t>(k)];
        if (m < 0) continue;
        const double d = (curvature(k) - curvature(m)) / (dt * dt);
        sum += d * d;
    }
    return sum;
}

}  // namespace ftk
