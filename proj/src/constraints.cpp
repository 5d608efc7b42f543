#include <algorithm>
#include <cmath>
#include <sstream>

#include "ftk/calibrate.hpp"
#include "ftk/errors.hpp"
#include "ftk/feasibility.hpp"

namespace ftk {

Vector ConstraintSystem::tolerance() const {
    return 1e-10 * (1.0 + mid.array().abs());
}

ConstraintSystem build_constraints(const MarketSnapshot& snapshot, const TimeGrid& grid) {
    const auto n = static_cast<Eigen::Index>(snapshot.quotes.size());
    ConstraintSystem cs;
    cs.A = Matrix::Zero(n, grid.size());
    cs.bid.resize(n);
    cs.ask.resize(n);
    cs.mid.resize(n);
    for (Eigen::Index j = 0; j < n; ++j) {
        const Quote& q = snapshot.quotes[static_cast<std::size_t>(j)];
        const auto months = delivery_months(q);
        try {
            cs.A.row(j) = window_weights(grid, months).transpose();
        } catch (const CoverageError& e) {
            throw CoverageError("quote '" + q.id + "': " + e.what());
        }
        cs.bid(j) = q.bid;
        cs.ask(j) = q.ask;
        cs.mid(j) = 0.5 * (q.bid + q.ask);
        cs.ids.push_back(q.id);
        cs.kinds.push_back(q.kind);
    }
    cs.sigma = obs_cov(snapshot.quotes);
    return cs;
}

double default_gamma(const ConstraintSystem& cs, const TimeGrid& grid) {
    if (cs.size() == 0) return 0.0;
    std::vector<double> s(cs.sigma.data(), cs.sigma.data() + cs.sigma.size());
    std::sort(s.begin(), s.end());
    const std::size_t h = s.size() / 2;
    const double median = s.size() % 2 ? s[h] : 0.5 * (s[h - 1] + s[h]);
    return 1e4 * std::pow(grid.dt(), 4) / median;
}

double feasibility_tolerance(const ConstraintSystem& cs) {
    if (cs.size() == 0) return 0.0;
    return 1e-11 * (1.0 + cs.mid.array().abs().minCoeff());
}

void require_feasible(const ConstraintSystem& cs) {
    const double tol = feasibility_tolerance(cs);
    auto result = check_feasibility(cs.A, cs.bid, cs.ask, tol);
    if (result.feasible) return;
    auto subset = irreducible_infeasible_subset(cs.A, cs.bid, cs.ask, tol);
    std::vector<std::string> ids;
    std::ostringstream msg;
    msg << "quotes admit no arbitrage-free curve (total violation " << result.total_violation
        << "); conflicting quotes:";
    for (auto j : subset) {
        ids.push_back(cs.ids[static_cast<std::size_t>(j)]);
        msg << ' ' << ids.back();
    }
    throw InfeasibleError(msg.str(), std::move(ids));
}

}  // namespace ftk
