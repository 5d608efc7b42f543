#include <algorithm>
#include <cmath>
#include <sstream>

#include "ftk/calibrate.hpp"
#include "ftk/errors.hpp"
#include "ftk/qp.hpp"

namespace ftk {

namespace {

constexpr double kKktTolerance = 1e-8;

void check_penalty(const SeasonPenalty& penalty, const TimeGrid& grid) {
    if (penalty.mismatch.rows() != grid.size() || penalty.mismatch.cols() != grid.size()) {
        throw ConfigError("seasonality penalty does not match the grid");
    }
}

}  // namespace

WhitenedSystem whiten(const ConstraintSystem& cs, const TimeGrid& grid, const KernelParams& params,
                      const SeasonPenalty& penalty) {
    check_penalty(penalty, grid);
    if (cs.size() > 0 && cs.A.cols() != grid.size()) throw ConfigError("constraint matrix does not match grid");
    WhitenedSystem w;
    w.prior = prior_cov(grid, params);
    w.L = w.prior.lower();
    const int n = grid.size();
    w.H = Matrix::Identity(n, n);
    w.b = Vector::Zero(n);
    if (cs.size() > 0) {
        w.D = cs.A * w.L;
        const Vector inv_sigma = cs.sigma.cwiseInverse();
        w.H.noalias() += w.D.transpose() * inv_sigma.asDiagonal() * w.D;
        w.b = w.D.transpose() * inv_sigma.cwiseProduct(cs.mid);
    } else {
        w.D = Matrix(0, n);
    }
    if (penalty.gamma > 0.0) {
        w.H.noalias() += penalty.gamma * (w.L.transpose() * penalty.mismatch * w.L);
    }
    // Symmetrize roundoff from the products above.
    w.H = 0.5 * (w.H + w.H.transpose()).eval();
    return w;
}

double map_objective(const ConstraintSystem& cs, const PriorCovariance& prior, const SeasonPenalty& penalty,
                     const Vector& xi) {
    const Vector z = prior.factor.matrixL().solve(xi);
    double value = z.squaredNorm();
    if (cs.size() > 0) {
        const Vector resid = cs.A * xi - cs.mid;
        value += resid.cwiseProduct(resid).cwiseQuotient(cs.sigma).sum();
    }
    if (penalty.gamma > 0.0) value += penalty.gamma * penalty.statistic(xi);
    return value;
}

double map_objective_change(const ConstraintSystem& cs, const PriorCovariance& prior,
                            const SeasonPenalty& penalty, const Vector& xi, const Vector& direction,
                            double step) {
    const Vector zx = prior.factor.matrixL().solve(xi);
    const Vector zd = prior.factor.matrixL().solve(direction);
    double linear = zx.dot(zd);
    double quadratic = zd.squaredNorm();
    if (cs.size() > 0) {
        const Vector resid = cs.A * xi - cs.mid;
        const Vector ad = cs.A * direction;
        linear += resid.cwiseProduct(ad).cwiseQuotient(cs.sigma).sum();
        quadratic += ad.cwiseProduct(ad).cwiseQuotient(cs.sigma).sum();
    }
    if (penalty.gamma > 0.0) {
        const Vector md = penalty.mismatch * direction;
        linear += penalty.gamma * xi.dot(md);
        quadratic += penalty.gamma * direction.dot(md);
    }
    return 2.0 * step * linear + step * step * quadratic;
}

Vector unconstrained_posterior_mean(const ConstraintSystem& cs, const TimeGrid& grid,
                                    const KernelParams& params, const SeasonPenalty& penalty) {
    const WhitenedSystem w = whiten(cs, grid, params, penalty);
    Eigen::LLT<Matrix> h(w.H);
    if (h.info() != Eigen::Success) throw NumericalError("posterior precision is not positive definite");
    return w.L * h.solve(w.b);
}

MapFit solve_map(const ConstraintSystem& cs, const TimeGrid& grid, const KernelParams& params,
                 const SeasonPenalty& penalty) {
    if (cs.size() > 0) require_feasible(cs);
    const WhitenedSystem w = whiten(cs, grid, params, penalty);

    QpProblem qp;
    qp.hessian = w.H;
    qp.linear = -w.b;
    qp.rows = w.D;
    qp.lower = cs.size() > 0 ? cs.bid : Vector(0);
    qp.upper = cs.size() > 0 ? cs.ask : Vector(0);
    // Acceptance threshold an order of magnitude inside the repricing tolerance.
    qp.tolerance = cs.size() > 0 ? Vector(0.1 * cs.tolerance()) : Vector(0);

    const QpResult sol = solve_qp(qp);
    if (sol.status == QpStatus::Infeasible) {
        std::vector<std::string> ids{cs.ids[static_cast<std::size_t>(sol.blocking_row)]};
        for (std::size_t j = 0; j < sol.active.size(); ++j) {
            if (sol.active[j] != ActiveSide::None) ids.push_back(cs.ids[j]);
        }
        std::ostringstream msg;
        msg << "quotes admit no arbitrage-free curve; conflicting quotes:";
        for (const auto& id : ids) msg << ' ' << id;
        throw InfeasibleError(msg.str(), std::move(ids));
    }
    if (sol.status == QpStatus::IterationLimit) {
        std::ostringstream msg;
        msg << "MAP quadratic program did not converge after " << sol.iterations
            << " iterations (pending quote '" << cs.ids[static_cast<std::size_t>(sol.blocking_row)]
            << "', |z| = " << sol.x.norm() << ")";
        throw NumericalError(msg.str());
    }

    MapFit fit;
    fit.model.grid = grid;
    fit.model.params = params;
    fit.model.xi = w.L * sol.x;
    fit.model.gamma_penalty = penalty.gamma;
    fit.model.seasonality_enabled = penalty.gamma > 0.0;

    FitReport& report = fit.report;
    report.params = params;
    report.qp_iterations = sol.iterations;
    report.active_constraints =
        static_cast<int>(std::count_if(sol.active.begin(), sol.active.end(),
                                       [](ActiveSide s) { return s != ActiveSide::None; }));
    report.objective = map_objective(cs, w.prior, penalty, fit.model.xi);

    const double scale = std::max({1.0, w.b.cwiseAbs().maxCoeff(), (w.H * sol.x).cwiseAbs().maxCoeff()});
    report.kkt_residual = qp_stationarity(qp, sol) / scale;

    bool within = true;
    if (cs.size() > 0) {
        const Vector priced = cs.A * fit.model.xi;
        const Vector tol = cs.tolerance();
        for (Eigen::Index j = 0; j < cs.size(); ++j) {
            const double v = std::max({0.0, cs.bid(j) - priced(j), priced(j) - cs.ask(j)});
            report.max_violation = std::max(report.max_violation, v);
            if (v > tol(j)) within = false;
        }
    }
    report.converged = within && report.kkt_residual <= kKktTolerance;
    if (!report.converged) {
        std::ostringstream msg;
        msg << "MAP solution misses its tolerances (max violation " << report.max_violation
            << ", scaled KKT residual " << report.kkt_residual << ", " << sol.iterations << " iterations)";
        throw NumericalError(msg.str());
    }
    return fit;
}

}  // namespace ftk
