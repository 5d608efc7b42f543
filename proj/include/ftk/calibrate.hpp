#pragma once

#include <string>
#include <vector>

#include "ftk/curve.hpp"
#include "ftk/market_data.hpp"

namespace ftk {

/// Linear no-arbitrage system: bid <= A xi <= ask, one row per quote and one
/// column per grid node (maturities sit on the nodes, so the basis matrix is
/// the identity and A doubles as the observation operator B).
struct ConstraintSystem {
    Matrix A;
    Vector bid;
    Vector ask;
    Vector mid;
    /// Diagonal of the observation covariance.
    Vector sigma;
    std::vector<std::string> ids;
    std::vector<ContractKind> kinds;

    Eigen::Index size() const noexcept { return A.rows(); }
    /// Repricing tolerance 1e-10 (1 + |mid_j|).
    Vector tolerance() const;
};

ConstraintSystem build_constraints(const MarketSnapshot& snapshot, const TimeGrid& grid);

/// C = Sigma + A Gamma A'.
Matrix marginal_cov(const ConstraintSystem& cs, const TimeGrid& grid, const KernelParams& params);

/// log det C + q' C^-1 q with q the mid prices, via Cholesky. Throws NumericalError
/// if C is not positive definite.
double nll(const ConstraintSystem& cs, const TimeGrid& grid, const KernelParams& params);

/// Analytic gradient of `nll` with respect to (log sigma, log theta).
Eigen::Vector2d nll_gradient(const ConstraintSystem& cs, const TimeGrid& grid, const KernelParams& params);

struct FitReport {
    KernelParams params;
    double nll = 0.0;
    /// Norm of the analytic nll gradient in log coordinates at the optimum.
    double nll_gradient_norm = 0.0;
    int iterations = 0;
    int starts = 0;
    bool converged = false;

    // Filled by solve_map.
    double objective = 0.0;
    double max_violation = 0.0;
    double kkt_residual = 0.0;
    int qp_iterations = 0;
    int active_constraints = 0;
};

struct HyperFit {
    KernelParams params;
    FitReport report;
};

/// Maximum-likelihood (sigma, theta) over the box sigma in [1e-3 s, 10 s]
/// (s = max |mid|), theta in [dt, t_N - t_1], by Nelder-Mead in log
/// coordinates from a fixed 4x4 lattice of starts.
HyperFit fit_hyperparams(const ConstraintSystem& cs, const TimeGrid& grid);

/// Year-over-year curvature penalty. `mismatch` is the unscaled PSD matrix M
/// with xi' M xi = sum_k ((d2 xi_k - d2 xi_m(k)) / dt^2)^2 over interior nodes
/// beyond the first year; the objective adds gamma xi' M xi.
struct SeasonPenalty {
    double gamma = 0.0;
    Matrix mismatch;
    /// month_map[k] = m(k) for penalized nodes, -1 elsewhere (0-based).
    std::vector<int> month_map;

    double dt = kMonthStep;

    Matrix matrix() const { return gamma * mismatch; }
    /// xi' M xi, summed term by term so it stays >= 0 when M xi nearly vanishes.
    double statistic(const Vector& xi) const;
};

/// Throws ConfigError when gamma > 0 on a grid of 13 nodes or fewer.
SeasonPenalty build_season_penalty(const TimeGrid& grid, double gamma);

/// 1e4 dt^4 / median(Sigma_jj).
double default_gamma(const ConstraintSystem& cs, const TimeGrid& grid);

/// Tolerance used to decide joint feasibility of the quotes.
double feasibility_tolerance(const ConstraintSystem& cs);

/// Throws InfeasibleError naming an irreducible subset of conflicting quotes.
void require_feasible(const ConstraintSystem& cs);

/// The objective as printed: xi' Gamma^-1 xi + (A xi - q)' Sigma^-1 (A xi - q) + gamma xi' M xi,
/// evaluated without forming Gamma^-1.
double map_objective(const ConstraintSystem& cs, const PriorCovariance& prior, const SeasonPenalty& penalty,
                     const Vector& xi);

/// Exact objective change J(xi + h d) - J(xi), free of the cancellation in
/// differencing two large objective values.
double map_objective_change(const ConstraintSystem& cs, const PriorCovariance& prior,
                            const SeasonPenalty& penalty, const Vector& xi, const Vector& direction,
                            double step);

/// The MAP objective in whitened coordinates xi = L z:
///   J = z' H z - 2 b' z + q' Sigma^-1 q,
///   H = I + D' Sigma^-1 D + gamma L' M L,  D = A L,  b = D' Sigma^-1 q.
/// H is the posterior precision of z; it stays well conditioned however
/// close Gamma comes to singular.
struct WhitenedSystem {
    PriorCovariance prior;
    Matrix L;
    Matrix D;
    Matrix H;
    Vector b;
};

WhitenedSystem whiten(const ConstraintSystem& cs, const TimeGrid& grid, const KernelParams& params,
                      const SeasonPenalty& penalty);

struct MapFit {
    CurveModel model;
    FitReport report;
};

/// Constrained posterior mode. Solved in whitened coordinates xi = L z
/// (Gamma = L L') with a dual active-set QP. Throws InfeasibleError for
/// crossed quotes and NumericalError when the solution misses its tolerances.
MapFit solve_map(const ConstraintSystem& cs, const TimeGrid& grid, const KernelParams& params,
                 const SeasonPenalty& penalty);

/// Unconstrained minimizer of the same objective (the Gaussian posterior mean).
Vector unconstrained_posterior_mean(const ConstraintSystem& cs, const TimeGrid& grid,
                                    const KernelParams& params, const SeasonPenalty& penalty);

}  // namespace ftk
