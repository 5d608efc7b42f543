#pragma once

#include <vector>

#include "ftk/curve.hpp"

namespace ftk {

/// Strictly convex QP with two-sided linear constraints:
///   minimize 1/2 x'Gx + g'x   subject to   lower <= D x <= upper.
/// Infinite bounds are allowed. A row counts as satisfied when its violation
/// does not exceed `tolerance(row)`.
struct QpProblem {
    Matrix hessian;
    Vector linear;
    Matrix rows;
    Vector lower;
    Vector upper;
    Vector tolerance;
};

enum class QpStatus { Optimal, Infeasible, IterationLimit };

enum class ActiveSide : signed char { None = 0, Lower = -1, Upper = 1 };

struct QpResult {
    QpStatus status = QpStatus::Optimal;
    Vector x;
    /// Per-row multiplier with G x + g = D' lambda; positive at an active lower
    /// bound, negative at an active upper bound, zero when inactive.
    Vector lambda;
    std::vector<ActiveSide> active;
    int iterations = 0;
    double objective = 0.0;
    /// Row that could not be added when status is Infeasible, else -1.
    int blocking_row = -1;
};

/// Goldfarb-Idnani dual active-set method. Starts from the unconstrained
/// minimizer and adds the most violated constraint at each major step, so
/// every iterate is dual feasible. Active-set factorizations are recomputed
/// from scratch on each change. Throws NumericalError if G is not positive definite.
QpResult solve_qp(const QpProblem& problem, int max_iterations = 0);

/// Infinity norm of G x + g - D' lambda, for KKT diagnostics.
double qp_stationarity(const QpProblem& problem, const QpResult& result);

}  // namespace ftk
