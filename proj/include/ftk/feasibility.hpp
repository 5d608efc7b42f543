#pragma once

#include <vector>

#include "ftk/curve.hpp"

namespace ftk {

struct FeasibilityResult {
    bool feasible = false;
    /// Minimal total bound violation sum_j dist(A_j x, [lower_j, upper_j]).
    double total_violation = 0.0;
    /// Minimizer of the total violation.
    Vector point;
};

/// Elastic feasibility LP for lower <= A x <= upper with x free, solved by a
/// dense primal simplex. Feasible when the optimal total violation is at most
/// `tolerance`. Infinite bounds drop the corresponding side.
FeasibilityResult check_feasibility(const Matrix& A, const Vector& lower, const Vector& upper,
                                    double tolerance);

/// Deletion filter: starting from an infeasible system, drops rows one at a
/// time while the remainder stays infeasible. The returned row indices form an
/// irreducible infeasible subset. Empty if the full system is feasible.
std::vector<Eigen::Index> irreducible_infeasible_subset(const Matrix& A, const Vector& lower,
                                                        const Vector& upper, double tolerance);

}  // namespace ftk
