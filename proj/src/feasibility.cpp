#include "ftk/feasibility.hpp"

#include <cmath>
#include <limits>

#include "ftk/errors.hpp"

namespace ftk {

namespace {

constexpr double kReducedCostEps = 1e-11;
constexpr double kPivotEps = 1e-10;

/// Dense tableau simplex for min c'y s.t. T y = rhs, y >= 0, started from a
/// known feasible basis.
class Tableau {
public:
    Tableau(Matrix table, Vector rhs, Vector cost, std::vector<Eigen::Index> basis)
        : t_(std::move(table)), rhs_(std::move(rhs)), cost_(std::move(cost)), basis_(std::move(basis)) {
        reduced_ = cost_;
        for (Eigen::Index i = 0; i < t_.rows(); ++i) {
            reduced_ -= cost_(basis_[static_cast<std::size_t>(i)]) * t_.row(i).transpose();
        }
    }

    void solve() {
        const Eigen::Index rows = t_.rows();
        const Eigen::Index cols = t_.cols();
        // Dantzig pricing, falling back to Bland's rule if pivots stall.
        const int bland_after = static_cast<int>(10 * (rows + cols));
        const int limit = 50 * bland_after;
        for (int iter = 0; iter < limit; ++iter) {
            const bool bland = iter >= bland_after;
            Eigen::Index entering = -1;
            double best = -kReducedCostEps;
            for (Eigen::Index j = 0; j < cols; ++j) {
                if (reduced_(j) < best) {
                    entering = j;
                    if (bland) break;
                    best = reduced_(j);
                }
            }
            if (entering < 0) return;

            Eigen::Index leaving = -1;
            double ratio = std::numeric_limits<double>::infinity();
            for (Eigen::Index i = 0; i < rows; ++i) {
                const double a = t_(i, entering);
                if (a <= kPivotEps) continue;
                const double r = rhs_(i) / a;
                if (r < ratio - 1e-14 ||
                    (r <= ratio + 1e-14 && leaving >= 0 &&
                     basis_[static_cast<std::size_t>(i)] < basis_[static_cast<std::size_t>(leaving)])) {
                    ratio = r;
                    leaving = i;
                }
            }
            if (leaving < 0) throw NumericalError("feasibility LP unbounded");
            pivot(leaving, entering);
        }
        throw NumericalError("feasibility LP did not converge");
    }

    Vector primal(Eigen::Index cols) const {
        Vector y = Vector::Zero(cols);
        for (std::size_t i = 0; i < basis_.size(); ++i) y(basis_[i]) = rhs_(static_cast<Eigen::Index>(i));
        return y;
    }

private:
    void pivot(Eigen::Index row, Eigen::Index col) {
        const double a = t_(row, col);
        t_.row(row) /= a;
        rhs_(row) /= a;
        for (Eigen::Index i = 0; i < t_.rows(); ++i) {
            if (i == row) continue;
            const double f = t_(i, col);
            if (f == 0.0) continue;
            t_.row(i) -= f * t_.row(row);
            rhs_(i) -= f * rhs_(row);
            if (rhs_(i) < 0.0 && rhs_(i) > -1e-12) rhs_(i) = 0.0;
        }
        const double f = reduced_(col);
        reduced_ -= f * t_.row(row).transpose();
        basis_[static_cast<std::size_t>(row)] = col;
    }

    Matrix t_;
    Vector rhs_;
    Vector cost_;
    Vector reduced_;
    std::vector<Eigen::Index> basis_;
};

}  // namespace

FeasibilityResult check_feasibility(const Matrix& A, const Vector& lower, const Vector& upper,
                                    double tolerance) {
    const Eigen::Index n = A.rows();
    const Eigen::Index dim = A.cols();
    FeasibilityResult out;
    if (n == 0) {
        out.feasible = true;
        out.point = Vector::Zero(dim);
        return out;
    }

    // Columns: x+ (dim), x- (dim), then per row j: elastic below e_j, surplus s_j,
    // elastic above f_j, slack w_j.
    std::vector<Eigen::Index> row_of_lower(static_cast<std::size_t>(n), -1);
    std::vector<Eigen::Index> row_of_upper(static_cast<std::size_t>(n), -1);
    Eigen::Index rows = 0;
    for (Eigen::Index j = 0; j < n; ++j) {
        if (std::isfinite(lower(j))) row_of_lower[static_cast<std::size_t>(j)] = rows++;
        if (std::isfinite(upper(j))) row_of_upper[static_cast<std::size_t>(j)] = rows++;
    }
    const Eigen::Index cols = 2 * dim + 4 * n;
    auto col_e = [&](Eigen::Index j) { return 2 * dim + 4 * j; };
    auto col_s = [&](Eigen::Index j) { return 2 * dim + 4 * j + 1; };
    auto col_f = [&](Eigen::Index j) { return 2 * dim + 4 * j + 2; };
    auto col_w = [&](Eigen::Index j) { return 2 * dim + 4 * j + 3; };

    Matrix table = Matrix::Zero(rows, cols);
    Vector rhs(rows);
    Vector cost = Vector::Zero(cols);
    std::vector<Eigen::Index> basis(static_cast<std::size_t>(rows));
    for (Eigen::Index j = 0; j < n; ++j) {
        cost(col_e(j)) = 1.0;
        cost(col_f(j)) = 1.0;
        if (Eigen::Index r = row_of_lower[static_cast<std::size_t>(j)]; r >= 0) {
            // A_j x + e_j - s_j = lower_j
            const double sgn = lower(j) >= 0.0 ? 1.0 : -1.0;
            table.block(r, 0, 1, dim) = sgn * A.row(j);
            table.block(r, dim, 1, dim) = -sgn * A.row(j);
            table(r, col_e(j)) = sgn;
            table(r, col_s(j)) = -sgn;
            rhs(r) = sgn * lower(j);
            basis[static_cast<std::size_t>(r)] = sgn > 0 ? col_e(j) : col_s(j);
        }
        if (Eigen::Index r = row_of_upper[static_cast<std::size_t>(j)]; r >= 0) {
            // A_j x - f_j + w_j = upper_j
            const double sgn = upper(j) >= 0.0 ? 1.0 : -1.0;
            table.block(r, 0, 1, dim) = sgn * A.row(j);
            table.block(r, dim, 1, dim) = -sgn * A.row(j);
            table(r, col_f(j)) = -sgn;
            table(r, col_w(j)) = sgn;
            rhs(r) = sgn * upper(j);
            basis[static_cast<std::size_t>(r)] = sgn > 0 ? col_w(j) : col_f(j);
        }
    }

    Tableau tableau(std::move(table), std::move(rhs), std::move(cost), std::move(basis));
    tableau.solve();
    Vector y = tableau.primal(cols);
    out.point = y.head(dim) - y.segment(dim, dim);

    // Violation of the recovered point, not the tableau objective.
    double violation = 0.0;
    const Vector ax = A * out.point;
    for (Eigen::Index j = 0; j < n; ++j) {
        if (std::isfinite(lower(j))) violation += std::max(0.0, lower(j) - ax(j));
        if (std::isfinite(upper(j))) violation += std::max(0.0, ax(j) - upper(j));
    }
    out.total_violation = violation;
    out.feasible = out.total_violation <= tolerance;
    return out;
}

std::vector<Eigen::Index> irreducible_infeasible_subset(const Matrix& A, const Vector& lower,
                                                        const Vector& upper, double tolerance) {
    std::vector<Eigen::Index> keep;
    for (Eigen::Index j = 0; j < A.rows(); ++j) keep.push_back(j);
    auto subsystem_feasible = [&](const std::vector<Eigen::Index>& rows) {
        Matrix a(static_cast<Eigen::Index>(rows.size()), A.cols());
        Vector lo(a.rows());
        Vector hi(a.rows());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const auto r = static_cast<Eigen::Index>(i);
            a.row(r) = A.row(rows[i]);
            lo(r) = lower(rows[i]);
            hi(r) = upper(rows[i]);
        }
        return check_feasibility(a, lo, hi, tolerance).feasible;
    };
    if (subsystem_feasible(keep)) return {};
    for (std::size_t i = 0; i < keep.size();) {
        std::vector<Eigen::Index> trial = keep;
        trial.erase(trial.begin() + static_cast<std::ptrdiff_t>(i));
        if (!subsystem_feasible(trial)) {
            keep = std::move(trial);
        } else {
            ++i;
        }
    }
    return keep;
}

}  // namespace ftk
