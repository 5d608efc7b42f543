#include "ftk/qp.hpp"

#include <cmath>
#include <limits>

#include <Eigen/QR>

#include "ftk/errors.hpp"

namespace ftk {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct ActiveConstraint {
    Eigen::Index row;
    ActiveSide side;
    double multiplier;
};

/// Factorization of the active normals in the metric of G:
/// L^-1 N_A = Q R, with G = L L'.
class ActiveSetFactor {
public:
    explicit ActiveSetFactor(const Eigen::LLT<Matrix>& g_factor) : g_factor_(g_factor) {}

    void reset(const Matrix& normals) {
        count_ = normals.cols();
        if (count_ == 0) return;
        Matrix m = g_factor_.matrixL().solve(normals);
        Eigen::HouseholderQR<Matrix> qr(m);
        q_ = qr.householderQ();
        r_ = qr.matrixQR().topLeftCorner(count_, count_).triangularView<Eigen::Upper>();
    }

    /// Primal step direction z and dual direction r for adding normal np.
    /// Returns the norm of the component of L^-1 np orthogonal to the active set.
    double directions(const Vector& np, Vector& z, Vector& r) const {
        Vector w = g_factor_.matrixL().solve(np);
        if (count_ == 0) {
            z = g_factor_.matrixU().solve(w);
            r.resize(0);
            return w.norm();
        }
        const Eigen::Index n = w.size();
        Vector d = q_.transpose() * w;
        Vector d2 = d.tail(n - count_);
        z = g_factor_.matrixU().solve(q_.rightCols(n - count_) * d2);
        r = r_.triangularView<Eigen::Upper>().solve(d.head(count_));
        return d2.norm();
    }

private:
    const Eigen::LLT<Matrix>& g_factor_;
    Eigen::Index count_ = 0;
    Matrix q_;
    Matrix r_;
};

Vector normal_of(const QpProblem& p, Eigen::Index row, ActiveSide side) {
    Vector n = p.rows.row(row).transpose();
    return side == ActiveSide::Lower ? n : Vector(-n);
}

double bound_of(const QpProblem& p, Eigen::Index row, ActiveSide side) {
    return side == ActiveSide::Lower ? p.lower(row) : -p.upper(row);
}

Matrix active_normals(const QpProblem& p, const std::vector<ActiveConstraint>& active) {
    Matrix normals(p.rows.cols(), static_cast<Eigen::Index>(active.size()));
    for (std::size_t j = 0; j < active.size(); ++j) {
        normals.col(static_cast<Eigen::Index>(j)) = normal_of(p, active[j].row, active[j].side);
    }
    return normals;
}

}  // namespace

QpResult solve_qp(const QpProblem& problem, int max_iterations) {
    const Eigen::Index n = problem.hessian.rows();
    const Eigen::Index m = problem.rows.rows();
    if (problem.hessian.cols() != n || problem.linear.size() != n || (m > 0 && problem.rows.cols() != n) ||
        problem.lower.size() != m || problem.upper.size() != m || problem.tolerance.size() != m) {
        throw ConfigError("inconsistent QP dimensions");
    }
    if (max_iterations <= 0) max_iterations = static_cast<int>(20 * (n + m) + 100);

    Eigen::LLT<Matrix> g_factor(problem.hessian);
    if (g_factor.info() != Eigen::Success) {
        throw NumericalError("QP Hessian is not positive definite");
    }

    QpResult result;
    result.x = -g_factor.solve(problem.linear);
    result.active.assign(static_cast<std::size_t>(m), ActiveSide::None);

    std::vector<ActiveConstraint> active;
    ActiveSetFactor factor(g_factor);
    factor.reset(active_normals(problem, active));

    Vector z;
    Vector r;
    int iterations = 0;
    while (true) {
        // Most violated inactive constraint, measured in units of its tolerance.
        Eigen::Index p = -1;
        ActiveSide side = ActiveSide::None;
        double worst = 1.0;
        for (Eigen::Index i = 0; i < m; ++i) {
            if (result.active[static_cast<std::size_t>(i)] != ActiveSide::None) continue;
            const double value = problem.rows.row(i).dot(result.x);
            const double tol = problem.tolerance(i);
            const double below = (problem.lower(i) - value) / tol;
            const double above = (value - problem.upper(i)) / tol;
            if (below > worst) {
                worst = below;
                p = i;
                side = ActiveSide::Lower;
            }
            if (above > worst) {
                worst = above;
                p = i;
                side = ActiveSide::Upper;
            }
        }
        if (p < 0) break;

        const Vector np = normal_of(problem, p, side);
        const double bp = bound_of(problem, p, side);
        double u_new = 0.0;

        while (true) {
            if (++iterations > max_iterations) {
                result.status = QpStatus::IterationLimit;
                result.iterations = iterations;
                result.blocking_row = static_cast<int>(p);
                return result;
            }
            const double orth = factor.directions(np, z, r);
            const double slack = np.dot(result.x) - bp;

            double full_step = kInf;
            const double curvature = z.dot(np);
            if (orth > 1e-13 * np.norm() && curvature > 0.0) full_step = -slack / curvature;

            double partial_step = kInf;
            std::size_t leaving = active.size();
            const double r_eps = r.size() > 0 ? 1e-12 * std::max(1.0, r.cwiseAbs().maxCoeff()) : 0.0;
            for (std::size_t j = 0; j < active.size(); ++j) {
                const double rj = r(static_cast<Eigen::Index>(j));
                if (rj > r_eps) {
                    const double ratio = active[j].multiplier / rj;
                    if (ratio < partial_step) {
                        partial_step = ratio;
                        leaving = j;
                    }
                }
            }

            const double step = std::min(full_step, partial_step);
            if (step == kInf) {
                result.status = QpStatus::Infeasible;
                result.iterations = iterations;
                result.blocking_row = static_cast<int>(p);
                return result;
            }

            if (full_step < kInf) result.x += step * z;
            for (std::size_t j = 0; j < active.size(); ++j) {
                active[j].multiplier -= step * r(static_cast<Eigen::Index>(j));
            }
            u_new += step;

            if (full_step <= partial_step) {
                active.push_back({p, side, u_new});
                result.active[static_cast<std::size_t>(p)] = side;
                factor.reset(active_normals(problem, active));
                break;
            }
            result.active[static_cast<std::size_t>(active[leaving].row)] = ActiveSide::None;
            active.erase(active.begin() + static_cast<std::ptrdiff_t>(leaving));
            factor.reset(active_normals(problem, active));
        }
    }

    result.iterations = iterations;
    result.lambda = Vector::Zero(m);
    for (const auto& a : active) {
        result.lambda(a.row) = a.side == ActiveSide::Lower ? a.multiplier : -a.multiplier;
    }
    result.objective = 0.5 * result.x.dot(problem.hessian * result.x) + problem.linear.dot(result.x);
    return result;
}

double qp_stationarity(const QpProblem& problem, const QpResult& result) {
    Vector residual = problem.hessian * result.x + problem.linear;
    if (problem.rows.rows() > 0) residual -= problem.rows.transpose() * result.lambda;
    return residual.size() > 0 ? residual.cwiseAbs().maxCoeff() : 0.0;
}

}  // namespace ftk
