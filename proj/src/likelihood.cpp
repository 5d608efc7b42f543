#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "ftk/calibrate.hpp"
#include "ftk/errors.hpp"

namespace ftk {

namespace {

struct Factorized {
    Eigen::LLT<Matrix> llt;
    Vector alpha;  // C^-1 q
};

Factorized factor_marginal(const Matrix& c, const Vector& q) {
    Factorized f{Eigen::LLT<Matrix>(c), {}};
    if (f.llt.info() != Eigen::Success) {
        throw NumericalError("marginal covariance is not positive definite");
    }
    f.alpha = f.llt.solve(q);
    return f;
}

}  // namespace

Matrix marginal_cov(const ConstraintSystem& cs, const TimeGrid& grid, const KernelParams& params) {
    if (cs.size() == 0) return Matrix(0, 0);
    const PriorCovariance prior = prior_cov(grid, params);
    Matrix c = cs.A * prior.gamma * cs.A.transpose();
    c.diagonal() += cs.sigma;
    return c;
}

double nll(const ConstraintSystem& cs, const TimeGrid& grid, const KernelParams& params) {
    if (cs.size() == 0) return 0.0;
    const Matrix c = marginal_cov(cs, grid, params);
    const Factorized f = factor_marginal(c, cs.mid);
    const Matrix& l = f.llt.matrixLLT();
    double log_det = 0.0;
    for (Eigen::Index i = 0; i < l.rows(); ++i) log_det += 2.0 * std::log(l(i, i));
    return log_det + cs.mid.dot(f.alpha);
}

Eigen::Vector2d nll_gradient(const ConstraintSystem& cs, const TimeGrid& grid, const KernelParams& params) {
    if (cs.size() == 0) return Eigen::Vector2d::Zero();
    const PriorCovariance prior = prior_cov(grid, params);
    Matrix c = cs.A * prior.gamma * cs.A.transpose();
    c.diagonal() += cs.sigma;
    const Factorized f = factor_marginal(c, cs.mid);
    const Matrix c_inv = f.llt.solve(Matrix::Identity(c.rows(), c.cols()));

    // dGamma/dlog(sigma) = 2 Gamma (jitter scales with sigma^2 too);
    // dGamma/dlog(theta) = sigma^2 K(x) x^2 / theta^2.
    const int n = grid.size();
    const double s2 = params.sigma * params.sigma;
    const double th2 = params.theta * params.theta;
    Matrix d_theta(n, n);
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            const double x = grid.time(std::abs(i - j));
            d_theta(i, j) = s2 * kernel(x, params.theta) * x * x / th2;
        }
    }
    const Matrix dc_sigma = 2.0 * cs.A * prior.gamma * cs.A.transpose();
    const Matrix dc_theta = cs.A * d_theta * cs.A.transpose();

    auto directional = [&](const Matrix& dc) {
        return c_inv.cwiseProduct(dc).sum() - f.alpha.dot(dc * f.alpha);
    };
    return {directional(dc_sigma), directional(dc_theta)};
}

HyperFit fit_hyperparams(const ConstraintSystem& cs, const TimeGrid& grid) {
    if (cs.size() < 2) throw ConfigError("hyperparameter fit needs at least two quotes");

    double scale = cs.mid.array().abs().maxCoeff();
    if (!(scale > 0.0)) scale = 1.0;
    const std::array<double, 2> lo{std::log(1e-3 * scale), std::log(grid.dt())};
    const std::array<double, 2> hi{std::log(10.0 * scale), std::log(std::max(grid.dt(), grid.span()))};

    using Point = std::array<double, 2>;
    auto clamp = [&](Point p) {
        for (int d = 0; d < 2; ++d) p[d] = std::clamp(p[d], lo[d], hi[d]);
        return p;
    };
    auto objective = [&](const Point& p) {
        try {
            const double v = nll(cs, grid, {std::exp(p[0]), std::exp(p[1])});
            return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
        } catch (const NumericalError&) {
            return std::numeric_limits<double>::infinity();
        }
    };

    constexpr int kLattice = 4;
    constexpr int kMaxIterations = 500;
    constexpr double kDiameterTol = 1e-6;

    Point best_point{};
    double best_value = std::numeric_limits<double>::infinity();
    bool best_converged = false;
    int total_iterations = 0;
    int starts = 0;

    for (int is = 0; is < kLattice; ++is) {
        for (int it = 0; it < kLattice; ++it) {
            ++starts;
            const Point x0{lo[0] + (is + 0.5) / kLattice * (hi[0] - lo[0]),
                           lo[1] + (it + 0.5) / kLattice * (hi[1] - lo[1])};
            std::array<Point, 3> simplex{x0, clamp({x0[0] + (hi[0] - lo[0]) / 8.0, x0[1]}),
                                         clamp({x0[0], x0[1] + (hi[1] - lo[1]) / 8.0})};
            std::array<double, 3> value{};
            for (int v = 0; v < 3; ++v) value[v] = objective(simplex[v]);

            bool converged = false;
            for (int iter = 0; iter < kMaxIterations; ++iter) {
                ++total_iterations;
                std::array<int, 3> order{0, 1, 2};
                std::sort(order.begin(), order.end(), [&](int a, int b) { return value[a] < value[b]; });
                std::array<Point, 3> s{simplex[order[0]], simplex[order[1]], simplex[order[2]]};
                std::array<double, 3> f{value[order[0]], value[order[1]], value[order[2]]};
                simplex = s;
                value = f;

                double diameter = 0.0;
                for (int a = 0; a < 3; ++a) {
                    for (int b = a + 1; b < 3; ++b) {
                        diameter = std::max(diameter, std::hypot(s[a][0] - s[b][0], s[a][1] - s[b][1]));
                    }
                }
                if (diameter < kDiameterTol) {
                    converged = true;
                    break;
                }

                const Point centroid{0.5 * (s[0][0] + s[1][0]), 0.5 * (s[0][1] + s[1][1])};
                auto along = [&](double coef) {
                    return clamp({centroid[0] + coef * (s[2][0] - centroid[0]),
                                  centroid[1] + coef * (s[2][1] - centroid[1])});
                };
                const Point reflected = along(-1.0);
                const double f_reflected = objective(reflected);
                if (f_reflected < f[0]) {
                    const Point expanded = along(-2.0);
                    const double f_expanded = objective(expanded);
                    if (f_expanded < f_reflected) {
                        simplex[2] = expanded;
                        value[2] = f_expanded;
                    } else {
                        simplex[2] = reflected;
                        value[2] = f_reflected;
                    }
                    continue;
                }
                if (f_reflected < f[1]) {
                    simplex[2] = reflected;
                    value[2] = f_reflected;
                    continue;
                }
                const bool outside = f_reflected < f[2];
                const Point contracted = along(outside ? -0.5 : 0.5);
                const double f_contracted = objective(contracted);
                if (f_contracted < (outside ? f_reflected : f[2])) {
                    simplex[2] = contracted;
                    value[2] = f_contracted;
                    continue;
                }
                for (int v = 1; v < 3; ++v) {
                    simplex[v] = clamp({s[0][0] + 0.5 * (s[v][0] - s[0][0]), s[0][1] + 0.5 * (s[v][1] - s[0][1])});
                    value[v] = objective(simplex[v]);
                }
            }

            const int arg = static_cast<int>(std::min_element(value.begin(), value.end()) - value.begin());
            if (value[arg] < best_value) {
                best_value = value[arg];
                best_point = simplex[arg];
                best_converged = converged;
            }
        }
    }

    if (!std::isfinite(best_value)) {
        throw NumericalError("hyperparameter fit failed: marginal covariance never factorized");
    }

    HyperFit fit;
    fit.params = {std::exp(best_point[0]), std::exp(best_point[1])};
    fit.report.params = fit.params;
    fit.report.nll = best_value;
    fit.report.iterations = total_iterations;
    fit.report.starts = starts;
    fit.report.converged = best_converged;
    try {
        fit.report.nll_gradient_norm = nll_gradient(cs, grid, fit.params).norm();
    } catch (const NumericalError&) {
        fit.report.nll_gradient_norm = std::numeric_limits<double>::quiet_NaN();
    }
    return fit;
}

}  // namespace ftk
