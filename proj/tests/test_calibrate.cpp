#include <chrono>
#include <cmath>
#include <random>

#include <Eigen/QR>
#include <gtest/gtest.h>

#include "ftk/calibrate.hpp"
#include "ftk/errors.hpp"
#include "ftk/rng.hpp"
#include "oracles.hpp"
#include "synthetic.hpp"

using namespace ftk;

namespace {

ConstraintSystem single_quote_system(double bid, double ask) {
    ConstraintSystem cs;
    cs.A = Matrix::Ones(1, 1);
    cs.bid = Vector::Constant(1, bid);
    cs.ask = Vector::Constant(1, ask);
    cs.mid = Vector::Constant(1, 0.5 * (bid + ask));
    cs.sigma = Vector::Constant(1, 1.0);
    cs.ids = {"q"};
    cs.kinds = {ContractKind::Month};
    return cs;
}

double max_violation(const ConstraintSystem& cs, const Vector& xi) {
    const Vector p = cs.A * xi;
    double worst = 0.0;
    for (Eigen::Index j = 0; j < cs.size(); ++j) {
        const double tol = 1e-10 * (1.0 + std::abs(cs.mid(j)));
        worst = std::max(worst, std::max(cs.bid(j) - p(j), p(j) - cs.ask(j)) / tol);
    }
    return worst;
}

}  // namespace

TEST(Constraints, QuarterRowHasDayCountWeights) {
    const auto snap = fixtures::monthly_snapshot(12);
    auto s = snap;
    Quote q;
    q.id = "q1";
    q.kind = ContractKind::Quarter;
    q.window = {{2021, 1}, {2021, 3}};
    q.bid = 20, q.ask = 21;
    s.quotes.push_back(q);
    Quote sp;
    sp.id = "fj";
    sp.kind = ContractKind::MonthSpread;
    sp.window = {{2021, 2}, {2021, 2}};
    sp.window2 = DeliveryWindow{{2021, 1}, {2021, 1}};
    sp.bid = -1, sp.ask = 1;
    s.quotes.push_back(sp);
    const TimeGrid grid = TimeGrid::covering(s);
    const auto cs = build_constraints(s, grid);
    ASSERT_EQ(cs.size(), 14);
    EXPECT_DOUBLE_EQ(cs.A(12, 0), 31.0 / 90.0);
    EXPECT_DOUBLE_EQ(cs.A(12, 1), 28.0 / 90.0);
    EXPECT_DOUBLE_EQ(cs.A(12, 2), 31.0 / 90.0);
    EXPECT_EQ(cs.A(13, 1), 1.0);
    EXPECT_EQ(cs.A(13, 0), -1.0);
    EXPECT_EQ(cs.A.row(13).sum(), 0.0);
    EXPECT_DOUBLE_EQ(cs.sigma(12), 0.25);
}

TEST(Likelihood, MarginalCovEntries) {
    const auto snap = fixtures::monthly_snapshot(2);
    const TimeGrid grid = TimeGrid::covering(snap);
    const auto cs = build_constraints(snap, grid);
    const KernelParams p{3.0, 0.25};
    const Matrix c = marginal_cov(cs, grid, p);
    const double jitter = prior_cov(grid, p).jitter;
    EXPECT_NEAR(c(0, 0), cs.sigma(0) + 9.0 * (1.0 + jitter), 1e-12);
    EXPECT_NEAR(c(0, 1), 9.0 * std::exp(-std::pow(1.0 / 12.0, 2) / (2.0 * 0.0625)), 1e-12);
}

TEST(Likelihood, ScalarCases) {
    const TimeGrid grid({2021, 1}, 1);
    auto cs = single_quote_system(0.0, 0.0);
    cs.sigma(0) = 0.75;
    // sigma^2 (1 + jitter) + 0.75 = 1 with jitter 1e-10.
    const double s = std::sqrt(0.25 / (1.0 + kJitterStart));
    EXPECT_NEAR(nll(cs, grid, {s, 1.0}), 0.0, 1e-14);
    cs.mid(0) = 2.0;
    EXPECT_NEAR(nll(cs, grid, {s, 1.0}), 4.0, 1e-13);
}

TEST(Likelihood, MatchesExplicitInverseOnSmallSystems) {
    std::mt19937_64 gen(5);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 2 + trial % 2;
        const auto inst = fixtures::random_instance(gen, 8, n, 1.0);
        if (inst.cs.size() != n) continue;
        const double ours = nll(inst.cs, inst.grid, inst.params);
        const double ref = fixtures::explicit_nll(inst);
        EXPECT_LE(std::abs(ours - ref), 1e-10 * std::abs(ref)) << "trial " << trial;
    }
}

TEST(Likelihood, GradientMatchesFiniteDifferences) {
    std::mt19937_64 gen(17);
    for (int trial = 0; trial < 20; ++trial) {
        const auto inst = fixtures::random_instance(gen, 20, 10, 1.0);
        const Eigen::Vector2d g = nll_gradient(inst.cs, inst.grid, inst.params);
        const Eigen::Vector2d fd = fixtures::fd_nll_gradient(inst);
        EXPECT_LE((g - fd).norm(), 1e-4 * g.norm()) << "trial " << trial << " g=" << g.transpose()
                                                     << " fd=" << fd.transpose();
    }
}

TEST(Likelihood, RecoversCorrelationLength) {
    // Draw a curve from the prior with theta = 0.5 and quote it tightly.
    const TimeGrid grid({2021, 1}, 48);
    const KernelParams truth{5.0, 0.5};
    const auto prior = prior_cov(grid, truth);
    CounterRng rng(2024, 0);
    Vector z(48);
    for (auto& v : z) v = rng.normal();
    const Vector curve = prior.lower() * z;
    ConstraintSystem cs;
    cs.A = Matrix::Identity(48, 48);
    cs.mid = curve;
    cs.sigma = Vector::Constant(48, 1e-4);
    cs.bid = curve.array() - 0.01;
    cs.ask = curve.array() + 0.01;
    for (int k = 0; k < 48; ++k) cs.ids.push_back("m" + std::to_string(k));
    cs.kinds.assign(48, ContractKind::Month);
    const auto fit = fit_hyperparams(cs, grid);
    EXPECT_NEAR(fit.params.theta, 0.5, 0.15) << "sigma " << fit.params.sigma;
    EXPECT_TRUE(std::isfinite(fit.report.nll));
}

TEST(Likelihood, FlatQuotesGiveBoundedFit) {
    const TimeGrid grid({2021, 1}, 12);
    ConstraintSystem cs;
    cs.A = Matrix::Identity(12, 12);
    cs.mid = Vector::Constant(12, 30.0);
    cs.bid = cs.mid.array() - 5.0;
    cs.ask = cs.mid.array() + 5.0;
    cs.sigma = Vector::Constant(12, 25.0);
    for (int k = 0; k < 12; ++k) cs.ids.push_back("m" + std::to_string(k));
    cs.kinds.assign(12, ContractKind::Month);
    const auto a = fit_hyperparams(cs, grid);
    const auto b = fit_hyperparams(cs, grid);
    EXPECT_TRUE(std::isfinite(a.report.nll));
    EXPECT_LE(a.params.sigma, 300.0 + 1e-9);
    EXPECT_EQ(a.params.sigma, b.params.sigma);
    EXPECT_EQ(a.params.theta, b.params.theta);
}

TEST(Season, PeriodicAndLinearCurvesAreFree) {
    const TimeGrid grid({2021, 1}, 40);
    const auto pen = build_season_penalty(grid, 1.0);
    Vector periodic(40), linear(40);
    for (int k = 0; k < 40; ++k) {
        periodic(k) = std::sin(2.0 * 3.141592653589793 * k / 12.0) + (k % 12 == 3 ? 0.7 : 0.0);
        linear(k) = 3.0 + 0.25 * k;
    }
    EXPECT_LT(pen.statistic(periodic), 1e-18 * 1e8);
    EXPECT_NEAR(pen.statistic(linear), 0.0, 1e-6);
    EXPECT_EQ(pen.month_map[13], 1);
    EXPECT_EQ(pen.month_map[24], 12);
    EXPECT_EQ(pen.month_map[25], 1);
    EXPECT_EQ(pen.month_map[39], -1);
}

TEST(Season, SingleKinkInSecondYear) {
    const TimeGrid grid({2021, 1}, 26);
    const double gamma = 3.0;
    const auto pen = build_season_penalty(grid, gamma);
    const double kink = 0.2;
    Vector xi(26);
    const int j = 17;  // 0-based node in the second year
    for (int k = 0; k < 26; ++k) xi(k) = 5.0 + kink * std::max(0, k - j);
    const double dt2 = grid.dt() * grid.dt();
    const double expected = gamma * std::pow(kink / dt2, 2);
    EXPECT_NEAR(xi.dot(pen.matrix() * xi), expected, 1e-9 * expected);
}

TEST(Season, ShortGridRejectsPenalty) {
    EXPECT_THROW(build_season_penalty(TimeGrid({2021, 1}, 13), 1.0), ConfigError);
    EXPECT_NO_THROW(build_season_penalty(TimeGrid({2021, 1}, 13), 0.0));
    EXPECT_THROW(build_season_penalty(TimeGrid({2021, 1}, 30), -1.0), ConfigError);
}

TEST(Map, OneDimensionalRidge) {
    const TimeGrid grid({2021, 1}, 1);
    auto cs = single_quote_system(-100.0, 106.0);
    const double s = std::sqrt(1.0 / (1.0 + kJitterStart));
    const auto fit = solve_map(cs, grid, {s, 1.0}, build_season_penalty(grid, 0.0));
    EXPECT_NEAR(fit.model.xi(0), cs.mid(0) / 2.0, 1e-12);
}

TEST(Map, PinnedQuoteIsRepricedExactly) {
    auto snap = fixtures::monthly_snapshot(6);
    snap.quotes[2].bid = snap.quotes[2].ask = 21.5;
    const TimeGrid grid = TimeGrid::covering(snap);
    const auto cs = build_constraints(snap, grid);
    const auto fit = solve_map(cs, grid, {20.0, 0.3}, build_season_penalty(grid, 0.0));
    EXPECT_NEAR(fit.model.xi(2), 21.5, 1e-10 * 22.5);
}

TEST(Map, InactiveConstraintsMatchClosedForm) {
    std::mt19937_64 gen(99);
    for (int trial = 0; trial < 25; ++trial) {
        const auto inst = fixtures::random_instance(gen);
        const auto fit = solve_map(inst.cs, inst.grid, inst.params, build_season_penalty(inst.grid, 0.0));
        const Vector ref = fixtures::kriging_mean(inst);
        EXPECT_LE((fit.model.xi - ref).lpNorm<Eigen::Infinity>(), 1e-8 * ref.lpNorm<Eigen::Infinity>());
        EXPECT_EQ(fit.report.active_constraints, 0);
    }
}

TEST(Map, ActiveConstraintsRepricedAndOptimal) {
    // Monthly quotes nudged against the overlapping spreads force bounds to bind.
    auto snap = fixtures::standard_snapshot();
    for (auto [i, shift] : {std::pair{1, 0.03}, std::pair{2, -0.02}, std::pair{3, 0.02}}) {
        snap.quotes[static_cast<std::size_t>(i)].bid += shift;
        snap.quotes[static_cast<std::size_t>(i)].ask += shift;
    }
    const TimeGrid grid = TimeGrid::covering(snap);
    const auto cs = build_constraints(snap, grid);
    // Without the penalty the unconstrained posterior mean leaves several quotes.
    const KernelParams params = fit_hyperparams(cs, grid).params;
    const auto pen = build_season_penalty(grid, 0.0);
    const auto fit = solve_map(cs, grid, params, pen);
    EXPECT_LE(max_violation(cs, fit.model.xi), 1.0);
    EXPECT_LE(fit.report.kkt_residual, 1e-8);

    // Feasible perturbations: random moves inside the null space of the
    // active rows, plus moves that leave one active bound towards the interior.
    const auto prior = prior_cov(grid, params);
    const Vector priced = cs.A * fit.model.xi;
    const Vector tol = cs.tolerance();
    std::vector<Eigen::Index> active;
    std::vector<double> inward;
    for (Eigen::Index j = 0; j < cs.size(); ++j) {
        if (priced(j) - cs.bid(j) <= tol(j)) active.push_back(j), inward.push_back(1.0);
        else if (cs.ask(j) - priced(j) <= tol(j)) active.push_back(j), inward.push_back(-1.0);
    }
    ASSERT_GE(active.size(), 2u);
    Matrix act(static_cast<Eigen::Index>(active.size()), grid.size());
    for (std::size_t a = 0; a < active.size(); ++a) act.row(static_cast<Eigen::Index>(a)) = cs.A.row(active[a]);
    const Eigen::CompleteOrthogonalDecomposition<Matrix> cod(act);
    auto project = [&](const Vector& d) { return Vector(d - cod.solve(act * d)); };

    const double J = map_objective(cs, prior, pen, fit.model.xi);
    CounterRng rng(3, 0);
    int checked = 0;
    auto check = [&](const Vector& d) {
        for (double h : {1e-2, 1e-4, 1e-6}) {
            const Vector p = cs.A * (fit.model.xi + h * d);
            if (((p - cs.bid + tol).array() < 0).any() || ((p - cs.ask - tol).array() > 0).any()) continue;
            ++checked;
            EXPECT_GE(map_objective_change(cs, prior, pen, fit.model.xi, d, h), -1e-9 * std::max(1.0, J));
        }
    };
    for (int trial = 0; trial < 100; ++trial) {
        Vector d(grid.size());
        for (auto& v : d) v = rng.normal();
        check(project(d));
    }
    for (std::size_t a = 0; a < active.size(); ++a) {
        Vector target = Vector::Zero(act.rows());
        target(static_cast<Eigen::Index>(a)) = inward[a];
        check(cod.solve(target));
    }
    EXPECT_GE(checked, 100);
}

TEST(Map, PenaltyMonotoneInGamma) {
    const auto snap = fixtures::seasonal_year_snapshot();
    const TimeGrid grid = TimeGrid::covering(snap);
    const auto cs = build_constraints(snap, grid);
    const KernelParams params = fit_hyperparams(cs, grid).params;
    double previous = std::numeric_limits<double>::infinity();
    for (double g : {0.0, 1.0, 1e2, 1e4, 1e8}) {
        const auto fit = solve_map(cs, grid, params, build_season_penalty(grid, g));
        const double stat = build_season_penalty(grid, 1.0).statistic(fit.model.xi);
        EXPECT_LE(stat, previous * (1.0 + 1e-9) + 1e-12) << "gamma " << g;
        previous = stat;
        EXPECT_LE(max_violation(cs, fit.model.xi), 1.0);
    }
}

TEST(Map, CrossedQuotesNameConflict) {
    const auto snap = fixtures::crossed_snapshot();
    const TimeGrid grid = TimeGrid::covering(snap);
    const auto cs = build_constraints(snap, grid);
    try {
        solve_map(cs, grid, {20.0, 0.5}, build_season_penalty(grid, 0.0));
        FAIL() << "expected InfeasibleError";
    } catch (const InfeasibleError& e) {
        EXPECT_EQ(e.exit_code(), 3);
        ASSERT_FALSE(e.quote_ids().empty());
        bool names_quarter = false;
        for (const auto& id : e.quote_ids()) names_quarter = names_quarter || id == "Q 2021-Q1";
        EXPECT_TRUE(names_quarter);
    }
}

TEST(Map, ObjectiveAsPrintedMatchesWhitenedForm) {
    const auto snap = fixtures::standard_snapshot();
    const TimeGrid grid = TimeGrid::covering(snap);
    const auto cs = build_constraints(snap, grid);
    const KernelParams params{20.0, 0.3};
    const auto pen = build_season_penalty(grid, 10.0);
    const auto w = whiten(cs, grid, params, pen);
    CounterRng rng(8, 1);
    Vector z(grid.size());
    for (auto& v : z) v = rng.normal();
    const Vector xi = w.L * z;
    const double whitened =
        z.dot(w.H * z) - 2.0 * w.b.dot(z) + cs.mid.dot(cs.sigma.cwiseInverse().cwiseProduct(cs.mid));
    const double printed = map_objective(cs, w.prior, pen, xi);
    EXPECT_NEAR(printed, whitened, 1e-9 * std::abs(printed));
}
