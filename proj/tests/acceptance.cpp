// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include <Eigen/Eigenvalues>

#include "ftk/cli.hpp"
#include "ftk/errors.hpp"
#include "oracles.hpp"
#include "synthetic.hpp"

using namespace ftk;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

double worst_violation(const MarketSnapshot& snap, const CurveModel& model) {
    double worst = 0.0;  // in units of the tolerance
    for (const auto& q : snap.quotes) {
        const double p = price_window(model, delivery_months(q));
        const double tol = 1e-10 * (1.0 + std::abs(q.mid()));
        worst = std::max(worst, std::max(q.bid - p, p - q.ask) / tol);
    }
    return worst;
}

Outcome repricing() {
    const auto snap = fixtures::standard_snapshot();
    RunConfig cfg;
    cfg.asof = snap.observation_date;
    double slowest = 0.0;
    Calibration cal;
    for (int rep = 0; rep < 3; ++rep) {
        const auto t0 = std::chrono::steady_clock::now();
        cal = calibrate_snapshot(snap, cfg);
        slowest = std::max(slowest, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    }
    const double v = std::max(worst_violation(snap, cal.model.penalized), worst_violation(snap, cal.model.plain));
    const bool ok = v <= 1.0 && slowest <= 2.0 && cal.model.penalized.grid.size() == 60;
    return {ok, std::to_string(snap.quotes.size()) + " quotes, " + fmt("worst violation %.3g x tol, slowest calibration %.3f s", v, slowest)};
}

Outcome oracle_equivalence() {
    std::mt19937_64 gen(20240611);
    double worst = 0.0, worst_literal = 0.0;
    int literal = 0;
    for (int i = 0; i < 50; ++i) {
        const auto inst = fixtures::random_instance(gen, 20, 10, 100.0);
        const auto fit = solve_map(inst.cs, inst.grid, inst.params, build_season_penalty(inst.grid, 0.0));
        const Vector ref = fixtures::kriging_mean(inst);
        worst = std::max(worst, (fit.model.xi - ref).lpNorm<Eigen::Infinity>() / ref.lpNorm<Eigen::Infinity>());
        // The explicit-inverse form is only trustworthy while Gamma is well conditioned.
        Eigen::SelfAdjointEigenSolver<Matrix> es(prior_cov(inst.grid, inst.params).gamma);
        if (es.eigenvalues().maxCoeff() / es.eigenvalues().minCoeff() < 1e6) {
            const Vector lit = fixtures::precision_mean(inst);
            worst_literal =
                std::max(worst_literal, (fit.model.xi - lit).lpNorm<Eigen::Infinity>() / lit.lpNorm<Eigen::Infinity>());
            ++literal;
        }
    }
    return {worst <= 1e-8 && worst_literal <= 1e-8,
            fmt("50 instances, max rel err %.2e vs kriging form; %.2e vs explicit precision form", worst,
                worst_literal) +
                " on " + std::to_string(literal) + " well-conditioned ones"};
}

Outcome likelihood() {
    std::mt19937_64 gen(77);
    double worst_value = 0.0;
    int small = 0;
    while (small < 20) {
        const int n = 2 + small % 2;
        const auto inst = fixtures::random_instance(gen, 8, n, 1.0);
        if (inst.cs.size() != n) continue;
        const double ours = nll(inst.cs, inst.grid, inst.params);
        const double ref = fixtures::explicit_nll(inst);
        worst_value = std::max(worst_value, std::abs(ours - ref) / std::abs(ref));
        ++small;
    }
    double worst_grad = 0.0;
    for (int i = 0; i < 20; ++i) {
        const auto inst = fixtures::random_instance(gen, 20, 10, 1.0);
        const Eigen::Vector2d g = nll_gradient(inst.cs, inst.grid, inst.params);
        const Eigen::Vector2d fd = fixtures::fd_nll_gradient(inst);
        worst_grad = std::max(worst_grad, (g - fd).norm() / g.norm());
    }
    return {worst_value <= 1e-10 && worst_grad <= 1e-4,
            fmt("nll vs explicit inverse (2x2, 3x3) max rel %.2e; gradient vs central differences max rel %.2e",
                worst_value, worst_grad)};
}

Outcome seasonality() {
    const auto snap = fixtures::seasonal_year_snapshot();
    const TimeGrid grid = TimeGrid::covering(snap);
    const auto cs = build_constraints(snap, grid);
    const KernelParams params = fit_hyperparams(cs, grid).params;
    const auto unit = build_season_penalty(grid, 1.0);
    std::vector<double> stats;
    for (double g : {0.0, 1.0, 1e2, 1e4, 1e8}) {
        stats.push_back(unit.statistic(solve_map(cs, grid, params, build_season_penalty(grid, g)).model.xi));
    }
    bool monotone = true;
    for (std::size_t i = 1; i < stats.size(); ++i) monotone = monotone && stats[i] <= stats[i - 1];
    const double ratio = stats.back() / stats.front();
    std::string detail = std::to_string(grid.size()) + " nodes, statistic";
    for (double s : stats) detail += fmt(" %.3e", s);
    return {monotone && ratio <= 1e-4, detail + fmt(", ratio %.2e", ratio)};
}

Outcome averaging() {
    std::vector<std::pair<MarketSnapshot, CurveModel>> models;
    for (const auto& snap : {fixtures::standard_snapshot(), fixtures::seasonal_year_snapshot(),
                             fixtures::monthly_snapshot(24)}) {
        RunConfig cfg;
        cfg.asof = snap.observation_date;
        const auto cal = calibrate_snapshot(snap, cfg);
        models.emplace_back(snap, cal.model.penalized);
        models.emplace_back(snap, cal.model.plain);
    }
    double worst = 0.0;
    int checked = 0;
    for (const auto& [snap, model] : models) {
        const TimeGrid& grid = model.grid;
        // Every quarter, season and year on the grid, plus the quoted windows.
        std::vector<DeliveryWindow> windows;
        for (int k = 0; k < grid.size(); ++k) {
            const YearMonth m = grid.month(k);
            if (m.month % 3 == 1) windows.push_back({m, m.plus(2)});
            if (m.month == 4 || m.month == 10) windows.push_back({m, m.plus(5)});
            if (m.month == 1) windows.push_back({m, m.plus(11)});
        }
        for (const auto& q : snap.quotes) {
            if (!is_spread(q.kind) && q.kind != ContractKind::Month) windows.push_back(q.window);
        }
        for (const auto& w : windows) {
            if (!grid.index_of(w.start) || !grid.index_of(w.end)) continue;
            double num = 0.0, den = 0.0;
            for (YearMonth m = w.start; m <= w.end; m = m.plus(1)) {
                const auto first = std::chrono::sys_days{std::chrono::year{m.year} / m.month / 1};
                const auto next_ym = m.plus(1);
                const auto next = std::chrono::sys_days{std::chrono::year{next_ym.year} / next_ym.month / 1};
                const double days = static_cast<double>((next - first).count());
                num += days * model.xi(*grid.index_of(m));
                den += days;
            }
            worst = std::max(worst, std::abs(price_window(model, window_months(w)) - num / den));
            ++checked;
        }
    }
    return {worst <= 1e-12, std::to_string(checked) + fmt(" windows over %.0f models, max abs diff %.2e",
                                                           static_cast<double>(models.size()), worst)};
}

double interpolation_error(const BenchmarkModel& b) {
    double worst = 0.0;
    for (std::size_t a = 0; a < b.maturities.size(); ++a) {
        worst = std::max(worst, std::abs(eval_benchmark(b, b.maturities[a]) - b.mids[a]) / (1.0 + std::abs(b.mids[a])));
    }
    return worst;
}

Outcome benchmark() {
    const auto snap = fixtures::standard_snapshot();
    RunConfig cfg;
    cfg.asof = snap.observation_date;
    const auto cal = calibrate_snapshot(snap, cfg);
    const TimeGrid& grid = cal.model.penalized.grid;
    const KernelParams params = cal.model.penalized.params;
    // Nugget variance 1e-10 in price units squared.
    const auto b = fit_benchmark(snap, grid, params, 1e-10 / (params.sigma * params.sigma));
    int monthly = 0;
    for (const auto& q : snap.quotes) monthly += q.kind == ContractKind::Month;
    bool only_monthly = static_cast<int>(b.source_ids.size()) == monthly;
    for (const auto& id : b.source_ids) {
        const auto it = std::find_if(snap.quotes.begin(), snap.quotes.end(), [&](const Quote& q) { return q.id == id; });
        only_monthly = only_monthly && it != snap.quotes.end() && it->kind == ContractKind::Month;
    }
    const double worst = interpolation_error(b);
    const double scaled = interpolation_error(cal.benchmark);
    return {only_monthly && worst <= 1e-6,
            std::to_string(b.source_ids.size()) + " monthly inputs of " + std::to_string(snap.quotes.size()) +
                fmt(" quotes, max rel interpolation err %.2e at nugget 1e-10 (%.2e at the default 1e-10 sigma^2)",
                    worst, scaled)};
}

Outcome band_sanity() {
    const auto snap = fixtures::standard_snapshot();
    RunConfig cfg;
    cfg.asof = snap.observation_date;
    const auto cal = calibrate_snapshot(snap, cfg);
    const CurveModel& model = cal.model.penalized;
    const TimeGrid& grid = model.grid;

    PosteriorBand a, b;
    cfg.seed = 12345;
    compute_bands(cal.model, cfg, false, &a);
    cfg.seed = 67890;
    compute_bands(cal.model, cfg, false, &b);

    int contains = 0;
    for (int k = 0; k < grid.size(); ++k) contains += a.lower(k) <= model.xi(k) && model.xi(k) <= a.upper(k);

    // Nodes pinned by one-month quotes versus nodes only reached by longer contracts.
    std::vector<bool> pinned(static_cast<std::size_t>(grid.size()), false);
    for (const auto& q : snap.quotes) {
        if (q.kind == ContractKind::Month) pinned[static_cast<std::size_t>(*grid.index_of(q.window.start))] = true;
    }
    double pinned_width = 0.0, free_width = 0.0, worst_gap = 0.0;
    int n_pinned = 0;
    for (int k = 0; k < grid.size(); ++k) {
        const double width = a.upper(k) - a.lower(k);
        if (pinned[static_cast<std::size_t>(k)]) pinned_width += width, ++n_pinned;
        else free_width += width;
        const double mean_width = 0.5 * (width + b.upper(k) - b.lower(k));
        worst_gap = std::max({worst_gap, std::abs(a.lower(k) - b.lower(k)) / mean_width,
                              std::abs(a.upper(k) - b.upper(k)) / mean_width});
    }
    pinned_width /= n_pinned;
    free_width /= grid.size() - n_pinned;
    const bool ok = a.acceptance_rate >= 0.5 && b.acceptance_rate >= 0.5 && contains >= 58 &&
                    free_width > pinned_width && worst_gap <= 0.05;
    return {ok, fmt("acceptance %.3f / %.3f, ", a.acceptance_rate, b.acceptance_rate) +
                    std::to_string(contains) + "/" + std::to_string(grid.size()) +
                    fmt(" nodes contain MAP, mean width unquoted %.4f vs pinned %.4f, max seed gap %.3f of width",
                        free_width, pinned_width, worst_gap)};
}

Outcome determinism() {
    const auto input = fixtures::write_snapshot(fixtures::standard_snapshot(), "acceptance_det");
    const std::string names[] = {"table.csv", "curve.csv", "model.json", "band_1m.csv",
                                 "band_3m.csv", "band_6m.csv", "band_12m.csv"};
    std::vector<std::string> first;
    bool ok = true;
    for (int run = 0; run < 2; ++run) {
        const auto dir = fixtures::temp_dir("acceptance_det_" + std::to_string(run));
        std::ostringstream out, err;
        ok = ok && run_cli({"calibrate", "--input", input, "--asof", "2020-03-14", "--out", dir}, out, err) == 0;
        ok = ok && run_cli({"band", "--model", dir + "/model.json", "--seed", "99", "--samples", "10000", "--out", dir},
                           out, err) == 0;
        for (std::size_t i = 0; i < std::size(names); ++i) {
            const auto bytes = slurp(std::filesystem::path(dir) / names[i]);
            ok = ok && !bytes.empty();
            if (run == 0) first.push_back(bytes);
            else ok = ok && bytes == first[i];
        }
    }
    return {ok, std::to_string(std::size(names)) + " output files byte-identical across two runs"};
}

Outcome infeasibility() {
    const auto snap = fixtures::crossed_snapshot();
    const auto input = fixtures::write_snapshot(snap, "acceptance_crossed");
    std::ostringstream out, err;
    const int code =
        run_cli({"calibrate", "--input", input, "--asof", "2020-12-10", "--out", fixtures::temp_dir("acceptance_crossed")},
                out, err);
    bool named = false;
    for (const auto& q : snap.quotes) named = named || err.str().find(q.id) != std::string::npos;
    std::string msg = err.str();
    if (!msg.empty() && msg.back() == '\n') msg.pop_back();
    return {code == 3 && named, "exit " + std::to_string(code) + ", " + msg};
}

}  // namespace

int main() {
    const std::pair<const char*, std::function<Outcome()>> criteria[] = {
        {"repricing", repricing},         {"oracle equivalence", oracle_equivalence},
        {"likelihood", likelihood},       {"seasonality forcing", seasonality},
        {"averaging consistency", averaging}, {"benchmark interpolation", benchmark},
        {"band sanity", band_sanity},     {"determinism", determinism},
        {"infeasibility handling", infeasibility},
    };
    int failures = 0;
    int index = 1;
    for (const auto& [name, check] : criteria) {
        Outcome o;
        try {
            o = check();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failures += !o.pass;
        std::printf("%s %d %s: %s\n", o.pass ? "PASS" : "FAIL", index++, name, o.detail.c_str());
    }
    return failures == 0 ? 0 : 1;
}
