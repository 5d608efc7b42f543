#include "ftk/benchmark.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ftk/calibrate.hpp"
#include "ftk/errors.hpp"

namespace ftk {

BenchmarkModel fit_benchmark(std::span<const double> maturities, std::span<const double> mids,
                             const KernelParams& params, double relative_nugget) {
    if (maturities.size() != mids.size()) throw ConfigError("benchmark maturities and mids differ in length");
    if (maturities.size() < 2) throw ConfigError("benchmark needs at least two one-month quotes");
    if (!(params.sigma > 0.0 && params.theta > 0.0)) throw ConfigError("kernel parameters must be positive");
    if (!(relative_nugget > 0.0)) throw ConfigError("nugget must be positive");

    std::vector<std::size_t> order(maturities.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return maturities[a] < maturities[b]; });

    BenchmarkModel model;
    model.params = params;
    model.nugget = relative_nugget * params.sigma * params.sigma;
    for (auto i : order) {
        if (!model.maturities.empty() && !(maturities[i] > model.maturities.back())) {
            throw ValidationError("benchmark maturities must be distinct");
        }
        model.maturities.push_back(maturities[i]);
        model.mids.push_back(mids[i]);
    }

    const auto n = static_cast<Eigen::Index>(model.maturities.size());
    const double s2 = params.sigma * params.sigma;
    Matrix gram(n, n);
    for (Eigen::Index a = 0; a < n; ++a) {
        for (Eigen::Index b = 0; b < n; ++b) {
            gram(a, b) = s2 * kernel(std::abs(model.maturities[static_cast<std::size_t>(a)] -
                                              model.maturities[static_cast<std::size_t>(b)]),
                                     params.theta);
        }
    }
    gram.diagonal().array() += model.nugget;
    Eigen::LDLT<Matrix> ldlt(gram);
    if (ldlt.info() != Eigen::Success) throw NumericalError("benchmark Gram matrix factorization failed");
    const Eigen::Map<const Vector> y(model.mids.data(), n);
    model.weights = ldlt.solve(y);
    // One step of iterative refinement.
    model.weights += ldlt.solve(Vector(y - gram * model.weights));
    return model;
}

BenchmarkModel fit_benchmark(const MarketSnapshot& snapshot, const TimeGrid& grid, const KernelParams& params,
                             double relative_nugget) {
    std::vector<double> maturities;
    std::vector<double> mids;
    std::vector<std::string> ids;
    for (const auto& q : snapshot.quotes) {
        if (q.kind != ContractKind::Month) continue;
        auto k = grid.index_of(q.window.start);
        if (!k) throw CoverageError("quote '" + q.id + "' is not on the curve grid");
        maturities.push_back(grid.time(*k));
        mids.push_back(q.mid());
        ids.push_back(q.id);
    }
    if (maturities.size() < 2) {
        throw ConfigError("benchmark needs at least two one-month quotes, snapshot has " +
                          std::to_string(maturities.size()));
    }
    BenchmarkModel model = fit_benchmark(maturities, mids, params, relative_nugget);
    std::vector<std::size_t> order(ids.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return maturities[a] < maturities[b]; });
    for (auto i : order) model.source_ids.push_back(ids[i]);
    return model;
}

KernelParams refit_benchmark_params(const MarketSnapshot& snapshot, const TimeGrid& grid) {
    MarketSnapshot monthly{snapshot.observation_date, {}};
    for (const auto& q : snapshot.quotes) {
        if (q.kind == ContractKind::Month) monthly.quotes.push_back(q);
    }
    if (monthly.quotes.size() < 2) throw ConfigError("benchmark needs at least two one-month quotes");
    return fit_hyperparams(build_constraints(monthly, grid), grid).params;
}

double eval_benchmark(const BenchmarkModel& model, double T) {
    const double s2 = model.params.sigma * model.params.sigma;
    double value = 0.0;
    for (std::size_t a = 0; a < model.maturities.size(); ++a) {
        value += s2 * kernel(std::abs(T - model.maturities[a]), model.params.theta) *
                 model.weights(static_cast<Eigen::Index>(a));
    }
    return value;
}

double benchmark_window(const BenchmarkModel& model, const TimeGrid& grid, std::span<const DeliveryMonth> months) {
    const Vector w = window_weights(grid, months);
    double value = 0.0;
    for (int k = 0; k < grid.size(); ++k) {
        if (w(k) != 0.0) value += w(k) * eval_benchmark(model, grid.time(k));
    }
    return value;
}

}  // namespace ftk
