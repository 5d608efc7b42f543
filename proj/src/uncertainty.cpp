#include "ftk/uncertainty.hpp"

#include <algorithm>
#include <cmath>

#include "ftk/errors.hpp"
#include "ftk/rng.hpp"

namespace ftk {

namespace {

std::pair<double, double> quantiles_of(std::vector<double>& values, QuantilePair q) {
    std::sort(values.begin(), values.end());
    return {empirical_quantile(values, q.lower), empirical_quantile(values, q.upper)};
}

}  // namespace

Matrix PosteriorSpec::precision() const {
    const Eigen::Index n = prior_factor.rows();
    // H = L^-T H_z L^-1
    Matrix linv = prior_factor.triangularView<Eigen::Lower>().solve(Matrix::Identity(n, n));
    return linv.transpose() * whitened_precision.reconstructedMatrix() * linv;
}

Matrix PosteriorSpec::covariance() const {
    const Eigen::Index n = prior_factor.rows();
    return prior_factor * whitened_precision.solve(Matrix::Identity(n, n)) * prior_factor.transpose();
}

PosteriorSpec make_posterior(const ConstraintSystem& cs, const TimeGrid& grid, const KernelParams& params,
                             const SeasonPenalty& penalty, std::uint64_t seed, int n_samples) {
    if (n_samples <= 0) throw ConfigError("sample count must be positive");
    const WhitenedSystem w = whiten(cs, grid, params, penalty);
    PosteriorSpec spec;
    spec.prior_factor = w.L;
    spec.whitened_precision.compute(w.H);
    if (spec.whitened_precision.info() != Eigen::Success) {
        throw NumericalError("posterior precision is not positive definite");
    }
    spec.mean = w.L * spec.whitened_precision.solve(w.b);
    spec.seed = seed;
    spec.n_samples = n_samples;
    return spec;
}

double empirical_quantile(std::span<const double> sorted, double p) {
    if (sorted.empty()) throw ConfigError("quantile of an empty sample");
    const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    if (lo + 1 >= sorted.size()) return sorted.back();
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

PosteriorBand sample_posterior(const PosteriorSpec& spec, const ConstraintSystem& cs, QuantilePair quantiles) {
    if (!(quantiles.lower > 0.0 && quantiles.lower < quantiles.upper && quantiles.upper < 1.0)) {
        throw ConfigError("quantiles must satisfy 0 < lower < upper < 1");
    }
    const Eigen::Index n = spec.mean.size();
    if (cs.size() > 0 && cs.A.cols() != n) throw ConfigError("constraint matrix does not match posterior");
    const Vector lo = cs.size() > 0 ? Vector(cs.bid - cs.tolerance()) : Vector(0);
    const Vector hi = cs.size() > 0 ? Vector(cs.ask + cs.tolerance()) : Vector(0);

    std::vector<Vector> kept;
    kept.reserve(static_cast<std::size_t>(spec.n_samples));
    const int blocks = (spec.n_samples + kSampleBlock - 1) / kSampleBlock;
    for (int b = 0; b < blocks; ++b) {
        const int count = std::min(kSampleBlock, spec.n_samples - b * kSampleBlock);
        CounterRng rng(spec.seed, static_cast<std::uint64_t>(b));
        Matrix white(n, count);
        for (int s = 0; s < count; ++s) {
            for (Eigen::Index i = 0; i < n; ++i) white(i, s) = rng.normal();
        }
        // z ~ N(0, H_z^-1) via back-substitution with the upper factor.
        const Matrix z = spec.whitened_precision.matrixU().solve(white);
        Matrix draws = spec.prior_factor.triangularView<Eigen::Lower>() * z;
        draws.colwise() += spec.mean;
        const Matrix priced = cs.size() > 0 ? Matrix(cs.A * draws) : Matrix(0, count);
        for (int s = 0; s < count; ++s) {
            bool ok = true;
            for (Eigen::Index j = 0; j < priced.rows() && ok; ++j) {
                ok = priced(j, s) >= lo(j) && priced(j, s) <= hi(j);
            }
            if (ok) kept.emplace_back(draws.col(s));
        }
    }

    PosteriorBand band;
    band.quantiles = quantiles;
    band.samples_kept = static_cast<int>(kept.size());
    band.acceptance_rate = static_cast<double>(kept.size()) / spec.n_samples;
    if (band.acceptance_rate < 1e-3) {
        throw SamplingError("posterior band degenerate: acceptance rate " + std::to_string(band.acceptance_rate) +
                            "; increase the sample count");
    }
    if (band.samples_kept < 100) {
        throw SamplingError("only " + std::to_string(band.samples_kept) +
                            " admissible samples (need 100); increase the sample count");
    }

    band.samples.resize(n, band.samples_kept);
    for (std::size_t s = 0; s < kept.size(); ++s) band.samples.col(static_cast<Eigen::Index>(s)) = kept[s];

    band.lower.resize(n);
    band.upper.resize(n);
    std::vector<double> row(kept.size());
    for (Eigen::Index i = 0; i < n; ++i) {
        for (std::size_t s = 0; s < kept.size(); ++s) row[s] = band.samples(i, static_cast<Eigen::Index>(s));
        std::tie(band.lower(i), band.upper(i)) = quantiles_of(row, quantiles);
    }
    return band;
}

std::pair<double, double> band_for_window(const PosteriorBand& band, const TimeGrid& grid,
                                          std::span<const DeliveryMonth> months) {
    if (band.samples.cols() == 0) throw SamplingError("band has no retained samples");
    if (band.samples.rows() != grid.size()) throw ConfigError("band does not match grid");
    const Vector w = window_weights(grid, months);
    const Vector prices = band.samples.transpose() * w;
    std::vector<double> values(prices.data(), prices.data() + prices.size());
    return quantiles_of(values, band.quantiles);
}

}  // namespace ftk
