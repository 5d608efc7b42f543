#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "ftk/calibrate.hpp"

namespace ftk {

/// Gaussian posterior of the node coefficients, N(mean, H^-1) with
/// H = Gamma^-1 + A' Sigma^-1 A + gamma M. This is the density exp(-J/2) of
/// the printed MAP objective J. Stored in whitened form (xi = L z) so that
/// sampling never touches Gamma^-1.
struct PosteriorSpec {
    Vector mean;
    Matrix prior_factor;                   // L, Gamma = L L'
    Eigen::LLT<Matrix> whitened_precision;  // factor of H_z = L' H L
    std::uint64_t seed = 0;
    int n_samples = 10000;

    /// H in node coordinates, for inspection.
    Matrix precision() const;
    /// H^-1 in node coordinates.
    Matrix covariance() const;
};

PosteriorSpec make_posterior(const ConstraintSystem& cs, const TimeGrid& grid, const KernelParams& params,
                             const SeasonPenalty& penalty, std::uint64_t seed, int n_samples);

/// One-sigma band by default.
struct QuantilePair {
    double lower = 0.1587;
    double upper = 0.8413;
};

struct PosteriorBand {
    Vector lower;
    Vector upper;
    QuantilePair quantiles;
    double acceptance_rate = 0.0;
    int samples_kept = 0;
    /// Accepted samples, one column per draw, in draw order.
    Matrix samples;
};

inline constexpr int kSampleBlock = 256;

/// Draws spec.n_samples from the unconstrained posterior in blocks of
/// kSampleBlock, block b using stream b of the seed, and keeps draws that
/// reprice every quote within bid/ask +- 1e-10 (1 + |mid|). Throws
/// SamplingError if the acceptance rate is below 1e-3 or fewer than 100 draws survive.
PosteriorBand sample_posterior(const PosteriorSpec& spec, const ConstraintSystem& cs, QuantilePair quantiles = {});

/// Linear-interpolated empirical quantile (Hyndman-Fan type 7) of sorted data.
double empirical_quantile(std::span<const double> sorted, double p);

/// Band of a delivery-window price over the accepted samples.
std::pair<double, double> band_for_window(const PosteriorBand& band, const TimeGrid& grid,
                                          std::span<const DeliveryMonth> months);

}  // namespace ftk
