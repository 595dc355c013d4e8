#include "wcoda/uncertainty.hpp"

#include "wcoda/error.hpp"
#include "wcoda/parallel.hpp"
#include "wcoda/rng.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace wcoda {

std::vector<double> score_forecast_errors(const Eigen::Ref<const Eigen::VectorXd>& scores,
                                          std::size_t horizon) {
    const auto n = static_cast<std::size_t>(scores.size());
    if (horizon < 1) throw DomainError("forecast horizon must be at least 1");
    if (n <= horizon)
        throw DomainError("no " + std::to_string(horizon) + "-step forecast errors from " +
                          std::to_string(n) + " scores");
    std::vector<double> errors;
    errors.reserve(n - horizon);
    for (std::size_t t = horizon + 1; t <= n; ++t) {
        const std::size_t fitted = t - horizon;
        const double predicted =
            fitted == 1 ? scores[0]
                        : rwd_forecast(scores.head(static_cast<Eigen::Index>(fitted)), horizon).point;
        errors.push_back(scores[static_cast<Eigen::Index>(t - 1)] - predicted);
    }
    return errors;
}

BootstrapEnsemble bootstrap_paths(const FpcaModel& model, const ClrDecomposition& decomp,
                                  std::size_t max_horizon, const BootstrapOptions& options) {
    if (max_horizon < 1) throw DomainError("number of horizons must be at least 1");
    if (options.replicates < 1) throw DomainError("bootstrap needs at least one replicate");
    if (model.phi.rows() != decomp.alpha.size())
        throw DomainError("model and decomposition have different age grids");
    const auto n = model.num_years();
    if (n < 2) throw DomainError("bootstrap needs at least two fitted years");

    const auto k_count = static_cast<Eigen::Index>(model.k);
    const Eigen::Index ages = model.phi.rows();

    // errors[h-1][k], centres[h-1](k)
    std::vector<std::vector<std::vector<double>>> errors(max_horizon);
    std::vector<Eigen::VectorXd> centres(max_horizon);
    for (std::size_t h = 1; h <= max_horizon; ++h) {
        if (n <= h)
            throw DomainError("horizon " + std::to_string(h) + " has no in-sample forecast errors with " +
                              std::to_string(n) + " fitted years; use fewer horizons or a longer series");
        centres[h - 1].resize(k_count);
        for (Eigen::Index k = 0; k < k_count; ++k) {
            errors[h - 1].push_back(score_forecast_errors(model.scores.col(k), h));
            centres[h - 1][k] = rwd_forecast(model.scores.col(k), h).point;
        }
    }

    BootstrapEnsemble ensemble;
    ensemble.seed = options.seed;
    ensemble.radix = decomp.radix;
    ensemble.paths.assign(options.replicates, Eigen::MatrixXd(static_cast<Eigen::Index>(max_horizon), ages));

    parallel_for(options.replicates, options.threads, [&](std::size_t b) {
        Philox4x32 rng(options.seed, b);
        Eigen::MatrixXd& path = ensemble.paths[b];
        Eigen::VectorXd beta(ages);
        for (std::size_t h = 1; h <= max_horizon; ++h) {
            beta.setZero();
            for (Eigen::Index k = 0; k < k_count; ++k) {
                const auto& sample = errors[h - 1][static_cast<std::size_t>(k)];
                const double draw = sample[rng.uniform_index(sample.size())];
                beta += (centres[h - 1][k] + draw) * model.phi.col(k);
            }
            const auto residual = static_cast<Eigen::Index>(rng.uniform_index(n));
            beta += model.residuals.row(residual).transpose();
            clamp_beta(beta);
            path.row(static_cast<Eigen::Index>(h - 1)) =
                clr_inverse(beta, decomp.alpha, decomp.radix, options.inverse).transpose();
        }
    });
    return ensemble;
}

double quantile_sorted(std::span<const double> sorted, double p) {
    if (sorted.empty()) throw DomainError("quantile of an empty sample");
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("quantile probability outside [0, 1]");
    const double pos = static_cast<double>(sorted.size() - 1) * p;
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

PredictionBand prediction_band(const BootstrapEnsemble& ensemble, double nu) {
    if (!(nu > 0.0 && nu < 1.0)) throw DomainError("significance level must lie in (0, 1)");
    const std::size_t b_count = ensemble.replicates();
    if (b_count < 2) throw DomainError("prediction bands need at least two replicates");
    const auto h_count = static_cast<Eigen::Index>(ensemble.horizons());
    const auto ages = static_cast<Eigen::Index>(ensemble.ages());

    PredictionBand band;
    band.nu = nu;
    band.lower.resize(h_count, ages);
    band.upper.resize(h_count, ages);
    std::vector<double> cell(b_count);
    for (Eigen::Index h = 0; h < h_count; ++h) {
        for (Eigen::Index u = 0; u < ages; ++u) {
            for (std::size_t b = 0; b < b_count; ++b) cell[b] = ensemble.paths[b](h, u);
            std::sort(cell.begin(), cell.end());
            band.lower(h, u) = quantile_sorted(cell, nu / 2.0);
            band.upper(h, u) = quantile_sorted(cell, 1.0 - nu / 2.0);
        }
    }
    return band;
}

} // namespace wcoda
