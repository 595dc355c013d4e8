#pragma once

#include "wcoda/clr.hpp"
#include "wcoda/forecast.hpp"
#include "wcoda/wfpca.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace wcoda {

/// In-sample h-step errors gamma_t - gamma_{t|t-h}, t = h+1..n (n - h values, oldest first).
/// Each forecast is a random walk with drift fitted to gamma_1..gamma_{t-h}; a single
/// observation is extended without drift.
std::vector<double> score_forecast_errors(const Eigen::Ref<const Eigen::VectorXd>& scores,
                                          std::size_t horizon);

struct BootstrapOptions {
    std::size_t replicates = 1000;
    std::uint64_t seed = 20240101;
    std::size_t threads = 1;
    InverseOptions inverse{};
};

struct BootstrapEnsemble {
    std::vector<Eigen::MatrixXd> paths; ///< B entries of H x ages
    std::uint64_t seed = 0;
    double radix = kDefaultRadix;

    std::size_t replicates() const { return paths.size(); }
    std::size_t horizons() const { return paths.empty() ? 0 : static_cast<std::size_t>(paths.front().rows()); }
    std::size_t ages() const { return paths.empty() ? 0 : static_cast<std::size_t>(paths.front().cols()); }
};

/// Resamples score forecast errors (independently per component) and whole residual
/// curves, then maps each replicate back to death counts. Replicate b draws from RNG
/// stream b, so the ensemble depends only on (model, decomposition, H, B, seed).
BootstrapEnsemble bootstrap_paths(const FpcaModel& model, const ClrDecomposition& decomp,
                                  std::size_t max_horizon, const BootstrapOptions& options = {});

struct PredictionBand {
    double nu = 0.2;
    Eigen::MatrixXd lower; // H x ages
    Eigen::MatrixXd upper;

    double level() const { return 1.0 - nu; }
};

/// Sample quantile with linear interpolation between order statistics:
/// position (m - 1) p on the sorted sample. `sorted` must be ascending and nonempty.
double quantile_sorted(std::span<const double> sorted, double p);

/// Pointwise nu/2 and 1 - nu/2 quantiles across replicates.
PredictionBand prediction_band(const BootstrapEnsemble& ensemble, double nu);

} // namespace wcoda
