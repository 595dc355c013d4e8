#pragma once

#include "wcoda/clr.hpp"
#include "wcoda/wfpca.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

namespace wcoda {

/// Random walk with drift for one score series.
struct ScoreForecast {
    std::size_t horizon = 1;
    double point = 0.0;
    double drift = 0.0;
    double sigma2 = 0.0;
};

/// drift = (last - first) / (n - 1); point = last + h * drift; sigma2 is the sample
/// variance of the first differences about the drift (0 when n = 2).
ScoreForecast rwd_forecast(const Eigen::Ref<const Eigen::VectorXd>& series, std::size_t horizon);

/// Forecast curves d_{n+h|n}, h = 1..H. Rows are horizons.
struct ForecastSet {
    std::vector<int> ages;
    Eigen::MatrixXd curves; // H x ages
    double radix = kDefaultRadix;
    /// Cells of beta_hat clipped to +-kBetaClamp before exponentiation, over all horizons.
    std::size_t clamped_cells = 0;
    /// Calendar year of horizon 1, when known (0 otherwise).
    int first_year = 0;

    std::size_t horizons() const { return static_cast<std::size_t>(curves.rows()); }
};

inline constexpr double kBetaClamp = 700.0;

/// sum_k rwd_forecast(gamma_k, h).point * phi_k, on the scale of the model's scored series.
Eigen::VectorXd forecast_beta(const FpcaModel& model, std::size_t horizon);

/// Clamps to +-kBetaClamp in place; returns the number of clipped cells.
std::size_t clamp_beta(Eigen::Ref<Eigen::VectorXd> beta);

/// Death-count curve for a single horizon.
Eigen::VectorXd forecast_horizon(const FpcaModel& model, const ClrDecomposition& decomp,
                                 std::size_t horizon, InverseOptions inverse = {},
                                 std::size_t* clamped = nullptr);

ForecastSet forecast_death_counts(const FpcaModel& model, const ClrDecomposition& decomp,
                                  std::size_t max_horizon, InverseOptions inverse = {});

} // namespace wcoda
