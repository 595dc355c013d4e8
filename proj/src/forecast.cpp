#include "wcoda/forecast.hpp"

#include "wcoda/error.hpp"

#include <algorithm>

namespace wcoda {

ScoreForecast rwd_forecast(const Eigen::Ref<const Eigen::VectorXd>& series, std::size_t horizon) {
    const Eigen::Index n = series.size();
    if (n < 2) throw DomainError("random walk with drift needs at least two observations");
    if (horizon < 1) throw DomainError("forecast horizon must be at least 1");

    ScoreForecast out;
    out.horizon = horizon;
    out.drift = (series[n - 1] - series[0]) / static_cast<double>(n - 1);
    out.point = series[n - 1] + static_cast<double>(horizon) * out.drift;
    if (n > 2) {
        double ss = 0.0;
        for (Eigen::Index t = 1; t < n; ++t) {
            const double e = series[t] - series[t - 1] - out.drift;
            ss += e * e;
        }
        out.sigma2 = ss / static_cast<double>(n - 2);
    }
    return out;
}

Eigen::VectorXd forecast_beta(const FpcaModel& model, std::size_t horizon) {
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(model.phi.rows());
    for (Eigen::Index k = 0; k < static_cast<Eigen::Index>(model.k); ++k)
        beta += rwd_forecast(model.scores.col(k), horizon).point * model.phi.col(k);
    return beta;
}

std::size_t clamp_beta(Eigen::Ref<Eigen::VectorXd> beta) {
    std::size_t clipped = 0;
    for (Eigen::Index u = 0; u < beta.size(); ++u) {
        if (beta[u] > kBetaClamp || beta[u] < -kBetaClamp) {
            beta[u] = std::clamp(beta[u], -kBetaClamp, kBetaClamp);
            ++clipped;
        }
    }
    return clipped;
}

Eigen::VectorXd forecast_horizon(const FpcaModel& model, const ClrDecomposition& decomp,
                                 std::size_t horizon, InverseOptions inverse, std::size_t* clamped) {
    if (horizon < 1) throw DomainError("forecast horizon must be at least 1");
    if (model.phi.rows() != decomp.alpha.size())
        throw DomainError("model and decomposition have different age grids");
    Eigen::VectorXd beta = forecast_beta(model, horizon);
    const std::size_t clipped = clamp_beta(beta);
    if (clamped) *clamped += clipped;
    return clr_inverse(beta, decomp.alpha, decomp.radix, inverse);
}

ForecastSet forecast_death_counts(const FpcaModel& model, const ClrDecomposition& decomp,
                                  std::size_t max_horizon, InverseOptions inverse) {
    if (max_horizon < 1) throw DomainError("number of horizons must be at least 1");
    ForecastSet out;
    out.radix = decomp.radix;
    out.ages.resize(static_cast<std::size_t>(decomp.alpha.size()));
    for (std::size_t u = 0; u < out.ages.size(); ++u) out.ages[u] = static_cast<int>(u);
    out.curves.resize(static_cast<Eigen::Index>(max_horizon), decomp.alpha.size());
    for (std::size_t h = 1; h <= max_horizon; ++h)
        out.curves.row(static_cast<Eigen::Index>(h - 1)) =
            forecast_horizon(model, decomp, h, inverse, &out.clamped_cells).transpose();
    return out;
}

} // namespace wcoda
