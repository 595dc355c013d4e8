#include "wcoda/clr.hpp"

#include "wcoda/error.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace wcoda {

ClrDecomposition clr_forward(const LifeTableSeries& series, const WeightScheme& scheme) {
    const Eigen::Index n = series.counts.rows();
    const Eigen::Index ages = series.counts.cols();
    if (static_cast<Eigen::Index>(scheme.size()) != n)
        throw DomainError("weight scheme has " + std::to_string(scheme.size()) + " entries for " +
                          std::to_string(n) + " years");

    Eigen::MatrixXd log_counts(n, ages);
    for (Eigen::Index t = 0; t < n; ++t) {
        for (Eigen::Index u = 0; u < ages; ++u) {
            const double d = series.counts(t, u);
            if (!(d > 0.0) || !std::isfinite(d))
                throw DomainError("death count at (year " +
                                  std::to_string(series.years[static_cast<std::size_t>(t)]) +
                                  ", age " + std::to_string(u) + ") must be positive");
            log_counts(t, u) = std::log(d);
        }
    }

    const Eigen::RowVectorXd log_mean = scheme.weights.transpose() * log_counts;
    ClrDecomposition out;
    out.alpha = log_mean.transpose().array().exp();
    out.beta = log_counts.rowwise() - log_mean;
    out.scheme = scheme;
    out.radix = series.radix;
    return out;
}

Eigen::VectorXd clr_inverse(const Eigen::Ref<const Eigen::VectorXd>& beta_hat,
                            const Eigen::Ref<const Eigen::VectorXd>& alpha, double radix,
                            InverseOptions options) {
    if (beta_hat.size() != alpha.size())
        throw DomainError("forecast and mean function have different age grids");
    const Eigen::Index ages = alpha.size();
    Eigen::VectorXd log_d(ages);
    for (Eigen::Index u = 0; u < ages; ++u) {
        if (!(alpha[u] > 0.0)) throw DomainError("mean function is not positive at age " + std::to_string(u));
        if (!std::isfinite(beta_hat[u])) throw DomainError("non-finite forecast at age " + std::to_string(u));
        log_d[u] = beta_hat[u] + std::log(alpha[u]);
    }

    Eigen::VectorXd d(ages);
    if (!options.closure) {
        for (Eigen::Index u = 0; u < ages; ++u) {
            d[u] = std::exp(log_d[u]);
            if (!std::isfinite(d[u])) throw DomainError("exp overflow at age " + std::to_string(u));
        }
        return d;
    }

    // Closure is invariant to a common shift, so exponentiate relative to the maximum.
    const double top = log_d.maxCoeff();
    d = (log_d.array() - top).exp();
    d *= radix / d.sum();
    bool underflow = false;
    for (Eigen::Index u = 0; u < ages; ++u) {
        if (!(d[u] >= std::numeric_limits<double>::min())) {
            d[u] = kCountFloor;
            underflow = true;
        }
    }
    if (underflow) d *= radix / d.sum();
    return d;
}

} // namespace wcoda
