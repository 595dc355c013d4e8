#include "wcoda/weighting.hpp"

#include "wcoda/error.hpp"

#include <cmath>
#include <string>

namespace wcoda {

WeightScheme make_weights(double kappa, std::size_t n) {
    if (!(kappa >= 0.0 && kappa <= 1.0))
        throw DomainError("kappa must lie in [0, 1], got " + std::to_string(kappa));
    if (n == 0) throw DomainError("weight vector length must be positive");

    WeightScheme scheme;
    scheme.kappa = kappa;
    const auto len = static_cast<Eigen::Index>(n);
    if (kappa == 0.0) {
        scheme.weights = Eigen::VectorXd::Constant(len, 1.0 / static_cast<double>(n));
        return scheme;
    }
    scheme.weights.resize(len);
    // Each raw weight depends only on its distance from the last year, which keeps the
    // trailing block of a longer scheme identical to a shorter scheme.
    for (Eigen::Index t = 0; t < len; ++t)
        scheme.weights[t] = kappa * std::pow(1.0 - kappa, static_cast<double>(len - 1 - t));
    scheme.weights /= scheme.weights.sum();
    return scheme;
}

std::vector<double> kappa_grid(double lo, double hi, double step) {
    if (!(lo >= 0.0 && hi <= 1.0 && lo < hi && step > 0.0))
        throw DomainError("kappa grid needs 0 <= lo < hi <= 1 and step > 0");
    const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
    std::vector<double> grid;
    grid.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const double v = lo + static_cast<double>(i) * step;
        grid.push_back(std::round(v * 1e12) / 1e12);
    }
    return grid;
}

} // namespace wcoda
