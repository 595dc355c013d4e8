#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

namespace wcoda {

/// Geometrically decaying weights w_t proportional to kappa (1 - kappa)^(n - t), t = 1..n,
/// normalized to sum to one. kappa = 0 is the unweighted method (uniform 1/n).
struct WeightScheme {
    double kappa = 0.0;
    Eigen::VectorXd weights;

    std::size_t size() const { return static_cast<std::size_t>(weights.size()); }
};

WeightScheme make_weights(double kappa, std::size_t n);

/// Inclusive grid lo, lo + step, ... not exceeding hi. Values are rounded to 1e-12 so that
/// decimal grid points compare equal to their literals.
std::vector<double> kappa_grid(double lo = 0.0, double hi = 0.3, double step = 0.001);

} // namespace wcoda
