#pragma once

#include "wcoda/lifetable.hpp"
#include "wcoda/weighting.hpp"

#include <Eigen/Dense>

namespace wcoda {

/// Log-ratio view of a death-count surface: alpha is the weighted geometric mean over
/// years and beta_t(u) = ln d_t(u) - ln alpha(u). Note the centering runs over time.
struct ClrDecomposition {
    Eigen::VectorXd alpha; // ages
    Eigen::MatrixXd beta;  // years x ages
    WeightScheme scheme;
    double radix = kDefaultRadix;
};

ClrDecomposition clr_forward(const LifeTableSeries& series, const WeightScheme& scheme);

struct InverseOptions {
    /// Rescale the curve to the radix. Disabling it returns exp(beta) * alpha as is.
    bool closure = true;
};

/// exp(beta_hat) * alpha, closed to `radix`. Cells that underflow to zero are raised to
/// kCountFloor before closing so the result is strictly positive.
Eigen::VectorXd clr_inverse(const Eigen::Ref<const Eigen::VectorXd>& beta_hat,
                            const Eigen::Ref<const Eigen::VectorXd>& alpha, double radix,
                            InverseOptions options = {});

} // namespace wcoda
