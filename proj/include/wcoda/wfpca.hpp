#pragma once

#include "wcoda/clr.hpp"

#include <Eigen/Dense>

#include <cstddef>

namespace wcoda {

/// How many components to keep.
struct ComponentRule {
    enum class Kind { fixed, evr };
    Kind kind = Kind::fixed;
    /// K for `fixed`; the largest admissible K for `evr` (0 selects min(n, ages) / 2).
    std::size_t value = 6;

    static ComponentRule fixed(std::size_t k) { return {Kind::fixed, k}; }
    static ComponentRule evr(std::size_t max_k = 0) { return {Kind::evr, max_k}; }
};

/// Which series the principal component scores are projected from. The eigenfunctions
/// always come from the weighted series beta* = diag(w) beta.
enum class ScoreBasis {
    unweighted, ///< gamma_{t,k} = <beta_t, phi_k>; forecasts live on the beta scale
    weighted,   ///< gamma_{t,k} = <beta*_t, phi_k>; reconstruction identity holds on beta*
};

struct FpcaOptions {
    ComponentRule rule = ComponentRule::fixed(6);
    ScoreBasis basis = ScoreBasis::unweighted;
};

struct FpcaModel {
    Eigen::MatrixXd phi;          ///< ages x K, orthonormal columns
    Eigen::MatrixXd scores;       ///< years x K
    Eigen::VectorXd eigenvalues;  ///< all min(n, ages) squared singular values, nonincreasing
    Eigen::MatrixXd residuals;    ///< years x ages: scored series minus its K-term reconstruction
    std::size_t k = 0;
    bool weighted = true;
    ScoreBasis basis = ScoreBasis::unweighted;

    std::size_t num_years() const { return static_cast<std::size_t>(scores.rows()); }
};

/// Principal components of `basis_data` (via its SVD), with scores projected from
/// `scored_data` (same shape). Columns of phi are sign-fixed to a nonnegative sum.
FpcaModel fit_fpca(const Eigen::Ref<const Eigen::MatrixXd>& basis_data,
                   const Eigen::Ref<const Eigen::MatrixXd>& scored_data, ComponentRule rule);

/// Weighted FPCA of a log-ratio decomposition.
FpcaModel fit_wfpca(const ClrDecomposition& decomp, FpcaOptions options = {});

/// argmax_{1 <= k <= max_k} lambda_k / lambda_{k+1}, smallest k on ties.
/// max_k = 0 uses size / 2; max_k is capped at size - 1.
std::size_t select_k_evr(const Eigen::Ref<const Eigen::VectorXd>& eigenvalues, std::size_t max_k = 0);

} // namespace wcoda
