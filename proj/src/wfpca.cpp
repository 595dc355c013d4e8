#include "wcoda/wfpca.hpp"

#include "wcoda/error.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace wcoda {

std::size_t select_k_evr(const Eigen::Ref<const Eigen::VectorXd>& eigenvalues, std::size_t max_k) {
    const auto count = static_cast<std::size_t>(eigenvalues.size());
    if (count < 2) throw DomainError("eigenvalue ratio needs at least two eigenvalues");
    if (!(eigenvalues[0] > 0.0 && eigenvalues[1] > 0.0))
        throw DomainError("eigenvalue ratio needs at least two positive eigenvalues");
    if (max_k == 0) max_k = std::max<std::size_t>(1, count / 2);
    max_k = std::min(max_k, count - 1);

    std::size_t best = 1;
    double best_ratio = -1.0;
    for (std::size_t k = 1; k <= max_k; ++k) {
        const double num = eigenvalues[static_cast<Eigen::Index>(k - 1)];
        const double den = eigenvalues[static_cast<Eigen::Index>(k)];
        if (!(num > 0.0)) break;
        const double ratio = den > 0.0 ? num / den : std::numeric_limits<double>::infinity();
        if (ratio > best_ratio) {
            best_ratio = ratio;
            best = k;
        }
    }
    return best;
}

FpcaModel fit_fpca(const Eigen::Ref<const Eigen::MatrixXd>& basis_data,
                   const Eigen::Ref<const Eigen::MatrixXd>& scored_data, ComponentRule rule) {
    const Eigen::Index n = basis_data.rows();
    const Eigen::Index ages = basis_data.cols();
    if (scored_data.rows() != n || scored_data.cols() != ages)
        throw DomainError("scored data shape differs from the decomposed data");
    if (n < 2) throw DomainError("FPCA needs at least two years");

    Eigen::BDCSVD<Eigen::MatrixXd> svd(basis_data, Eigen::ComputeThinV);
    const Eigen::VectorXd& sv = svd.singularValues();
    Eigen::MatrixXd v = svd.matrixV();

    FpcaModel model;
    model.eigenvalues = sv.array().square();

    const double top = sv.size() > 0 ? sv[0] : 0.0;
    const double tol = top * static_cast<double>(std::max(n, ages)) * std::numeric_limits<double>::epsilon();
    std::size_t rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv[i] > tol) ++rank;

    std::size_t k = rule.value;
    if (rule.kind == ComponentRule::Kind::evr) {
        k = select_k_evr(model.eigenvalues, rule.value);
    }
    if (k > static_cast<std::size_t>(sv.size()))
        throw DomainError("K = " + std::to_string(k) + " exceeds min(years, ages) = " +
                          std::to_string(sv.size()));
    const bool degenerate = top == 0.0;
    if (!degenerate && k > rank)
        throw DomainError("K = " + std::to_string(k) + " exceeds the rank " + std::to_string(rank) +
                          " of the weighted series");

    const auto kk = static_cast<Eigen::Index>(k);
    model.k = k;
    model.phi = v.leftCols(kk);
    for (Eigen::Index j = 0; j < kk; ++j) {
        double orientation = model.phi.col(j).sum();
        if (std::abs(orientation) <= 1e-12) {
            for (Eigen::Index u = 0; u < ages; ++u) {
                if (std::abs(model.phi(u, j)) > 1e-12) {
                    orientation = model.phi(u, j);
                    break;
                }
            }
        }
        if (orientation < 0.0) model.phi.col(j) *= -1.0;
    }
    if (degenerate) {
        model.scores = Eigen::MatrixXd::Zero(n, kk);
    } else {
        model.scores = scored_data * model.phi;
    }
    model.residuals = scored_data - model.scores * model.phi.transpose();
    return model;
}

FpcaModel fit_wfpca(const ClrDecomposition& decomp, FpcaOptions options) {
    const Eigen::Index n = decomp.beta.rows();
    if (static_cast<Eigen::Index>(decomp.scheme.size()) != n)
        throw DomainError("decomposition weights do not match its years");
    const Eigen::MatrixXd weighted = decomp.scheme.weights.asDiagonal() * decomp.beta;
    FpcaModel model = options.basis == ScoreBasis::weighted
                          ? fit_fpca(weighted, weighted, options.rule)
                          : fit_fpca(weighted, decomp.beta, options.rule);
    model.weighted = true;
    model.basis = options.basis;
    return model;
}

} // namespace wcoda
