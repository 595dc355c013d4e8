#include "oracles.hpp"
#include "support.hpp"

#include "wcoda/error.hpp"
#include "wcoda/wfpca.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace wcoda;

namespace {

Eigen::MatrixXd random_matrix(support::Engine& rng, Eigen::Index rows, Eigen::Index cols) {
    std::normal_distribution<double> z;
    Eigen::MatrixXd m(rows, cols);
    for (auto& v : m.reshaped()) v = z(rng);
    return m;
}

ClrDecomposition decomposition(const Eigen::MatrixXd& beta, double kappa) {
    ClrDecomposition d;
    d.beta = beta;
    d.alpha = Eigen::VectorXd::Ones(beta.cols());
    d.scheme = make_weights(kappa, static_cast<std::size_t>(beta.rows()));
    return d;
}

} // namespace

TEST_CASE("eigen-structure matches a Jacobi solve of the Gram matrix") {
    support::Engine rng(21);
    for (int trial = 0; trial < 50; ++trial) {
        const auto n = static_cast<Eigen::Index>(support::index(rng, 2, 8));
        const auto ages = static_cast<Eigen::Index>(support::index(rng, 2, 8));
        const Eigen::MatrixXd x = random_matrix(rng, n, ages);
        const auto k = static_cast<std::size_t>(std::min(n, ages));
        const auto model = fit_fpca(x, x, ComponentRule::fixed(k));

        oracle::Mat rows(static_cast<std::size_t>(n), oracle::Vec(static_cast<std::size_t>(ages)));
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < ages; ++j) rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = x(i, j);
        oracle::Vec values;
        oracle::Mat vectors;
        oracle::jacobi_eigen(oracle::gram(rows), values, vectors);

        for (std::size_t c = 0; c < k; ++c) {
            CHECK(std::abs(model.eigenvalues[static_cast<Eigen::Index>(c)] - values[c]) <= 1e-8 * std::max(1.0, values[0]));
            double sum = 0.0;
            for (std::size_t r = 0; r < static_cast<std::size_t>(ages); ++r) sum += vectors[r][c];
            const double sign = sum < 0.0 ? -1.0 : 1.0;
            for (std::size_t r = 0; r < static_cast<std::size_t>(ages); ++r)
                CHECK(std::abs(model.phi(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) - sign * vectors[r][c]) <= 1e-8);
        }
    }
}

TEST_CASE("orthonormality, ordering, and reconstruction") {
    support::Engine rng(22);
    for (int trial = 0; trial < 30; ++trial) {
        const auto n = static_cast<Eigen::Index>(support::index(rng, 3, 40));
        const Eigen::MatrixXd beta = random_matrix(rng, n, 30);
        const double kappa = support::uniform(rng, 0.0, 0.3);
        const auto decomp = decomposition(beta, kappa);
        const std::size_t k = support::index(rng, 1, static_cast<std::size_t>(std::min<Eigen::Index>(n, 30)));

        for (ScoreBasis basis : {ScoreBasis::unweighted, ScoreBasis::weighted}) {
            const auto model = fit_wfpca(decomp, {ComponentRule::fixed(k), basis});
            const Eigen::MatrixXd gram = model.phi.transpose() * model.phi;
            CHECK((gram - Eigen::MatrixXd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff() < 1e-8);
            for (Eigen::Index i = 1; i < model.eigenvalues.size(); ++i)
                CHECK(model.eigenvalues[i] <= model.eigenvalues[i - 1]);
            const Eigen::MatrixXd scored =
                basis == ScoreBasis::weighted ? Eigen::MatrixXd(decomp.scheme.weights.asDiagonal() * beta) : beta;
            const Eigen::MatrixXd rebuilt = model.scores * model.phi.transpose() + model.residuals;
            CHECK((rebuilt - scored).cwiseAbs().maxCoeff() < 1e-8);
            CHECK(model.phi.colwise().sum().minCoeff() >= 0.0);
        }
    }
}

TEST_CASE("eigenvalues carry the energy of the weighted series") {
    support::Engine rng(23);
    const Eigen::MatrixXd beta = random_matrix(rng, 12, 9);
    const auto decomp = decomposition(beta, 0.1);
    const auto model = fit_wfpca(decomp, {ComponentRule::fixed(3), ScoreBasis::weighted});
    const Eigen::MatrixXd weighted = decomp.scheme.weights.asDiagonal() * beta;
    CHECK(model.eigenvalues.sum() == doctest::Approx(weighted.squaredNorm()).epsilon(1e-10));
    CHECK(model.eigenvalues.size() == 9);
}

TEST_CASE("kappa = 0 scores are the plain principal components of beta") {
    support::Engine rng(24);
    const Eigen::MatrixXd beta = random_matrix(rng, 10, 6);
    const auto a = fit_wfpca(decomposition(beta, 0.0), {ComponentRule::fixed(2), ScoreBasis::unweighted});
    const auto b = fit_fpca(beta, beta, ComponentRule::fixed(2));
    CHECK((a.phi - b.phi).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((a.scores - b.scores).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("rank and degenerate inputs") {
    Eigen::MatrixXd rank_one(5, 4);
    for (Eigen::Index i = 0; i < 5; ++i)
        for (Eigen::Index j = 0; j < 4; ++j) rank_one(i, j) = (i + 1.0) * (j - 1.5);
    CHECK_NOTHROW(fit_fpca(rank_one, rank_one, ComponentRule::fixed(1)));
    CHECK_THROWS_AS(fit_fpca(rank_one, rank_one, ComponentRule::fixed(2)), DomainError);
    CHECK_THROWS_AS(fit_fpca(rank_one, rank_one, ComponentRule::fixed(9)), DomainError);

    const Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(5, 4);
    const auto model = fit_fpca(zero, zero, ComponentRule::fixed(2));
    CHECK(model.eigenvalues.cwiseAbs().maxCoeff() == 0.0);
    CHECK(model.scores.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("eigenvalue ratio selection") {
    Eigen::VectorXd v(4);
    v << 10.0, 5.0, 1.0, 0.5;
    CHECK(select_k_evr(v, 3) == 2);
    CHECK(select_k_evr(v, 1) == 1);
    CHECK(select_k_evr(v) == 2); // default max_k = 2
    Eigen::VectorXd ties(4);
    ties << 8.0, 4.0, 2.0, 1.0;
    CHECK(select_k_evr(ties, 3) == 1);
    CHECK_THROWS_AS(select_k_evr(Eigen::VectorXd::Constant(1, 1.0)), DomainError);
    Eigen::VectorXd one_positive(3);
    one_positive << 1.0, 0.0, 0.0;
    CHECK_THROWS_AS(select_k_evr(one_positive), DomainError);

    // Enumeration oracle on random spectra.
    support::Engine rng(25);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t size = support::index(rng, 2, 30);
        Eigen::VectorXd ev(static_cast<Eigen::Index>(size));
        for (auto& x : ev) x = std::exp(support::uniform(rng, -5.0, 5.0));
        std::sort(ev.begin(), ev.end(), std::greater<>());
        const std::size_t max_k = support::index(rng, 1, size - 1);
        std::size_t best = 1;
        for (std::size_t k = 2; k <= max_k; ++k)
            if (ev[static_cast<Eigen::Index>(k - 1)] / ev[static_cast<Eigen::Index>(k)] >
                ev[static_cast<Eigen::Index>(best - 1)] / ev[static_cast<Eigen::Index>(best)])
                best = k;
        CHECK(select_k_evr(ev, max_k) == best);
    }
}

TEST_CASE("evr rule inside the fit") {
    support::Engine rng(26);
    Eigen::MatrixXd beta = random_matrix(rng, 20, 2) * random_matrix(rng, 2, 10) * 10.0;
    beta += 0.01 * random_matrix(rng, 20, 10);
    const auto model = fit_fpca(beta, beta, ComponentRule::evr());
    CHECK(model.k == 2);
}
