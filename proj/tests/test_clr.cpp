#include "support.hpp"

#include "wcoda/clr.hpp"
#include "wcoda/error.hpp"

#include <doctest.h>

#include <cmath>

using namespace wcoda;

TEST_CASE("hand log arithmetic on a two-year cell") {
    LifeTableSeries s;
    s.years = {2000, 2001};
    s.ages = {0};
    s.radix = 1.0;
    s.counts.resize(2, 1);
    s.counts << std::exp(1.0), std::exp(3.0);
    const auto c = clr_forward(s, make_weights(0.0, 2));
    CHECK(c.alpha[0] == doctest::Approx(std::exp(2.0)).epsilon(1e-14));
    CHECK(c.beta(0, 0) == doctest::Approx(-1.0).epsilon(1e-14));
    CHECK(c.beta(1, 0) == doctest::Approx(1.0).epsilon(1e-14));

    // kappa = 0.5, n = 2: weights 1/3, 2/3, log alpha = 1/3 + 2 = 7/3
    const auto w = clr_forward(s, make_weights(0.5, 2));
    CHECK(std::log(w.alpha[0]) == doctest::Approx(7.0 / 3.0).epsilon(1e-14));
    CHECK(w.beta(0, 0) == doctest::Approx(-4.0 / 3.0).epsilon(1e-14));
}

TEST_CASE("weighted beta columns have zero weighted mean") {
    support::Engine rng(8);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = support::index(rng, 2, 40);
        const auto s = support::random_series(rng, n, 20);
        const auto c = clr_forward(s, make_weights(support::uniform(rng, 0.0, 0.3), n));
        const Eigen::RowVectorXd centred = c.scheme.weights.transpose() * c.beta;
        CHECK(centred.cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("round trip reproduces every year") {
    support::Engine rng(10);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t n = support::index(rng, 1, 50);
        const auto s = support::random_series(rng, n, 111);
        const auto c = clr_forward(s, make_weights(support::uniform(rng, 0.0, 0.3), n));
        for (std::size_t t = 0; t < n; ++t) {
            const auto back = clr_inverse(c.beta.row(static_cast<Eigen::Index>(t)).transpose(), c.alpha, s.radix);
            const Eigen::VectorXd orig = s.counts.row(static_cast<Eigen::Index>(t)).transpose();
            CHECK(((back - orig).array() / orig.array()).abs().maxCoeff() < 1e-9);
        }
    }
}

TEST_CASE("inverse closes to the radix and survives extreme beta") {
    Eigen::VectorXd alpha = Eigen::VectorXd::Constant(4, 2.0);
    Eigen::VectorXd beta(4);
    beta << 700.0, -700.0, 0.0, 690.0;
    const auto d = clr_inverse(beta, alpha, 1000.0);
    CHECK(d.sum() == doctest::Approx(1000.0).epsilon(1e-14));
    CHECK(d.minCoeff() > 0.0);
    CHECK(d.allFinite());

    InverseOptions raw{false};
    Eigen::VectorXd small(4);
    small << 0.0, std::log(2.0), 0.0, 0.0;
    const auto open = clr_inverse(small, alpha, 1000.0, raw);
    CHECK(open[0] == doctest::Approx(2.0));
    CHECK(open[1] == doctest::Approx(4.0));
    beta[0] = 710.0;
    CHECK_THROWS_AS(clr_inverse(beta, alpha, 1000.0, raw), DomainError);
}

TEST_CASE("nonpositive counts and mismatched weights are rejected") {
    support::Engine rng(12);
    auto s = support::random_series(rng, 3, 4);
    CHECK_THROWS_AS(clr_forward(s, make_weights(0.0, 4)), DomainError);
    s.counts(1, 2) = 0.0;
    try {
        clr_forward(s, make_weights(0.0, 3));
        FAIL("expected DomainError");
    } catch (const DomainError& e) {
        CHECK(std::string(e.what()).find("1901") != std::string::npos);
    }
}
