#include "support.hpp"

#include "wcoda/error.hpp"
#include "wcoda/evaluation.hpp"
#include "wcoda/synthetic.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace wcoda;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) out[i++] = x;
    return out;
}

// Forecasts the years that follow the training window by copying them from the data.
ForecastMethod perfect_memory(const LifeTableSeries& data) {
    return [&data](const LifeTableSeries& training, std::size_t horizons) {
        const std::size_t next = data.year_index(training.years.back()) + 1;
        MethodOutput out;
        out.point = data.counts.middleRows(static_cast<Eigen::Index>(next), static_cast<Eigen::Index>(horizons));
        PredictionBand band;
        band.nu = 0.2;
        band.lower = out.point * 0.999;
        band.upper = out.point * 1.001;
        out.bands.push_back(band);
        return out;
    };
}

} // namespace

TEST_CASE("hand-computed divergences") {
    const auto p = vec({0.5, 0.5});
    const auto q = vec({0.9, 0.1});
    CHECK(kld(p, q) == doctest::Approx(0.4 * std::log(9.0)).epsilon(1e-14));
    CHECK(jsd(p, q, MeanRule::simple) == doctest::Approx(0.10174922507919676).epsilon(1e-14));
    CHECK(jsd(p, q, MeanRule::geometric) == doctest::Approx(0.21972245773362195).epsilon(1e-14));
    // Unnormalized inputs are divided by their totals first.
    CHECK(kld(p * 100000.0, q * 3.0) == doctest::Approx(kld(p, q)).epsilon(1e-14));
}

TEST_CASE("divergence axioms on random densities") {
    support::Engine rng(51);
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t size = support::index(rng, 2, 111);
        const auto p = support::random_density(rng, size);
        const auto q = support::random_density(rng, size);
        const double k = kld(p, q);
        const double js = jsd(p, q, MeanRule::simple);
        const double jg = jsd(p, q, MeanRule::geometric);
        CHECK(k > 0.0);
        CHECK(js > 0.0);
        CHECK(jg > 0.0);
        CHECK(k == doctest::Approx(kld(q, p)).epsilon(1e-12));
        CHECK(js <= std::numbers::ln2);
        // With the unnormalized geometric mean the two relative entropies sum to KLD / 2.
        CHECK(jg == doctest::Approx(k / 4.0).epsilon(1e-10));
        CHECK(std::abs(kld(p, p)) <= 1e-12);
        CHECK(std::abs(jsd(p, p, MeanRule::simple)) <= 1e-12);
        CHECK(std::abs(jsd(p, p, MeanRule::geometric)) <= 1e-12);
    }
}

TEST_CASE("divergence inputs must be positive and aligned") {
    CHECK_THROWS_AS(kld(vec({0.5, 0.5}), vec({1.0, 0.0})), DomainError);
    CHECK_THROWS_AS(kld(vec({0.5, 0.5}), vec({1.0})), DomainError);
}

TEST_CASE("exceedances and coverage") {
    const auto actual = vec({1, 2, 3, 4, 5, 6, 7, 8, 9, 10});
    const Eigen::VectorXd lower = Eigen::VectorXd::Constant(10, 2.0);
    const Eigen::VectorXd upper = Eigen::VectorXd::Constant(10, 9.0);
    CHECK(count_exceedances(actual, lower, upper) == 2); // boundary values are inside

    PredictionBand band;
    band.nu = 0.2;
    band.lower = lower.transpose();
    band.upper = upper.transpose();
    const auto stats = ecp_cpd(actual.transpose(), band);
    REQUIRE(stats.size() == 1);
    CHECK(stats[0].ecp == doctest::Approx(0.8));
    CHECK(stats[0].cpd == doctest::Approx(0.0).epsilon(1e-12));

    CoverageTally t{3, 10};
    CHECK(t.stat(0.05).ecp == doctest::Approx(0.7));
    CHECK(t.stat(0.05).cpd == doctest::Approx(0.25));
    CHECK_THROWS_AS(CoverageTally{}.stat(0.2), DomainError);
}

TEST_CASE("plan parsing") {
    const auto plan = BacktestPlan::parse("2000:2010:2020");
    CHECK(plan.train_end == 2000);
    CHECK(plan.validation_end == 2010);
    CHECK(plan.test_end == 2020);
    CHECK_THROWS_AS(BacktestPlan::parse("2000:2010"), ParseError);
    CHECK_THROWS_AS(BacktestPlan::parse("2000:x:2020"), ParseError);
    CHECK_THROWS_AS(BacktestPlan::parse("2010:2000:2020"), DomainError);
    CHECK_THROWS_AS(BacktestPlan::parse("2000:2005:2020"), DomainError); // segment shorter than H = 10
    CHECK_NOTHROW(BacktestPlan::parse("2000:2005:2010", 5));
}

TEST_CASE("expanding window bookkeeping with a perfect forecaster") {
    const auto data = make_synthetic(SyntheticSpec::defaults(SyntheticKind::gaussian, 2));
    const auto report = expanding_window_evaluate(data, 2011, 2020, 10, perfect_memory(data), {0.2});
    REQUIRE(report.horizons.size() == 10);
    for (std::size_t h = 1; h <= 10; ++h) {
        const auto& e = report.horizons[h - 1];
        CHECK(e.horizon == h);
        CHECK(e.forecasts == 11 - h);
        CHECK(std::abs(e.kld) < 1e-15);
        CHECK(std::abs(e.jsd_simple) < 1e-15);
        CHECK(std::abs(e.jsd_geometric) < 1e-15);
        CHECK(e.coverage[0].ecp == 1.0);
        CHECK(e.coverage[0].cpd == doctest::Approx(0.2));
    }
    CHECK(report.origins.size() == 55);
    CHECK(report.origins.front().origin == 2010);
    CHECK(report.origins.back().target == 2020);
    for (const auto& o : report.origins) CHECK(o.target - o.origin == static_cast<int>(o.horizon));
    CHECK(report.mean().forecasts == 55);
}

TEST_CASE("counts for shorter segments and fixed fit starts") {
    const auto data = make_synthetic(SyntheticSpec::defaults(SyntheticKind::gaussian, 3));
    const auto report = expanding_window_evaluate(data, 2016, 2020, 10, perfect_memory(data), {0.2}, 1990);
    REQUIRE(report.horizons.size() == 5);
    for (std::size_t h = 1; h <= 5; ++h) CHECK(report.horizons[h - 1].forecasts == 6 - h);

    std::vector<std::size_t> seen_sizes;
    ForecastMethod spy = [&](const LifeTableSeries& training, std::size_t horizons) {
        CHECK(training.years.front() == 1990);
        seen_sizes.push_back(training.num_years());
        return perfect_memory(data)(training, horizons);
    };
    expanding_window_evaluate(data, 2016, 2020, 10, spy, {0.2}, 1990);
    CHECK(seen_sizes == std::vector<std::size_t>{26, 27, 28, 29, 30});
    CHECK_THROWS_AS(expanding_window_evaluate(data, 2016, 2021, 10, spy), DomainError);
}

TEST_CASE("the CoDa pipeline inside the backtest") {
    const auto data = make_synthetic(SyntheticSpec::defaults(SyntheticKind::gaussian, 4));
    MethodConfig config;
    config.kappa = 0.02;
    config.replicates = 50;
    config.nus = {0.2, 0.05};
    const auto plan = BacktestPlan::parse("1990:2000:2010", 5);
    const auto report = expanding_window_backtest(data, plan, config, Segment::test);
    REQUIRE(report.horizons.size() == 5);
    CHECK(report.horizons[0].forecasts == 10);
    CHECK(report.horizons[4].forecasts == 6);
    CHECK(report.origins.front().origin == 2000);
    for (const auto& h : report.horizons) {
        CHECK(h.kld > 0.0);
        REQUIRE(h.coverage.size() == 2);
        CHECK(h.coverage[1].ecp >= h.coverage[0].ecp); // wider band covers at least as much
    }
    const auto validation = expanding_window_backtest(data, plan, config, Segment::validation);
    CHECK(validation.origins.front().origin == 1990);
    CHECK(validation.origins.back().target == 2000);
}

TEST_CASE("kappa selection: grid handling and criteria") {
    const auto data = make_synthetic(SyntheticSpec::defaults(SyntheticKind::gaussian, 5));
    const auto plan = BacktestPlan::parse("1990:2000:2010", 3);
    MethodConfig config;
    config.fpca.rule = ComponentRule::fixed(2);

    const auto a = select_kappa(data, plan, Criterion::parse("kld"), {0.0, 0.05, 0.1}, config);
    const auto b = select_kappa(data, plan, Criterion::parse("kld"), {0.1, 0.0, 0.05, 0.05}, config);
    CHECK(a.grid == b.grid);
    CHECK(a.best_kappa == b.best_kappa);
    CHECK(a.values == b.values);
    REQUIRE(a.best_kappa.size() == 3);
    for (std::size_t h = 0; h < 3; ++h) {
        double lowest = a.values[0][h];
        for (const auto& row : a.values) lowest = std::min(lowest, row[h]);
        CHECK(a.best_value[h] == lowest);
    }

    const auto single = select_kappa(data, plan, Criterion::parse("jsd_s"), {0.07}, config);
    CHECK(single.best_kappa == std::vector<double>{0.07, 0.07, 0.07});

    config.threads = 3;
    const auto threaded = select_kappa(data, plan, Criterion::parse("kld"), {0.0, 0.05, 0.1}, config);
    CHECK(threaded.values == a.values);

    CHECK_THROWS_AS(select_kappa(data, plan, Criterion::parse("cpd"), {0.0}, config), DomainError);
    config.replicates = 20;
    const auto cpd = select_kappa(data, plan, Criterion::parse("cpd", 0.2), {0.0, 0.1}, config);
    CHECK(cpd.best_value[0] >= 0.0);
    CHECK_THROWS_AS(Criterion::parse("mse"), DomainError);
    CHECK(Criterion::parse("jsd_geometric").name() == "jsd_g");
}
