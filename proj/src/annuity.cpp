#include "wcoda/annuity.hpp"

#include "wcoda/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace wcoda {

Eigen::VectorXd survival_probabilities(const Eigen::Ref<const Eigen::MatrixXd>& curves, int age, int maturity) {
    if (maturity < 1) throw DomainError("maturity must be at least one year");
    if (age < 0) throw DomainError("age must be nonnegative");
    const int terminal = static_cast<int>(curves.cols()) - 1;
    if (!annuity_cell_defined(age, maturity, terminal))
        throw DomainError("age " + std::to_string(age) + " + maturity " + std::to_string(maturity) +
                          " exceeds the terminal age " + std::to_string(terminal));
    if (curves.rows() < maturity)
        throw DomainError("maturity " + std::to_string(maturity) + " needs " + std::to_string(maturity) +
                          " forecast years, only " + std::to_string(curves.rows()) + " available");

    Eigen::VectorXd survival(maturity);
    double alive = 1.0;
    for (int j = 0; j < maturity; ++j) {
        const int u = age + j;
        const auto table = curves.row(j);
        const double deaths = table[u];
        const double exposed = table.tail(curves.cols() - u).sum();
        if (!(deaths >= 0.0) || !(exposed > 0.0) || deaths > exposed)
            throw DomainError("undefined death probability in forecast year " + std::to_string(j + 1) +
                              " at age " + std::to_string(u));
        alive *= 1.0 - deaths / exposed;
        survival[j] = alive;
    }
    return survival;
}

Eigen::VectorXd survival_probabilities(const ForecastSet& forecasts, int age, int maturity) {
    return survival_probabilities(forecasts.curves, age, maturity);
}

double bond_price(double rate, int tau) {
    if (tau < 1) throw DomainError("bond maturity must be at least one year");
    return std::exp(-rate * static_cast<double>(tau));
}

double annuity_price(const Eigen::Ref<const Eigen::MatrixXd>& curves, int age, int maturity, double rate) {
    const Eigen::VectorXd survival = survival_probabilities(curves, age, maturity);
    double price = 0.0;
    for (int tau = 1; tau <= maturity; ++tau) price += bond_price(rate, tau) * survival[tau - 1];
    return price;
}

AnnuityQuote price_annuity(const ForecastSet& forecasts, int age, int maturity, double rate) {
    AnnuityQuote quote;
    quote.age = age;
    quote.maturity = maturity;
    quote.rate = rate;
    quote.price = annuity_price(forecasts.curves, age, maturity, rate);
    return quote;
}

AnnuityQuote price_annuity_interval(const BootstrapEnsemble& ensemble, int age, int maturity, double rate,
                                    double nu) {
    if (!(nu > 0.0 && nu < 1.0)) throw DomainError("significance level must lie in (0, 1)");
    if (ensemble.replicates() < 1) throw DomainError("empty bootstrap ensemble");
    std::vector<double> prices;
    prices.reserve(ensemble.replicates());
    for (const auto& path : ensemble.paths) prices.push_back(annuity_price(path, age, maturity, rate));
    std::sort(prices.begin(), prices.end());

    AnnuityQuote quote;
    quote.age = age;
    quote.maturity = maturity;
    quote.rate = rate;
    quote.price = quantile_sorted(prices, 0.5);
    quote.interval = AnnuityQuote::Interval{nu, quantile_sorted(prices, nu / 2.0), quantile_sorted(prices, 1.0 - nu / 2.0)};
    return quote;
}

bool annuity_cell_defined(int age, int maturity, int terminal_age) { return age + maturity <= terminal_age; }

std::vector<AnnuityQuote> annuity_table(const ForecastSet& forecasts, const AnnuityGrid& grid,
                                        const BootstrapEnsemble* ensemble) {
    if (grid.nu && !ensemble) throw DomainError("interval quotes need a bootstrap ensemble");
    const int terminal = static_cast<int>(forecasts.curves.cols()) - 1;
    std::vector<AnnuityQuote> quotes;
    for (int age : grid.ages) {
        for (int maturity : grid.maturities) {
            if (!annuity_cell_defined(age, maturity, terminal)) continue;
            AnnuityQuote quote = price_annuity(forecasts, age, maturity, grid.rate);
            if (grid.nu) quote.interval = price_annuity_interval(*ensemble, age, maturity, grid.rate, *grid.nu).interval;
            quotes.push_back(quote);
        }
    }
    return quotes;
}

} // namespace wcoda
