#pragma once

#include "wcoda/forecast.hpp"
#include "wcoda/uncertainty.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <vector>

namespace wcoda {

/// Price of a single-premium temporary immediate annuity paying 1 at the end of each of
/// `maturity` years while the annuitant is alive.
struct AnnuityQuote {
    int age = 60;
    int maturity = 5;
    double rate = 0.03;
    double price = 0.0;
    struct Interval {
        double nu = 0.05;
        double lower = 0.0;
        double upper = 0.0;
    };
    std::optional<Interval> interval;
};

/// tau-year survival probabilities for tau = 1..maturity along the cohort diagonal:
/// the life aged x + j is exposed to the year-(j+1) forecast table, with
/// q = d(x + j) / l(x + j) and l(u) the tail sum of that table from age u.
/// `curves` holds one forecast table per row (horizon 1 first).
Eigen::VectorXd survival_probabilities(const Eigen::Ref<const Eigen::MatrixXd>& curves, int age, int maturity);
Eigen::VectorXd survival_probabilities(const ForecastSet& forecasts, int age, int maturity);

/// Zero-coupon bond price exp(-rate * tau) under continuous compounding.
double bond_price(double rate, int tau);

/// sum_{tau=1..T} exp(-rate tau) tau_p_x.
double annuity_price(const Eigen::Ref<const Eigen::MatrixXd>& curves, int age, int maturity, double rate);
AnnuityQuote price_annuity(const ForecastSet& forecasts, int age, int maturity, double rate);

/// Prices every replicate path and reports its nu/2 and 1 - nu/2 quantiles; `price` is the
/// replicate median.
AnnuityQuote price_annuity_interval(const BootstrapEnsemble& ensemble, int age, int maturity, double rate,
                                    double nu);

/// True when age + maturity stays within the terminal age of the grid.
bool annuity_cell_defined(int age, int maturity, int terminal_age);

struct AnnuityGrid {
    std::vector<int> ages;
    std::vector<int> maturities;
    double rate = 0.03;
    std::optional<double> nu;
};

/// Quotes for every defined (age, maturity) cell, row-major by age. Cells past the terminal
/// age are skipped. The ensemble is required when grid.nu is set.
std::vector<AnnuityQuote> annuity_table(const ForecastSet& forecasts, const AnnuityGrid& grid,
                                        const BootstrapEnsemble* ensemble = nullptr);

} // namespace wcoda
