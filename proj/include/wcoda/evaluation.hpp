#pragma once

#include "wcoda/clr.hpp"
#include "wcoda/lifetable.hpp"
#include "wcoda/uncertainty.hpp"
#include "wcoda/wfpca.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace wcoda {

// ---------------------------------------------------------------------------
// Divergences. Inputs are strictly positive vectors of equal length; each is divided by
// its own total first, so death counts under a common radix become densities.
// ---------------------------------------------------------------------------

/// Symmetrized Kullback-Leibler divergence D(p||q) + D(q||p).
double kld(const Eigen::Ref<const Eigen::VectorXd>& actual, const Eigen::Ref<const Eigen::VectorXd>& forecast);

enum class MeanRule { simple, geometric };

/// Jensen-Shannon divergence (D(p||m) + D(q||m)) / 2 with m = (p + q) / 2 or m = sqrt(p q).
/// The geometric mean is used unnormalized.
double jsd(const Eigen::Ref<const Eigen::VectorXd>& actual, const Eigen::Ref<const Eigen::VectorXd>& forecast,
           MeanRule rule);

// ---------------------------------------------------------------------------
// Coverage
// ---------------------------------------------------------------------------

/// Cells of `actual` strictly above `upper` or strictly below `lower`.
std::size_t count_exceedances(const Eigen::Ref<const Eigen::VectorXd>& actual,
                              const Eigen::Ref<const Eigen::VectorXd>& lower,
                              const Eigen::Ref<const Eigen::VectorXd>& upper);

struct CoverageStat {
    double nu = 0.2;
    double ecp = 1.0;
    double cpd = 0.0;
};

/// Pooled tally of exceedances over (forecast, age) cells.
struct CoverageTally {
    std::size_t exceedances = 0;
    std::size_t cells = 0;

    CoverageStat stat(double nu) const;
};

/// Per-horizon ECP and CPD of one band against actuals (rows aligned by horizon).
std::vector<CoverageStat> ecp_cpd(const Eigen::Ref<const Eigen::MatrixXd>& actuals, const PredictionBand& band);

// ---------------------------------------------------------------------------
// Expanding-window backtest
// ---------------------------------------------------------------------------

/// Training ends at train_end; validation is (train_end, validation_end]; testing is
/// (validation_end, test_end].
struct BacktestPlan {
    int train_end = 2000;
    int validation_end = 2010;
    int test_end = 2020;
    std::size_t max_horizon = 10;

    /// Parses "train:validation:test".
    static BacktestPlan parse(std::string_view text, std::size_t max_horizon = 10);
    void validate() const;
};

enum class Segment { validation, test };

/// Settings for the weighted CoDa forecaster inside a backtest.
struct MethodConfig {
    double kappa = 0.0;
    FpcaOptions fpca{};
    InverseOptions inverse{};
    /// First training year; training windows expand from here (default: first data year).
    std::optional<int> fit_start;
    /// Bootstrap replicates for interval metrics; 0 disables them.
    std::size_t replicates = 0;
    std::vector<double> nus{};
    std::uint64_t seed = 20240101;
    std::size_t threads = 1;
};

/// What a forecasting method returns for one origin: point curves (H x ages) and,
/// optionally, one band per requested significance level.
struct MethodOutput {
    Eigen::MatrixXd point;
    std::vector<PredictionBand> bands;
};

/// A method maps a training series and a horizon count to forecasts for the years that
/// follow the training series.
using ForecastMethod = std::function<MethodOutput(const LifeTableSeries& training, std::size_t horizons)>;

/// The weighted CoDa pipeline: clr_forward, fit_wfpca, forecast_death_counts, and
/// bootstrap bands when config.replicates > 0.
ForecastMethod coda_method(const MethodConfig& config);

struct HorizonErrors {
    std::size_t horizon = 0;
    std::size_t forecasts = 0;
    double kld = 0.0;
    double jsd_simple = 0.0;
    double jsd_geometric = 0.0;
    std::vector<CoverageStat> coverage;
};

struct OriginError {
    int origin = 0; ///< last training year
    std::size_t horizon = 0;
    int target = 0;
    double kld = 0.0;
    double jsd_simple = 0.0;
    double jsd_geometric = 0.0;
};

/// Divergences are averaged over ages and over the forecasts made at each horizon,
/// i.e. sum / (ages x forecasts). They are not scaled by 100 here.
struct ErrorReport {
    std::vector<HorizonErrors> horizons;
    std::vector<double> nus;
    std::vector<OriginError> origins;

    /// Unweighted mean across horizons.
    HorizonErrors mean() const;
};

/// Evaluates `method` on the years first_eval..last_eval: each origin o in
/// [first_eval - 1, last_eval - 1] trains on fit_start..o and forecasts
/// min(max_horizon, last_eval - o) years ahead.
ErrorReport expanding_window_evaluate(const LifeTableSeries& data, int first_eval, int last_eval,
                                      std::size_t max_horizon, const ForecastMethod& method,
                                      const std::vector<double>& nus = {}, std::optional<int> fit_start = {});

ErrorReport expanding_window_backtest(const LifeTableSeries& data, const BacktestPlan& plan,
                                      const MethodConfig& config, Segment segment = Segment::test);

// ---------------------------------------------------------------------------
// Weight-parameter selection
// ---------------------------------------------------------------------------

struct Criterion {
    enum class Kind { kld, jsd_simple, jsd_geometric, cpd };
    Kind kind = Kind::kld;
    double nu = 0.2; ///< used by cpd only

    static Criterion parse(std::string_view text, double nu = 0.2);
    std::string name() const;
    double value(const HorizonErrors& errors) const;
};

struct KappaSelection {
    Criterion criterion;
    std::vector<double> grid;                 ///< ascending, deduplicated
    std::vector<double> best_kappa;           ///< per horizon
    std::vector<double> best_value;           ///< per horizon
    std::vector<std::vector<double>> values;  ///< [grid index][horizon - 1]
};

/// For each horizon, the grid point minimizing the criterion over the validation segment;
/// ties go to the smallest kappa. Grid order does not matter.
KappaSelection select_kappa(const LifeTableSeries& data, const BacktestPlan& plan, Criterion criterion,
                            std::vector<double> grid, const MethodConfig& config);

} // namespace wcoda
