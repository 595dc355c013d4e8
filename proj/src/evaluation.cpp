#include "wcoda/evaluation.hpp"

#include "wcoda/error.hpp"
#include "wcoda/forecast.hpp"
#include "wcoda/parallel.hpp"
#include "wcoda/weighting.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

namespace wcoda {

namespace {

void check_pair(const Eigen::Ref<const Eigen::VectorXd>& p, const Eigen::Ref<const Eigen::VectorXd>& q) {
    if (p.size() != q.size() || p.size() == 0) throw DomainError("divergence inputs differ in length");
    for (Eigen::Index i = 0; i < p.size(); ++i)
        if (!(p[i] > 0.0) || !(q[i] > 0.0) || !std::isfinite(p[i]) || !std::isfinite(q[i]))
            throw DomainError("divergence inputs must be strictly positive (cell " + std::to_string(i) + ")");
}

// sum_i a_i ln(a_i / b_i)
double relative_entropy(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < a.size(); ++i) total += a[i] * (std::log(a[i]) - std::log(b[i]));
    return total;
}

} // namespace

double kld(const Eigen::Ref<const Eigen::VectorXd>& actual, const Eigen::Ref<const Eigen::VectorXd>& forecast) {
    check_pair(actual, forecast);
    const Eigen::VectorXd p = actual / actual.sum();
    const Eigen::VectorXd q = forecast / forecast.sum();
    return relative_entropy(p, q) + relative_entropy(q, p);
}

double jsd(const Eigen::Ref<const Eigen::VectorXd>& actual, const Eigen::Ref<const Eigen::VectorXd>& forecast,
           MeanRule rule) {
    check_pair(actual, forecast);
    const Eigen::VectorXd p = actual / actual.sum();
    const Eigen::VectorXd q = forecast / forecast.sum();
    const Eigen::VectorXd m = rule == MeanRule::simple ? Eigen::VectorXd((p + q) / 2.0)
                                                       : Eigen::VectorXd((p.array() * q.array()).sqrt());
    return 0.5 * relative_entropy(p, m) + 0.5 * relative_entropy(q, m);
}

std::size_t count_exceedances(const Eigen::Ref<const Eigen::VectorXd>& actual,
                              const Eigen::Ref<const Eigen::VectorXd>& lower,
                              const Eigen::Ref<const Eigen::VectorXd>& upper) {
    if (actual.size() != lower.size() || actual.size() != upper.size())
        throw DomainError("actuals and band differ in length");
    std::size_t count = 0;
    for (Eigen::Index i = 0; i < actual.size(); ++i)
        count += static_cast<std::size_t>(actual[i] > upper[i]) + static_cast<std::size_t>(actual[i] < lower[i]);
    return count;
}

CoverageStat CoverageTally::stat(double nu) const {
    if (cells == 0) throw DomainError("coverage of an empty tally");
    CoverageStat s;
    s.nu = nu;
    s.ecp = 1.0 - static_cast<double>(exceedances) / static_cast<double>(cells);
    s.cpd = std::abs(s.ecp - (1.0 - nu));
    return s;
}

std::vector<CoverageStat> ecp_cpd(const Eigen::Ref<const Eigen::MatrixXd>& actuals, const PredictionBand& band) {
    if (actuals.rows() != band.lower.rows() || actuals.cols() != band.lower.cols() ||
        band.upper.rows() != band.lower.rows() || band.upper.cols() != band.lower.cols())
        throw DomainError("actuals and prediction band are misaligned");
    std::vector<CoverageStat> out;
    for (Eigen::Index h = 0; h < actuals.rows(); ++h) {
        CoverageTally tally;
        tally.exceedances = count_exceedances(actuals.row(h).transpose(), band.lower.row(h).transpose(),
                                              band.upper.row(h).transpose());
        tally.cells = static_cast<std::size_t>(actuals.cols());
        out.push_back(tally.stat(band.nu));
    }
    return out;
}

BacktestPlan BacktestPlan::parse(std::string_view text, std::size_t max_horizon) {
    BacktestPlan plan;
    plan.max_horizon = max_horizon;
    int* fields[] = {&plan.train_end, &plan.validation_end, &plan.test_end};
    std::size_t start = 0;
    for (std::size_t i = 0; i < 3; ++i) {
        const auto end = i < 2 ? text.find(':', start) : text.size();
        if (end == std::string_view::npos) throw ParseError("plan must look like 2000:2010:2020");
        const auto field = text.substr(start, end - start);
        auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), *fields[i]);
        if (ec != std::errc{} || ptr != field.data() + field.size())
            throw ParseError("invalid year '" + std::string(field) + "' in plan");
        start = end + 1;
    }
    plan.validate();
    return plan;
}

void BacktestPlan::validate() const {
    if (!(train_end < validation_end && validation_end < test_end))
        throw DomainError("plan years must satisfy train_end < validation_end < test_end");
    if (max_horizon < 1) throw DomainError("plan needs a positive maximum horizon");
    if (static_cast<std::size_t>(validation_end - train_end) < max_horizon ||
        static_cast<std::size_t>(test_end - validation_end) < max_horizon)
        throw DomainError("validation and test segments must each span at least the maximum horizon");
}

ForecastMethod coda_method(const MethodConfig& config) {
    return [config](const LifeTableSeries& training, std::size_t horizons) {
        const auto scheme = make_weights(config.kappa, training.num_years());
        const auto decomp = clr_forward(training, scheme);
        const auto model = fit_wfpca(decomp, config.fpca);
        MethodOutput out;
        out.point = forecast_death_counts(model, decomp, horizons, config.inverse).curves;
        if (config.replicates > 0) {
            BootstrapOptions options;
            options.replicates = config.replicates;
            options.seed = config.seed;
            options.threads = config.threads;
            options.inverse = config.inverse;
            const auto ensemble = bootstrap_paths(model, decomp, horizons, options);
            for (double nu : config.nus) out.bands.push_back(prediction_band(ensemble, nu));
        }
        return out;
    };
}

HorizonErrors ErrorReport::mean() const {
    HorizonErrors m;
    if (horizons.empty()) return m;
    m.coverage.resize(nus.size());
    for (std::size_t i = 0; i < nus.size(); ++i) m.coverage[i] = CoverageStat{nus[i], 0.0, 0.0};
    for (const auto& h : horizons) {
        m.forecasts += h.forecasts;
        m.kld += h.kld;
        m.jsd_simple += h.jsd_simple;
        m.jsd_geometric += h.jsd_geometric;
        for (std::size_t i = 0; i < h.coverage.size() && i < m.coverage.size(); ++i) {
            m.coverage[i].ecp += h.coverage[i].ecp;
            m.coverage[i].cpd += h.coverage[i].cpd;
        }
    }
    const auto count = static_cast<double>(horizons.size());
    m.kld /= count;
    m.jsd_simple /= count;
    m.jsd_geometric /= count;
    for (auto& c : m.coverage) {
        c.ecp /= count;
        c.cpd /= count;
    }
    return m;
}

ErrorReport expanding_window_evaluate(const LifeTableSeries& data, int first_eval, int last_eval,
                                      std::size_t max_horizon, const ForecastMethod& method,
                                      const std::vector<double>& nus, std::optional<int> fit_start) {
    if (data.years.empty()) throw DomainError("empty data");
    const int start = fit_start.value_or(data.years.front());
    if (start < data.years.front()) throw DomainError("fit start precedes the data");
    if (first_eval > last_eval) throw DomainError("empty evaluation segment");
    if (last_eval > data.years.back())
        throw DomainError("evaluation segment ends in " + std::to_string(last_eval) + " but data end in " +
                          std::to_string(data.years.back()));
    if (first_eval - 1 - start + 1 < 2)
        throw DomainError("training window before " + std::to_string(first_eval) + " has fewer than two years");
    if (max_horizon < 1) throw DomainError("maximum horizon must be positive");

    const std::size_t span = static_cast<std::size_t>(last_eval - first_eval + 1);
    const std::size_t horizons = std::min(max_horizon, span);
    const auto ages = static_cast<Eigen::Index>(data.num_ages());
    const std::size_t start_idx = data.year_index(start);

    std::vector<double> kld_sum(horizons, 0.0), jss_sum(horizons, 0.0), jsg_sum(horizons, 0.0);
    std::vector<std::size_t> counts(horizons, 0);
    std::vector<std::vector<CoverageTally>> tallies(horizons, std::vector<CoverageTally>(nus.size()));

    ErrorReport report;
    report.nus = nus;
    for (int origin = first_eval - 1; origin < last_eval; ++origin) {
        const std::size_t origin_idx = data.year_index(origin);
        const auto training = data.slice_years(start_idx, origin_idx - start_idx + 1);
        const std::size_t steps = std::min(horizons, static_cast<std::size_t>(last_eval - origin));
        const MethodOutput out = method(training, steps);
        if (out.point.rows() != static_cast<Eigen::Index>(steps) || out.point.cols() != ages)
            throw DomainError("forecast method returned a " + std::to_string(out.point.rows()) + " x " +
                              std::to_string(out.point.cols()) + " matrix for " + std::to_string(steps) +
                              " horizons");
        if (out.bands.size() != nus.size())
            throw DomainError("forecast method returned " + std::to_string(out.bands.size()) +
                              " bands for " + std::to_string(nus.size()) + " significance levels");

        for (std::size_t h = 1; h <= steps; ++h) {
            const Eigen::VectorXd actual = data.counts.row(static_cast<Eigen::Index>(origin_idx + h)).transpose();
            const Eigen::VectorXd predicted = out.point.row(static_cast<Eigen::Index>(h - 1)).transpose();
            OriginError e;
            e.origin = origin;
            e.horizon = h;
            e.target = origin + static_cast<int>(h);
            e.kld = kld(actual, predicted);
            e.jsd_simple = jsd(actual, predicted, MeanRule::simple);
            e.jsd_geometric = jsd(actual, predicted, MeanRule::geometric);
            kld_sum[h - 1] += e.kld;
            jss_sum[h - 1] += e.jsd_simple;
            jsg_sum[h - 1] += e.jsd_geometric;
            ++counts[h - 1];
            for (std::size_t i = 0; i < nus.size(); ++i) {
                const auto& band = out.bands[i];
                auto& tally = tallies[h - 1][i];
                tally.exceedances += count_exceedances(actual, band.lower.row(static_cast<Eigen::Index>(h - 1)).transpose(),
                                                       band.upper.row(static_cast<Eigen::Index>(h - 1)).transpose());
                tally.cells += static_cast<std::size_t>(ages);
            }
            report.origins.push_back(e);
        }
    }

    for (std::size_t h = 0; h < horizons; ++h) {
        HorizonErrors he;
        he.horizon = h + 1;
        he.forecasts = counts[h];
        const double denom = static_cast<double>(ages) * static_cast<double>(counts[h]);
        he.kld = kld_sum[h] / denom;
        he.jsd_simple = jss_sum[h] / denom;
        he.jsd_geometric = jsg_sum[h] / denom;
        for (std::size_t i = 0; i < nus.size(); ++i) he.coverage.push_back(tallies[h][i].stat(nus[i]));
        report.horizons.push_back(std::move(he));
    }
    return report;
}

ErrorReport expanding_window_backtest(const LifeTableSeries& data, const BacktestPlan& plan,
                                      const MethodConfig& config, Segment segment) {
    plan.validate();
    const int first = segment == Segment::validation ? plan.train_end + 1 : plan.validation_end + 1;
    const int last = segment == Segment::validation ? plan.validation_end : plan.test_end;
    return expanding_window_evaluate(data, first, last, plan.max_horizon, coda_method(config), config.nus,
                                     config.fit_start);
}

Criterion Criterion::parse(std::string_view text, double nu) {
    Criterion c;
    c.nu = nu;
    if (text == "kld") c.kind = Kind::kld;
    else if (text == "jsd_s" || text == "jsd_simple") c.kind = Kind::jsd_simple;
    else if (text == "jsd_g" || text == "jsd_geometric") c.kind = Kind::jsd_geometric;
    else if (text == "cpd") c.kind = Kind::cpd;
    else throw DomainError("unknown criterion '" + std::string(text) + "'");
    return c;
}

std::string Criterion::name() const {
    switch (kind) {
    case Kind::kld: return "kld";
    case Kind::jsd_simple: return "jsd_s";
    case Kind::jsd_geometric: return "jsd_g";
    case Kind::cpd: return "cpd";
    }
    return "kld";
}

double Criterion::value(const HorizonErrors& errors) const {
    switch (kind) {
    case Kind::kld: return errors.kld;
    case Kind::jsd_simple: return errors.jsd_simple;
    case Kind::jsd_geometric: return errors.jsd_geometric;
    case Kind::cpd:
        for (const auto& c : errors.coverage)
            if (std::abs(c.nu - nu) < 1e-12) return c.cpd;
        throw DomainError("CPD criterion needs prediction bands at nu = " + std::to_string(nu));
    }
    return errors.kld;
}

KappaSelection select_kappa(const LifeTableSeries& data, const BacktestPlan& plan, Criterion criterion,
                            std::vector<double> grid, const MethodConfig& config) {
    plan.validate();
    if (grid.empty()) throw DomainError("empty kappa grid");
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

    MethodConfig run = config;
    if (criterion.kind == Criterion::Kind::cpd) {
        if (run.replicates < 2)
            throw DomainError("CPD criterion needs bootstrap bands; set at least two replicates");
        if (!(criterion.nu > 0.0 && criterion.nu < 1.0)) throw DomainError("CPD significance level must lie in (0, 1)");
        run.nus = {criterion.nu};
    } else {
        run.replicates = 0;
        run.nus.clear();
    }
    run.threads = 1;

    std::vector<std::vector<double>> values(grid.size());
    parallel_for(grid.size(), config.threads, [&](std::size_t i) {
        MethodConfig local = run;
        local.kappa = grid[i];
        const auto report = expanding_window_backtest(data, plan, local, Segment::validation);
        for (const auto& h : report.horizons) values[i].push_back(criterion.value(h));
    });

    KappaSelection out;
    out.criterion = criterion;
    out.grid = grid;
    const std::size_t horizons = values.front().size();
    for (std::size_t h = 0; h < horizons; ++h) {
        std::size_t best = 0;
        for (std::size_t i = 1; i < grid.size(); ++i)
            if (values[i][h] < values[best][h]) best = i;
        out.best_kappa.push_back(grid[best]);
        out.best_value.push_back(values[best][h]);
    }
    out.values = std::move(values);
    return out;
}

} // namespace wcoda
