#include "wcoda/synthetic.hpp"

#include "wcoda/error.hpp"
#include "wcoda/rng.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace wcoda {

namespace {

constexpr int kAges = 111;

class Normal {
public:
    explicit Normal(std::uint64_t seed) : rng_(seed, 0x5EED) {}

    double operator()() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        while (u1 <= 0.0) u1 = rng_.uniform01();
        const double u2 = rng_.uniform01();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        spare_ = radius * std::sin(2.0 * std::numbers::pi * u2);
        has_spare_ = true;
        return radius * std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    Philox4x32 rng_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

Eigen::VectorXd base_log_shape() {
    Eigen::VectorXd a(kAges);
    for (int u = 0; u < kAges; ++u) {
        const double x = static_cast<double>(u);
        const double infant = 0.03 * std::exp(-x / 1.5);
        const double adult = std::exp(-0.5 * std::pow((x - 78.0) / 11.0, 2.0)) / (11.0 * std::sqrt(2.0 * std::numbers::pi));
        a[u] = std::log(infant + adult + 1e-4);
    }
    return a;
}

Eigen::VectorXd mode(int k) {
    Eigen::VectorXd b(kAges);
    for (int u = 0; u < kAges; ++u)
        b[u] = std::cos(static_cast<double>(k) * std::numbers::pi * (static_cast<double>(u) + 0.5) / kAges);
    return b / b.norm();
}

} // namespace

SyntheticKind parse_synthetic_kind(std::string_view name) {
    if (name == "stationary") return SyntheticKind::stationary;
    if (name == "regime_change" || name == "regime") return SyntheticKind::regime_change;
    if (name == "gaussian") return SyntheticKind::gaussian;
    throw DomainError("unknown synthetic surface '" + std::string(name) + "'");
}

SyntheticSpec SyntheticSpec::defaults(SyntheticKind kind, std::uint64_t seed) {
    SyntheticSpec spec;
    spec.kind = kind;
    spec.seed = seed;
    switch (kind) {
    case SyntheticKind::stationary: spec.first_year = 1901; break;
    case SyntheticKind::regime_change: spec.first_year = 1851; break;
    case SyntheticKind::gaussian: spec.first_year = 1951; break;
    }
    spec.last_year = 2020;
    spec.regime_start = 1971;
    return spec;
}

LifeTableSeries make_synthetic(const SyntheticSpec& spec) {
    if (spec.last_year <= spec.first_year) throw DomainError("synthetic surface needs at least two years");
    const int n = spec.last_year - spec.first_year + 1;
    Normal normal(spec.seed);
    const Eigen::VectorXd a = base_log_shape();

    Eigen::MatrixXd log_d(n, kAges);
    double noise_sd = 0.01;
    switch (spec.kind) {
    case SyntheticKind::stationary: {
        noise_sd = 0.02;
        for (int t = 0; t < n; ++t) {
            Eigen::VectorXd row = a;
            for (int k = 1; k <= 3; ++k) row += 0.5 * normal() * mode(k);
            log_d.row(t) = row.transpose();
        }
        break;
    }
    case SyntheticKind::regime_change: {
        noise_sd = 0.01;
        Eigen::VectorXd old_scores = Eigen::VectorXd::Zero(7);
        double trend = 0.0;
        for (int t = 0; t < n; ++t) {
            const bool new_regime = spec.first_year + t >= spec.regime_start;
            for (int k = 0; k < 7; ++k) old_scores[k] += (new_regime ? 0.05 : 0.8) * normal();
            if (new_regime) trend += 0.15 + 0.02 * normal();
            Eigen::VectorXd row = a + trend * mode(9);
            for (int k = 0; k < 7; ++k) row += old_scores[k] * mode(k + 1);
            log_d.row(t) = row.transpose();
        }
        break;
    }
    case SyntheticKind::gaussian: {
        noise_sd = 0.02;
        const double drift[2] = {0.15, -0.05};
        const double sigma[2] = {0.3, 0.2};
        double scores[2] = {0.0, 0.0};
        for (int t = 0; t < n; ++t) {
            for (int k = 0; k < 2; ++k) scores[k] += drift[k] + sigma[k] * normal();
            log_d.row(t) = (a + scores[0] * mode(1) + scores[1] * mode(2)).transpose();
        }
        break;
    }
    }
    for (int t = 0; t < n; ++t)
        for (int u = 0; u < kAges; ++u) log_d(t, u) += noise_sd * normal();

    LifeTableSeries out;
    out.radix = spec.radix;
    out.sex = Sex::total;
    out.counts.resize(n, kAges);
    for (int t = 0; t < n; ++t) {
        out.years.push_back(spec.first_year + t);
        Eigen::RowVectorXd row = (log_d.row(t).array() - log_d.row(t).maxCoeff()).exp();
        row *= spec.radix / row.sum();
        out.repaired_cells += repair_and_close(row, spec.radix);
        out.counts.row(t) = row;
    }
    for (int u = 0; u < kAges; ++u) out.ages.push_back(u);
    return out;
}

} // namespace wcoda
