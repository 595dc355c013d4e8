#pragma once

// Random generators for property tests. Every generator takes an explicit engine so a
// failing case can be replayed from its seed.

#include "wcoda/lifetable.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <random>

namespace support {

using Engine = std::mt19937_64;

inline double uniform(Engine& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline std::size_t index(Engine& rng, std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

/// Strictly positive vector summing to `total`, with log-scale spread.
inline Eigen::VectorXd random_density(Engine& rng, std::size_t size, double spread = 3.0, double total = 1.0) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(size));
    for (auto& x : v) x = std::exp(uniform(rng, -spread, spread));
    return v * (total / v.sum());
}

/// Valid life-table surface: years starting at 1900, ages 0..ages-1, rows closed to radix.
inline wcoda::LifeTableSeries random_series(Engine& rng, std::size_t years, std::size_t ages,
                                            double radix = wcoda::kDefaultRadix) {
    wcoda::LifeTableSeries s;
    s.radix = radix;
    s.counts.resize(static_cast<Eigen::Index>(years), static_cast<Eigen::Index>(ages));
    for (std::size_t t = 0; t < years; ++t) {
        s.years.push_back(1900 + static_cast<int>(t));
        s.counts.row(static_cast<Eigen::Index>(t)) = random_density(rng, ages, 4.0, radix).transpose();
    }
    for (std::size_t u = 0; u < ages; ++u) s.ages.push_back(static_cast<int>(u));
    return s;
}

} // namespace support
