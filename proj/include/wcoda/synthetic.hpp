#pragma once

#include "wcoda/lifetable.hpp"

#include <cstdint>
#include <string_view>

namespace wcoda {

/// Synthetic death-count surfaces on the 0..110 age grid, used as bundled fixtures.
///
/// All surfaces are closures of exp(a(u) + sum_k gamma_{t,k} b_k(u) + e_t(u)) where a is a
/// unimodal adult age-at-death shape with an infant component, b_k(u) are unit-norm cosine
/// modes, and e_t(u) is iid Gaussian noise.
///  - stationary: three modes with iid N(0, 0.5^2) scores.
///  - regime_change: seven modes follow volatile random walks until `regime_start`, then go
///    quiet while a ninth mode starts a steady trend.
///  - gaussian: two modes follow random walks with drift and Gaussian innovations.
enum class SyntheticKind { stationary, regime_change, gaussian };

SyntheticKind parse_synthetic_kind(std::string_view name);

struct SyntheticSpec {
    SyntheticKind kind = SyntheticKind::gaussian;
    int first_year = 1951;
    int last_year = 2020;
    std::uint64_t seed = 1;
    int regime_start = 1971;
    double radix = kDefaultRadix;

    /// Canonical year span for each kind.
    static SyntheticSpec defaults(SyntheticKind kind, std::uint64_t seed = 1);
};

LifeTableSeries make_synthetic(const SyntheticSpec& spec);

} // namespace wcoda
