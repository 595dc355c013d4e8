#pragma once

// Brute-force reference computations used to check the library. Nothing here calls into
// wcoda; each routine recomputes its quantity from the defining formula.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <random>
#include <utility>
#include <vector>

namespace oracle {

using Vec = std::vector<double>;
using Mat = std::vector<Vec>; // row-major

/// d_x = l_x q_x with l_0 = radix and the terminal age absorbing all survivors.
inline Vec survivorship(const Vec& q, double radix) {
    Vec d(q.size());
    double l = radix;
    for (std::size_t x = 0; x + 1 < q.size(); ++x) {
        d[x] = l * q[x];
        l = l - d[x];
    }
    d.back() = l;
    return d;
}

/// Gini from the mean absolute difference over all ordered pairs:
/// sum_i sum_j |x_i - x_j| / (2 N^2 mean). Equals the trapezoid Lorenz estimator.
inline double gini_pairwise(const Vec& x) {
    const double n = static_cast<double>(x.size());
    double total = 0.0, diff = 0.0;
    for (double a : x) total += a;
    for (double a : x)
        for (double b : x) diff += std::abs(a - b);
    return diff / (2.0 * n * n * (total / n));
}

inline double weighted_age_mean(const Vec& d, double fraction) {
    double num = 0.0, den = 0.0;
    for (std::size_t x = 0; x < d.size(); ++x) {
        num += (static_cast<double>(x) + fraction) * d[x];
        den += d[x];
    }
    return num / den;
}

/// Mean of first differences.
inline double drift(const Vec& y) {
    double s = 0.0;
    for (std::size_t t = 1; t < y.size(); ++t) s += y[t] - y[t - 1];
    return s / static_cast<double>(y.size() - 1);
}

/// Cyclic Jacobi eigensolver for a small symmetric matrix.
/// Returns eigenvalues (descending) and eigenvectors as columns of `vectors`.
inline void jacobi_eigen(Mat a, Vec& values, Mat& vectors) {
    const std::size_t n = a.size();
    vectors.assign(n, Vec(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) vectors[i][i] = 1.0;
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += a[p][q] * a[p][q];
        if (off < 1e-30) break;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                if (std::abs(a[p][q]) < 1e-300) continue;
                const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a[k][p], akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a[p][k], aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = vectors[k][p], vkq = vectors[k][q];
                    vectors[k][p] = c * vkp - s * vkq;
                    vectors[k][q] = s * vkp + c * vkq;
                }
            }
        }
    }
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return a[i][i] > a[j][j]; });
    values.resize(n);
    Mat sorted(n, Vec(n));
    for (std::size_t c = 0; c < n; ++c) {
        values[c] = a[order[c]][order[c]];
        for (std::size_t r = 0; r < n; ++r) sorted[r][c] = vectors[r][order[c]];
    }
    vectors = std::move(sorted);
}

/// X^T X for a row-major matrix.
inline Mat gram(const Mat& x) {
    const std::size_t cols = x.front().size();
    Mat g(cols, Vec(cols, 0.0));
    for (const auto& row : x)
        for (std::size_t i = 0; i < cols; ++i)
            for (std::size_t j = 0; j < cols; ++j) g[i][j] += row[i] * row[j];
    return g;
}

/// Linear interpolation between order statistics at position (m - 1) p.
inline double order_statistic_quantile(Vec v, double p) {
    std::sort(v.begin(), v.end());
    const double pos = (static_cast<double>(v.size()) - 1.0) * p;
    const auto lo = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(lo);
    if (lo + 1 >= v.size()) return v.back();
    return v[lo] * (1.0 - frac) + v[lo + 1] * frac;
}

/// Survival along the cohort diagonal of row-major forecast tables.
inline Vec cohort_survival(const Mat& tables, int age, int maturity) {
    Vec out;
    double p = 1.0;
    for (int j = 0; j < maturity; ++j) {
        const Vec& d = tables[static_cast<std::size_t>(j)];
        double l = 0.0;
        for (std::size_t v = static_cast<std::size_t>(age + j); v < d.size(); ++v) l += d[v];
        p *= 1.0 - d[static_cast<std::size_t>(age + j)] / l;
        out.push_back(p);
    }
    return out;
}

} // namespace oracle
