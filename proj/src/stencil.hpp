#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace sobflow::detail {

/// Finite-difference weights for the derivative of order `order` at x0 from
/// samples at `nodes` (Fornberg 1988).
inline std::vector<double> fornberg_weights(const std::vector<double>& nodes, double x0, int order) {
    const int n = static_cast<int>(nodes.size());
    if (order >= n) throw std::invalid_argument("fornberg_weights: too few nodes");
    std::vector<std::vector<long double>> c(static_cast<std::size_t>(n),
                                            std::vector<long double>(static_cast<std::size_t>(order + 1), 0.0L));
    long double c1 = 1.0L;
    long double c4 = nodes[0] - x0;
    c[0][0] = 1.0L;
    for (int i = 1; i < n; ++i) {
        const int mn = std::min(i, order);
        long double c2 = 1.0L;
        const long double c5 = c4;
        c4 = nodes[static_cast<std::size_t>(i)] - x0;
        for (int j = 0; j < i; ++j) {
            const long double c3 = static_cast<long double>(nodes[static_cast<std::size_t>(i)]) -
                                   static_cast<long double>(nodes[static_cast<std::size_t>(j)]);
            c2 *= c3;
            auto& ci = c[static_cast<std::size_t>(i)];
            auto& cj = c[static_cast<std::size_t>(j)];
            if (j == i - 1) {
                for (int k = mn; k >= 1; --k) {
                    ci[static_cast<std::size_t>(k)] =
                        c1 * (k * c[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(k - 1)] -
                              c5 * c[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(k)]) / c2;
                }
                ci[0] = -c1 * c5 * c[static_cast<std::size_t>(i - 1)][0] / c2;
            }
            for (int k = mn; k >= 1; --k) {
                cj[static_cast<std::size_t>(k)] =
                    (c4 * cj[static_cast<std::size_t>(k)] - k * cj[static_cast<std::size_t>(k - 1)]) / c3;
            }
            cj[0] = c4 * cj[0] / c3;
        }
        c1 = c2;
    }
    std::vector<double> w(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) w[static_cast<std::size_t>(i)] = static_cast<double>(c[static_cast<std::size_t>(i)][static_cast<std::size_t>(order)]);
    return w;
}

/// Weights a_k with sum_k a_k g(x_k) = int_0^1 g for every polynomial g of
/// degree < nodes.size() (Vandermonde moment system, long double).
inline std::vector<double> interval_weights(const std::vector<double>& nodes) {
    const std::size_t n = nodes.size();
    std::vector<std::vector<long double>> a(n, std::vector<long double>(n + 1));
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t k = 0; k < n; ++k) a[j][k] = std::pow(static_cast<long double>(nodes[k]), static_cast<long double>(j));
        a[j][n] = 1.0L / static_cast<long double>(j + 1);
    }
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t row = col + 1; row < n; ++row) {
            if (std::fabs(a[row][col]) > std::fabs(a[piv][col])) piv = row;
        }
        std::swap(a[col], a[piv]);
        for (std::size_t row = 0; row < n; ++row) {
            if (row == col) continue;
            const long double f = a[row][col] / a[col][col];
            for (std::size_t k = col; k <= n; ++k) a[row][k] -= f * a[col][k];
        }
    }
    std::vector<double> w(n);
    for (std::size_t k = 0; k < n; ++k) w[k] = static_cast<double>(a[k][n] / a[k][k]);
    return w;
}

}  // namespace sobflow::detail
