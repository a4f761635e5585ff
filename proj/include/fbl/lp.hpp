#pragma once

#include <cstddef>
#include <optional>
#include <vector>

namespace fbl::detail {

/// Dense simplex for the tiny witness-weight programs:
/// maximize c.u subject to A u <= b, u >= 0, with b >= 0 componentwise.
/// Bland's rule, so it terminates; returns nullopt on unbounded problems or
/// when the iteration cap trips.
inline std::optional<std::vector<double>> solve_lp_max(const std::vector<std::vector<double>>& a,
                                                       const std::vector<double>& b,
                                                       const std::vector<double>& c) {
    const std::size_t m = a.size();
    const std::size_t n = c.size();
    const std::size_t cols = n + m + 1;
    std::vector<std::vector<double>> t(m + 1, std::vector<double>(cols, 0.0));
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) t[i][j] = a[i][j];
        t[i][n + i] = 1.0;
        t[i][cols - 1] = b[i];
    }
    for (std::size_t j = 0; j < n; ++j) t[m][j] = -c[j];

    std::vector<std::size_t> basis(m);
    for (std::size_t i = 0; i < m; ++i) basis[i] = n + i;

    const double eps = 1e-9;
    for (int iter = 0; iter < 10000; ++iter) {
        std::size_t enter = cols - 1;
        for (std::size_t j = 0; j + 1 < cols; ++j) {
            if (t[m][j] < -eps) { enter = j; break; }  // Bland: smallest index
        }
        if (enter == cols - 1) {
            std::vector<double> u(n, 0.0);
            for (std::size_t i = 0; i < m; ++i)
                if (basis[i] < n) u[basis[i]] = t[i][cols - 1];
            return u;
        }
        std::size_t leave = m;
        double best_ratio = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            if (t[i][enter] > eps) {
                double ratio = t[i][cols - 1] / t[i][enter];
                if (leave == m || ratio < best_ratio - eps ||
                    (ratio < best_ratio + eps && basis[i] < basis[leave])) {
                    leave = i;
                    best_ratio = ratio;
                }
            }
        }
        if (leave == m) return std::nullopt;  // unbounded

        double piv = t[leave][enter];
        for (std::size_t j = 0; j < cols; ++j) t[leave][j] /= piv;
        for (std::size_t i = 0; i <= m; ++i) {
            if (i == leave) continue;
            double f = t[i][enter];
            if (f == 0.0) continue;
            for (std::size_t j = 0; j < cols; ++j) t[i][j] -= f * t[leave][j];
        }
        basis[leave] = enter;
    }
    return std::nullopt;
}

}  // namespace fbl::detail
