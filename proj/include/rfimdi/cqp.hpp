// Copyright 2026 The rfimdi Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "rfimdi/lp.hpp"

namespace rfimdi::lp {

/// minimize sum_i weight_i (x_i - center_i)^2 subject to boxes and rows.
struct ConvexQuadraticProgram {
    std::vector<double> weight;
    std::vector<double> center;
    std::vector<double> lower;
    std::vector<double> upper;
    std::vector<LinearRow> rows;

    std::size_t num_vars() const { return weight.size(); }

    double objective(const std::vector<double> &x) const {
        double v = 0;
        for (std::size_t i = 0; i < x.size(); ++i) v += weight[i] * (x[i] - center[i]) * (x[i] - center[i]);
        return v;
    }

    LinearProgram feasibility_program() const {
        LinearProgram p;
        p.objective.assign(num_vars(), 0.0);
        p.lower = lower;
        p.upper = upper;
        p.rows = rows;
        return p;
    }
};

namespace detail {

/// Solves the square system m z = rhs by Gaussian elimination with partial
/// pivoting. Returns false when m is numerically singular.
inline bool solve_dense(std::vector<std::vector<double>> m, std::vector<double> rhs, std::vector<double> &z) {
    const std::size_t n = rhs.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r) {
            if (std::abs(m[r][col]) > std::abs(m[piv][col])) piv = r;
        }
        if (std::abs(m[piv][col]) < 1e-14) return false;
        std::swap(m[piv], m[col]);
        std::swap(rhs[piv], rhs[col]);
        for (std::size_t r = col + 1; r < n; ++r) {
            double f = m[r][col] / m[col][col];
            if (f == 0) continue;
            for (std::size_t c = col; c < n; ++c) m[r][c] -= f * m[col][c];
            rhs[r] -= f * rhs[col];
        }
    }
    z.assign(n, 0.0);
    for (std::size_t i = n; i-- > 0;) {
        double s = rhs[i];
        for (std::size_t c = i + 1; c < n; ++c) s -= m[i][c] * z[c];
        z[i] = s / m[i][i];
    }
    return true;
}

}  // namespace detail

/// Primal active-set method. Starts from a feasible vertex found by the LP
/// phase one and moves along equality-constrained Newton steps; with a
/// diagonal positive Hessian each step is exact. Coordinates with zero weight
/// get a 1e-12 relative curvature so the KKT systems stay nonsingular.
inline Solution solve_cqp(const ConvexQuadraticProgram &p) {
    const std::size_t n = p.num_vars();
    if (p.center.size() != n) throw std::invalid_argument("ConvexQuadraticProgram: size mismatch");
    for (double w : p.weight) {
        if (!(w >= 0)) throw std::invalid_argument("ConvexQuadraticProgram: weights must be non-negative");
    }

    Solution start = solve_lp(p.feasibility_program());
    if (!start.optimal()) return {};

    // Every constraint as g . x >= h.
    std::vector<std::vector<double>> g;
    std::vector<double> h;
    for (std::size_t j = 0; j < n; ++j) {
        std::vector<double> e(n, 0.0);
        e[j] = 1;
        g.push_back(e);
        h.push_back(p.lower[j]);
        e[j] = -1;
        g.push_back(e);
        h.push_back(-p.upper[j]);
    }
    for (const auto &row : p.rows) {
        double scale = 0;
        for (double v : row.coef) scale = std::max(scale, std::abs(v));
        if (scale == 0) continue;
        if (std::isfinite(row.lower)) {
            std::vector<double> c(row.coef);
            for (double &v : c) v /= scale;
            g.push_back(c);
            h.push_back(row.lower / scale);
        }
        if (std::isfinite(row.upper)) {
            std::vector<double> c(row.coef);
            for (double &v : c) v = -v / scale;
            g.push_back(c);
            h.push_back(-row.upper / scale);
        }
    }

    double wmax = 1;
    for (double w : p.weight) wmax = std::max(wmax, w);
    std::vector<double> hess(n);
    for (std::size_t i = 0; i < n; ++i) hess[i] = 2 * std::max(p.weight[i], 1e-12 * wmax);

    std::vector<double> x = start.x;
    std::vector<std::size_t> working;
    const int max_iter = 200 + 50 * static_cast<int>(g.size());
    for (int iter = 0; iter < max_iter; ++iter) {
        const std::size_t k = working.size();
        std::vector<std::vector<double>> kkt(n + k, std::vector<double>(n + k, 0.0));
        std::vector<double> rhs(n + k, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            kkt[i][i] = hess[i];
            rhs[i] = -hess[i] * (x[i] - p.center[i]);
        }
        for (std::size_t w = 0; w < k; ++w) {
            for (std::size_t i = 0; i < n; ++i) {
                kkt[i][n + w] = -g[working[w]][i];
                kkt[n + w][i] = g[working[w]][i];
            }
        }
        std::vector<double> z;
        if (!detail::solve_dense(kkt, rhs, z)) {
            // Dependent working rows: drop the newest and retry.
            working.pop_back();
            continue;
        }
        double step_norm = 0;
        for (std::size_t i = 0; i < n; ++i) step_norm = std::max(step_norm, std::abs(z[i]));

        if (step_norm < 1e-13) {
            std::size_t drop = k;
            double most_negative = -1e-12;
            for (std::size_t w = 0; w < k; ++w) {
                if (z[n + w] < most_negative) {
                    most_negative = z[n + w];
                    drop = w;
                }
            }
            if (drop == k) break;
            working.erase(working.begin() + static_cast<long>(drop));
            continue;
        }

        double alpha = 1;
        std::size_t blocking = g.size();
        for (std::size_t c = 0; c < g.size(); ++c) {
            if (std::find(working.begin(), working.end(), c) != working.end()) continue;
            double gp = 0;
            double gx = 0;
            for (std::size_t i = 0; i < n; ++i) {
                gp += g[c][i] * z[i];
                gx += g[c][i] * x[i];
            }
            if (gp >= -1e-15) continue;
            double a = std::max(0.0, (h[c] - gx) / gp);
            if (a < alpha) {
                alpha = a;
                blocking = c;
            }
        }
        for (std::size_t i = 0; i < n; ++i) x[i] += alpha * z[i];
        if (blocking < g.size()) working.push_back(blocking);
    }

    Solution out;
    out.status = Status::Optimal;
    for (std::size_t i = 0; i < n; ++i) x[i] = std::clamp(x[i], p.lower[i], p.upper[i]);
    out.x = x;
    out.value = p.objective(x);
    return out;
}

}  // namespace rfimdi::lp
