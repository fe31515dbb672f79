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
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace rfimdi::lp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Sense { Minimize, Maximize };
enum class Status { Optimal, Infeasible };

/// lower <= coef . x <= upper; either side may be infinite.
struct LinearRow {
    std::vector<double> coef;
    double lower = -kInf;
    double upper = kInf;
};

/// Dense LP with finite box bounds on every variable.
struct LinearProgram {
    Sense sense = Sense::Minimize;
    std::vector<double> objective;
    std::vector<double> lower;
    std::vector<double> upper;
    std::vector<LinearRow> rows;

    std::size_t num_vars() const { return objective.size(); }

    void validate() const {
        std::size_t n = objective.size();
        if (lower.size() != n || upper.size() != n) throw std::invalid_argument("LinearProgram: bound size mismatch");
        for (std::size_t j = 0; j < n; ++j) {
            if (!std::isfinite(lower[j]) || !std::isfinite(upper[j])) {
                throw std::invalid_argument("LinearProgram: every variable needs finite bounds");
            }
        }
        for (const auto &r : rows) {
            if (r.coef.size() != n) throw std::invalid_argument("LinearProgram: row size mismatch");
        }
    }
};

struct Solution {
    Status status = Status::Infeasible;
    double value = 0;
    std::vector<double> x;

    bool optimal() const { return status == Status::Optimal; }
};

namespace detail {

/// Tableau simplex for  max c.y  s.t.  A y <= b, y >= 0  with Bland's rule on
/// both the entering and leaving choice. Phase one uses a single artificial
/// column, so negative right-hand sides are fine.
class BlandSimplex {
   public:
    BlandSimplex(const std::vector<std::vector<double>> &a, const std::vector<double> &b, const std::vector<double> &c)
        : m_(b.size()), n_(c.size()), nonbasic_(n_ + 1), basic_(m_), d_(m_ + 2, std::vector<double>(n_ + 2, 0.0)) {
        for (std::size_t i = 0; i < m_; ++i) {
            for (std::size_t j = 0; j < n_; ++j) d_[i][j] = a[i][j];
            d_[i][n_] = -1;
            d_[i][n_ + 1] = b[i];
            basic_[i] = static_cast<long>(n_ + i);
        }
        for (std::size_t j = 0; j < n_; ++j) {
            nonbasic_[j] = static_cast<long>(j);
            d_[m_][j] = -c[j];
        }
        nonbasic_[n_] = -1;
        d_[m_ + 1][n_] = 1;
    }

    /// Returns false when infeasible; x receives the optimizer.
    bool solve(std::vector<double> &x, double &value) {
        std::size_t r = 0;
        for (std::size_t i = 1; i < m_; ++i) {
            if (d_[i][n_ + 1] < d_[r][n_ + 1]) r = i;
        }
        if (m_ > 0 && d_[r][n_ + 1] < -kEps) {
            pivot(r, n_);
            run(2);
            if (d_[m_ + 1][n_ + 1] < -kFeasTol) return false;
            for (std::size_t i = 0; i < m_; ++i) {
                if (basic_[i] != -1) continue;
                std::size_t s = n_ + 1;
                for (std::size_t j = 0; j <= n_; ++j) {
                    if (std::abs(d_[i][j]) > kEps && (s == n_ + 1 || nonbasic_[j] < nonbasic_[s])) s = j;
                }
                if (s <= n_) pivot(i, s);
            }
        }
        run(1);
        x.assign(n_, 0.0);
        for (std::size_t i = 0; i < m_; ++i) {
            if (basic_[i] >= 0 && static_cast<std::size_t>(basic_[i]) < n_) x[basic_[i]] = d_[i][n_ + 1];
        }
        value = d_[m_][n_ + 1];
        return true;
    }

   private:
    static constexpr double kEps = 1e-12;
    static constexpr double kFeasTol = 1e-9;

    void pivot(std::size_t r, std::size_t s) {
        double inv = 1 / d_[r][s];
        for (std::size_t i = 0; i < m_ + 2; ++i) {
            if (i == r || std::abs(d_[i][s]) <= 0) continue;
            double factor = d_[i][s] * inv;
            for (std::size_t j = 0; j < n_ + 2; ++j) d_[i][j] -= d_[r][j] * factor;
            d_[i][s] = d_[r][s] * factor;
        }
        for (std::size_t j = 0; j < n_ + 2; ++j) {
            if (j != s) d_[r][j] *= inv;
        }
        for (std::size_t i = 0; i < m_ + 2; ++i) {
            if (i != r) d_[i][s] *= -inv;
        }
        d_[r][s] = inv;
        std::swap(basic_[r], nonbasic_[s]);
    }

    void run(int phase) {
        std::size_t obj = m_ + static_cast<std::size_t>(phase) - 1;
        for (;;) {
            // Bland: lowest-id improving column.
            std::size_t s = n_ + 1;
            for (std::size_t j = 0; j <= n_; ++j) {
                if (nonbasic_[j] == -phase) continue;
                if (d_[obj][j] < -kEps && (s == n_ + 1 || nonbasic_[j] < nonbasic_[s])) s = j;
            }
            if (s == n_ + 1) return;
            std::size_t r = m_;
            for (std::size_t i = 0; i < m_; ++i) {
                if (d_[i][s] <= kEps) continue;
                if (r == m_) {
                    r = i;
                    continue;
                }
                double lhs = d_[i][n_ + 1] / d_[i][s];
                double rhs = d_[r][n_ + 1] / d_[r][s];
                if (lhs < rhs - kEps * (1 + std::abs(rhs)) ||
                    (lhs <= rhs + kEps * (1 + std::abs(rhs)) && basic_[i] < basic_[r])) {
                    r = i;
                }
            }
            // All variables are boxed, so an unbounded ray cannot occur.
            if (r == m_) throw std::logic_error("simplex: unbounded direction in a boxed program");
            pivot(r, s);
        }
    }

    std::size_t m_, n_;
    std::vector<long> nonbasic_, basic_;
    std::vector<std::vector<double>> d_;
};

}  // namespace detail

/// Solves a dense boxed LP. Deterministic: the same program always follows
/// the same pivot sequence.
inline Solution solve_lp(const LinearProgram &p) {
    p.validate();
    const std::size_t n = p.num_vars();
    for (std::size_t j = 0; j < n; ++j) {
        if (p.lower[j] > p.upper[j]) return {};
    }

    // Shift to y = x - lower in [0, upper - lower].
    std::vector<std::vector<double>> a;
    std::vector<double> b;
    auto add = [&](std::vector<double> coef, double rhs) {
        double scale = 0;
        for (double v : coef) scale = std::max(scale, std::abs(v));
        if (scale == 0) {
            if (rhs < -1e-9) {
                // 0 <= rhs violated: keep a row that makes phase one fail.
                a.push_back(std::vector<double>(n, 0.0));
                b.push_back(rhs);
            }
            return;
        }
        for (double &v : coef) v /= scale;
        a.push_back(std::move(coef));
        b.push_back(rhs / scale);
    };
    for (std::size_t j = 0; j < n; ++j) {
        std::vector<double> e(n, 0.0);
        e[j] = 1;
        add(e, p.upper[j] - p.lower[j]);
    }
    for (const auto &row : p.rows) {
        double shift = 0;
        for (std::size_t j = 0; j < n; ++j) shift += row.coef[j] * p.lower[j];
        if (std::isfinite(row.upper)) add(row.coef, row.upper - shift);
        if (std::isfinite(row.lower)) {
            std::vector<double> neg(row.coef);
            for (double &v : neg) v = -v;
            add(neg, shift - row.lower);
        }
    }
    std::vector<double> c(p.objective);
    if (p.sense == Sense::Minimize) {
        for (double &v : c) v = -v;
    }

    detail::BlandSimplex simplex(a, b, c);
    std::vector<double> y;
    double ignored = 0;
    if (!simplex.solve(y, ignored)) return {};

    Solution out;
    out.status = Status::Optimal;
    out.x.resize(n);
    for (std::size_t j = 0; j < n; ++j) out.x[j] = std::clamp(p.lower[j] + y[j], p.lower[j], p.upper[j]);
    out.value = 0;
    for (std::size_t j = 0; j < n; ++j) out.value += p.objective[j] * out.x[j];
    return out;
}

/// Largest violation of any bound or row of `p` at `x` (0 when feasible).
inline double max_violation(const LinearProgram &p, const std::vector<double> &x) {
    double worst = 0;
    for (std::size_t j = 0; j < x.size(); ++j) {
        worst = std::max({worst, p.lower[j] - x[j], x[j] - p.upper[j]});
    }
    for (const auto &row : p.rows) {
        double v = 0;
        for (std::size_t j = 0; j < x.size(); ++j) v += row.coef[j] * x[j];
        if (std::isfinite(row.lower)) worst = std::max(worst, row.lower - v);
        if (std::isfinite(row.upper)) worst = std::max(worst, v - row.upper);
    }
    return worst;
}

}  // namespace rfimdi::lp
