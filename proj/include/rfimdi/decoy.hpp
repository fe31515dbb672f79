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
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rfimdi/bounds.hpp"
#include "rfimdi/core.hpp"
#include "rfimdi/lp.hpp"

namespace rfimdi {

/// How observed statistics are turned into feasible sets.
struct EstimationOptions {
    double epsilon = 1e-7;
    ChernoffVariant variant = ChernoffVariant::Asymmetric;
    /// Evaluate the decoy expressions at the observed means (the asymptotic
    /// limit) instead of optimizing over Chernoff intervals.
    bool zero_width = false;
    /// Keep the pooled-sum constraints of the improved programs. Turning them
    /// off leaves only per-cell boxes.
    bool joint_constraints = true;

    static EstimationOptions asymptotic() {
        EstimationOptions o;
        o.zero_width = true;
        return o;
    }
};

struct ProgramResult {
    bool feasible = true;
    double value = 0;  // after clamping into the physical range
    double raw = 0;    // optimizer output before clamping
    std::vector<std::string> binding;
    std::string diagnostic;
};

/// Linear objective over the expected means of a handful of pooled cells.
///
/// Internally each mean is written as m_i = m^_i + s_i z_i with
/// s_i = sqrt(X^_i) / N_i and X^_i = N_i m^_i, so that a Chernoff box becomes
/// z_i in [max(-k_lo, -sqrt(X^_i)), k_up] and every coefficient is O(1)
/// regardless of N.
class DecoyProgram {
   public:
    struct Cell {
        std::string name;
        StatCell stats;
        bool error_yield = false;
        double coef = 0;

        double mean() const { return error_yield ? stats.t : stats.q; }
        double events() const { return static_cast<double>(stats.n) * mean(); }
        bool informative() const { return stats.n > 0 && !stats.degenerate; }
    };
    struct Sum {
        std::string name;
        std::vector<std::size_t> members;
    };

    std::size_t add_cell(std::string name, const StatCell &stats, bool error_yield, double coef) {
        cells_.push_back({std::move(name), stats, error_yield, coef});
        return cells_.size() - 1;
    }
    void add_sum(std::string name, std::vector<std::size_t> members) {
        sums_.push_back({std::move(name), std::move(members)});
    }

    const std::vector<Cell> &cells() const { return cells_; }
    const std::vector<Sum> &sums() const { return sums_; }

    /// Objective at the observed means.
    double evaluate() const {
        double v = 0;
        for (const auto &c : cells_) v += c.coef * c.mean();
        return v;
    }

    /// Optimizes the objective; `lo`/`hi` is the clamp range of the result.
    ProgramResult solve(lp::Sense sense, const EstimationOptions &opt, double lo, double hi) const {
        ProgramResult out;
        if (opt.zero_width) {
            out.raw = evaluate();
            return finish(out, lo, hi);
        }
        auto k = chernoff_coefficients(opt.epsilon, opt.variant);
        const std::size_t n = cells_.size();

        lp::LinearProgram p;
        p.sense = sense;
        p.objective.assign(n, 0.0);
        p.lower.assign(n, 0.0);
        p.upper.assign(n, 0.0);
        std::vector<double> base(n, 0.0), scale(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const auto &c = cells_[i];
            if (!c.informative()) {
                // No trials: the mean is only known to be a probability.
                base[i] = 0;
                scale[i] = 1;
                p.upper[i] = 1;
            } else if (c.events() > 0) {
                double root = std::sqrt(c.events());
                base[i] = c.mean();
                scale[i] = root / static_cast<double>(c.stats.n);
                p.lower[i] = std::max(-k.lower, -root);
                p.upper[i] = k.upper;
            } else {
                base[i] = 0;
                scale[i] = 0;
            }
        }
        double cmax = 0;
        for (std::size_t i = 0; i < n; ++i) cmax = std::max(cmax, std::abs(cells_[i].coef * scale[i]));
        for (std::size_t i = 0; i < n; ++i) p.objective[i] = cmax > 0 ? cells_[i].coef * scale[i] / cmax : 0;

        std::vector<std::size_t> row_of_sum;
        if (opt.joint_constraints) {
            for (std::size_t s = 0; s < sums_.size(); ++s) {
                double total = 0;
                for (auto i : sums_[s].members) {
                    if (cells_[i].informative()) total += cells_[i].events();
                }
                if (total <= 0) continue;
                lp::LinearRow row;
                row.coef.assign(n, 0.0);
                for (auto i : sums_[s].members) {
                    if (cells_[i].informative()) row.coef[i] = std::sqrt(cells_[i].events() / total);
                }
                row.lower = std::max(-k.lower, -std::sqrt(total));
                row.upper = k.upper;
                p.rows.push_back(row);
                row_of_sum.push_back(s);
            }
        }

        auto sol = lp::solve_lp(p);
        if (!sol.optimal()) {
            out.feasible = false;
            out.diagnostic = "infeasible statistics";
            out.raw = sense == lp::Sense::Minimize ? lo : hi;
            out.value = out.raw;
            return out;
        }
        double v = 0;
        for (std::size_t i = 0; i < n; ++i) v += cells_[i].coef * (base[i] + scale[i] * sol.x[i]);
        out.raw = v;

        constexpr double tight = 1e-7;
        for (std::size_t i = 0; i < n; ++i) {
            if (p.upper[i] - p.lower[i] <= 0) continue;
            if (sol.x[i] <= p.lower[i] + tight) out.binding.push_back(cells_[i].name + ">=");
            if (sol.x[i] >= p.upper[i] - tight) out.binding.push_back(cells_[i].name + "<=");
        }
        for (std::size_t r = 0; r < p.rows.size(); ++r) {
            double a = 0;
            for (std::size_t i = 0; i < n; ++i) a += p.rows[r].coef[i] * sol.x[i];
            if (a <= p.rows[r].lower + tight) out.binding.push_back(sums_[row_of_sum[r]].name + ">=");
            if (a >= p.rows[r].upper - tight) out.binding.push_back(sums_[row_of_sum[r]].name + "<=");
        }
        return finish(out, lo, hi);
    }

   private:
    static ProgramResult finish(ProgramResult out, double lo, double hi) {
        out.value = std::clamp(out.raw, lo, hi);
        if (out.value != out.raw) out.diagnostic = "clamped from " + std::to_string(out.raw);
        return out;
    }

    std::vector<Cell> cells_;
    std::vector<Sum> sums_;
};

namespace decoy_detail {

inline std::string cell_name(Level l, Level r) { return std::string(level_name(l)) + level_name(r); }

}  // namespace decoy_detail

/// Three-intensity lower bound on Y11 from the {nu, omega, o}^2 gains pooled
/// over `labels`. Both users share the plan, so p and p' coincide.
///
/// With A_l = p1^l p2^l the bound is
///   [A_nu S_ww - A_w S_nn] / [p1^nu p1^w (p1^w p2^nu - p1^nu p2^w)],
///   S_lr = Q_lr - p0^l Q_or - p0^r Q_lo + p0^l p0^r Q_oo,
/// which is exact when every yield with four or more photons vanishes.
/// Cells are added in the order ww, on, no, oo, nn, ow, wo.
inline DecoyProgram y11_program(const StatTable &table, std::span<const BasisLabel> labels) {
    const auto &plan = table.plan();
    auto p = [&](Level l, int k) { return poisson_pmf(plan.intensity(l), k); };
    const Level nu = Level::Nu, w = Level::Omega, o = Level::Vacuum;
    double a_nu = p(nu, 1) * p(nu, 2);
    double a_w = p(w, 1) * p(w, 2);
    double den = p(nu, 1) * p(w, 1) * (p(w, 1) * p(nu, 2) - p(nu, 1) * p(w, 2));
    if (!(den > 0)) throw std::domain_error("y11 decoy denominator is not positive (need nu > omega > 0)");

    DecoyProgram prog;
    auto add = [&](Level l, Level r, double coef) {
        return prog.add_cell(decoy_detail::cell_name(l, r), pool(table, labels, l, r), false, coef / den);
    };
    add(w, w, a_nu);
    add(o, nu, a_w * p(nu, 0));
    add(nu, o, a_w * p(nu, 0));
    add(o, o, a_nu * p(w, 0) * p(w, 0) - a_w * p(nu, 0) * p(nu, 0));
    add(nu, nu, -a_w);
    add(o, w, -a_nu * p(w, 0));
    add(w, o, -a_nu * p(w, 0));
    return prog;
}

/// Upper bound on the single-photon error yield at intensity `lambda`:
///   [T_ll + p0 p0 T_oo - p0 T_ol - p0 T_lo] / (p1 p1).
/// Cells are added in the order ll, oo, ol, lo.
inline DecoyProgram e_program(const StatTable &table, std::span<const BasisLabel> labels, Level lambda) {
    if (lambda == Level::Vacuum) throw std::invalid_argument("e_program: lambda must be a non-vacuum intensity");
    double x = table.plan().intensity(lambda);
    double p0 = poisson_pmf(x, 0);
    double p1 = poisson_pmf(x, 1);
    if (!(p1 > 0)) throw std::domain_error("e_program: intensity must be positive");
    const Level o = Level::Vacuum;
    DecoyProgram prog;
    auto add = [&](Level l, Level r, double coef) {
        return prog.add_cell(decoy_detail::cell_name(l, r), pool(table, labels, l, r), true, coef / (p1 * p1));
    };
    add(lambda, lambda, 1);
    add(o, o, p0 * p0);
    add(o, lambda, -p0);
    add(lambda, o, -p0);
    return prog;
}

}  // namespace rfimdi
