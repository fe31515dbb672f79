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
#include <array>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rfimdi/cqp.hpp"
#include "rfimdi/decoy.hpp"
#include "rfimdi/estimator_original.hpp"

namespace rfimdi {

/// Bounds of the joint-basis estimator. Every [2] array is indexed by
/// lambda = (nu, omega).
struct ImprovedEstimates {
    double y11_lower = 0;
    std::map<BasisLabel, std::array<double, 2>> e_upper_single;
    double e_upper_signal = 0;  // lambda = mu on ZZ
    std::array<std::array<double, 2>, 6> e_upper_pair{};  // indexed like kDecoyPairs
    std::array<double, 2> e_upper_joint{};
    double e11S_upper = 1;
    double c_lower = 0;
    bool feasible = true;
    std::vector<std::string> diagnostics;
    /// Binding constraints of each program, keyed by program name.
    std::map<std::string, std::vector<std::string>> binding;
};

/// Joint Y11 lower bound over the pooled decoy labels, with Chernoff limits
/// on the (nu o + o nu), (w o + o w), (nn + no + on + oo) and
/// (ww + wo + ow + oo) event totals on top of the per-cell boxes.
inline ProgramResult estimate_y11_joint(const StatTable &observed, const EstimationOptions &opt) {
    auto prog = y11_program(observed, kDecoyLabels);
    // Indices follow the order of y11_program.
    enum { ww, on, no, oo, nn, ow, wo };
    prog.add_sum("nu,o+o,nu", {no, on});
    prog.add_sum("omega,o+o,omega", {wo, ow});
    prog.add_sum("nu,nu+nu,o+o,nu+o,o", {nn, no, on, oo});
    prog.add_sum("omega,omega+omega,o+o,omega+o,o", {ww, wo, ow, oo});
    return prog.solve(lp::Sense::Minimize, opt, 0, 1);
}

/// Error-yield upper bound under a single label, a pair of labels, all of D
/// or the signal label (lambda = mu on ZZ).
inline ProgramResult estimate_E_improved(const StatTable &observed, std::span<const BasisLabel> labels, Level lambda,
                                         const EstimationOptions &opt) {
    auto prog = e_program(observed, labels, lambda);
    enum { ll, oo, ol, lo };
    prog.add_sum("l,o+o,l", {lo, ol});
    prog.add_sum("l,l+o,o", {ll, oo});
    return prog.solve(lp::Sense::Maximize, opt, 0, lp::kInf);
}

/// min sum_d (1 - 2 e_d)^2 over the single, pair and joint error limits.
inline lp::ConvexQuadraticProgram c_program(const ImprovedEstimates &est) {
    if (!(est.y11_lower > 0)) throw std::domain_error("c_program: y11 lower bound must be positive");
    const double y = est.y11_lower;
    lp::ConvexQuadraticProgram p;
    p.weight.assign(4, 4.0);
    p.center.assign(4, 0.5);
    p.lower.assign(4, 0.0);
    for (const auto &d : kDecoyLabels) {
        const auto &e = est.e_upper_single.at(d);
        p.upper.push_back(std::min(e[0], e[1]) / y);
    }
    auto index = [](BasisLabel d) {
        return static_cast<std::size_t>(std::find(kDecoyLabels.begin(), kDecoyLabels.end(), d) - kDecoyLabels.begin());
    };
    for (std::size_t k = 0; k < kDecoyPairs.size(); ++k) {
        lp::LinearRow row;
        row.coef.assign(4, 0.0);
        row.coef[index(kDecoyPairs[k][0])] = 1;
        row.coef[index(kDecoyPairs[k][1])] = 1;
        row.upper = 2 * std::min(est.e_upper_pair[k][0], est.e_upper_pair[k][1]) / y;
        p.rows.push_back(row);
    }
    lp::LinearRow all;
    all.coef.assign(4, 1.0);
    all.upper = 4 * std::min(est.e_upper_joint[0], est.e_upper_joint[1]) / y;
    p.rows.push_back(all);
    return p;
}

inline double estimate_c_improved(const ImprovedEstimates &est) {
    auto sol = lp::solve_cqp(c_program(est));
    // e = 0 is always feasible since every limit is non-negative.
    if (!sol.optimal()) throw std::logic_error("estimate_c_improved: C program infeasible");
    return std::clamp(sol.value, 0.0, 4.0);
}

inline ImprovedEstimates improved_pipeline(const StatTable &observed, const EstimationOptions &opt) {
    if (observed.protocol() != Protocol::Improved) throw std::invalid_argument("improved_pipeline: table protocol");
    ImprovedEstimates out;
    auto note = [&](const std::string &what, const ProgramResult &r) {
        if (!r.feasible) out.feasible = false;
        if (!r.diagnostic.empty()) out.diagnostics.push_back(what + ": " + r.diagnostic);
        if (!r.binding.empty()) out.binding[what] = r.binding;
    };
    const Level lambdas[2] = {Level::Nu, Level::Omega};

    auto y = estimate_y11_joint(observed, opt);
    note("y11", y);
    out.y11_lower = y.value;

    for (const auto &d : kDecoyLabels) {
        std::array<double, 2> e{};
        for (int i = 0; i < 2; ++i) {
            auto r = estimate_E_improved(observed, std::span<const BasisLabel>(&d, 1), lambdas[i], opt);
            note(std::string("E ") + level_name(lambdas[i]) + " " + d.str(), r);
            e[i] = r.value;
        }
        out.e_upper_single[d] = e;
    }
    for (std::size_t k = 0; k < kDecoyPairs.size(); ++k) {
        for (int i = 0; i < 2; ++i) {
            auto r = estimate_E_improved(observed, kDecoyPairs[k], lambdas[i], opt);
            note(std::string("E ") + level_name(lambdas[i]) + " " + kDecoyPairs[k][0].str() + "+" +
                     kDecoyPairs[k][1].str(),
                 r);
            out.e_upper_pair[k][i] = r.value;
        }
    }
    for (int i = 0; i < 2; ++i) {
        auto r = estimate_E_improved(observed, kDecoyLabels, lambdas[i], opt);
        note(std::string("E ") + level_name(lambdas[i]) + " D", r);
        out.e_upper_joint[i] = r.value;
    }
    auto s = estimate_E_improved(observed, std::span<const BasisLabel>(&kZZ, 1), Level::Mu, opt);
    note("E mu ZZ", s);
    out.e_upper_signal = s.value;

    if (out.y11_lower > 0) {
        out.e11S_upper = error_ratio(out.e_upper_signal, out.y11_lower);
        out.c_lower = estimate_c_improved(out);
    } else {
        out.e11S_upper = 1;
        out.c_lower = 0;
        out.diagnostics.push_back("y11: zero yield, C not evaluated");
    }
    return out;
}

}  // namespace rfimdi
