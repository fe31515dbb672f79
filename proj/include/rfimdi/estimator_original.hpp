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
#include <string>
#include <vector>

#include "rfimdi/decoy.hpp"

namespace rfimdi {

/// Per-basis bounds of the original estimator. e_upper[label] holds the
/// (nu, omega) error-yield bounds.
struct OriginalEstimates {
    std::map<BasisLabel, double> y11_lower;
    std::map<BasisLabel, std::array<double, 2>> e_upper;
    std::map<BasisLabel, double> e11_upper;
    double c_lower = 0;
    bool feasible = true;
    std::vector<std::string> diagnostics;
};

/// Closed-form decoy bound evaluated on exact expectations.
inline double y11_asymptotic(const StatTable &expected, std::span<const BasisLabel> labels) {
    return y11_program(expected, labels).evaluate();
}

inline double y11_asymptotic(const StatTable &expected, BasisLabel d) {
    return y11_asymptotic(expected, std::span<const BasisLabel>(&d, 1));
}

inline ProgramResult estimate_y11_original(const StatTable &observed, BasisLabel d, const EstimationOptions &opt) {
    return y11_program(observed, std::span<const BasisLabel>(&d, 1)).solve(lp::Sense::Minimize, opt, 0, 1);
}

inline ProgramResult estimate_E_original(const StatTable &observed, BasisLabel d, Level lambda,
                                         const EstimationOptions &opt) {
    return e_program(observed, std::span<const BasisLabel>(&d, 1), lambda)
        .solve(lp::Sense::Maximize, opt, 0, lp::kInf);
}

/// e = E / Y capped at 1; a vanishing yield certifies nothing.
inline double error_ratio(double e_upper, double y11_lower) {
    if (!(y11_lower > 0)) return 1;
    return std::min(e_upper / y11_lower, 1.0);
}

/// C = sum over decoy labels of (1 - 2 min(e, 1/2))^2.
inline double c_from_errors(std::span<const double> e) {
    double c = 0;
    for (double x : e) {
        double s = 1 - 2 * std::min(std::max(x, 0.0), 0.5);
        c += s * s;
    }
    return c;
}

inline OriginalEstimates original_pipeline(const StatTable &observed, const EstimationOptions &opt) {
    if (observed.protocol() != Protocol::Original) throw std::invalid_argument("original_pipeline: table protocol");
    OriginalEstimates out;
    auto note = [&](const std::string &what, const ProgramResult &r) {
        if (!r.feasible) out.feasible = false;
        if (!r.diagnostic.empty()) out.diagnostics.push_back(what + ": " + r.diagnostic);
    };
    for (const auto &d : kAtomicLabels) {
        auto y = estimate_y11_original(observed, d, opt);
        note("y11 " + d.str(), y);
        out.y11_lower[d] = y.value;
        std::array<double, 2> e{};
        const Level lambdas[2] = {Level::Nu, Level::Omega};
        for (int i = 0; i < 2; ++i) {
            auto r = estimate_E_original(observed, d, lambdas[i], opt);
            note(std::string("E ") + level_name(lambdas[i]) + " " + d.str(), r);
            e[i] = r.value;
        }
        out.e_upper[d] = e;
        out.e11_upper[d] = error_ratio(std::min(e[0], e[1]), y.value);
        if (!(y.value > 0)) out.diagnostics.push_back("y11 " + d.str() + ": zero yield, e11 set to 1");
    }
    std::array<double, 4> ed{};
    for (std::size_t i = 0; i < kDecoyLabels.size(); ++i) ed[i] = out.e11_upper[kDecoyLabels[i]];
    out.c_lower = c_from_errors(ed);
    return out;
}

}  // namespace rfimdi
