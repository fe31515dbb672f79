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
#include <cstdint>
#include <map>
#include <random>
#include <stdexcept>

#include "rfimdi/core.hpp"

namespace rfimdi {

/// Expected trial count of every event class for a budget of N_tot trials.
struct TrialAllocation {
    Protocol protocol = Protocol::Improved;
    std::map<CellKey, std::int64_t> counts;

    std::int64_t total() const {
        std::int64_t s = 0;
        for (const auto &[k, n] : counts) s += n;
        return s;
    }
};

/// n = round(N_tot * P(setting_a) * P(setting_b)) for every setting pair the
/// protocol allows.
inline TrialAllocation allocate(const IntensityPlan &plan, Protocol protocol, double n_tot) {
    if (!(n_tot >= 0) || n_tot > 9e18) throw std::domain_error("allocate: n_tot out of range");
    plan.validate(protocol);
    TrialAllocation out;
    out.protocol = protocol;
    auto settings = IntensityPlan::settings(protocol);
    for (const auto &a : settings) {
        for (const auto &b : settings) {
            double p = plan.setting_probability(protocol, a) * plan.setting_probability(protocol, b);
            out.counts[{a, b}] = std::llround(n_tot * p);
        }
    }
    return out;
}

enum class ObservationMode { ExpectedValue, Sampled };

/// Observed statistics for an allocation. ExpectedValue copies the expected
/// gains; Sampled draws successes ~ Binomial(n, q) and errors among the
/// successes ~ Binomial(successes, t/q).
inline StatTable observe(const StatTable &expected, const TrialAllocation &alloc, ObservationMode mode,
                         std::uint64_t seed = 0) {
    StatTable out(StatTable::Kind::Observed, expected.protocol(), expected.plan());
    std::mt19937_64 rng(seed);
    for (const auto &[key, n] : alloc.counts) {
        const StatCell &e = expected.at(key);
        StatCell c;
        c.n = n;
        if (mode == ObservationMode::ExpectedValue || n == 0) {
            c.q = e.q;
            c.t = e.t;
        } else {
            std::binomial_distribution<std::int64_t> succ(n, std::clamp(e.q, 0.0, 1.0));
            std::int64_t s = succ(rng);
            double pe = e.q > 0 ? std::clamp(e.t / e.q, 0.0, 1.0) : 0.0;
            std::int64_t k = 0;
            if (s > 0) {
                std::binomial_distribution<std::int64_t> err(s, pe);
                k = err(rng);
            }
            c.q = static_cast<double>(s) / static_cast<double>(n);
            c.t = static_cast<double>(k) / static_cast<double>(n);
        }
        out.set(key, c);
    }
    return out;
}

}  // namespace rfimdi
