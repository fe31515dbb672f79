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


#include "rfimdi/sampling.hpp"

#include <gtest/gtest.h>

#include "rfimdi/channel.hpp"

using namespace rfimdi;

TEST(Allocate, CountsFollowSelectionProbabilities) {
    IntensityPlan plan;
    for (Protocol p : {Protocol::Improved, Protocol::Original}) {
        auto a = allocate(plan, p, 1e12);
        EXPECT_EQ(a.counts.size(), p == Protocol::Improved ? 36u : 81u);
        EXPECT_NEAR(static_cast<double>(a.total()), 1e12, 100);
        CellKey k = p == Protocol::Improved ? CellKey{{Level::Mu, Basis::Z}, {Level::Mu, Basis::Z}}
                                            : CellKey{{Level::Nu, Basis::Z}, {Level::Nu, Basis::Z}};
        double pk = plan.setting_probability(p, k.a) * plan.setting_probability(p, k.b);
        EXPECT_EQ(a.counts.at(k), std::llround(1e12 * pk));
    }
}

TEST(Allocate, RejectsBadInput) {
    IntensityPlan plan;
    EXPECT_THROW(allocate(plan, Protocol::Improved, -1), std::domain_error);
    EXPECT_THROW(allocate(plan, Protocol::Improved, 1e19), std::domain_error);
    plan.omega = 0.3;
    EXPECT_THROW(allocate(plan, Protocol::Improved, 1e6), std::domain_error);
}

TEST(Observe, ExpectedValueCopiesMeans) {
    ChannelConfig cfg;
    cfg.distance_km = 10;
    auto exp = expected_statistics(cfg);
    auto obs = observe(exp, allocate(cfg.plan, cfg.protocol, 1e9), ObservationMode::ExpectedValue);
    EXPECT_EQ(obs.kind(), StatTable::Kind::Observed);
    for (const auto &[k, c] : exp.cells()) {
        EXPECT_EQ(obs.at(k).q, c.q);
        EXPECT_EQ(obs.at(k).t, c.t);
        EXPECT_GT(obs.at(k).n, 0);
    }
}

TEST(Observe, SampledIsSeededAndConsistent) {
    ChannelConfig cfg;
    cfg.distance_km = 10;
    auto exp = expected_statistics(cfg);
    auto alloc = allocate(cfg.plan, cfg.protocol, 1e10);
    auto a = observe(exp, alloc, ObservationMode::Sampled, 5);
    auto b = observe(exp, alloc, ObservationMode::Sampled, 5);
    auto c = observe(exp, alloc, ObservationMode::Sampled, 6);
    bool differs = false;
    for (const auto &[k, x] : a.cells()) {
        EXPECT_EQ(x.q, b.at(k).q);
        EXPECT_LE(x.t, x.q);
        if (x.q != c.at(k).q) differs = true;
        // 6 sigma around the expectation.
        const auto &e = exp.at(k);
        double n = static_cast<double>(x.n);
        EXPECT_NEAR(x.q, e.q, 6 * std::sqrt(e.q / n) + 1 / n) << k.str();
        EXPECT_NEAR(x.t, e.t, 6 * std::sqrt(e.t / n) + 1 / n) << k.str();
    }
    EXPECT_TRUE(differs);
}

TEST(Observe, ZeroTrialsKeepExpectation) {
    ChannelConfig cfg;
    auto exp = expected_statistics(cfg);
    auto obs = observe(exp, allocate(cfg.plan, cfg.protocol, 0), ObservationMode::Sampled, 1);
    for (const auto &[k, c] : obs.cells()) EXPECT_EQ(c.n, 0);
    EXPECT_EQ(allocate(cfg.plan, cfg.protocol, 0).total(), 0);
}
