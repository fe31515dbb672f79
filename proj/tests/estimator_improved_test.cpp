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


#include "rfimdi/estimator_improved.hpp"

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "rfimdi/channel.hpp"
#include "rfimdi/sampling.hpp"
#include "test_util.hpp"

using namespace rfimdi;
using rfimdi::testing::forward_table;
using rfimdi::testing::LinearModel;
using rfimdi::testing::with_counts;

namespace {

ChannelConfig improved_config(double km, double beta_deg = 0) {
    ChannelConfig c;
    c.distance_km = km;
    c.device.beta_b = beta_deg * kPi / 180;
    return c;
}

StatTable improved_table(double km, double n_tot, double beta_deg = 0) {
    auto c = improved_config(km, beta_deg);
    return observe(expected_statistics(c), allocate(c.plan, c.protocol, n_tot), ObservationMode::ExpectedValue);
}

ImprovedEstimates limits(double single, double pair, double joint) {
    ImprovedEstimates e;
    e.y11_lower = 1;
    for (const auto &d : kDecoyLabels) e.e_upper_single[d] = {single, single + 1};
    for (auto &p : e.e_upper_pair) p = {pair + 1, pair};
    e.e_upper_joint = {joint, joint};
    return e;
}

}  // namespace

TEST(ImprovedY11, ZeroWidthEqualsMeanOfPerLabelBounds) {
    auto t = improved_table(10, 1e12);
    double joint = estimate_y11_joint(t, EstimationOptions::asymptotic()).value;
    double mean = 0;
    for (const auto &d : kDecoyLabels) mean += y11_asymptotic(t, d) / 4;
    EXPECT_NEAR(joint, mean, 1e-12 * mean);
}

TEST(ImprovedY11, ZeroWidthMatchesOriginalProtocolPooled) {
    auto c = improved_config(10, 25);
    auto t = observe(expected_statistics(c), allocate(c.plan, c.protocol, 1e12), ObservationMode::ExpectedValue);
    ChannelConfig o = c;
    o.protocol = Protocol::Original;
    o.plan.pr_nu = o.plan.pr_omega = o.plan.pr_z = 1.0 / 3;
    auto ot = expected_statistics(o);
    double mean = 0;
    for (const auto &d : kDecoyLabels) mean += y11_asymptotic(ot, d) / 4;
    double joint = estimate_y11_joint(t, EstimationOptions::asymptotic()).value;
    EXPECT_NEAR(joint, mean, 1e-9 * mean);
}

TEST(ImprovedY11, JointBeatsEveryPerLabelBound) {
    for (double n : {1e10, 1e12}) {
        auto t = improved_table(20, n, 25);
        double joint = estimate_y11_joint(t, EstimationOptions{}).value;
        for (const auto &d : kDecoyLabels) {
            EXPECT_GT(joint, estimate_y11_original(t, d, EstimationOptions{}).value) << d.str() << " " << n;
        }
    }
}

TEST(ImprovedY11, SoundAgainstTruth) {
    for (double km : {0.0, 30.0, 60.0}) {
        auto truth = single_photon_truth(improved_config(km, 25));
        for (double n : {1e9, 1e11, 1e13}) {
            double y = estimate_y11_joint(improved_table(km, n, 25), EstimationOptions{}).value;
            EXPECT_LE(y, truth.y11) << km << " " << n;
        }
    }
}

TEST(ImprovedY11, PooledSumsOnlyTighten) {
    auto t = improved_table(20, 1e10);
    EstimationOptions loose;
    loose.joint_constraints = false;
    double with = estimate_y11_joint(t, EstimationOptions{}).value;
    double without = estimate_y11_joint(t, loose).value;
    EXPECT_GE(with, without - 1e-15);
}

TEST(ImprovedE, ZeroWidthPairIsMeanOfSingles) {
    auto t = improved_table(10, 1e12, 25);
    auto opt = EstimationOptions::asymptotic();
    for (const auto &pair : kDecoyPairs) {
        for (Level l : {Level::Nu, Level::Omega}) {
            double p = estimate_E_improved(t, pair, l, opt).value;
            double a = estimate_E_improved(t, std::span<const BasisLabel>(&pair[0], 1), l, opt).value;
            double b = estimate_E_improved(t, std::span<const BasisLabel>(&pair[1], 1), l, opt).value;
            EXPECT_NEAR(p, (a + b) / 2, 1e-12 * (a + b + 1e-30));
        }
    }
}

TEST(ImprovedE, FinitePairAtMostMeanOfSingles) {
    auto t = improved_table(30, 1e10, 25);
    EstimationOptions opt;
    for (const auto &pair : kDecoyPairs) {
        for (Level l : {Level::Nu, Level::Omega}) {
            double p = estimate_E_improved(t, pair, l, opt).value;
            double a = estimate_E_improved(t, std::span<const BasisLabel>(&pair[0], 1), l, opt).value;
            double b = estimate_E_improved(t, std::span<const BasisLabel>(&pair[1], 1), l, opt).value;
            EXPECT_LE(2 * p, a + b + 1e-15);
        }
    }
}

TEST(ImprovedC, AllZeroErrorsGiveFour) { EXPECT_NEAR(estimate_c_improved(limits(0, 0, 0)), 4, 1e-12); }

TEST(ImprovedC, LooseLimitsGiveZero) { EXPECT_NEAR(estimate_c_improved(limits(0.7, 0.7, 0.7)), 0, 1e-12); }

TEST(ImprovedC, JointRowBinds) {
    // Singles allow 0.4 each but the sum is held to 0.2, so e = 0.05 each.
    auto e = limits(0.4, 0.4, 0.05);
    double c = estimate_c_improved(e);
    EXPECT_NEAR(c, 4 * std::pow(1 - 2 * 0.05, 2), 1e-10);
    EXPECT_NEAR(c, oracle::grid_search(c_program(e)), 1e-6);
}

TEST(ImprovedC, MixedLimitsMatchGrid) {
    auto e = limits(0.3, 0.3, 0.3);
    e.e_upper_single[kXX] = {0.02, 0.03};
    e.e_upper_single[kYY] = {0.45, 0.6};
    e.e_upper_pair[0] = {0.2, 0.25};
    double c = estimate_c_improved(e);
    EXPECT_NEAR(c, oracle::grid_search(c_program(e)), 1e-6);
}

TEST(ImprovedC, RequiresPositiveYield) {
    auto e = limits(0.1, 0.1, 0.1);
    e.y11_lower = 0;
    EXPECT_THROW(c_program(e), std::domain_error);
}

TEST(ImprovedPipeline, CorrelationTwoOnNoiselessForwardData) {
    LinearModel m;
    m.max_photons = 1;
    m.y = [](int n, int k, BasisLabel) { return n == 0 && k == 0 ? 1e-6 : (n == 0 || k == 0 ? 2e-4 : 0.01); };
    m.t = [&](int n, int k, BasisLabel d) {
        if (n == 0 || k == 0) return m.y(n, k, d) / 2;
        return (d == kXY || d == kYX) ? 0.005 : 0.0;
    };
    auto t = with_counts(forward_table(m, IntensityPlan{}, Protocol::Improved), 1e12);
    auto est = improved_pipeline(t, EstimationOptions::asymptotic());
    EXPECT_NEAR(est.y11_lower, 0.01, 1e-12);
    EXPECT_NEAR(est.c_lower, 2, 1e-9);
    EXPECT_NEAR(est.e11S_upper, 0, 1e-9);
}

TEST(ImprovedPipeline, ZeroDataIsHandled) {
    LinearModel m;
    m.y = m.t = [](int, int, BasisLabel) { return 0.0; };
    auto t = with_counts(forward_table(m, IntensityPlan{}, Protocol::Improved), 1e10);
    auto est = improved_pipeline(t, EstimationOptions{});
    EXPECT_EQ(est.y11_lower, 0);
    EXPECT_EQ(est.c_lower, 0);
    EXPECT_EQ(est.e11S_upper, 1);
    EXPECT_FALSE(est.diagnostics.empty());
}

TEST(ImprovedPipeline, CoversTruthAtTwentyFiveDegrees) {
    auto c = improved_config(20, 25);
    auto truth = single_photon_truth(c);
    double truth_c = 0;
    for (const auto &d : kDecoyLabels) truth_c += std::pow(1 - 2 * truth.e11.at(d), 2);
    auto est = improved_pipeline(improved_table(20, 1e11, 25), EstimationOptions{});
    ASSERT_TRUE(est.feasible);
    EXPECT_LE(est.y11_lower, truth.y11);
    EXPECT_LE(est.c_lower, truth_c);
    EXPECT_GE(est.e11S_upper, truth.e11.at(kZZ));
    EXPECT_FALSE(est.binding.empty());
}
