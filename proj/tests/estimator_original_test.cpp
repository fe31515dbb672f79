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


#include "rfimdi/estimator_original.hpp"

#include <gtest/gtest.h>

#include "rfimdi/channel.hpp"
#include "rfimdi/keyrate.hpp"
#include "rfimdi/sampling.hpp"
#include "test_util.hpp"

using namespace rfimdi;
using rfimdi::testing::forward_table;
using rfimdi::testing::LinearModel;
using rfimdi::testing::with_counts;

namespace {

IntensityPlan original_plan() {
    IntensityPlan p;
    p.pr_nu = p.pr_omega = p.pr_z = 1.0 / 3;
    return p;
}

// Yields with at most one photon per side; the decoy inversion is then exact.
LinearModel one_photon_model() {
    LinearModel m;
    m.max_photons = 1;
    m.y = [](int n, int k, BasisLabel d) {
        if (n == 0 && k == 0) return 2e-6;
        if (n == 0 || k == 0) return 3e-4;
        return d == kZZ ? 0.011 : 0.012 + 0.001 * static_cast<int>(d.a) + 0.0005 * static_cast<int>(d.b);
    };
    m.t = [&](int n, int k, BasisLabel d) {
        double y = m.y(n, k, d);
        if (n == 0 || k == 0) return y / 2;
        if (d == kXX || d == kYY || d == kZZ) return 0.0;
        return y / 2;
    };
    return m;
}

StatTable channel_table(double km, double n_tot, ObservationMode mode = ObservationMode::ExpectedValue,
                        double beta_deg = 0) {
    ChannelConfig c;
    c.protocol = Protocol::Original;
    c.plan = original_plan();
    c.distance_km = km;
    c.device.beta_b = beta_deg * kPi / 180;
    return observe(expected_statistics(c), allocate(c.plan, c.protocol, n_tot), mode, 1);
}

SinglePhotonTruth channel_truth(double km, double beta_deg = 0) {
    ChannelConfig c;
    c.protocol = Protocol::Original;
    c.plan = original_plan();
    c.distance_km = km;
    c.device.beta_b = beta_deg * kPi / 180;
    return single_photon_truth(c);
}

}  // namespace

TEST(OriginalY11, InvertsOnePhotonModelExactly) {
    auto m = one_photon_model();
    auto t = forward_table(m, original_plan(), Protocol::Original);
    for (const auto &d : kAtomicLabels) {
        EXPECT_NEAR(y11_asymptotic(t, d), m.y(1, 1, d), 1e-10) << d.str();
    }
}

// Terms with n + m = 2 or 3 cancel or are dropped with zero weight; only
// n, m >= 1 with n + m >= 4 would loosen the bound.
TEST(OriginalY11, InvertsLowOrderModelExactly) {
    LinearModel m;
    m.max_photons = 3;
    m.y = [](int n, int k, BasisLabel) { return n + k <= 3 ? 0.001 * (1 + n) + 0.002 * k + 0.01 * n * k : 0.0; };
    m.t = [](int, int, BasisLabel) { return 0.0; };
    auto t = forward_table(m, original_plan(), Protocol::Original);
    for (const auto &d : kAtomicLabels) EXPECT_NEAR(y11_asymptotic(t, d), 0.014, 1e-10) << d.str();
}

TEST(OriginalY11, TwoPhotonPairsOnlyLoosen) {
    LinearModel m;
    m.max_photons = 2;
    m.y = [](int n, int k, BasisLabel) { return 0.001 * (1 + n) + 0.002 * k + 0.01 * n * k; };
    m.t = [](int, int, BasisLabel) { return 0.0; };
    auto t = forward_table(m, original_plan(), Protocol::Original);
    double y = y11_asymptotic(t, kXX);
    EXPECT_LT(y, 0.014);
    EXPECT_GT(y, 0.013);
}

TEST(OriginalE, InvertsOnePhotonModelExactly) {
    auto m = one_photon_model();
    auto t = with_counts(forward_table(m, original_plan(), Protocol::Original), 1e12);
    auto opt = EstimationOptions::asymptotic();
    for (const auto &d : kAtomicLabels) {
        for (Level l : {Level::Nu, Level::Omega}) {
            EXPECT_NEAR(estimate_E_original(t, d, l, opt).value, m.t(1, 1, d), 1e-10) << d.str();
        }
    }
}

TEST(OriginalY11, AllZeroInputGivesZero) {
    LinearModel m;
    m.y = m.t = [](int, int, BasisLabel) { return 0.0; };
    auto t = with_counts(forward_table(m, original_plan(), Protocol::Original), 1e10);
    auto est = original_pipeline(t, EstimationOptions{});
    for (const auto &d : kAtomicLabels) {
        EXPECT_EQ(est.y11_lower.at(d), 0);
        EXPECT_EQ(est.e11_upper.at(d), 1);
    }
    EXPECT_EQ(est.c_lower, 0);
}

TEST(OriginalY11, ZeroWidthMatchesClosedForm) {
    auto t = channel_table(20, 1e12);
    auto opt = EstimationOptions::asymptotic();
    for (const auto &d : kAtomicLabels) {
        double lp = estimate_y11_original(t, d, opt).value;
        EXPECT_NEAR(lp, y11_asymptotic(t, d), 1e-12 * std::abs(lp)) << d.str();
    }
}

TEST(OriginalY11, FiniteBoundBelowAsymptoticAndTruth) {
    auto truth = channel_truth(20);
    for (double n : {1e10, 1e12, 1e14}) {
        auto t = channel_table(20, n);
        for (const auto &d : kAtomicLabels) {
            double fin = estimate_y11_original(t, d, EstimationOptions{}).value;
            EXPECT_LE(fin, y11_asymptotic(t, d)) << d.str() << " " << n;
            EXPECT_LE(fin, truth.y11_by_label.at(d)) << d.str() << " " << n;
        }
    }
}

TEST(OriginalY11, TightensWithData) {
    double prev = -1;
    for (double n : {1e10, 1e11, 1e12, 1e13}) {
        double y = estimate_y11_original(channel_table(10, n), kZZ, EstimationOptions{}).value;
        EXPECT_GT(y, prev);
        prev = y;
    }
}

TEST(OriginalY11, PositiveBelowAsymptoteAtTwentyKm) {
    auto t = channel_table(20, 1e11);
    for (const auto &d : kAtomicLabels) {
        double y = estimate_y11_original(t, d, EstimationOptions{}).value;
        EXPECT_GT(y, 0) << d.str();
        EXPECT_LT(y, y11_asymptotic(t, d)) << d.str();
    }
}

TEST(OriginalE, GapToTruthShrinksWithData) {
    auto truth = channel_truth(20, 25);
    double prev = 2;
    for (double n : {1e10, 1e11, 1e12, 1e13}) {
        auto t = channel_table(20, n, ObservationMode::ExpectedValue, 25);
        double e = estimate_E_original(t, kXX, Level::Nu, EstimationOptions{}).value /
                   truth.y11_by_label.at(kXX);
        EXPECT_GE(e, truth.e11.at(kXX));
        EXPECT_LT(e - truth.e11.at(kXX), prev);
        prev = e - truth.e11.at(kXX);
    }
}

TEST(OriginalE, ZeroErrorsGiveZero) {
    auto m = one_photon_model();
    m.t = [](int, int, BasisLabel) { return 0.0; };
    auto t = with_counts(forward_table(m, original_plan(), Protocol::Original), 1e12);
    EXPECT_EQ(estimate_E_original(t, kXY, Level::Nu, EstimationOptions::asymptotic()).value, 0);
}

TEST(OriginalPipeline, ErrorRatesCoverTruth) {
    auto truth = channel_truth(20, 25);
    auto est = original_pipeline(channel_table(20, 1e12, ObservationMode::ExpectedValue, 25), EstimationOptions{});
    ASSERT_TRUE(est.feasible);
    for (const auto &d : kAtomicLabels) EXPECT_GE(est.e11_upper.at(d), truth.e11.at(d)) << d.str();
}

TEST(OriginalPipeline, CorrelationTwoOnNoiselessForwardData) {
    auto t = with_counts(forward_table(one_photon_model(), original_plan(), Protocol::Original), 1e12);
    auto est = original_pipeline(t, EstimationOptions::asymptotic());
    EXPECT_NEAR(est.c_lower, 2, 1e-9);
    EXPECT_NEAR(est.e11_upper.at(kZZ), 0, 1e-9);
}

TEST(OriginalPipeline, CorrelationGrowsWithData) {
    auto a = original_pipeline(channel_table(10, 1e10), EstimationOptions{});
    auto b = original_pipeline(channel_table(10, 1e12), EstimationOptions{});
    EXPECT_LT(a.c_lower, b.c_lower);
}

TEST(OriginalPipeline, RejectsImprovedTable) {
    StatTable t(StatTable::Kind::Observed, Protocol::Improved, IntensityPlan{});
    EXPECT_THROW(original_pipeline(t, EstimationOptions{}), std::invalid_argument);
}

TEST(OriginalKeyRate, PositiveBelowIdealAtTenKm) {
    ChannelConfig c;
    c.protocol = Protocol::Original;
    c.plan = original_plan();
    c.distance_km = 10;
    auto obs = observe(expected_statistics(c), allocate(c.plan, c.protocol, 1e12), ObservationMode::ExpectedValue);
    auto rate = key_rate_original(original_pipeline(obs, EstimationOptions{}), obs, c.device).key_rate;
    EXPECT_GT(rate, 0);
    EXPECT_LT(rate, key_rate_ideal(c).key_rate);
}

TEST(ErrorRatio, Limits) {
    EXPECT_EQ(error_ratio(0.1, 0), 1);
    EXPECT_EQ(error_ratio(0.5, 0.25), 1);
    EXPECT_DOUBLE_EQ(error_ratio(0.01, 0.1), 0.1);
    std::array<double, 4> e{0, 0.5, 0.7, 0.25};
    EXPECT_DOUBLE_EQ(c_from_errors(e), 1.25);
}
