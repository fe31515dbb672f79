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


#include "rfimdi/keyrate.hpp"

#include <gtest/gtest.h>

#include "rfimdi/channel.hpp"

using namespace rfimdi;

// Reference values from 30-digit mpmath evaluation.
TEST(ComputeUV, KnownValues) {
    auto a = compute_uv(1.63, 0.1);
    EXPECT_DOUBLE_EQ(a.u, 1);
    EXPECT_NEAR(a.v, 0.707106781186544423, 1e-9);
    EXPECT_FALSE(a.v_clamped);
    auto b = compute_uv(1.5, 0.03);
    EXPECT_NEAR(b.u, 0.892809694623132625, 1e-14);
    EXPECT_NEAR(b.v, 0, 1e-6);
    auto c = compute_uv(2, 0);
    EXPECT_EQ(c.u, 1);
    EXPECT_EQ(c.v, 0);
}

TEST(ComputeUV, UnsaturatedUHasZeroV) {
    auto a = compute_uv(1.5, 0.02);
    EXPECT_NEAR(a.u, std::sqrt(0.75) / 0.98, 1e-15);
    EXPECT_NEAR(a.v, 0, 1e-6);
    for (double e : {0.0, 0.1, 0.5}) {
        auto z = compute_uv(0, e);
        EXPECT_EQ(z.u, 0);
        EXPECT_EQ(z.v, 0);
    }
}

TEST(ComputeUV, CapsVAtOne) {
    auto a = compute_uv(2, 0.1);
    EXPECT_EQ(a.v, 1);
    EXPECT_TRUE(a.v_clamped);
}

TEST(ComputeUV, RejectsOutOfRange) {
    EXPECT_THROW(compute_uv(-0.1, 0.1), std::domain_error);
    EXPECT_THROW(compute_uv(4.1, 0.1), std::domain_error);
    EXPECT_THROW(compute_uv(1, 1.1), std::domain_error);
    EXPECT_NO_THROW(compute_uv(1, 1));
}

TEST(InformationLeakage, KnownValues) {
    EXPECT_NEAR(information_leakage(1.63, 0.1), 0.0600876036692860077, 1e-9);
    EXPECT_NEAR(information_leakage(1.5, 0.03), 0.322432615897647823, 1e-12);
    EXPECT_NEAR(information_leakage(1.0, 0.2), 0.455750581301209522, 1e-12);
    EXPECT_NEAR(information_leakage(1.9, 0.02), 0.0465118285197968493, 1e-12);
    EXPECT_EQ(information_leakage(2, 0), 0);
    EXPECT_EQ(information_leakage(0, 0), 1);
}

TEST(InformationLeakage, MisalignedCorrelation) {
    // c = 2 (1 - 2 e_d)^2 at e = e_d = 0.005; mpmath gives 0.0301937642765449918.
    const double e = 0.005;
    EXPECT_NEAR(information_leakage(2 * std::pow(1 - 2 * e, 2), e), 0.0301937642765449918, 1e-12);
    for (double x : {0.0, 0.3, 0.7}) EXPECT_NEAR(information_leakage(0, x), 1, 1e-15);
}

TEST(InformationLeakage, NonIncreasingInCorrelation) {
    for (double e : {0.0, 0.01, 0.05, 0.1, 0.2}) {
        double prev = 2;
        for (int i = 0; i <= 400; ++i) {
            double c = i * 0.01;
            double v = information_leakage(c, e);
            EXPECT_LE(v, prev + 1e-12) << c << " " << e;
            EXPECT_GE(v, -1e-15);
            prev = v;
        }
    }
}

TEST(KeyRate, NoiselessIsSingleCountTerm) {
    DeviceParams dev;
    auto r = key_rate_from(0.0625, 0.4, 1e-3, 2, 0, 5e-3, 0, dev);
    double p1 = 0.4 * std::exp(-0.4);
    EXPECT_NEAR(r.key_rate, 0.0625 * p1 * p1 * 1e-3, 1e-18);
    EXPECT_EQ(r.i_ae, 0);
}

TEST(KeyRate, ErrorCorrectionTerm) {
    DeviceParams dev;
    auto r = key_rate_from(0.25, 0.3, 2e-3, 2, 0, 4e-3, 4e-5, dev);
    double p1 = 0.3 * std::exp(-0.3);
    double want = 0.25 * p1 * p1 * (2e-3 - 4e-3 * 1.16 * binary_entropy(0.01));
    EXPECT_NEAR(r.r, want, 1e-15);
}

TEST(KeyRate, ZeroInputs) {
    DeviceParams dev;
    auto a = key_rate_from(0.25, 0.3, 0, 2, 0, 4e-3, 0, dev);
    EXPECT_EQ(a.key_rate, 0);
    EXPECT_FALSE(a.diagnostic.empty());
    auto b = key_rate_from(0.25, 0.3, 1e-3, 2, 0, 0, 0, dev);
    EXPECT_EQ(b.key_rate, 0);
    auto c = key_rate_from(0.25, 0.3, 1e-3, 0, 0.3, 4e-3, 1e-3, dev);
    EXPECT_EQ(c.key_rate, 0);
    EXPECT_LT(c.r, 0);
}

TEST(KeyRate, TextListsFields) {
    DeviceParams dev;
    auto s = key_rate_from(0.25, 0.3, 1e-3, 2, 0, 4e-3, 0, dev).to_text();
    EXPECT_NE(s.find("key_rate = "), std::string::npos);
    EXPECT_NE(s.find("i_ae = 0"), std::string::npos);
}

TEST(IdealKeyRate, FrameInvariantWithoutNoise) {
    ChannelConfig c;
    c.distance_km = 20;
    c.device.p_d = 0;
    c.device.e_d = 0;
    double r0 = key_rate_ideal(c).key_rate;
    c.device.beta_b = 25 * kPi / 180;
    double r25 = key_rate_ideal(c).key_rate;
    EXPECT_GT(r0, 0);
    EXPECT_NEAR(r25, r0, 1e-9 * r0);
}

TEST(IdealKeyRate, FrameInvariantWithNoise) {
    ChannelConfig c;
    c.distance_km = 50;
    double r0 = key_rate_ideal(c).key_rate;
    c.device.beta_b = 25 * kPi / 180;
    double r25 = key_rate_ideal(c).key_rate;
    EXPECT_NEAR(r25, r0, 0.02 * r0);
}
