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
#include <cstdio>
#include <stdexcept>
#include <string>

#include "rfimdi/channel.hpp"
#include "rfimdi/estimator_improved.hpp"
#include "rfimdi/estimator_original.hpp"

namespace rfimdi {

struct UV {
    double u = 0;
    double v = 0;
    bool v_clamped = false;
};

/// u = min(sqrt(c/2)/(1-e), 1), v = sqrt(c/2 - (1-e)^2 u^2)/e.
///
/// v := 0 at e = 0. When u saturates and c/2 > (1-e)^2 + e^2, v exceeds 1
/// and is capped at 1 (v_clamped is set) so that H2((1+v)/2) stays defined.
inline UV compute_uv(double c, double e) {
    if (!(c >= 0 && c <= 4 + 1e-12)) throw std::domain_error("compute_uv: c outside [0,4]");
    if (!(e >= 0 && e <= 1)) throw std::domain_error("compute_uv: e outside [0,1]");
    UV out;
    double half = c / 2;
    out.u = e < 1 ? std::min(std::sqrt(half) / (1 - e), 1.0) : 1.0;
    double rad = half - (1 - e) * (1 - e) * out.u * out.u;
    if (rad < -1e-12) throw std::domain_error("compute_uv: negative radicand");
    rad = std::max(rad, 0.0);
    if (e == 0) return out;
    out.v = std::sqrt(rad) / e;
    if (out.v > 1) {
        out.v = 1;
        out.v_clamped = true;
    }
    return out;
}

/// (1-e) H2((1+u)/2) + e H2((1+v)/2).
inline double information_leakage(double c, double e) {
    auto uv = compute_uv(c, e);
    double a = binary_entropy((1 + uv.u) / 2);
    double b = e > 0 ? binary_entropy((1 + uv.v) / 2) : 0;
    return (1 - e) * a + e * b;
}

struct KeyRateReport {
    double r = 0;         // bits per trial before clamping
    double key_rate = 0;  // max(r, 0)
    double i_ae = 1;
    double u = 0;
    double v = 0;
    double e11s = 0;
    double y11 = 0;
    double c = 0;
    double q_signal = 0;
    double t_signal = 0;
    double pr_signal = 0;
    double p1p1 = 0;  // single-photon fraction of the signal pair
    std::string diagnostic;

    /// Flat "key = value" lines.
    std::string to_text() const {
        std::string s;
        auto line = [&](const char *k, double v) {
            char buf[64];
            std::snprintf(buf, sizeof buf, "%.10g", v);
            s += std::string(k) + " = " + buf + "\n";
        };
        line("r", r);
        line("key_rate", key_rate);
        line("i_ae", i_ae);
        line("u", u);
        line("v", v);
        line("e11s", e11s);
        line("y11", y11);
        line("c", c);
        line("q_signal", q_signal);
        line("t_signal", t_signal);
        line("pr_signal", pr_signal);
        line("p1p1", p1p1);
        if (!diagnostic.empty()) s += "diagnostic = " + diagnostic + "\n";
        return s;
    }
};

/// R = Pr p1 p1' { Y11 [1 - I_AE(C, e)] - Q f_e H2(T/Q) }; the single-photon
/// fraction multiplies both terms.
inline KeyRateReport key_rate_from(double pr_signal, double intensity, double y11, double c, double e11s,
                                   double q, double t, const DeviceParams &dev) {
    KeyRateReport rep;
    rep.pr_signal = pr_signal;
    rep.p1p1 = poisson_pmf(intensity, 1) * poisson_pmf(intensity, 1);
    rep.y11 = y11;
    rep.c = std::clamp(c, 0.0, 4.0);
    rep.e11s = std::clamp(e11s, 0.0, 1.0);
    rep.q_signal = q;
    rep.t_signal = t;
    if (!(y11 > 0)) {
        rep.diagnostic = "zero single-photon yield";
        return rep;
    }
    if (!(q > 0)) {
        rep.diagnostic = "zero signal gain";
        return rep;
    }
    auto uv = compute_uv(rep.c, rep.e11s);
    rep.u = uv.u;
    rep.v = uv.v;
    if (uv.v_clamped) rep.diagnostic = "v capped at 1";
    rep.i_ae = information_leakage(rep.c, rep.e11s);
    double ec = q * dev.f_e * binary_entropy(std::clamp(t / q, 0.0, 1.0));
    rep.r = pr_signal * rep.p1p1 * (y11 * (1 - rep.i_ae) - ec);
    rep.key_rate = std::max(rep.r, 0.0);
    return rep;
}

/// Signal event class: (mu, Z) on both sides in the improved protocol,
/// (nu, Z) in the original one.
inline CellKey signal_key(Protocol p) {
    Level l = p == Protocol::Improved ? Level::Mu : Level::Nu;
    return {{l, Basis::Z}, {l, Basis::Z}};
}

inline double signal_probability(const IntensityPlan &plan, Protocol p) {
    auto k = signal_key(p);
    return plan.setting_probability(p, k.a) * plan.setting_probability(p, k.b);
}

inline KeyRateReport key_rate_improved(const ImprovedEstimates &est, const StatTable &observed,
                                       const DeviceParams &dev) {
    const auto &plan = observed.plan();
    const auto &cell = observed.at(signal_key(Protocol::Improved));
    return key_rate_from(signal_probability(plan, Protocol::Improved), plan.mu, est.y11_lower, est.c_lower,
                         est.e11S_upper, cell.q, cell.t, dev);
}

inline KeyRateReport key_rate_original(const OriginalEstimates &est, const StatTable &observed,
                                       const DeviceParams &dev) {
    const auto &plan = observed.plan();
    const auto &cell = observed.at(signal_key(Protocol::Original));
    return key_rate_from(signal_probability(plan, Protocol::Original), plan.nu, est.y11_lower.at(kZZ), est.c_lower,
                         est.e11_upper.at(kZZ), cell.q, cell.t, dev);
}

/// Rate with every single-photon quantity known exactly (infinite data and
/// infinitely many decoys): Y11 and e11 of ZZ and C from the Fock engine.
/// Exact error rates above 1/2 are anticorrelations and count in full here;
/// only upper bounds get clamped at 1/2.
inline KeyRateReport key_rate_ideal(const ChannelConfig &cfg) {
    auto truth = single_photon_truth(cfg);
    double c = 0;
    for (const auto &d : kDecoyLabels) c += std::pow(1 - 2 * truth.e11.at(d), 2);
    auto key = signal_key(cfg.protocol);
    auto cell = channel_detail::coherent_cell(cfg, key);
    double intensity = cfg.plan.intensity(key.a.level);
    return key_rate_from(signal_probability(cfg.plan, cfg.protocol), intensity, truth.y11_by_label.at(kZZ), c,
                         truth.e11.at(kZZ), cell.q, cell.t, cfg.device);
}

}  // namespace rfimdi
