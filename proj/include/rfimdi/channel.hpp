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

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <random>
#include <stdexcept>
#include <vector>

#include "rfimdi/core.hpp"
#include "rfimdi/fock.hpp"

// Symmetric polarization-encoded MDI link: Alice and Bob each send a
// phase-randomized weak coherent pulse through half of the fiber to a relay
// that interferes them on a 50/50 beam splitter, splits each output port with
// a polarizing beam splitter and watches four threshold detectors
// (cH, cV, dH, dV). A trial succeeds when exactly two detectors click in one
// of the Bell patterns:
//   psi-minus: {cH, dV} or {cV, dH}
//   psi-plus:  {cH, cV} or {dH, dV}
// Detector efficiency is folded into the arm transmittance. Misalignment e_d
// flips the correctness of each successful event independently.

namespace rfimdi {

struct ChannelConfig {
    DeviceParams device;
    double distance_km = 0;  // total Alice-Bob fiber length
    IntensityPlan plan;
    Protocol protocol = Protocol::Improved;

    /// Fiber transmittance of one arm (half the distance).
    double arm_transmittance() const { return std::pow(10.0, -device.alpha * (distance_km / 2) / 10); }
    /// Photon survival probability from one source to a click: fiber times detector.
    double arm_efficiency() const { return arm_transmittance() * device.eta_d; }

    void validate() const {
        device.validate();
        if (!(distance_km >= 0)) throw std::invalid_argument("distance_km must be >= 0");
    }
};

/// Single-photon-pair yields and conditional bit error rates per basis label.
struct SinglePhotonTruth {
    double y11 = 0;  // mean over the decoy labels
    std::map<BasisLabel, double> y11_by_label;
    std::map<BasisLabel, double> e11;

    double y11_min() const {
        double m = 1;
        for (const auto &[d, y] : y11_by_label) m = std::min(m, y);
        return m;
    }
};

namespace channel_detail {

using Complex = std::complex<double>;
using Jones = std::array<Complex, 2>;

enum class Outcome { Fail, PsiMinus, PsiPlus };

inline constexpr int kPhaseNodes = 64;

/// Polarization of one encoded bit. X and Y sit on the equator of the
/// Poincare sphere and are rotated by the user's frame angle; Z is H/V.
inline Jones encode(Basis basis, int bit, double frame) {
    const double r = 1 / std::sqrt(2.0);
    switch (basis) {
        case Basis::Z: return bit == 0 ? Jones{1.0, 0.0} : Jones{0.0, 1.0};
        case Basis::X: return {r, std::polar(r, frame + bit * kPi)};
        case Basis::Y: return {r, std::polar(r, frame + kPi / 2 + bit * kPi)};
        case Basis::None: return {0.0, 0.0};
    }
    return {0.0, 0.0};
}

/// Bit relation announced for a Bell outcome: true when the successful event
/// counts as an error. A vacuum-sending user's random bit is read in the other
/// user's basis.
inline bool is_error(Basis a, Basis b, int bit_a, int bit_b, Outcome o) {
    if (a == Basis::None) a = b;
    if (b == Basis::None) b = a;
    bool same = bit_a == bit_b;
    if (a == Basis::Z && b == Basis::Z) return same;  // both Bell states flip
    return o == Outcome::PsiMinus ? same : !same;
}

/// Outcome probabilities given per-detector click probabilities (cH, cV, dH, dV).
inline std::pair<double, double> bell_probabilities(const std::array<double, 4> &click) {
    std::array<double, 4> idle{1 - click[0], 1 - click[1], 1 - click[2], 1 - click[3]};
    double minus = click[0] * idle[1] * idle[2] * click[3] + idle[0] * click[1] * click[2] * idle[3];
    double plus = click[0] * click[1] * idle[2] * idle[3] + idle[0] * idle[1] * click[2] * click[3];
    return {minus, plus};
}

inline Outcome classify(const std::array<bool, 4> &c) {
    int n = c[0] + c[1] + c[2] + c[3];
    if (n != 2) return Outcome::Fail;
    if ((c[0] && c[3]) || (c[1] && c[2])) return Outcome::PsiMinus;
    if ((c[0] && c[1]) || (c[2] && c[3])) return Outcome::PsiPlus;
    return Outcome::Fail;
}

/// Mean photon numbers at (cH, cV, dH, dV) for coherent inputs with the given
/// complex polarization amplitudes.
inline std::array<double, 4> port_intensities(const Jones &a, const Jones &b) {
    return {std::norm(a[0] + b[0]) / 2, std::norm(a[1] + b[1]) / 2, std::norm(a[0] - b[0]) / 2,
            std::norm(a[1] - b[1]) / 2};
}

struct GainError {
    double q = 0;
    double t = 0;
};

inline GainError apply_misalignment(GainError g, double e_d) {
    g.t = (1 - e_d) * g.t + e_d * (g.q - g.t);
    return g;
}

/// Phase-averaged gain and error yield of one event class. Click statistics
/// depend only on the relative phase of the two pulses, so the double average
/// over independent global phases reduces to one periodic integral, done with
/// the trapezoid rule (spectrally accurate for this analytic integrand).
inline GainError coherent_cell(const ChannelConfig &cfg, const CellKey &key) {
    const auto &dev = cfg.device;
    const double eta = cfg.arm_efficiency();
    const double amp_a = std::sqrt(cfg.plan.intensity(key.a.level) * eta);
    const double amp_b = std::sqrt(cfg.plan.intensity(key.b.level) * eta);
    static const auto nodes = [] {
        std::array<Complex, kPhaseNodes> z{};
        for (int k = 0; k < kPhaseNodes; ++k) z[k] = std::polar(1.0, 2 * kPi * k / kPhaseNodes);
        return z;
    }();

    GainError acc;
    for (int bit_a = 0; bit_a < 2; ++bit_a) {
        for (int bit_b = 0; bit_b < 2; ++bit_b) {
            Jones ja = encode(key.a.basis, bit_a, dev.beta_a);
            Jones jb = encode(key.b.basis, bit_b, dev.beta_b);
            Jones b{amp_b * jb[0], amp_b * jb[1]};
            double pm = 0;
            double pp = 0;
            for (const Complex &phase : nodes) {
                Jones a{amp_a * ja[0] * phase, amp_a * ja[1] * phase};
                auto inten = port_intensities(a, b);
                std::array<double, 4> click;
                for (int i = 0; i < 4; ++i) click[i] = 1 - (1 - dev.p_d) * std::exp(-inten[i]);
                auto [m, p] = bell_probabilities(click);
                pm += m;
                pp += p;
            }
            pm /= kPhaseNodes;
            pp /= kPhaseNodes;
            acc.q += (pm + pp) / 4;
            double err = 0;
            if (is_error(key.a.basis, key.b.basis, bit_a, bit_b, Outcome::PsiMinus)) err += pm;
            if (is_error(key.a.basis, key.b.basis, bit_a, bit_b, Outcome::PsiPlus)) err += pp;
            acc.t += err / 4;
        }
    }
    return apply_misalignment(acc, dev.e_d);
}

/// Beam splitter on (aH, aV, bH, bV) -> (cH, cV, dH, dV).
inline std::array<std::array<Complex, 4>, 4> beam_splitter() {
    const double r = 1 / std::sqrt(2.0);
    std::array<std::array<Complex, 4>, 4> u{};
    for (int pol = 0; pol < 2; ++pol) {
        u[0 + pol][0 + pol] = r;   // c <- a
        u[0 + pol][2 + pol] = r;   // c <- b
        u[2 + pol][0 + pol] = r;   // d <- a
        u[2 + pol][2 + pol] = -r;  // d <- b
    }
    return u;
}

}  // namespace channel_detail

/// Expected gains and error yields of every event class of the protocol. The
/// returned table has kind Expected and zero counts.
inline StatTable expected_statistics(const ChannelConfig &cfg) {
    cfg.validate();
    StatTable table(StatTable::Kind::Expected, cfg.protocol, cfg.plan);
    auto settings = IntensityPlan::settings(cfg.protocol);
    for (const auto &sa : settings) {
        for (const auto &sb : settings) {
            CellKey key{sa, sb};
            auto ge = channel_detail::coherent_cell(cfg, key);
            table.set(key, StatCell{0, ge.q, ge.t});
        }
    }
    return table;
}

/// Exact single-photon-pair statistics on the truncated two-photon Fock space
/// of the four BSM modes. Loss is a mixture over which photons survive; dark
/// counts enter through the threshold-detector POVM.
inline SinglePhotonTruth single_photon_truth(const ChannelConfig &cfg) {
    using namespace channel_detail;
    cfg.validate();
    static const fock::TruncatedSpace<4, 2> space;
    static const auto unitary = space.induced_unitary(beam_splitter());
    const auto &dev = cfg.device;
    const double eta = cfg.arm_efficiency();

    // Input state of the surviving photons.
    auto input = [&](const Jones &ja, const Jones &jb, bool keep_a, bool keep_b) {
        std::vector<Complex> v(space.dim(), Complex{});
        if (keep_a && keep_b) {
            for (int i = 0; i < 2; ++i) {
                for (int j = 0; j < 2; ++j) {
                    std::array<int, 4> occ{};
                    ++occ[i];
                    ++occ[2 + j];
                    v[space.index(occ)] += ja[i] * jb[j];
                }
            }
        } else if (keep_a || keep_b) {
            const Jones &jj = keep_a ? ja : jb;
            for (int i = 0; i < 2; ++i) {
                std::array<int, 4> occ{};
                ++occ[(keep_a ? 0 : 2) + i];
                v[space.index(occ)] += jj[i];
            }
        } else {
            v[space.index({0, 0, 0, 0})] = 1;
        }
        return v;
    };

    SinglePhotonTruth out;
    const std::array<std::pair<bool, bool>, 4> survival{{{true, true}, {true, false}, {false, true}, {false, false}}};
    const std::array<double, 4> weight{eta * eta, eta * (1 - eta), (1 - eta) * eta, (1 - eta) * (1 - eta)};
    double decoy_sum = 0;
    for (const auto &label : kAtomicLabels) {
        GainError acc;
        for (int bit_a = 0; bit_a < 2; ++bit_a) {
            for (int bit_b = 0; bit_b < 2; ++bit_b) {
                Jones ja = encode(label.a, bit_a, dev.beta_a);
                Jones jb = encode(label.b, bit_b, dev.beta_b);
                double pm = 0;
                double pp = 0;
                for (std::size_t s = 0; s < survival.size(); ++s) {
                    auto out_state = space.apply(unitary, input(ja, jb, survival[s].first, survival[s].second));
                    for (std::size_t k = 0; k < space.dim(); ++k) {
                        double prob = std::norm(out_state[k]);
                        if (prob == 0) continue;
                        const auto &occ = space.state(k);
                        std::array<double, 4> click;
                        for (int i = 0; i < 4; ++i) click[i] = occ[i] > 0 ? 1.0 : dev.p_d;
                        auto [m, p] = bell_probabilities(click);
                        pm += weight[s] * prob * m;
                        pp += weight[s] * prob * p;
                    }
                }
                acc.q += (pm + pp) / 4;
                double err = 0;
                if (is_error(label.a, label.b, bit_a, bit_b, Outcome::PsiMinus)) err += pm;
                if (is_error(label.a, label.b, bit_a, bit_b, Outcome::PsiPlus)) err += pp;
                acc.t += err / 4;
            }
        }
        acc = apply_misalignment(acc, dev.e_d);
        out.y11_by_label[label] = acc.q;
        out.e11[label] = acc.q > 0 ? acc.t / acc.q : 0.0;
        if (label.is_decoy()) decoy_sum += acc.q;
    }
    out.y11 = decoy_sum / 4;
    return out;
}

/// Monte Carlo sampling of the same physical model: independent uniform
/// global phases, uniform bits, sampled clicks and sampled misalignment flips.
/// Each event class draws from its own stream seeded by (seed, class index).
inline StatTable mc_oracle(const ChannelConfig &cfg, std::int64_t trials, std::uint64_t seed) {
    using namespace channel_detail;
    cfg.validate();
    if (trials < 1) throw std::invalid_argument("mc_oracle: trials must be >= 1");
    const auto &dev = cfg.device;
    const double eta = cfg.arm_efficiency();
    StatTable table(StatTable::Kind::Observed, cfg.protocol, cfg.plan);
    auto settings = IntensityPlan::settings(cfg.protocol);
    std::uint64_t index = 0;
    for (const auto &sa : settings) {
        for (const auto &sb : settings) {
            CellKey key{sa, sb};
            std::seed_seq seq{seed & 0xffffffffu, seed >> 32, index++};
            std::mt19937_64 rng(seq);
            std::uniform_real_distribution<double> uni(0.0, 1.0);
            const double amp_a = std::sqrt(cfg.plan.intensity(sa.level) * eta);
            const double amp_b = std::sqrt(cfg.plan.intensity(sb.level) * eta);
            std::int64_t success = 0;
            std::int64_t errors = 0;
            for (std::int64_t k = 0; k < trials; ++k) {
                int bit_a = uni(rng) < 0.5 ? 0 : 1;
                int bit_b = uni(rng) < 0.5 ? 0 : 1;
                Complex pa = std::polar(amp_a, 2 * kPi * uni(rng));
                Complex pb = std::polar(amp_b, 2 * kPi * uni(rng));
                Jones ja = encode(sa.basis, bit_a, dev.beta_a);
                Jones jb = encode(sb.basis, bit_b, dev.beta_b);
                auto inten = port_intensities({pa * ja[0], pa * ja[1]}, {pb * jb[0], pb * jb[1]});
                std::array<bool, 4> clicks;
                for (int i = 0; i < 4; ++i) clicks[i] = uni(rng) >= (1 - dev.p_d) * std::exp(-inten[i]);
                Outcome o = classify(clicks);
                if (o == Outcome::Fail) continue;
                ++success;
                bool err = is_error(sa.basis, sb.basis, bit_a, bit_b, o);
                if (uni(rng) < dev.e_d) err = !err;
                if (err) ++errors;
            }
            double n = static_cast<double>(trials);
            table.set(key, StatCell{trials, static_cast<double>(success) / n, static_cast<double>(errors) / n});
        }
    }
    return table;
}

}  // namespace rfimdi
