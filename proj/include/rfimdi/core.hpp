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
#include <cmath>
#include <compare>
#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace rfimdi {

inline constexpr double kPi = 3.14159265358979323846;

/// Coding basis chosen by one user. `None` is the basis-free vacuum setting of
/// the improved protocol.
enum class Basis : std::uint8_t { X, Y, Z, None };

/// Intensity level. The numeric mean photon number lives in IntensityPlan.
enum class Level : std::uint8_t { Mu, Nu, Omega, Vacuum };

/// Which decoy-state protocol a table / plan belongs to.
///  - Original: every user picks basis Z/X/Y and intensity nu/omega/o
///    independently; (nu, Z) doubles as the key-generating setting.
///  - Improved: Z is paired only with mu, X/Y only with nu/omega, vacuum has
///    no basis.
enum class Protocol : std::uint8_t { Original, Improved };

inline char basis_char(Basis b) {
    switch (b) {
        case Basis::X: return 'X';
        case Basis::Y: return 'Y';
        case Basis::Z: return 'Z';
        case Basis::None: return '-';
    }
    return '?';
}

inline Basis basis_from_char(char c) {
    switch (c) {
        case 'X': return Basis::X;
        case 'Y': return Basis::Y;
        case 'Z': return Basis::Z;
        case '-': return Basis::None;
        default: throw std::invalid_argument(std::string("unknown basis character '") + c + "'");
    }
}

inline const char *level_name(Level l) {
    switch (l) {
        case Level::Mu: return "mu";
        case Level::Nu: return "nu";
        case Level::Omega: return "omega";
        case Level::Vacuum: return "o";
    }
    return "?";
}

inline Level level_from_name(const std::string &s) {
    if (s == "mu") return Level::Mu;
    if (s == "nu") return Level::Nu;
    if (s == "omega") return Level::Omega;
    if (s == "o") return Level::Vacuum;
    throw std::invalid_argument("unknown intensity level '" + s + "'");
}

inline const char *protocol_name(Protocol p) { return p == Protocol::Original ? "original" : "improved"; }

/// An atomic basis pair (Alice's basis, Bob's basis).
struct BasisLabel {
    Basis a;
    Basis b;
    auto operator<=>(const BasisLabel &) const = default;

    std::string str() const { return {basis_char(a), basis_char(b)}; }
    bool is_decoy() const {
        return (a == Basis::X || a == Basis::Y) && (b == Basis::X || b == Basis::Y);
    }
};

inline constexpr BasisLabel kXX{Basis::X, Basis::X};
inline constexpr BasisLabel kXY{Basis::X, Basis::Y};
inline constexpr BasisLabel kYX{Basis::Y, Basis::X};
inline constexpr BasisLabel kYY{Basis::Y, Basis::Y};
inline constexpr BasisLabel kZZ{Basis::Z, Basis::Z};

/// The set B of atomic basis pairs, and its decoy subset D.
inline constexpr std::array<BasisLabel, 5> kAtomicLabels{kXX, kXY, kYX, kYY, kZZ};
inline constexpr std::array<BasisLabel, 4> kDecoyLabels{kXX, kXY, kYX, kYY};

/// The six unordered pairs {d1, d2} of distinct decoy labels.
inline constexpr std::array<std::array<BasisLabel, 2>, 6> kDecoyPairs{{
    {kXX, kXY}, {kXX, kYX}, {kXX, kYY}, {kXY, kYX}, {kXY, kYY}, {kYX, kYY},
}};

/// One user's choice on a single trial.
struct Setting {
    Level level;
    Basis basis;
    auto operator<=>(const Setting &) const = default;
    bool is_vacuum() const { return level == Level::Vacuum; }
};

/// Event class of a trial: both users' settings.
struct CellKey {
    Setting a;
    Setting b;
    auto operator<=>(const CellKey &) const = default;

    BasisLabel label() const { return {a.basis, b.basis}; }
    std::string str() const {
        return std::string(level_name(a.level)) + "," + level_name(b.level) + "|" + label().str();
    }
};

/// Trial count with gain and error yield for one event class.
struct StatCell {
    std::int64_t n = 0;
    double q = 0;  // gain
    double t = 0;  // error yield, 0 <= t <= q
    bool degenerate = false;  // pooled over zero trials

    double gain_events() const { return static_cast<double>(n) * q; }
    double error_events() const { return static_cast<double>(n) * t; }
};

/// Hardware constants of the link.
struct DeviceParams {
    double eta_d = 0.25;     // detector efficiency
    double p_d = 1e-6;       // dark count probability per detector per window
    double e_d = 0.005;      // misalignment error probability
    double f_e = 1.16;       // reconciliation efficiency
    double epsilon = 1e-7;   // estimation failure probability
    double alpha = 0.2;      // fiber loss, dB/km
    double beta_a = 0;       // reference-frame angle of Alice, radians
    double beta_b = 0;       // reference-frame angle of Bob, radians

    /// Relative frame rotation between Bob and Alice.
    double beta() const { return beta_b - beta_a; }

    void validate() const {
        auto prob = [](double v, const char *name) {
            if (!(v >= 0 && v <= 1)) throw std::invalid_argument(std::string(name) + " must lie in [0,1]");
        };
        if (!(eta_d > 0 && eta_d <= 1)) throw std::invalid_argument("eta_d must lie in (0,1]");
        prob(p_d, "p_d");
        prob(e_d, "e_d");
        if (!(f_e >= 1)) throw std::invalid_argument("f_e must be >= 1");
        if (!(epsilon > 0 && epsilon < 1)) throw std::invalid_argument("epsilon must lie in (0,1)");
        if (!(alpha >= 0)) throw std::invalid_argument("alpha must be >= 0");
        if (!std::isfinite(beta_a) || !std::isfinite(beta_b)) throw std::invalid_argument("beta must be finite");
    }
};

/// Source plan, symmetric between the users.
///
/// Improved protocol: each user picks (Z, mu) with pr_mu, (X|Y, nu) with
/// pr_nu, (X|Y, omega) with pr_omega and basis-free vacuum otherwise; X and Y
/// split the decoy group evenly.
///
/// Original protocol: each user picks intensity nu/omega/o with
/// pr_nu/pr_omega/(1 - pr_nu - pr_omega) and, independently, basis Z with
/// pr_z and X, Y with (1 - pr_z)/2 each. mu and pr_mu are unused.
struct IntensityPlan {
    double mu = 0.4;
    double nu = 0.2;
    double omega = 0.05;
    double pr_mu = 0.25;
    double pr_nu = 0.25;
    double pr_omega = 0.25;
    double pr_z = 1.0 / 3.0;

    double intensity(Level l) const {
        switch (l) {
            case Level::Mu: return mu;
            case Level::Nu: return nu;
            case Level::Omega: return omega;
            case Level::Vacuum: return 0;
        }
        return 0;
    }

    double pr_vacuum(Protocol p) const {
        return p == Protocol::Improved ? 1 - pr_mu - pr_nu - pr_omega : 1 - pr_nu - pr_omega;
    }

    /// Probability that one user picks `s` on a trial.
    double setting_probability(Protocol p, Setting s) const {
        if (p == Protocol::Improved) {
            switch (s.level) {
                case Level::Mu: return s.basis == Basis::Z ? pr_mu : 0;
                case Level::Nu: return (s.basis == Basis::X || s.basis == Basis::Y) ? pr_nu / 2 : 0;
                case Level::Omega: return (s.basis == Basis::X || s.basis == Basis::Y) ? pr_omega / 2 : 0;
                case Level::Vacuum: return s.basis == Basis::None ? pr_vacuum(p) : 0;
            }
            return 0;
        }
        double pb = 0;
        switch (s.basis) {
            case Basis::Z: pb = pr_z; break;
            case Basis::X:
            case Basis::Y: pb = (1 - pr_z) / 2; break;
            case Basis::None: return 0;
        }
        switch (s.level) {
            case Level::Mu: return 0;
            case Level::Nu: return pb * pr_nu;
            case Level::Omega: return pb * pr_omega;
            case Level::Vacuum: return pb * pr_vacuum(p);
        }
        return 0;
    }

    /// Every setting a user can choose under the protocol.
    static std::vector<Setting> settings(Protocol p) {
        if (p == Protocol::Improved) {
            return {{Level::Mu, Basis::Z},     {Level::Nu, Basis::X},    {Level::Nu, Basis::Y},
                    {Level::Omega, Basis::X},  {Level::Omega, Basis::Y}, {Level::Vacuum, Basis::None}};
        }
        std::vector<Setting> out;
        for (Basis b : {Basis::Z, Basis::X, Basis::Y}) {
            for (Level l : {Level::Nu, Level::Omega, Level::Vacuum}) out.push_back({l, b});
        }
        return out;
    }

    void validate(Protocol p) const {
        auto prob = [](double v, const char *name) {
            if (!(v >= 0 && v <= 1)) throw std::domain_error(std::string(name) + " must lie in [0,1]");
        };
        if (!(nu > omega && omega > 0)) throw std::domain_error("intensities must satisfy nu > omega > 0");
        prob(pr_nu, "pr_nu");
        prob(pr_omega, "pr_omega");
        if (p == Protocol::Improved) {
            if (!(mu > 0)) throw std::domain_error("mu must be > 0");
            prob(pr_mu, "pr_mu");
        } else {
            prob(pr_z, "pr_z");
        }
        if (pr_vacuum(p) < -1e-12) throw std::domain_error("selection probabilities exceed 1");
    }
};

/// Poisson photon-number distribution of a phase-randomized coherent pulse.
inline double poisson_pmf(double intensity, int k) {
    if (intensity < 0 || k < 0) throw std::domain_error("poisson_pmf: negative intensity or photon count");
    if (k == 0) return std::exp(-intensity);
    if (intensity == 0) return 0;
    return std::exp(k * std::log(intensity) - intensity - std::lgamma(k + 1.0));
}

/// Shannon binary entropy in bits, with 0 log 0 = 0.
inline double binary_entropy(double p) {
    if (!(p >= 0 && p <= 1)) throw std::domain_error("binary_entropy: argument outside [0,1]");
    if (p == 0 || p == 1) return 0;
    return -p * std::log2(p) - (1 - p) * std::log2(1 - p);
}

/// Counts, gains and error yields indexed by event class.
class StatTable {
   public:
    enum class Kind { Expected, Observed };

    StatTable() = default;
    StatTable(Kind kind, Protocol protocol, IntensityPlan plan) : kind_(kind), protocol_(protocol), plan_(plan) {}

    Kind kind() const { return kind_; }
    Protocol protocol() const { return protocol_; }
    const IntensityPlan &plan() const { return plan_; }
    void set_kind(Kind k) { kind_ = k; }

    void set(const CellKey &key, const StatCell &cell) { cells_[key] = cell; }
    bool contains(const CellKey &key) const { return cells_.count(key) != 0; }
    const StatCell &at(const CellKey &key) const {
        auto it = cells_.find(key);
        if (it == cells_.end()) throw std::out_of_range("StatTable: missing cell " + key.str());
        return it->second;
    }
    const std::map<CellKey, StatCell> &cells() const { return cells_; }
    std::size_t size() const { return cells_.size(); }

    /// Event classes that make up the (l, r) cell of the joint label formed by
    /// `labels`. A vacuum-sending user inherits nothing from the label in the
    /// improved protocol; the double-vacuum cell pools every oo class in the
    /// table under either protocol.
    std::vector<CellKey> resolve(Level l, Level r, std::span<const BasisLabel> labels) const {
        std::vector<CellKey> keys;
        if (l == Level::Vacuum && r == Level::Vacuum) {
            for (const auto &[k, c] : cells_) {
                if (k.a.is_vacuum() && k.b.is_vacuum()) keys.push_back(k);
            }
            return keys;
        }
        bool basis_free_vacuum = protocol_ == Protocol::Improved;
        for (const auto &d : labels) {
            Setting sa{l, (l == Level::Vacuum && basis_free_vacuum) ? Basis::None : d.a};
            Setting sb{r, (r == Level::Vacuum && basis_free_vacuum) ? Basis::None : d.b};
            CellKey k{sa, sb};
            if (std::find(keys.begin(), keys.end(), k) == keys.end()) keys.push_back(k);
        }
        return keys;
    }

   private:
    Kind kind_ = Kind::Expected;
    Protocol protocol_ = Protocol::Improved;
    IntensityPlan plan_;
    std::map<CellKey, StatCell> cells_;
};

/// Pools event classes into one cell: counts add, gain and error yield are
/// the count-weighted means. Expected-kind tables carry no meaningful counts,
/// so their classes are weighted by the plan's selection probabilities.
/// Pooling zero weight gives a degenerate empty cell.
inline StatCell pool(const StatTable &table, std::span<const CellKey> keys) {
    StatCell out;
    double weight = 0;
    double gain = 0;
    double error = 0;
    bool by_probability = table.kind() == StatTable::Kind::Expected;
    for (const auto &k : keys) {
        const auto &c = table.at(k);
        out.n += c.n;
        double w = by_probability ? table.plan().setting_probability(table.protocol(), k.a) *
                                        table.plan().setting_probability(table.protocol(), k.b)
                                  : static_cast<double>(c.n);
        weight += w;
        gain += w * c.q;
        error += w * c.t;
    }
    if (weight <= 0) {
        out.degenerate = true;
        return out;
    }
    out.q = gain / weight;
    out.t = error / weight;
    return out;
}

/// Pooled cell for intensity pair (l, r) under the joint label `labels`.
inline StatCell pool(const StatTable &table, std::span<const BasisLabel> labels, Level l, Level r) {
    auto keys = table.resolve(l, r, labels);
    return pool(table, keys);
}

}  // namespace rfimdi
