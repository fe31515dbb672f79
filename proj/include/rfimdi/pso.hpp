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
#include <functional>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "rfimdi/core.hpp"
#include "rfimdi/parallel.hpp"

namespace rfimdi {

struct PsoConfig {
    int swarm = 40;
    int iterations = 200;
    double inertia = 0.72;
    double cognitive = 1.49;
    double social = 1.49;
    std::uint64_t seed = 1;
    int jobs = 1;
    /// Plans placed at the front of the initial swarm.
    std::vector<IntensityPlan> initial;

    void validate() const {
        if (swarm < 2) throw std::invalid_argument("pso: swarm must be >= 2");
        if (iterations < 1) throw std::invalid_argument("pso: iterations must be >= 1");
        if (!(inertia >= 0 && cognitive >= 0 && social >= 0)) {
            throw std::invalid_argument("pso: coefficients must be non-negative");
        }
    }
};

struct OptimizationResult {
    IntensityPlan best_plan;
    double best_value = -std::numeric_limits<double>::infinity();
    std::vector<double> trace;  // global best after each iteration
    std::int64_t evaluations = 0;
};

/// Coordinates searched for each protocol.
///   improved: (mu, nu, omega, pr_mu, pr_nu, pr_omega)
///   original: (nu, omega, pr_z, pr_nu, pr_omega)
class PlanSpace {
   public:
    static constexpr double kMinIntensity = 1e-4;
    static constexpr double kMinOmega = 1e-5;
    static constexpr double kMinProbability = 1e-3;
    static constexpr double kMaxProbabilitySum = 1 - 1e-3;

    explicit PlanSpace(Protocol p) : protocol_(p) {}

    std::size_t dim() const { return protocol_ == Protocol::Improved ? 6 : 5; }

    double lower(std::size_t i) const {
        std::size_t omega = protocol_ == Protocol::Improved ? 2 : 1;
        if (i == omega) return kMinOmega;
        return i < omega ? kMinIntensity : kMinProbability;
    }
    double upper(std::size_t i) const {
        if (protocol_ == Protocol::Original && i == 2) return 1 - kMinProbability;  // pr_z
        return 1.0;
    }

    IntensityPlan to_plan(const std::vector<double> &x, IntensityPlan base = {}) const {
        if (protocol_ == Protocol::Improved) {
            base.mu = x[0];
            base.nu = x[1];
            base.omega = x[2];
            base.pr_mu = x[3];
            base.pr_nu = x[4];
            base.pr_omega = x[5];
        } else {
            base.nu = x[0];
            base.omega = x[1];
            base.pr_z = x[2];
            base.pr_nu = x[3];
            base.pr_omega = x[4];
        }
        return base;
    }

    std::vector<double> from_plan(const IntensityPlan &p) const {
        if (protocol_ == Protocol::Improved) return {p.mu, p.nu, p.omega, p.pr_mu, p.pr_nu, p.pr_omega};
        return {p.nu, p.omega, p.pr_z, p.pr_nu, p.pr_omega};
    }

    /// Projects a point into the feasible region: box clamp, omega < nu by
    /// swapping (or shrinking omega on a tie), and selection probabilities
    /// rescaled so that their sum leaves room for vacuum.
    void repair(std::vector<double> &x) const {
        for (std::size_t i = 0; i < dim(); ++i) x[i] = std::clamp(x[i], lower(i), upper(i));
        std::size_t nu = protocol_ == Protocol::Improved ? 1 : 0;
        std::size_t omega = nu + 1;
        if (x[omega] > x[nu]) std::swap(x[omega], x[nu]);
        x[nu] = std::max(x[nu], kMinIntensity);
        if (x[omega] >= x[nu]) x[omega] = x[nu] / 2;
        x[omega] = std::max(x[omega], kMinOmega);

        std::vector<std::size_t> probs;
        if (protocol_ == Protocol::Improved) {
            probs = {3, 4, 5};
        } else {
            probs = {3, 4};
        }
        double sum = 0;
        for (auto i : probs) sum += x[i];
        if (sum > kMaxProbabilitySum) {
            for (auto i : probs) x[i] *= kMaxProbabilitySum / sum;
        }
    }

   private:
    Protocol protocol_;
};

/// Particle swarm maximization of `objective` over the plan space of the
/// protocol. Random numbers are drawn serially from one mt19937_64 stream and
/// the global best is reduced in particle order, so the result does not
/// depend on cfg.jobs.
inline OptimizationResult optimize(const std::function<double(const IntensityPlan &)> &objective, Protocol protocol,
                                   const PsoConfig &cfg, const IntensityPlan &base = {}) {
    cfg.validate();
    PlanSpace space(protocol);
    const std::size_t dim = space.dim();
    const std::size_t n = static_cast<std::size_t>(cfg.swarm);
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    std::vector<std::vector<double>> pos(n, std::vector<double>(dim)), vel = pos;
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t i = 0; i < dim; ++i) {
            double lo = space.lower(i), hi = space.upper(i);
            pos[k][i] = lo + (hi - lo) * unit(rng);
            vel[k][i] = (hi - lo) * (unit(rng) - 0.5) * 0.2;
        }
        if (k < cfg.initial.size()) pos[k] = space.from_plan(cfg.initial[k]);
        space.repair(pos[k]);
    }

    auto score = [&](const std::vector<double> &x) {
        double v = objective(space.to_plan(x, base));
        return std::isnan(v) ? -std::numeric_limits<double>::infinity() : v;
    };

    OptimizationResult out;
    std::vector<double> value(n);
    auto evaluate_all = [&] {
        parallel_for(n, cfg.jobs, [&](std::size_t k) { value[k] = score(pos[k]); });
        out.evaluations += static_cast<std::int64_t>(n);
    };

    evaluate_all();
    std::vector<std::vector<double>> best_pos = pos;
    std::vector<double> best_val = value;
    std::vector<double> global = pos[0];
    double global_val = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < n; ++k) {
        if (value[k] > global_val) {
            global_val = value[k];
            global = pos[k];
        }
    }

    for (int it = 0; it < cfg.iterations; ++it) {
        for (std::size_t k = 0; k < n; ++k) {
            for (std::size_t i = 0; i < dim; ++i) {
                double width = space.upper(i) - space.lower(i);
                double r1 = unit(rng), r2 = unit(rng);
                double v = cfg.inertia * vel[k][i] + cfg.cognitive * r1 * (best_pos[k][i] - pos[k][i]) +
                           cfg.social * r2 * (global[i] - pos[k][i]);
                vel[k][i] = std::clamp(v, -width, width);
                pos[k][i] += vel[k][i];
            }
            space.repair(pos[k]);
        }
        evaluate_all();
        for (std::size_t k = 0; k < n; ++k) {
            if (value[k] > best_val[k]) {
                best_val[k] = value[k];
                best_pos[k] = pos[k];
            }
            if (value[k] > global_val) {
                global_val = value[k];
                global = pos[k];
            }
        }
        out.trace.push_back(global_val);
    }
    out.best_plan = space.to_plan(global, base);
    out.best_value = global_val;
    return out;
}

}  // namespace rfimdi
