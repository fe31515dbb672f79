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
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "rfimdi/channel.hpp"
#include "rfimdi/io.hpp"
#include "rfimdi/keyrate.hpp"
#include "rfimdi/parallel.hpp"
#include "rfimdi/pso.hpp"
#include "rfimdi/sampling.hpp"

namespace rfimdi {

/// Bad or unknown configuration; the CLI maps it to exit code 2.
class ConfigError : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

/// What a result row was computed with. Asymptotic rows use exact
/// single-photon quantities (infinite data and infinitely many decoys) with
/// the improved protocol's signal setting.
enum class RowKind { Original, Improved, Asymptotic };

inline const char *row_kind_name(RowKind k) {
    switch (k) {
        case RowKind::Original: return "original";
        case RowKind::Improved: return "improved";
        case RowKind::Asymptotic: return "asymptotic";
    }
    return "?";
}

enum class ScanAxis { Distance, NTot, Beta };

inline const char *scan_axis_name(ScanAxis a) {
    switch (a) {
        case ScanAxis::Distance: return "distance_km";
        case ScanAxis::NTot: return "n_tot";
        case ScanAxis::Beta: return "beta_deg";
    }
    return "?";
}

struct RunConfig {
    std::string name = "run";
    DeviceParams device;
    ChernoffVariant variant = ChernoffVariant::Asymmetric;
    IntensityPlan improved_plan;  // mu, nu, omega, pr_mu, pr_nu, pr_omega
    IntensityPlan original_plan;  // nu, omega, pr_nu, pr_omega, pr_z
    bool optimize = false;
    std::vector<RowKind> protocols{RowKind::Improved, RowKind::Original};
    ScanAxis axis = ScanAxis::Distance;
    std::vector<double> distance_km{20};
    std::vector<double> n_tot{1e10};
    std::vector<double> beta_deg{0};
    ObservationMode mode = ObservationMode::ExpectedValue;
    std::uint64_t seed = 1;
    int jobs = 1;
    PsoConfig pso;
    std::optional<double> clock_hz;

    RunConfig() {
        original_plan.pr_nu = 1.0 / 3;
        original_plan.pr_omega = 1.0 / 3;
        original_plan.pr_z = 1.0 / 3;
    }

    const std::vector<double> &axis_values() const {
        switch (axis) {
            case ScanAxis::Distance: return distance_km;
            case ScanAxis::NTot: return n_tot;
            case ScanAxis::Beta: return beta_deg;
        }
        return distance_km;
    }

    void validate() const {
        try {
            device.validate();
        } catch (const std::exception &e) {
            throw ConfigError(e.what());
        }
        if (axis_values().empty()) throw ConfigError(std::string("empty scan list for ") + scan_axis_name(axis));
        auto single = [&](ScanAxis a, const std::vector<double> &v) {
            if (a != axis && v.size() != 1) {
                throw ConfigError(std::string(scan_axis_name(a)) + " must have exactly one value unless it is the scan axis");
            }
        };
        single(ScanAxis::Distance, distance_km);
        single(ScanAxis::NTot, n_tot);
        single(ScanAxis::Beta, beta_deg);
        for (double v : distance_km) {
            if (!(v >= 0)) throw ConfigError("distance_km must be >= 0");
        }
        for (double v : n_tot) {
            if (!(v >= 1 && v <= 9e18)) throw ConfigError("n_tot must lie in [1, 9e18]");
        }
        for (double v : beta_deg) {
            if (!std::isfinite(v)) throw ConfigError("beta_deg must be finite");
        }
        if (protocols.empty()) throw ConfigError("protocol list is empty");
        try {
            improved_plan.validate(Protocol::Improved);
            original_plan.validate(Protocol::Original);
            pso.validate();
        } catch (const std::exception &e) {
            throw ConfigError(e.what());
        }
        if (jobs < 1) throw ConfigError("jobs must be >= 1");
        if (clock_hz && !(*clock_hz > 0)) throw ConfigError("clock_hz must be > 0");
    }
};

// Config text: `key = value` lines, `#` comments, comma-separated lists.

inline std::map<std::string, std::string> parse_key_values(std::istream &in) {
    std::map<std::string, std::string> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
        if (out.count(key)) throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
        out[key] = trim(line.substr(eq + 1));
    }
    return out;
}

inline RunConfig run_config_from(const std::map<std::string, std::string> &kv, RunConfig cfg = {}) {
    auto number = [](const std::string &k, const std::string &v) {
        try {
            return parse_double(v, k);
        } catch (const std::invalid_argument &e) {
            throw ConfigError(e.what());
        }
    };
    auto list = [&](const std::string &k, const std::string &v) {
        std::vector<double> out;
        if (trim(v).empty()) return out;
        for (const auto &item : split(v, ',')) out.push_back(number(k, item));
        return out;
    };
    auto integer = [&](const std::string &k, const std::string &v) {
        double d = number(k, v);
        if (d != std::floor(d) || d < 0 || d > 1.8e19) throw ConfigError(k + ": expected a non-negative integer");
        return d;
    };
    for (const auto &[k, v] : kv) {
        if (k == "name") cfg.name = v;
        else if (k == "eta_d") cfg.device.eta_d = number(k, v);
        else if (k == "p_d") cfg.device.p_d = number(k, v);
        else if (k == "e_d") cfg.device.e_d = number(k, v);
        else if (k == "f_e") cfg.device.f_e = number(k, v);
        else if (k == "epsilon") cfg.device.epsilon = number(k, v);
        else if (k == "alpha") cfg.device.alpha = number(k, v);
        else if (k == "chernoff") {
            if (v == "asymmetric") cfg.variant = ChernoffVariant::Asymmetric;
            else if (v == "symmetric") cfg.variant = ChernoffVariant::Symmetric;
            else throw ConfigError("chernoff: expected asymmetric|symmetric");
        } else if (k == "mu") cfg.improved_plan.mu = number(k, v);
        else if (k == "nu") cfg.improved_plan.nu = cfg.original_plan.nu = number(k, v);
        else if (k == "omega") cfg.improved_plan.omega = cfg.original_plan.omega = number(k, v);
        else if (k == "pr_mu") cfg.improved_plan.pr_mu = number(k, v);
        else if (k == "pr_nu") cfg.improved_plan.pr_nu = number(k, v);
        else if (k == "pr_omega") cfg.improved_plan.pr_omega = number(k, v);
        else if (k == "pr_z") cfg.original_plan.pr_z = number(k, v);
        else if (k == "original_pr_nu") cfg.original_plan.pr_nu = number(k, v);
        else if (k == "original_pr_omega") cfg.original_plan.pr_omega = number(k, v);
        else if (k == "plan") {
            if (v == "fixed") cfg.optimize = false;
            else if (v == "optimize") cfg.optimize = true;
            else throw ConfigError("plan: expected fixed|optimize");
        } else if (k == "protocol") {
            std::vector<RowKind> kinds;
            auto add = [&](RowKind r) {
                if (std::find(kinds.begin(), kinds.end(), r) == kinds.end()) kinds.push_back(r);
            };
            for (const auto &item : split(v, ',')) {
                if (item == "improved") add(RowKind::Improved);
                else if (item == "original") add(RowKind::Original);
                else if (item == "both") {
                    add(RowKind::Improved);
                    add(RowKind::Original);
                } else if (item == "asymptotic") add(RowKind::Asymptotic);
                else throw ConfigError("protocol: unknown value '" + item + "'");
            }
            cfg.protocols = kinds;
        } else if (k == "scan_axis") {
            if (v == "distance_km") cfg.axis = ScanAxis::Distance;
            else if (v == "n_tot") cfg.axis = ScanAxis::NTot;
            else if (v == "beta_deg") cfg.axis = ScanAxis::Beta;
            else throw ConfigError("scan_axis: expected distance_km|n_tot|beta_deg");
        } else if (k == "distance_km") cfg.distance_km = list(k, v);
        else if (k == "n_tot") cfg.n_tot = list(k, v);
        else if (k == "beta_deg") cfg.beta_deg = list(k, v);
        else if (k == "mode") {
            if (v == "expected") cfg.mode = ObservationMode::ExpectedValue;
            else if (v == "sampled") cfg.mode = ObservationMode::Sampled;
            else throw ConfigError("mode: expected expected|sampled");
        } else if (k == "seed") cfg.seed = static_cast<std::uint64_t>(integer(k, v));
        else if (k == "jobs") cfg.jobs = static_cast<int>(integer(k, v));
        else if (k == "clock_hz") cfg.clock_hz = number(k, v);
        else if (k == "pso_swarm") cfg.pso.swarm = static_cast<int>(integer(k, v));
        else if (k == "pso_iterations") cfg.pso.iterations = static_cast<int>(integer(k, v));
        else if (k == "pso_inertia") cfg.pso.inertia = number(k, v);
        else if (k == "pso_cognitive") cfg.pso.cognitive = number(k, v);
        else if (k == "pso_social") cfg.pso.social = number(k, v);
        else if (k == "pso_seed") cfg.pso.seed = static_cast<std::uint64_t>(integer(k, v));
        else throw ConfigError("unknown config key '" + k + "'");
    }
    return cfg;
}

inline RunConfig load_run_config(std::istream &in) {
    auto cfg = run_config_from(parse_key_values(in));
    cfg.validate();
    return cfg;
}

/// One CSV row of a scan.
struct ResultRow {
    double distance_km = 0;
    double n_tot = 0;  // +inf for asymptotic rows
    double beta_deg = 0;
    RowKind kind = RowKind::Improved;
    IntensityPlan plan;
    double y11_lower = 0;
    double c_lower = 0;
    double e11s_upper = 0;
    KeyRateReport report;
    bool infeasible = false;
    std::string diagnostic;
};

/// Everything a single evaluation needs apart from the plan.
struct PointContext {
    DeviceParams device;
    ChernoffVariant variant = ChernoffVariant::Asymmetric;
    double distance_km = 0;
    double n_tot = 0;
    double beta_deg = 0;
    ObservationMode mode = ObservationMode::ExpectedValue;
    std::uint64_t seed = 0;

    DeviceParams device_at_beta() const {
        DeviceParams d = device;
        d.beta_a = 0;
        d.beta_b = beta_deg * kPi / 180;
        return d;
    }
};

inline std::string sanitize(std::string s) {
    for (char &c : s) {
        if (c == ',' || c == '\n' || c == '"') c = ' ';
    }
    return s;
}

inline ResultRow evaluate_point(const PointContext &ctx, RowKind kind, const IntensityPlan &plan) {
    ResultRow row;
    row.distance_km = ctx.distance_km;
    row.n_tot = kind == RowKind::Asymptotic ? std::numeric_limits<double>::infinity() : ctx.n_tot;
    row.beta_deg = ctx.beta_deg;
    row.kind = kind;
    row.plan = plan;
    DeviceParams dev = ctx.device_at_beta();
    std::vector<std::string> notes;

    if (kind == RowKind::Asymptotic) {
        ChannelConfig cfg{dev, ctx.distance_km, plan, Protocol::Improved};
        row.report = key_rate_ideal(cfg);
        row.y11_lower = row.report.y11;
        row.c_lower = row.report.c;
        row.e11s_upper = row.report.e11s;
    } else {
        Protocol protocol = kind == RowKind::Improved ? Protocol::Improved : Protocol::Original;
        ChannelConfig cfg{dev, ctx.distance_km, plan, protocol};
        auto expected = expected_statistics(cfg);
        auto observed = observe(expected, allocate(plan, protocol, ctx.n_tot), ctx.mode, ctx.seed);
        EstimationOptions opt;
        opt.epsilon = dev.epsilon;
        opt.variant = ctx.variant;
        if (protocol == Protocol::Improved) {
            auto est = improved_pipeline(observed, opt);
            row.report = key_rate_improved(est, observed, dev);
            row.y11_lower = est.y11_lower;
            row.c_lower = est.c_lower;
            row.e11s_upper = est.e11S_upper;
            row.infeasible = !est.feasible;
            if (!est.diagnostics.empty()) notes.push_back(std::to_string(est.diagnostics.size()) + " estimator notes");
        } else {
            auto est = original_pipeline(observed, opt);
            row.report = key_rate_original(est, observed, dev);
            row.y11_lower = est.y11_lower.at(kZZ);
            row.c_lower = est.c_lower;
            row.e11s_upper = est.e11_upper.at(kZZ);
            row.infeasible = !est.feasible;
            if (!est.diagnostics.empty()) notes.push_back(std::to_string(est.diagnostics.size()) + " estimator notes");
        }
    }
    if (row.infeasible) {
        row.report.key_rate = 0;
        notes.insert(notes.begin(), "infeasible statistics");
    }
    if (!row.report.diagnostic.empty()) notes.push_back(row.report.diagnostic);
    for (std::size_t i = 0; i < notes.size(); ++i) row.diagnostic += (i ? "; " : "") + notes[i];
    row.diagnostic = sanitize(row.diagnostic);
    return row;
}

/// Plan for a row kind: the fixed plan, or the PSO optimum started from it.
/// Optimization always scores plans in expected-value mode.
inline IntensityPlan choose_plan(const RunConfig &cfg, const PointContext &ctx, RowKind kind) {
    const IntensityPlan &fixed = kind == RowKind::Original ? cfg.original_plan : cfg.improved_plan;
    if (!cfg.optimize) return fixed;
    PointContext scoring = ctx;
    scoring.mode = ObservationMode::ExpectedValue;
    PsoConfig pso = cfg.pso;
    pso.jobs = 1;
    pso.initial = {fixed};
    Protocol space = kind == RowKind::Original ? Protocol::Original : Protocol::Improved;
    auto objective = [&](const IntensityPlan &p) {
        try {
            auto row = evaluate_point(scoring, kind, p);
            return row.report.key_rate;
        } catch (const std::domain_error &) {
            return -1.0;
        }
    };
    return optimize(objective, space, pso, fixed).best_plan;
}

struct ScanResult {
    std::vector<ResultRow> rows;
    bool any_infeasible = false;
};

inline std::vector<PointContext> scan_points(const RunConfig &cfg) {
    std::vector<PointContext> out;
    for (double v : cfg.axis_values()) {
        PointContext c;
        c.device = cfg.device;
        c.variant = cfg.variant;
        c.distance_km = cfg.distance_km.front();
        c.n_tot = cfg.n_tot.front();
        c.beta_deg = cfg.beta_deg.front();
        switch (cfg.axis) {
            case ScanAxis::Distance: c.distance_km = v; break;
            case ScanAxis::NTot: c.n_tot = v; break;
            case ScanAxis::Beta: c.beta_deg = v; break;
        }
        c.mode = cfg.mode;
        out.push_back(c);
    }
    return out;
}

/// Evaluates every (scan point, protocol) pair. Rows come back in scan order
/// with protocols in configuration order, whatever cfg.jobs is.
inline ScanResult run_scan(const RunConfig &cfg) {
    cfg.validate();
    auto points = scan_points(cfg);
    const std::size_t kinds = cfg.protocols.size();
    ScanResult out;
    out.rows.resize(points.size() * kinds);
    parallel_for(out.rows.size(), cfg.jobs, [&](std::size_t task) {
        PointContext ctx = points[task / kinds];
        RowKind kind = cfg.protocols[task % kinds];
        std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed), static_cast<std::uint32_t>(cfg.seed >> 32),
                          static_cast<std::uint32_t>(task)};
        std::uint32_t words[2];
        seq.generate(words, words + 2);
        ctx.seed = (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
        try {
            IntensityPlan plan = choose_plan(cfg, ctx, kind);
            out.rows[task] = evaluate_point(ctx, kind, plan);
        } catch (const std::domain_error &e) {
            ResultRow row;
            row.distance_km = ctx.distance_km;
            row.n_tot = ctx.n_tot;
            row.beta_deg = ctx.beta_deg;
            row.kind = kind;
            row.plan = kind == RowKind::Original ? cfg.original_plan : cfg.improved_plan;
            row.infeasible = true;
            row.diagnostic = sanitize(std::string("numerical failure: ") + e.what());
            out.rows[task] = row;
        }
    });
    for (const auto &r : out.rows) out.any_infeasible = out.any_infeasible || r.infeasible;
    return out;
}

inline void write_results_header(std::ostream &out, bool with_rate_column) {
    out << "L_km,N_tot,beta_deg,protocol,mu,nu,omega,pr_mu,pr_nu,pr_omega,y11_lower,c_lower,e11s_upper,i_ae,key_rate,"
           "diagnostic";
    if (with_rate_column) out << ",bits_per_s";
    out << "\n";
}

/// Original rows report their signal intensity nu under `mu` and pr_z under
/// `pr_mu`.
inline void write_result_row(std::ostream &out, const ResultRow &r, std::optional<double> clock_hz) {
    auto num = [](double v) { return format_number(v, 10); };
    const auto &p = r.plan;
    bool orig = r.kind == RowKind::Original;
    out << num(r.distance_km) << "," << num(r.n_tot) << "," << num(r.beta_deg) << "," << row_kind_name(r.kind) << ","
        << num(orig ? p.nu : p.mu) << "," << num(p.nu) << "," << num(p.omega) << "," << num(orig ? p.pr_z : p.pr_mu)
        << "," << num(p.pr_nu) << "," << num(p.pr_omega) << "," << num(r.y11_lower) << "," << num(r.c_lower) << ","
        << num(r.e11s_upper) << "," << num(r.report.i_ae) << "," << num(r.report.key_rate) << "," << r.diagnostic;
    if (clock_hz) out << "," << num(r.report.key_rate * *clock_hz);
    out << "\n";
}

// Figure presets. Each preset is a list of single-axis runs whose rows are
// concatenated into one CSV.

inline std::vector<double> decades(int from, int to) {
    std::vector<double> out;
    for (int e = from; e <= to; ++e) out.push_back(std::pow(10.0, e));
    return out;
}

inline std::vector<double> linspace_step(double from, double to, double step) {
    std::vector<double> out;
    for (int i = 0; from + i * step <= to + 1e-9; ++i) out.push_back(from + i * step);
    return out;
}

/// Y11 and C versus N_tot at fixed nu = 0.2, omega = 0.05 and equal
/// selection probabilities, L = 10 km.
inline std::vector<RunConfig> preset_fig1() {
    RunConfig c;
    c.name = "fig1";
    c.improved_plan.mu = 0.4;
    c.improved_plan.nu = c.original_plan.nu = 0.2;
    c.improved_plan.omega = c.original_plan.omega = 0.05;
    c.improved_plan.pr_mu = c.improved_plan.pr_nu = c.improved_plan.pr_omega = 0.25;
    c.original_plan.pr_nu = c.original_plan.pr_omega = c.original_plan.pr_z = 1.0 / 3;
    c.protocols = {RowKind::Improved, RowKind::Original};
    c.axis = ScanAxis::NTot;
    c.n_tot = decades(9, 14);
    c.distance_km = {10};
    c.beta_deg = {0};
    RunConfig a = c;
    a.protocols = {RowKind::Asymptotic};
    a.n_tot = {1e14};
    return {c, a};
}

/// Optimized key rate versus distance for three data sizes plus the
/// asymptote, at frame angle `beta_deg`.
inline std::vector<RunConfig> preset_distance(const std::string &name, double beta_deg) {
    std::vector<RunConfig> runs;
    for (double n : {1e10, 1e11, 1e12}) {
        RunConfig c;
        c.name = name;
        c.optimize = true;
        c.axis = ScanAxis::Distance;
        c.distance_km = linspace_step(0, 200, 10);
        c.n_tot = {n};
        c.beta_deg = {beta_deg};
        c.protocols = {RowKind::Improved, RowKind::Original};
        runs.push_back(c);
    }
    RunConfig a = runs.front();
    a.protocols = {RowKind::Asymptotic};
    runs.push_back(a);
    return runs;
}

inline std::vector<RunConfig> preset_fig2() { return preset_distance("fig2", 0); }
inline std::vector<RunConfig> preset_fig3() { return preset_distance("fig3", 25); }

/// Optimized key rate versus N_tot at 20 and 40 km.
inline std::vector<RunConfig> preset_fig4() {
    std::vector<RunConfig> runs;
    for (double l : {20.0, 40.0}) {
        RunConfig c;
        c.name = "fig4";
        c.optimize = true;
        c.axis = ScanAxis::NTot;
        c.n_tot = decades(9, 18);
        c.distance_km = {l};
        c.beta_deg = {0};
        c.protocols = {RowKind::Improved, RowKind::Original};
        runs.push_back(c);
        RunConfig a = c;
        a.protocols = {RowKind::Asymptotic};
        a.n_tot = {1e18};
        runs.push_back(a);
    }
    return runs;
}

inline std::vector<RunConfig> preset(const std::string &name) {
    if (name == "fig1") return preset_fig1();
    if (name == "fig2") return preset_fig2();
    if (name == "fig3") return preset_fig3();
    if (name == "fig4") return preset_fig4();
    throw ConfigError("unknown preset '" + name + "'");
}

}  // namespace rfimdi
