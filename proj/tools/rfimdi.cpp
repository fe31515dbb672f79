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

// rfimdi: simulate, estimate, scan, optimize and reproduce figure data.
//
//   rfimdi scan --config run.cfg --out rows.csv --jobs 4
//   rfimdi figures --out figdir

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "rfimdi/scan.hpp"

namespace {

using rfimdi::ConfigError;
using rfimdi::RunConfig;

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitConfig = 2;
constexpr int kExitInfeasible = 3;

struct Flags {
    std::string config;
    std::string out;
    std::string summary;
    std::string input;
    std::string preset;
    std::optional<int> jobs;
    std::optional<std::uint64_t> seed;
    std::string mode;
    std::optional<double> clock_hz;
    bool verbose = false;
};

RunConfig load(const Flags &f) {
    RunConfig cfg;
    if (!f.config.empty()) {
        std::ifstream in(f.config);
        if (!in) throw ConfigError("cannot open config '" + f.config + "'");
        cfg = rfimdi::run_config_from(rfimdi::parse_key_values(in));
    }
    if (f.jobs) cfg.jobs = *f.jobs;
    if (f.seed) cfg.seed = *f.seed;
    if (f.clock_hz) cfg.clock_hz = *f.clock_hz;
    if (f.mode == "expected") {
        cfg.mode = rfimdi::ObservationMode::ExpectedValue;
    } else if (f.mode == "sampled") {
        cfg.mode = rfimdi::ObservationMode::Sampled;
    } else if (!f.mode.empty()) {
        throw ConfigError("--mode must be expected or sampled");
    }
    cfg.validate();
    return cfg;
}

nlohmann::json plan_json(const rfimdi::IntensityPlan &p) {
    return {{"mu", p.mu},         {"nu", p.nu},       {"omega", p.omega}, {"pr_mu", p.pr_mu},
            {"pr_nu", p.pr_nu}, {"pr_omega", p.pr_omega}, {"pr_z", p.pr_z}};
}

nlohmann::json config_json(const RunConfig &c) {
    nlohmann::json j;
    j["name"] = c.name;
    const auto &d = c.device;
    j["device"] = {{"eta_d", d.eta_d}, {"p_d", d.p_d},         {"e_d", d.e_d},
                   {"f_e", d.f_e},     {"epsilon", d.epsilon}, {"alpha", d.alpha}};
    j["chernoff"] = c.variant == rfimdi::ChernoffVariant::Asymmetric ? "asymmetric" : "symmetric";
    j["improved_plan"] = plan_json(c.improved_plan);
    j["original_plan"] = plan_json(c.original_plan);
    j["plan"] = c.optimize ? "optimize" : "fixed";
    for (auto k : c.protocols) j["protocol"].push_back(rfimdi::row_kind_name(k));
    j["scan_axis"] = rfimdi::scan_axis_name(c.axis);
    j["distance_km"] = c.distance_km;
    j["n_tot"] = c.n_tot;
    j["beta_deg"] = c.beta_deg;
    j["mode"] = c.mode == rfimdi::ObservationMode::ExpectedValue ? "expected" : "sampled";
    j["seed"] = c.seed;
    j["jobs"] = c.jobs;
    j["pso"] = {{"swarm", c.pso.swarm},       {"iterations", c.pso.iterations}, {"inertia", c.pso.inertia},
                {"cognitive", c.pso.cognitive}, {"social", c.pso.social},         {"seed", c.pso.seed}};
    if (c.clock_hz) j["clock_hz"] = *c.clock_hz;
    return j;
}

std::ostream &open_out(const std::string &path, std::ofstream &file) {
    if (path.empty() || path == "-") return std::cout;
    file.open(path);
    if (!file) throw std::runtime_error("cannot write '" + path + "'");
    return file;
}

void write_summary(const std::string &path, const nlohmann::json &j) {
    if (path.empty()) return;
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write '" + path + "'");
    f << j.dump(2) << "\n";
}

std::string default_summary(const Flags &f) {
    if (!f.summary.empty()) return f.summary;
    if (f.out.empty() || f.out == "-") return "";
    return f.out + ".summary.json";
}

int cmd_scan(const Flags &f) {
    RunConfig cfg = load(f);
    auto result = rfimdi::run_scan(cfg);
    std::ofstream file;
    std::ostream &out = open_out(f.out, file);
    rfimdi::write_results_header(out, cfg.clock_hz.has_value());
    for (const auto &r : result.rows) rfimdi::write_result_row(out, r, cfg.clock_hz);
    nlohmann::json s;
    s["config"] = config_json(cfg);
    s["rows"] = result.rows.size();
    s["any_infeasible"] = result.any_infeasible;
    write_summary(default_summary(f), s);
    return result.any_infeasible ? kExitInfeasible : kExitOk;
}

int cmd_simulate(const Flags &f) {
    RunConfig cfg = load(f);
    std::vector<rfimdi::RowKind> kinds;
    for (auto k : cfg.protocols) {
        if (k != rfimdi::RowKind::Asymptotic) kinds.push_back(k);
    }
    if (kinds.size() != 1) throw ConfigError("simulate needs exactly one of protocol = improved | original");
    auto ctx = rfimdi::scan_points(cfg).front();
    ctx.seed = cfg.seed;
    rfimdi::Protocol protocol =
        kinds[0] == rfimdi::RowKind::Improved ? rfimdi::Protocol::Improved : rfimdi::Protocol::Original;
    const auto &plan = protocol == rfimdi::Protocol::Improved ? cfg.improved_plan : cfg.original_plan;
    rfimdi::ChannelConfig ch{ctx.device_at_beta(), ctx.distance_km, plan, protocol};
    auto expected = rfimdi::expected_statistics(ch);
    auto observed = rfimdi::observe(expected, rfimdi::allocate(plan, protocol, ctx.n_tot), cfg.mode, cfg.seed);
    std::ofstream file;
    rfimdi::write_stat_table(open_out(f.out, file), observed);
    nlohmann::json s;
    s["config"] = config_json(cfg);
    write_summary(default_summary(f), s);
    return kExitOk;
}

int cmd_estimate(const Flags &f) {
    RunConfig cfg = load(f);
    std::ifstream in(f.input);
    if (!in) throw ConfigError("cannot open stat table '" + f.input + "'");
    auto table = rfimdi::read_stat_table(in);
    rfimdi::EstimationOptions opt;
    opt.epsilon = cfg.device.epsilon;
    opt.variant = cfg.variant;
    if (table.kind() == rfimdi::StatTable::Kind::Expected) opt.zero_width = true;
    rfimdi::DeviceParams dev = cfg.device;
    std::ofstream file;
    std::ostream &out = open_out(f.out, file);
    bool feasible = true;
    if (table.protocol() == rfimdi::Protocol::Improved) {
        auto est = rfimdi::improved_pipeline(table, opt);
        out << "protocol = improved\n" << rfimdi::to_text(est, f.verbose);
        out << rfimdi::key_rate_improved(est, table, dev).to_text();
        feasible = est.feasible;
    } else {
        auto est = rfimdi::original_pipeline(table, opt);
        out << "protocol = original\n" << rfimdi::to_text(est);
        out << rfimdi::key_rate_original(est, table, dev).to_text();
        feasible = est.feasible;
    }
    return feasible ? kExitOk : kExitInfeasible;
}

int cmd_optimize(const Flags &f) {
    RunConfig cfg = load(f);
    auto ctx = rfimdi::scan_points(cfg).front();
    ctx.mode = rfimdi::ObservationMode::ExpectedValue;
    nlohmann::json s;
    s["config"] = config_json(cfg);
    std::ofstream file;
    std::ostream &out = open_out(f.out, file);
    out << "protocol,iteration,best_rate\n";
    for (auto kind : cfg.protocols) {
        const auto &fixed = kind == rfimdi::RowKind::Original ? cfg.original_plan : cfg.improved_plan;
        rfimdi::PsoConfig pso = cfg.pso;
        pso.jobs = cfg.jobs;
        pso.initial = {fixed};
        auto objective = [&](const rfimdi::IntensityPlan &p) {
            try {
                return rfimdi::evaluate_point(ctx, kind, p).report.key_rate;
            } catch (const std::domain_error &) {
                return -1.0;
            }
        };
        auto space = kind == rfimdi::RowKind::Original ? rfimdi::Protocol::Original : rfimdi::Protocol::Improved;
        auto res = rfimdi::optimize(objective, space, pso, fixed);
        for (std::size_t i = 0; i < res.trace.size(); ++i) {
            out << rfimdi::row_kind_name(kind) << "," << i << "," << rfimdi::format_number(res.trace[i], 10) << "\n";
        }
        nlohmann::json r;
        r["best_plan"] = plan_json(res.best_plan);
        r["best_key_rate"] = res.best_value;
        r["evaluations"] = res.evaluations;
        s["results"][rfimdi::row_kind_name(kind)] = r;
        std::cerr << rfimdi::row_kind_name(kind) << ": key_rate = " << rfimdi::format_number(res.best_value, 10)
                  << "\n";
    }
    write_summary(default_summary(f), s);
    return kExitOk;
}

int cmd_figures(const Flags &f) {
    std::vector<std::string> names{"fig1", "fig2", "fig3", "fig4"};
    if (!f.preset.empty()) names = {f.preset};
    std::filesystem::path dir = f.out.empty() ? std::filesystem::path(".") : std::filesystem::path(f.out);
    std::filesystem::create_directories(dir);
    bool infeasible = false;
    nlohmann::json s;
    for (const auto &name : names) {
        auto runs = rfimdi::preset(name);
        std::ofstream file(dir / (name + ".csv"));
        if (!file) throw std::runtime_error("cannot write figure output");
        std::optional<double> clock = f.clock_hz;
        rfimdi::write_results_header(file, clock.has_value());
        for (auto cfg : runs) {
            if (f.jobs) cfg.jobs = *f.jobs;
            if (f.seed) cfg.seed = *f.seed;
            if (f.mode == "sampled") cfg.mode = rfimdi::ObservationMode::Sampled;
            auto result = rfimdi::run_scan(cfg);
            for (const auto &r : result.rows) rfimdi::write_result_row(file, r, clock);
            infeasible = infeasible || result.any_infeasible;
            s[name].push_back(config_json(cfg));
        }
        std::cerr << "wrote " << (dir / (name + ".csv")).string() << "\n";
    }
    write_summary((dir / "figures.summary.json").string(), s);
    return infeasible ? kExitInfeasible : kExitOk;
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"Decoy-state estimation and key rates for reference-frame-independent MDI-QKD"};
    app.require_subcommand(1);
    Flags f;
    auto common = [&](CLI::App *sub) {
        sub->add_option("--config", f.config, "Config file (key = value)");
        sub->add_option("--out", f.out, "Output path ('-' for stdout)");
        sub->add_option("--summary", f.summary, "Summary JSON path (default: <out>.summary.json)");
        sub->add_option("--jobs", f.jobs, "Worker threads")->check(CLI::PositiveNumber);
        sub->add_option("--seed", f.seed, "Random seed");
        sub->add_option("--mode", f.mode, "expected | sampled");
        sub->add_option("--clock-hz", f.clock_hz, "Pulse rate; adds a bits_per_s column");
    };
    auto *simulate = app.add_subcommand("simulate", "Emit a StatTable CSV for the first scan point");
    auto *estimate = app.add_subcommand("estimate", "Run one estimation pipeline on a StatTable CSV");
    auto *scan = app.add_subcommand("scan", "Full pipeline over a scan axis");
    auto *opt = app.add_subcommand("optimize", "PSO at the first scan point; writes the convergence trace");
    auto *figures = app.add_subcommand("figures", "Run the figure presets into a directory");
    for (auto *s : {simulate, estimate, scan, opt, figures}) common(s);
    estimate->add_option("--input", f.input, "StatTable CSV")->required();
    estimate->add_flag("--verbose", f.verbose, "List binding constraints of every program");
    figures->add_option("--preset", f.preset, "fig1 | fig2 | fig3 | fig4 (default: all)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }
    try {
        if (*simulate) return cmd_simulate(f);
        if (*estimate) return cmd_estimate(f);
        if (*scan) return cmd_scan(f);
        if (*opt) return cmd_optimize(f);
        if (*figures) return cmd_figures(f);
    } catch (const ConfigError &e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
    return kExitError;
}
