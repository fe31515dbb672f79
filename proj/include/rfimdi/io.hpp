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

#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "rfimdi/core.hpp"
#include "rfimdi/estimator_improved.hpp"
#include "rfimdi/estimator_original.hpp"

namespace rfimdi {

/// printf-style %.*g.
inline std::string format_number(double v, int digits) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (std::isnan(v)) return "nan";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

inline std::string trim(const std::string &s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split(const std::string &s, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, sep)) out.push_back(trim(item));
    if (!s.empty() && s.back() == sep) out.push_back("");
    return out;
}

inline double parse_double(const std::string &s, const std::string &what) {
    std::size_t used = 0;
    double v = 0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception &) {
        throw std::invalid_argument(what + ": not a number '" + s + "'");
    }
    if (used != s.size()) throw std::invalid_argument(what + ": not a number '" + s + "'");
    return v;
}

// StatTable CSV:
//   # kind = expected|observed
//   # protocol = improved|original
//   # mu = ... (one line per plan field)
//   intensity_a,intensity_b,basis_label,n,q,t
//   nu,o,X-,1000000,1.2e-05,6e-06

inline void write_stat_table(std::ostream &out, const StatTable &table) {
    out << "# kind = " << (table.kind() == StatTable::Kind::Expected ? "expected" : "observed") << "\n";
    out << "# protocol = " << protocol_name(table.protocol()) << "\n";
    const auto &p = table.plan();
    const std::pair<const char *, double> fields[] = {{"mu", p.mu},         {"nu", p.nu},     {"omega", p.omega},
                                                      {"pr_mu", p.pr_mu},   {"pr_nu", p.pr_nu}, {"pr_omega", p.pr_omega},
                                                      {"pr_z", p.pr_z}};
    for (const auto &[k, v] : fields) out << "# " << k << " = " << format_number(v, 17) << "\n";
    out << "intensity_a,intensity_b,basis_label,n,q,t\n";
    for (const auto &[key, c] : table.cells()) {
        out << level_name(key.a.level) << "," << level_name(key.b.level) << "," << key.label().str() << "," << c.n
            << "," << format_number(c.q, 17) << "," << format_number(c.t, 17) << "\n";
    }
}

inline StatTable read_stat_table(std::istream &in) {
    std::map<std::string, std::string> meta;
    std::string line;
    bool header = false;
    StatTable table;
    bool built = false;
    auto build = [&] {
        Protocol protocol = Protocol::Improved;
        if (meta.count("protocol")) {
            if (meta["protocol"] == "original") {
                protocol = Protocol::Original;
            } else if (meta["protocol"] != "improved") {
                throw std::invalid_argument("stat table: unknown protocol '" + meta["protocol"] + "'");
            }
        }
        auto kind = meta.count("kind") && meta["kind"] == "expected" ? StatTable::Kind::Expected
                                                                    : StatTable::Kind::Observed;
        IntensityPlan p;
        auto get = [&](const char *k, double &dst) {
            if (meta.count(k)) dst = parse_double(meta[k], std::string("stat table ") + k);
        };
        get("mu", p.mu);
        get("nu", p.nu);
        get("omega", p.omega);
        get("pr_mu", p.pr_mu);
        get("pr_nu", p.pr_nu);
        get("pr_omega", p.pr_omega);
        get("pr_z", p.pr_z);
        table = StatTable(kind, protocol, p);
        built = true;
    };
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty()) continue;
        if (line[0] == '#') {
            auto eq = line.find('=');
            if (eq != std::string::npos) meta[trim(line.substr(1, eq - 1))] = trim(line.substr(eq + 1));
            continue;
        }
        if (!header) {
            if (line != "intensity_a,intensity_b,basis_label,n,q,t") {
                throw std::invalid_argument("stat table: unexpected header '" + line + "'");
            }
            header = true;
            build();
            continue;
        }
        auto f = split(line, ',');
        if (f.size() != 6 || f[2].size() != 2) throw std::invalid_argument("stat table: malformed row '" + line + "'");
        CellKey key{{level_from_name(f[0]), basis_from_char(f[2][0])}, {level_from_name(f[1]), basis_from_char(f[2][1])}};
        StatCell c;
        c.n = std::stoll(f[3]);
        c.q = parse_double(f[4], "stat table q");
        c.t = parse_double(f[5], "stat table t");
        if (c.n < 0 || c.q < 0 || c.t < 0 || c.t > c.q + 1e-15 || c.q > 1) {
            throw std::invalid_argument("stat table: out-of-range values in row '" + line + "'");
        }
        table.set(key, c);
    }
    if (!built) throw std::invalid_argument("stat table: missing header");
    return table;
}

/// Flat key-value reports of the estimator outputs.
inline std::string to_text(const OriginalEstimates &e) {
    std::ostringstream out;
    for (const auto &d : kAtomicLabels) {
        out << "y11_lower." << d.str() << " = " << format_number(e.y11_lower.at(d), 10) << "\n";
        out << "e_upper.nu." << d.str() << " = " << format_number(e.e_upper.at(d)[0], 10) << "\n";
        out << "e_upper.omega." << d.str() << " = " << format_number(e.e_upper.at(d)[1], 10) << "\n";
        out << "e11_upper." << d.str() << " = " << format_number(e.e11_upper.at(d), 10) << "\n";
    }
    out << "c_lower = " << format_number(e.c_lower, 10) << "\n";
    out << "feasible = " << (e.feasible ? "true" : "false") << "\n";
    for (const auto &d : e.diagnostics) out << "diagnostic = " << d << "\n";
    return out.str();
}

inline std::string to_text(const ImprovedEstimates &e, bool verbose = false) {
    std::ostringstream out;
    out << "y11_lower = " << format_number(e.y11_lower, 10) << "\n";
    for (const auto &d : kDecoyLabels) {
        out << "e_upper.nu." << d.str() << " = " << format_number(e.e_upper_single.at(d)[0], 10) << "\n";
        out << "e_upper.omega." << d.str() << " = " << format_number(e.e_upper_single.at(d)[1], 10) << "\n";
    }
    for (std::size_t k = 0; k < kDecoyPairs.size(); ++k) {
        std::string name = kDecoyPairs[k][0].str() + "+" + kDecoyPairs[k][1].str();
        out << "e_upper.nu." << name << " = " << format_number(e.e_upper_pair[k][0], 10) << "\n";
        out << "e_upper.omega." << name << " = " << format_number(e.e_upper_pair[k][1], 10) << "\n";
    }
    out << "e_upper.nu.D = " << format_number(e.e_upper_joint[0], 10) << "\n";
    out << "e_upper.omega.D = " << format_number(e.e_upper_joint[1], 10) << "\n";
    out << "e_upper.mu.ZZ = " << format_number(e.e_upper_signal, 10) << "\n";
    out << "e11S_upper = " << format_number(e.e11S_upper, 10) << "\n";
    out << "c_lower = " << format_number(e.c_lower, 10) << "\n";
    out << "feasible = " << (e.feasible ? "true" : "false") << "\n";
    for (const auto &d : e.diagnostics) out << "diagnostic = " << d << "\n";
    if (verbose) {
        for (const auto &[prog, names] : e.binding) {
            out << "binding." << prog << " =";
            for (const auto &n : names) out << " " << n;
            out << "\n";
        }
    }
    return out.str();
}

}  // namespace rfimdi
