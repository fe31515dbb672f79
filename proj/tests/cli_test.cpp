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


#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

fs::path scratch() {
    auto p = fs::temp_directory_path() / ("rfimdi_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(p);
    return p;
}

int run(const std::string &args) {
    std::string cmd = std::string(RFIMDI_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path write(const fs::path &dir, const std::string &name, const std::string &text) {
    auto p = dir / name;
    std::ofstream(p) << text;
    return p;
}

std::string slurp(const fs::path &p) {
    std::ifstream in(p);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

const char *kSmallScan =
    "name = small\n"
    "protocol = both, asymptotic\n"
    "scan_axis = distance_km\n"
    "distance_km = 0, 20\n"
    "n_tot = 1e11\n"
    "# fixed plans keep this fast\n"
    "plan = fixed\n";

}  // namespace

TEST(Cli, UnknownConfigKeyIsConfigError) {
    auto dir = scratch();
    auto cfg = write(dir, "bad.cfg", "distance_km = 10\nwavelength = 1550\n");
    EXPECT_EQ(run("scan --config " + cfg.string() + " --out " + (dir / "o.csv").string()), 2);
}

TEST(Cli, EmptyScanListIsConfigError) {
    auto dir = scratch();
    auto cfg = write(dir, "empty.cfg", "scan_axis = distance_km\ndistance_km =\n");
    EXPECT_EQ(run("scan --config " + cfg.string() + " --out " + (dir / "o.csv").string()), 2);
}

TEST(Cli, UnknownPresetIsConfigError) {
    auto dir = scratch();
    EXPECT_EQ(run("figures --preset fig9 --out " + (dir / "figs").string()), 2);
}

TEST(Cli, BadFlagIsConfigError) { EXPECT_EQ(run("scan --no-such-flag"), 2); }

TEST(Cli, ScanIsReproducible) {
    auto dir = scratch();
    auto cfg = write(dir, "small.cfg", kSmallScan);
    auto a = dir / "a.csv", b = dir / "b.csv";
    ASSERT_EQ(run("scan --config " + cfg.string() + " --out " + a.string()), 0);
    ASSERT_EQ(run("scan --config " + cfg.string() + " --jobs 2 --out " + b.string()), 0);
    auto text = slurp(a);
    EXPECT_EQ(text, slurp(b));
    EXPECT_EQ(text.rfind("L_km,", 0), 0u) << text.substr(0, 80);
    // Header plus 2 distances x 3 row kinds.
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 7);
    EXPECT_TRUE(fs::exists(a.string() + ".summary.json"));
}

TEST(Cli, SimulateThenEstimate) {
    auto dir = scratch();
    auto cfg = write(dir, "one.cfg", "distance_km = 10\nn_tot = 1e12\nprotocol = improved\n");
    auto table = dir / "table.csv";
    auto report = dir / "report.txt";
    ASSERT_EQ(run("simulate --config " + cfg.string() + " --out " + table.string()), 0);
    ASSERT_EQ(run("estimate --config " + cfg.string() + " --input " + table.string() + " --out " + report.string()), 0);
    auto text = slurp(report);
    EXPECT_NE(text.find("protocol = improved"), std::string::npos);
    EXPECT_NE(text.find("key_rate = "), std::string::npos);
}

TEST(Cli, EstimateMissingInputFails) {
    auto dir = scratch();
    EXPECT_NE(run("estimate --input " + (dir / "nope.csv").string()), 0);
}
