// Copyright 2026 The isosim Authors
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

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace {

const std::string kCli = ISOSIM_CLI;
const std::string kDir = ISOSIM_TEST_DIR;

int run(const std::string& args) {
  const int status = std::system((kCli + " " + args + " >/dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t lines(const std::string& text) {
  std::size_t n = 0;
  for (char c : text) n += c == '\n';
  return n;
}

void write(const std::string& path, const std::string& text) { std::ofstream(path) << text; }

}  // namespace

TEST(Cli, PowerSweepWritesOneRowPerPoint) {
  const auto out = kDir + "/cli_power.csv";
  EXPECT_EQ(run("run --netlist lorentz --power -150:-100:1 --freq 4.9e9 --delta 0.09 -o " + out), 0);
  const auto csv = slurp(out);
  EXPECT_EQ(lines(csv), 52u);
  EXPECT_EQ(csv.rfind("f0_hz,pin_dbm,delta,lj_h,t21_mag", 0), 0u);
}

TEST(Cli, MalformedRangeIsAConfigError) {
  EXPECT_EQ(run("run --netlist lorentz --power -100:-150:1"), 2);
  EXPECT_EQ(run("run --netlist lorentz --power -100:-90:0"), 2);
  EXPECT_EQ(run("run --netlist lorentz --freq 4.9 bananas"), 2);
}

TEST(Cli, ConfigFileIsStrict) {
  const auto good = kDir + "/cli_good.json";
  const auto bad = kDir + "/cli_bad.json";
  write(good, R"({"netlist": "lorentz", "freq": "4.9GHz", "power": [-140, -135], "params": {"delta": 0.06}})");
  write(bad, R"({"netlist": "lorentz", "frequency": 4.9e9})");
  EXPECT_EQ(run("run --config " + good + " -o " + kDir + "/cli_cfg.csv"), 0);
  EXPECT_EQ(lines(slurp(kDir + "/cli_cfg.csv")), 3u);
  EXPECT_EQ(run("run --config " + bad), 2);
  EXPECT_EQ(run("run --param bogus=1"), 2);
}

TEST(Cli, FlagsOverrideConfig) {
  const auto cfg = kDir + "/cli_override.json";
  write(cfg, R"({"power": "-140:-130:5"})");
  EXPECT_EQ(run("run --config " + cfg + " --power -140 -o " + kDir + "/cli_override.csv"), 0);
  EXPECT_EQ(lines(slurp(kDir + "/cli_override.csv")), 2u);
}

TEST(Cli, QuantizeSingleValueAndValidation) {
  const auto out = kDir + "/cli_q.csv";
  EXPECT_EQ(run("quantize --lj 8e-9 --lj2 8e-9 -o " + out), 0);
  EXPECT_EQ(lines(slurp(out)), 2u);
  EXPECT_EQ(run("quantize --lj -1e-9:8e-9:1e-9"), 2);
}

TEST(Cli, MissingNetlistFile) {
  EXPECT_EQ(run("validate --netlist " + kDir + "/does_not_exist.json"), 2);
  EXPECT_EQ(run("run --netlist " + kDir + "/does_not_exist.json"), 2);
}

TEST(Cli, NetlistFileRun) {
  const auto path = kDir + "/cli_netlist.json";
  write(path, R"({
    "design_frequency_hz": "5GHz",
    "elements": [
      {"type": "capacitor", "name": "C", "nodes": ["a", "0"], "params": {"c_f": "60fF"}},
      {"type": "tline", "name": "TL", "nodes": ["a", "b"], "params": {"z0_ohm": 50, "delay_s": 1e-10}}
    ],
    "ports": [{"node": "a"}, {"node": "b"}]
  })");
  EXPECT_EQ(run("run --netlist " + path + " --power -100 -o " + kDir + "/cli_file.csv"), 0);
  EXPECT_EQ(run("run --netlist " + path + " --delta 0.09"), 2);
}

TEST(Cli, PlotsAreDeterministic) {
  const auto csv = kDir + "/cli_plot.csv";
  ASSERT_EQ(run("run --netlist lorentz --power -140:-120:5 -o " + csv), 0);
  EXPECT_EQ(run("plot --input " + csv + " --kind isolation_vs_power -o " + kDir + "/p1.svg"), 0);
  EXPECT_EQ(run("plot --input " + csv + " --kind isolation_vs_power -o " + kDir + "/p2.svg"), 0);
  const auto a = slurp(kDir + "/p1.svg");
  EXPECT_FALSE(a.empty());
  EXPECT_EQ(a, slurp(kDir + "/p2.svg"));
  EXPECT_NE(a.find("#0072BD"), std::string::npos);
  EXPECT_NE(a.find("#D95319"), std::string::npos);
  EXPECT_NE(a.find("#EDB120"), std::string::npos);
}

TEST(Cli, PlotSchemaMismatch) {
  const auto csv = kDir + "/cli_bad_schema.csv";
  write(csv, "f0_hz,pin_dbm,t21_mag\n1,2,3\n");
  EXPECT_EQ(run("plot --input " + csv + " --kind isolation_vs_power"), 2);
}

TEST(Cli, ValidateSingleTransmonPasses) {
  const auto path = kDir + "/cli_single.json";
  write(path, R"({
    "design_frequency_hz": 4.9e9,
    "elements": [
      {"type": "capacitor", "name": "CD", "nodes": ["a", "q"], "params": {"c_f": "60fF"}},
      {"type": "capacitor", "name": "CQ", "nodes": ["q", "0"], "params": {"c_f": "63fF"}},
      {"type": "jj", "name": "J", "nodes": ["q", "0"], "params": {"ic_a": 40e-9, "r_series_ohm": 0.5}}
    ],
    "ports": [{"node": "a"}, {"node": "a"}]
  })");
  EXPECT_EQ(run("validate --netlist " + path + " --power -123 --periods 1500 --settle 1000"), 0);
}

TEST(Cli, LooseToleranceFailsTransientCheck) {
  const auto path = kDir + "/cli_single.json";
  EXPECT_EQ(run("validate --netlist " + path + " --power -110 --tol 1e-1 --periods 1500 --settle 1000"), 4);
}
