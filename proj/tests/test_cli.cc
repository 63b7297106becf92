// Copyright 2026 The dualtype Authors
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

#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <json.hpp>

#include "cli.h"

namespace fs = std::filesystem;
using dualtype::cli::run_cli;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args) {
    std::ostringstream out, err;
    int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path &p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

class CliTest : public ::testing::Test {
   protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() / ("dualtype_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override {
        fs::remove_all(dir_);
    }
    std::string out(const std::string &sub = "out") const {
        return (dir_ / sub).string();
    }
    fs::path write(const std::string &name, const std::string &text) const {
        std::ofstream(dir_ / name) << text;
        return dir_ / name;
    }
    fs::path dir_;
};

std::string base_config() {
    return slurp(fs::path(DUALTYPE_DATA_DIR) / "experiment.json");
}

}  // namespace

TEST_F(CliTest, plan_prints_carrier_tones) {
    auto r = run({"--out", out(), "plan"});
    ASSERT_EQ(r.code, 0) << r.err;
    auto j = nlohmann::json::parse(slurp(dir_ / "out" / "plan.json"));
    EXPECT_EQ(j["plans"][0]["awg_frequency_hz"].get<double>(), 242e6);
    bool found_f = false;
    for (const auto &p : j["plans"]) {
        if (p["species"] == "F" && p["selection"] == "carrier") {
            EXPECT_EQ(p["awg_frequency_hz"].get<double>(), 230e6);
            found_f = true;
        }
    }
    EXPECT_TRUE(found_f);
    EXPECT_TRUE(fs::exists(dir_ / "out" / "manifest_plan.json"));
}

TEST_F(CliTest, plan_custom_detuning) {
    auto r = run({"--out", out(), "plan", "--species", "S", "--detuning-hz", "2271000"});
    ASSERT_EQ(r.code, 0) << r.err;
    auto j = nlohmann::json::parse(slurp(dir_ / "out" / "plan.json"));
    ASSERT_EQ(j["plans"].size(), 1u);
    EXPECT_NEAR(j["plans"][0]["awg_frequency_hz"].get<double>(), 244.271e6, 1e-6);
}

TEST_F(CliTest, out_of_band_exits_two_and_names_band) {
    auto r = run({"--out", out(), "plan", "--species", "S", "--detuning-hz", "60e6"});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("200"), std::string::npos) << r.err;
    EXPECT_NE(r.err.find("280"), std::string::npos) << r.err;
    EXPECT_FALSE(fs::exists(dir_ / "out" / "plan.json"));
}

TEST_F(CliTest, help_lists_outputs) {
    auto r = run({"--help"});
    EXPECT_EQ(r.code, 0);
    for (const char *name : {"plan.json", "rabi.csv", "spectrum.csv", "readout", "protocol", "chain.json"}) {
        EXPECT_NE(r.out.find(name), std::string::npos) << name;
    }
    auto g = run({"gate", "--help"});
    EXPECT_NE(g.out.find("gate_design.json"), std::string::npos);
    EXPECT_NE(g.out.find("parity.csv"), std::string::npos);
}

TEST_F(CliTest, unknown_subcommand_is_config_error) {
    EXPECT_EQ(run({"teleport"}).code, 1);
    EXPECT_EQ(run({}).code, 1);
}

TEST_F(CliTest, config_errors_name_field) {
    auto text = base_config();
    auto j = nlohmann::json::parse(text);
    j["gate"]["segment_count"] = 30;
    auto path = write("bad.json", j.dump());
    auto r = run({"--config", path.string(), "--out", out(), "gate", "design"});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("gate"), std::string::npos) << r.err;

    auto k = nlohmann::json::parse(text);
    k["modes"][0]["eta"] = {0.1, -0.1};
    r = run({"--config", write("bad2.json", k.dump()).string(), "--out", out(), "rabi"});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("modes[0]"), std::string::npos) << r.err;

    auto u = nlohmann::json::parse(text);
    u["comb"]["colour"] = "green";
    r = run({"--config", write("bad3.json", u.dump()).string(), "--out", out(), "rabi"});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("comb.colour"), std::string::npos) << r.err;

    r = run({"--config", write("bad4.json", "{\n  \"seed\": 1,\n  oops\n}").string(), "--out", out(), "rabi"});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("line 3"), std::string::npos) << r.err;

    r = run({"--config", (dir_ / "missing.json").string(), "rabi"});
    EXPECT_EQ(r.code, 1);
}

TEST_F(CliTest, gate_design_prints_timing) {
    auto r = run({"--out", out(), "gate", "design"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("9.80392"), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("470.157"), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("2.094395102"), std::string::npos) << r.out;
    for (const char *f : {"gate_sequence.json", "gate_design.json", "trajectory_com.csv", "trajectory_rocking.csv"}) {
        EXPECT_TRUE(fs::exists(dir_ / "out" / f)) << f;
    }
}

TEST_F(CliTest, gate_simulate_overrides) {
    auto r = run({"--out", out(), "gate", "simulate", "--shots", "200", "--spin-t2", "1e9", "--motion-t2", "1e9"});
    ASSERT_EQ(r.code, 0) << r.err;
    auto j = nlohmann::json::parse(slurp(dir_ / "out" / "gate_simulation.json"));
    EXPECT_NEAR(j["bell_fidelity"].get<double>(), 1, 1e-6);
    EXPECT_EQ(j["noise"]["shots"].get<int>(), 200);
}

TEST_F(CliTest, readout_correct_from_counts_file) {
    auto counts = write("counts.csv", "state,count\n00',4841\n01',114\n10',166\n11',4879\n");
    auto r = run({"--out", out(), "readout", "correct", "--counts", counts.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    auto j = nlohmann::json::parse(slurp(dir_ / "out" / "readout_corrected.json"));
    EXPECT_EQ(j["shots"].get<int>(), 10000);
    double s = 0;
    for (auto &[k, v] : j["corrected"].items()) s += v.get<double>();
    EXPECT_NEAR(s, 1, 1e-9);
    auto bad = write("bad.csv", "state,count\n22,5\n");
    EXPECT_EQ(run({"--out", out(), "readout", "correct", "--counts", bad.string()}).code, 1);
}

TEST_F(CliTest, readout_fidelity_round_trips_own_data) {
    auto r = run({"--out", out("a"), "readout", "fidelity"});
    ASSERT_EQ(r.code, 0) << r.err;
    auto r2 = run({"--out", out("b"), "readout", "fidelity", "--data", (dir_ / "a" / "bell_data.json").string()});
    ASSERT_EQ(r2.code, 0) << r2.err;
    auto a = nlohmann::json::parse(slurp(dir_ / "a" / "fidelity.json"));
    auto b = nlohmann::json::parse(slurp(dir_ / "b" / "fidelity.json"));
    EXPECT_EQ(a["bell_fidelity"], b["bell_fidelity"]);
}

TEST_F(CliTest, protocol_detect_calibrated) {
    auto r = run({"--out", out(), "protocol", "detect", "--calibrate", "--shots", "1000"});
    ASSERT_EQ(r.code, 0) << r.err;
    auto j = nlohmann::json::parse(slurp(dir_ / "out" / "protocol_report.json"));
    EXPECT_NEAR(j["observables"]["preparation_success"].get<double>(), 0.94, 0.01);
    EXPECT_EQ(j["confusion_shots"].get<int>(), 1000);
    EXPECT_TRUE(fs::exists(dir_ / "out" / "confusion_synthesized.csv"));
}

TEST_F(CliTest, protocol_missing_sequence_dir_is_config_error) {
    auto j = nlohmann::json::parse(base_config());
    j["protocol"]["sequences_dir"] = (dir_ / "nowhere").string();
    auto r = run({"--config", write("c.json", j.dump()).string(), "--out", out(), "protocol", "detect"});
    EXPECT_EQ(r.code, 1);
}

TEST_F(CliTest, chain_report) {
    auto r = run({"--out", out(), "chain", "--charges", "1,2"});
    ASSERT_EQ(r.code, 0) << r.err;
    auto j = nlohmann::json::parse(slurp(dir_ / "out" / "chain.json"));
    EXPECT_NEAR(j["positions_z0_units"][0].get<double>(), -1.526, 5e-4);
    EXPECT_EQ(run({"--out", out(), "chain", "--charges", "1,0"}).code, 2);
}

TEST_F(CliTest, seed_changes_stochastic_outputs) {
    ASSERT_EQ(run({"--out", out("a"), "--seed", "1", "gate", "simulate", "--shots", "300"}).code, 0);
    ASSERT_EQ(run({"--out", out("b"), "--seed", "2", "gate", "simulate", "--shots", "300"}).code, 0);
    EXPECT_NE(slurp(dir_ / "a" / "gate_simulation.json"), slurp(dir_ / "b" / "gate_simulation.json"));
}

TEST_F(CliTest, manifest_checksums_files) {
    ASSERT_EQ(run({"--out", out(), "rabi"}).code, 0);
    auto m = nlohmann::json::parse(slurp(dir_ / "out" / "manifest_rabi.json"));
    EXPECT_EQ(m["command"], "rabi");
    ASSERT_EQ(m["outputs"].size(), 1u);
    EXPECT_EQ(m["outputs"][0]["file"], "rabi.csv");
    EXPECT_EQ(m["outputs"][0]["sha256"].get<std::string>().size(), 64u);
    EXPECT_EQ(m["outputs"][0]["bytes"].get<std::size_t>(), fs::file_size(dir_ / "out" / "rabi.csv"));
}
