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

#include "dualtype/protocol.h"

#include <fstream>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "oracles.h"

using namespace dualtype;
using namespace dualtype::protocol;

namespace {

ErrorModel to_model(const oracle::PulseErrors &e) {
    ErrorModel m;
    m.pi411 = e.x;
    m.pi3432_a = e.a;
    m.pi3432_b = e.b;
    m.pump976 = e.d;
    m.pump370 = e.p;
    m.crosstalk_s = e.cs;
    m.crosstalk_f = e.cf;
    m.raman355 = e.r;
    return m;
}

oracle::PulseErrors random_errors(std::mt19937_64 &rng) {
    std::uniform_real_distribution<double> u(0, 0.1);
    return {u(rng), u(rng), u(rng), u(rng), u(rng), u(rng), u(rng), u(rng)};
}

std::string read_file(const std::string &path) {
    std::ifstream in(path);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

}  // namespace

TEST(protocol, observables_match_level_oracle) {
    std::mt19937_64 rng(17);
    for (int k = 0; k < 50; k++) {
        auto e = random_errors(rng);
        auto o = compute_observables(to_model(e), 5);
        auto f = oracle::detect_f(e, 5);
        auto j = oracle::detect_joint(e);
        EXPECT_NEAR(o.preparation_success, oracle::prepare_success(e), 1e-13);
        EXPECT_NEAR(o.f_infidelity_0p, f[0], 1e-13);
        EXPECT_NEAR(o.f_infidelity_1p, f[1], 1e-13);
        EXPECT_NEAR(o.joint_infidelity_s, j[0], 1e-13);
        EXPECT_NEAR(o.joint_infidelity_f, j[1], 1e-13);
    }
}

TEST(protocol, exact_confusion_matches_oracle) {
    std::mt19937_64 rng(4);
    auto e = random_errors(rng);
    auto m = joint_confusion_exact(to_model(e));
    for (int s = 0; s < 2; s++) {
        for (int f = 0; f < 2; f++) {
            auto want = oracle::joint(oracle::bright(oracle::exchange(oracle::pure(s ? oracle::S1 : oracle::S0), e)),
                                      oracle::bright(oracle::exchange(oracle::pure(f ? oracle::F1 : oracle::F0), e)), e);
            for (int i = 0; i < 4; i++) EXPECT_NEAR(m(i, 2 * s + f), want[i], 1e-13);
        }
    }
}

TEST(protocol, zero_error_is_perfect) {
    auto o = compute_observables(ErrorModel{});
    EXPECT_EQ(o.preparation_success, 1);
    EXPECT_EQ(o.f_infidelity_0p, 0);
    EXPECT_EQ(o.f_infidelity_1p, 0);
    EXPECT_EQ(o.joint_infidelity_s, 0);
    EXPECT_EQ(o.joint_infidelity_f, 0);
    auto m = joint_confusion_exact(ErrorModel{});
    for (std::size_t i = 0; i < 4; i++)
        for (std::size_t j = 0; j < 4; j++) EXPECT_EQ(m(i, j), i == j ? 1 : 0);
}

TEST(protocol, pulse_semantics) {
    auto s = apply_pulse(LevelState::pure(Level::S0), {PulseKind::Pi411, 0.1});
    EXPECT_NEAR(s[Level::S0], 0.1, 1e-15);
    EXPECT_NEAR(s[Level::D52_F2], 0.9, 1e-15);
    auto p = apply_pulse(LevelState::pure(Level::S1), {PulseKind::Pump370_no935, 0.2});
    EXPECT_NEAR(p[Level::D32], 0.8, 1e-15);
    EXPECT_NEAR(p.bright(), 1, 1e-15);
    auto d = apply_pulse(LevelState::pure(Level::D52_F3), {PulseKind::Pump976, 0});
    EXPECT_EQ(d[Level::S1], 1);
    EXPECT_EQ(apply_pulse(LevelState::pure(Level::F1p), {PulseKind::Detect370, 0})[Level::F1p], 1);
    EXPECT_THROW(apply_pulse(LevelState::pure(Level::S0), {PulseKind::Pi411, -0.1}), DomainError);
}

TEST(protocol, programs_parse_and_match_shipped_files) {
    for (const char *name : {"prepare_sf", "detect_f", "detect_joint"}) {
        auto text = read_file(std::string(DUALTYPE_DATA_DIR) + "/sequences/" + name + ".json");
        ASSERT_FALSE(text.empty()) << name;
        EXPECT_EQ(parse_program(text), builtin_program(name)) << name;
    }
    EXPECT_NO_THROW(builtin_programs().validate());
}

TEST(protocol, program_parser_rejects_bad_input) {
    EXPECT_THROW(parse_program("{\"name\": \"x\", \"ions\": 1, \"steps\": [\"Pi999\"]}"), DomainError);
    EXPECT_THROW(parse_program("{\"name\": \"x\", \"ions\": 1, \"steps\": [{\"pulse\": \"Pi411\", \"ions\": [3]}]}"), DomainError);
    EXPECT_THROW(parse_program("not json"), DomainError);
    auto p = parse_program("{\"name\": \"x\", \"ions\": 2, \"steps\": [{\"repeat\": 3, \"steps\": [\"Pi411\"]}]}");
    ASSERT_EQ(p.steps.size(), 1u);
    EXPECT_EQ(p.steps[0].repeat, 3);
    EXPECT_EQ(p.steps[0].body.size(), 1u);
}

TEST(protocol, custom_program_changes_result) {
    auto programs = builtin_programs();
    // One shelving round instead of five.
    programs.detect_f = parse_program(
        "{\"name\": \"detect_f\", \"ions\": 1, \"steps\": [{\"repeat\": 1, \"steps\": [\"Pi3432\", \"Pi411\", \"Pi3432\", "
        "\"Pump370_no935\"]}, \"Detect370\"]}");
    ErrorModel e;
    e.pi411 = 0.05;
    e.pi3432_a = 0.02;
    auto one = run_program(programs.detect_f, {LevelState::pure(Level::F0p)}, e);
    EXPECT_NEAR(1 - one.bright_probability[0], run_detect_f(e, 1).infidelity_0p, 1e-15);
}

TEST(protocol, f_detection_improves_with_rounds) {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> u(0, 0.03);
    for (int k = 0; k < 20; k++) {
        auto e = to_model({u(rng), u(rng), u(rng), u(rng), u(rng), u(rng), u(rng), u(rng)});
        auto r1 = run_detect_f(e, 1), r3 = run_detect_f(e, 3), r5 = run_detect_f(e, 5);
        EXPECT_LE(r3.infidelity_0p, r1.infidelity_0p + 1e-15);
        EXPECT_LE(r5.infidelity_0p, r3.infidelity_0p + 1e-15);
        EXPECT_LE(r3.infidelity_1p, r1.infidelity_1p + 1e-15);
        EXPECT_LE(r5.infidelity_1p, r3.infidelity_1p + 1e-15);
    }
}

TEST(protocol, synthesized_matrix_converges_to_exact) {
    ErrorModel e;
    e.pi411 = 0.02;
    e.crosstalk_f = 0.04;
    auto exact = joint_confusion_exact(e);
    auto synth = synthesize_confusion_matrix(e, 200000, 5);
    for (std::size_t i = 0; i < 4; i++) {
        for (std::size_t j = 0; j < 4; j++) {
            double p = exact(i, j);
            EXPECT_NEAR(synth(i, j), p, 5 * std::sqrt(p * (1 - p) / 200000) + 1e-12);
        }
    }
    auto again = synthesize_confusion_matrix(e, 200000, 5);
    EXPECT_EQ(synth.entries(), again.entries());
}

TEST(protocol, calibration_keeps_411_largest) {
    auto cal = calibrate_errors();
    ASSERT_TRUE(cal.converged);
    for (double x : {cal.errors.pi3432_a, cal.errors.pi3432_b, cal.errors.pump976, cal.errors.pump370}) {
        EXPECT_LE(x, cal.errors.pi411 + 1e-15);
    }
    auto o = compute_observables(cal.errors);
    EXPECT_NEAR(o.preparation_success, cal.observables.preparation_success, 1e-15);
}

TEST(protocol, names_round_trip) {
    for (auto k : {PulseKind::Pi411, PulseKind::Pi3432_a, PulseKind::Pi3432_b, PulseKind::Pi3432, PulseKind::Pump976,
                   PulseKind::Pump370_no935, PulseKind::Detect370, PulseKind::MicrowavePi, PulseKind::MicrowavePiF,
                   PulseKind::Raman355Pi}) {
        EXPECT_EQ(parse_pulse(pulse_name(k)), k);
    }
    EXPECT_THROW(parse_pulse("Laser"), DomainError);
}

TEST(protocol, large_pump_error_makes_extra_rounds_hurt) {
    // S population left behind by a weak 370 pump is shelved again by the
    // next round and ends dark.
    ErrorModel e;
    e.pi411 = 0.05;
    e.pump370 = 0.5;
    EXPECT_GT(run_detect_f(e, 3).infidelity_0p, run_detect_f(e, 1).infidelity_0p);
}
