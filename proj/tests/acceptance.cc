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

// Acceptance checks, one test per criterion. Each test prints a single
// "criterion N: PASS|FAIL" line with the measured values.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include <fmt/format.h>
#include <gtest/gtest.h>

#include "cli.h"
#include "dualtype/chain.h"
#include "dualtype/dynamics.h"
#include "dualtype/freqplan.h"
#include "dualtype/gate.h"
#include "dualtype/protocol.h"
#include "dualtype/readout.h"
#include "oracles.h"

using namespace dualtype;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;

class Stopwatch {
   public:
    double ms() const {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
    }

   private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

/// Prints the verdict line when the test body finishes.
class Verdict {
   public:
    explicit Verdict(int id) : id_(id) {
    }
    ~Verdict() {
        bool ok = !::testing::Test::HasFailure();
        std::string line = fmt::format("criterion {}: {}", id_, ok ? "PASS" : "FAIL");
        for (const auto &n : notes_) line += "; " + n;
        std::cout << line << std::endl;
    }
    template <typename... Args>
    void note(fmt::format_string<Args...> f, Args &&...args) {
        notes_.push_back(fmt::format(f, std::forward<Args>(args)...));
    }

   private:
    int id_;
    std::vector<std::string> notes_;
};

gate::GateSequence calibrated_gate(gate::HeuristicParams p = {}) {
    auto seq = gate::build_heuristic_sequence(p);
    return gate::scale_rabi(seq, gate::calibrate_rabi(seq, kPi / 4));
}

gate::GateSequence random_sequence(std::mt19937_64 &rng) {
    std::uniform_real_distribution<double> u(0, 1);
    gate::GateSequence seq;
    seq.mu_hz = 2.237e6 + 20e3 * (u(rng) - 0.5);
    seq.modes = {{dynamics::ModeLabel::CenterOfMass, 2.271e6, {0.1, 0.1}, 0.3},
                 {dynamics::ModeLabel::Rocking, 2.203e6, {0.1, -0.1}, 0.1}};
    int n = 4 + int(u(rng) * 8);
    for (int k = 0; k < n; k++) {
        seq.segments.push_back({u(rng) < 0.5 ? gate::Target::IonS : gate::Target::IonF, 2e-6 + 10e-6 * u(rng),
                                2 * kPi * u(rng), 2e4 + 1e5 * u(rng), false});
        if (u(rng) < 0.5) seq.segments.push_back({gate::Target::IonS, 2e-6, 0, 0, true});
    }
    return seq;
}

}  // namespace

TEST(acceptance, criterion_01_frequency_plan) {
    Verdict v(1);
    using namespace freqplan;
    Stopwatch sw;
    auto s = solve_awg({{Species::S, 12.642e9, 158}, 240e6, 0, BeatSign::Plus}, 80e6, AomBand::standard());
    auto f = solve_awg({{Species::F, 3.620e9, 45}, 250e6, 0, BeatSign::Minus}, 80e6, AomBand::standard());
    double ms = sw.ms();
    EXPECT_EQ(s.awg_frequency_hz, 242e6);
    EXPECT_EQ(f.awg_frequency_hz, 230e6);
    EXPECT_LT(ms, 1.0);
    v.note("S {} Hz, F {} Hz, {:.4f} ms", s.awg_frequency_hz, f.awg_frequency_hz, ms);
}

TEST(acceptance, criterion_02_comb_coverage) {
    Verdict v(2);
    auto comb = freqplan::CombSpec::make(80e6, 15e-12);
    EXPECT_NEAR(comb.bandwidth_hz(), 66.7e9, 0.1e9);
    EXPECT_TRUE(comb.covers(12.642e9));
    EXPECT_TRUE(comb.covers(3.620e9));
    v.note("bandwidth {:.4f} GHz", comb.bandwidth_hz() / 1e9);
}

TEST(acceptance, criterion_03_gate_timing) {
    Verdict v(3);
    Stopwatch sw;
    auto seq = gate::build_heuristic_sequence({});
    double tau = gate::heuristic_segment_duration(2.271e6, 2.203e6);
    double total = seq.total_duration();
    double arc_com = gate::segment_arc(seq, 0), arc_roc = gate::segment_arc(seq, 1);
    double ms = sw.ms();
    EXPECT_NEAR(tau, 9.809e-6, 0.01e-6);
    EXPECT_NEAR(total, 470.5e-6, 0.2e-6);
    EXPECT_NEAR(arc_com, 2 * kPi / 3, 1e-6);
    EXPECT_NEAR(arc_roc, 2 * kPi / 3, 1e-6);
    EXPECT_LT(ms, 10.0);
    v.note("tau {:.5f} us, T {:.3f} us (target 470.5 +- 0.2), arcs {:.9f} / {:.9f} rad, {:.3f} ms", tau * 1e6, total * 1e6,
           arc_com, arc_roc, ms);
}

TEST(acceptance, criterion_04_gate_closure_and_phase) {
    Verdict v(4);
    Stopwatch sw;
    gate::HeuristicParams p;
    auto seq = calibrated_gate(p);
    double chi = gate::entangling_phase(seq);
    double tau = seq.segments[0].duration_s;
    double bound = 1e-6 * p.eta * seq.segments[0].rabi_rate * tau;
    double worst_alpha = 0;
    for (std::size_t m = 0; m < 2; m++) {
        for (auto a : gate::residual_displacements(seq, m)) worst_alpha = std::max(worst_alpha, std::abs(a));
    }
    std::mt19937_64 rng(20260);
    std::vector<gate::GateSequence> randoms;
    std::vector<std::array<gate::Trajectory, 2>> closed;
    std::vector<double> closed_chi;
    for (int k = 0; k < 20; k++) {
        randoms.push_back(random_sequence(rng));
        closed.push_back({gate::integrate_displacement(randoms.back(), 0, {1, 1}, 0),
                          gate::integrate_displacement(randoms.back(), 1, {1, 1}, 0)});
        closed_chi.push_back(gate::entangling_phase(randoms.back()));
    }
    double ms = sw.ms();

    double worst_rel = 0;
    for (int k = 0; k < 20; k++) {
        for (std::size_t m = 0; m < 2; m++) {
            auto q = oracle::quadrature_displacement(randoms[k], m, {1, 1}, 1e-9);
            double scale = 0;
            for (auto a : q.boundary_alpha) scale = std::max(scale, std::abs(a));
            for (std::size_t j = 0; j < q.boundary_alpha.size(); j++) {
                worst_rel = std::max(worst_rel, std::abs(closed[k][m].samples[j + 1].alpha - q.boundary_alpha[j]) / scale);
            }
        }
        double qchi = oracle::quadrature_chi(randoms[k], 1e-9);
        worst_rel = std::max(worst_rel, std::abs(closed_chi[k] - qchi) / std::abs(qchi));
    }
    EXPECT_LT(worst_alpha, bound);
    EXPECT_NEAR(chi, kPi / 4, 1e-3);
    EXPECT_LT(worst_rel, 1e-8);
    EXPECT_LT(ms, 5000.0);
    v.note("max |alpha(T)| {:.3g} (bound {:.3g}), chi {:.9f}, closed-form vs quadrature {:.3g}, {:.1f} ms", worst_alpha, bound, chi,
           worst_rel, ms);
}

TEST(acceptance, criterion_05_ideal_gate) {
    Verdict v(5);
    auto seq = calibrated_gate();
    auto sim = gate::simulate_gate(seq, 0, gate::NoiseModel{}, gate::default_analysis_phases());
    std::array<double, 4> want = {0.5, 0, 0, 0.5};
    double worst = 0;
    for (int k = 0; k < 4; k++) worst = std::max(worst, std::abs(sim.populations[k] - want[k]));
    EXPECT_LT(worst, 1e-6);
    EXPECT_GE(sim.contrast, 1 - 1e-6);
    v.note("max population error {:.3g}, contrast {:.12f}", worst, sim.contrast);
}

TEST(acceptance, criterion_06_noisy_gate) {
    Verdict v(6);
    Stopwatch sw;
    gate::HeuristicParams p;
    auto seq = calibrated_gate(p);
    seq.modes[0].nbar = 0.3;
    seq.modes[1].nbar = 0.1;
    auto phases = gate::default_analysis_phases();
    auto fidelity = [&](double spin_t2, double motion_t2) {
        return gate::simulate_gate(seq, 0, gate::NoiseModel{spin_t2, motion_t2, 10000, 2026}, phases).fidelity;
    };
    double f = fidelity(2.5e-3, 2e-3);
    std::vector<double> spin = {1e-3, 2.5e-3, 5e-3, 10e-3};
    std::vector<double> motion = {0.5e-3, 2e-3, 4e-3, 8e-3};
    bool monotone = true;
    double last = 0;
    for (double t : spin) {
        double x = fidelity(t, 2e-3);
        monotone &= x >= last;
        last = x;
    }
    last = 0;
    for (double t : motion) {
        double x = fidelity(2.5e-3, t);
        monotone &= x >= last;
        last = x;
    }
    double ms = sw.ms();
    EXPECT_GE(f, 0.60);
    EXPECT_LE(f, 0.80);
    EXPECT_TRUE(monotone);
    EXPECT_LT(ms, 60000.0);
    v.note("fidelity {:.4f} (band [0.60, 0.80]), monotone {}, {:.0f} ms", f, monotone, ms);
}

TEST(acceptance, criterion_07_thermometry) {
    Verdict v(7);
    Stopwatch sw;
    double worst = 0;
    for (double n : {0.05, 0.1, 0.3, 1.0}) {
        dynamics::MotionalMode m{dynamics::ModeLabel::CenterOfMass, 2.271e6, {0.1, 0.1}, n};
        double omega = 2 * kPi * 500e3;
        double t = 0.05 / (0.1 * omega);
        dynamics::DriveParams d{omega, 0, t};
        double red = dynamics::sideband_flip_probability(m, 0, d, dynamics::Sideband::Red, t);
        double blue = dynamics::sideband_flip_probability(m, 0, d, dynamics::Sideband::Blue, t);
        double rel = std::abs(dynamics::estimate_nbar(red, blue) - n) / n;
        worst = std::max(worst, rel);
        EXPECT_LT(rel, 0.02) << n;
    }
    double ms = sw.ms();
    EXPECT_LT(ms, 1000.0);
    v.note("worst relative error {:.3g}, {:.2f} ms", worst, ms);
}

TEST(acceptance, criterion_08_mle_correction) {
    Verdict v(8);
    Stopwatch sw;
    auto m = readout::ConfusionMatrix::reference();
    std::mt19937_64 rng(8);
    std::exponential_distribution<double> e(1.0);
    double worst = 0;
    bool monotone = true;
    for (int k = 0; k < 100; k++) {
        readout::Probabilities p;
        double s = 0;
        for (auto &x : p) s += (x = e(rng));
        for (auto &x : p) x /= s;
        double last = -INFINITY;
        readout::MleOptions opt;
        opt.on_iteration = [&](int, double ll, const readout::Probabilities &) {
            // A few ulps of slack for rounding in the log-likelihood sum.
            monotone &= ll >= last - 4 * 2.3e-16 * std::abs(ll);
            last = ll;
        };
        auto r = readout::mle_correct_detailed(readout::OutcomeDistribution::from_frequencies(m.apply(p)), m, opt);
        for (int j = 0; j < 4; j++) worst = std::max(worst, std::abs(r.p[j] - p[j]));
    }
    double ms = sw.ms();
    EXPECT_LT(worst, 1e-6);
    EXPECT_TRUE(monotone);
    EXPECT_LT(ms, 5000.0);
    v.note("worst component error {:.3g}, monotone {}, {:.0f} ms", worst, monotone, ms);
}

TEST(acceptance, criterion_09_fidelity_formula) {
    Verdict v(9);
    double f = readout::bell_fidelity(0.825, 0.57);
    EXPECT_NEAR(f, 0.6975, 1e-12);
    EXPECT_NEAR(f, 0.70, 0.005);
    v.note("F = {:.6f}", f);
}

TEST(acceptance, criterion_10_chain_equilibrium) {
    Verdict v(10);
    Stopwatch sw;
    auto r = chain::equilibrium_positions({{1, 2}, 1});
    double ms = sw.ms();
    auto exact = oracle::two_ion_positions(1, 2);
    double z0 = std::cbrt(0.25);
    EXPECT_NEAR(r.positions[0], -1.526, 0.005);
    EXPECT_NEAR(r.positions[0], -1.53, 0.005);
    EXPECT_LT(r.residual_force_norm, 1e-10);
    double worst = std::max(std::abs(r.positions[0] - exact[0] / z0), std::abs(r.positions[1] - exact[1] / z0));
    EXPECT_LT(worst, 1e-8);
    EXPECT_LT(ms, 10.0);
    v.note("z1 {:.6f} z0, z2 {:.6f} z0, |grad| {:.3g}, closed form diff {:.3g}, {:.3f} ms", r.positions[0], r.positions[1],
           r.residual_force_norm, worst, ms);
}

TEST(acceptance, criterion_11_protocol) {
    Verdict v(11);
    using namespace protocol;
    Stopwatch sw;
    auto zero = compute_observables(ErrorModel{});
    EXPECT_EQ(zero.f_infidelity_0p, 0);
    EXPECT_EQ(zero.f_infidelity_1p, 0);
    EXPECT_EQ(zero.joint_infidelity_s, 0);
    EXPECT_EQ(zero.joint_infidelity_f, 0);
    EXPECT_EQ(zero.preparation_success, 1);

    auto cal = calibrate_errors();
    auto infidelities = [](const ErrorModel &e) {
        auto o = compute_observables(e);
        return std::array<double, 4>{o.f_infidelity_0p, o.f_infidelity_1p, o.joint_infidelity_s, o.joint_infidelity_f};
    };
    bool monotone = true;
    for (const ErrorModel &base : {ErrorModel{}, cal.errors}) {
        for (int k = 0; k < 7; k++) {
            std::array<double, 4> last{};
            for (int step = 0; step <= 20; step++) {
                ErrorModel e = base;
                double *field[] = {&e.pi411, &e.pi3432_a, &e.pi3432_b, &e.pump976, &e.pump370, &e.crosstalk_s, &e.crosstalk_f};
                *field[k] = 0.005 * step;
                auto now = infidelities(e);
                if (step > 0) {
                    for (int j = 0; j < 4; j++) monotone &= now[j] >= last[j] - 1e-15;
                }
                last = now;
            }
        }
    }
    EXPECT_TRUE(monotone);

    auto r1 = run_detect_f(cal.errors, 1), r3 = run_detect_f(cal.errors, 3), r5 = run_detect_f(cal.errors, 5);
    bool rounds = r3.infidelity_0p <= r1.infidelity_0p && r5.infidelity_0p <= r3.infidelity_0p &&
                  r3.infidelity_1p <= r1.infidelity_1p && r5.infidelity_1p <= r3.infidelity_1p;
    EXPECT_TRUE(rounds);

    CalibrationTargets t;
    auto o = compute_observables(cal.errors);
    std::array<double, 5> got = {o.preparation_success, o.f_infidelity_0p, o.f_infidelity_1p, o.joint_infidelity_s,
                                 o.joint_infidelity_f};
    std::array<double, 5> want = {t.observables.preparation_success, t.observables.f_infidelity_0p, t.observables.f_infidelity_1p,
                                  t.observables.joint_infidelity_s, t.observables.joint_infidelity_f};
    double worst_obs = 0;
    for (int k = 0; k < 5; k++) worst_obs = std::max(worst_obs, std::abs(got[k] - want[k]));
    EXPECT_LE(worst_obs, 0.01);

    auto synth = synthesize_confusion_matrix(cal.errors, 100000, 2026);
    auto ref = readout::ConfusionMatrix::reference();
    double worst_diag = 0;
    for (std::size_t k = 0; k < 4; k++) worst_diag = std::max(worst_diag, std::abs(synth(k, k) - ref(k, k)));
    EXPECT_LE(worst_diag, 0.015);
    double ms = sw.ms();
    EXPECT_LT(ms, 30000.0);
    v.note("monotone {}, rounds {}, observables ({:.2f}, {:.2f}, {:.2f}, {:.2f}, {:.2f})%, worst {:.2f} pp, diagonal worst {:.2f} pp, "
           "{:.0f} ms",
           monotone, rounds, 100 * got[0], 100 * got[1], 100 * got[2], 100 * got[3], 100 * got[4], 100 * worst_obs,
           100 * worst_diag, ms);
}

TEST(acceptance, criterion_12_determinism) {
    Verdict v(12);
    auto root = fs::temp_directory_path() / "dualtype_acceptance_determinism";
    fs::remove_all(root);
    std::vector<std::vector<std::string>> commands = {
        {"plan"}, {"rabi"}, {"spectrum"}, {"gate", "design"}, {"gate", "simulate"}, {"readout", "correct"},
        {"readout", "fidelity"}, {"protocol", "detect", "--calibrate"}, {"chain"}};
    int compared = 0;
    for (const auto &cmd : commands) {
        for (const char *run : {"a", "b"}) {
            std::vector<std::string> args = {"--out", (root / run).string(), "--seed", "77"};
            args.insert(args.end(), cmd.begin(), cmd.end());
            std::ostringstream out, err;
            ASSERT_EQ(dualtype::cli::run_cli(args, out, err), 0) << err.str();
        }
    }
    for (const auto &entry : fs::directory_iterator(root / "a")) {
        auto other = root / "b" / entry.path().filename();
        ASSERT_TRUE(fs::exists(other)) << other;
        std::ifstream a(entry.path(), std::ios::binary), b(other, std::ios::binary);
        std::string sa((std::istreambuf_iterator<char>(a)), {}), sb((std::istreambuf_iterator<char>(b)), {});
        EXPECT_EQ(sa, sb) << entry.path().filename();
        compared++;
    }
    fs::remove_all(root);
    v.note("{} output files byte-identical across two runs", compared);
}
