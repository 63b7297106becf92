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

#include "dualtype/gate.h"

#include <bit>
#include <cmath>
#include <numbers>
#include <ostream>
#include <random>

#include <Eigen/Dense>
#include <fmt/format.h>
#include <json.hpp>

#include "dualtype/readout.h"
#include "dualtype/seeding.h"

namespace dualtype::gate {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr Complex kI{0, 1};

double sinc(double x) {
    return x == 0 ? 1.0 : std::sin(x) / x;
}

/// ∫_{t0}^{t0+τ} e^{iδt} dt.
Complex phase_integral(double delta, double t0, double tau) {
    return tau * std::polar(1.0, delta * (t0 + 0.5 * tau)) * sinc(0.5 * delta * tau);
}

/// Im ∫∫_{t′<t} e^{iδ(t−t′)} over a segment of length τ: (δτ − sin δτ)/δ².
double self_area(double delta, double tau) {
    double x = delta * tau;
    if (std::abs(x) < 1e-2) {
        double x2 = x * x;
        return tau * tau * x * (1.0 / 6 - x2 / 120 + x2 * x2 / 5040);
    }
    return tau * tau * (x - std::sin(x)) / (x * x);
}

double eta_of(const dynamics::MotionalMode &mode, Target target) {
    return mode.eta[static_cast<std::size_t>(target)];
}

struct ModeResult {
    std::array<Complex, 2> residual;
    double chi;
};

/// One pass over the sequence for one mode: per-ion residuals and the
/// cross-ion phase.
ModeResult mode_pass(const GateSequence &seq, std::size_t m, double offset) {
    const auto &mode = seq.modes[m];
    double delta = seq.mode_detuning(m) + offset;
    std::array<Complex, 2> sums{};
    double chi = 0;
    double t = 0;
    for (const auto &s : seq.segments) {
        if (!s.is_gap && s.rabi_rate != 0) {
            Complex g = 0.5 * eta_of(mode, s.target) * s.rabi_rate * std::polar(1.0, s.phase_rad) *
                        phase_integral(delta, t, s.duration_s);
            std::size_t me = static_cast<std::size_t>(s.target);
            chi += std::imag(g * std::conj(sums[1 - me]));
            sums[me] += g;
        }
        t += s.duration_s;
    }
    // α = −i Σ G.
    return {{-kI * sums[0], -kI * sums[1]}, chi};
}

void check_mode_index(const GateSequence &seq, std::size_t m) {
    if (m >= seq.modes.size()) {
        throw DomainError("mode index out of range");
    }
}

using Matrix4 = Eigen::Matrix4cd;

int spin_of_bit(std::size_t index, int ion) {
    // Bit for the S ion is the high bit.
    std::size_t bit = ion == 0 ? (index >> 1) & 1 : index & 1;
    return bit ? -1 : 1;
}

/// ⟨z|x⟩ for two qubits: H ⊗ H.
Matrix4 hadamard2() {
    Matrix4 h;
    for (int i = 0; i < 4; i++) {
        for (int j = 0; j < 4; j++) {
            h(i, j) = std::popcount(unsigned(i & j)) % 2 ? -0.5 : 0.5;
        }
    }
    return h;
}

Matrix4 analysis_pulse(double phi) {
    Eigen::Matrix2cd r;
    double a = 1 / std::sqrt(2.0);
    r << a, -kI * a * std::polar(1.0, -phi), -kI * a * std::polar(1.0, phi), a;
    Matrix4 out;
    for (int i = 0; i < 4; i++) {
        for (int j = 0; j < 4; j++) {
            out(i, j) = r(i >> 1, j >> 1) * r(i & 1, j & 1);
        }
    }
    return out;
}

}  // namespace

std::string_view target_name(Target target) {
    return target == Target::IonS ? "IonS" : "IonF";
}

Target parse_target(std::string_view name) {
    if (name == "IonS" || name == "S") {
        return Target::IonS;
    }
    if (name == "IonF" || name == "F") {
        return Target::IonF;
    }
    throw DomainError("unknown segment target '" + std::string(name) + "'");
}

void GateSequence::validate() const {
    if (segments.empty()) {
        throw DomainError("gate sequence has no segments");
    }
    if (modes.empty()) {
        throw DomainError("gate sequence has no motional modes");
    }
    for (const auto &m : modes) {
        m.validate();
        if (m.eta.size() != 2) {
            throw DomainError("gate modes need one eta per ion (two ions)");
        }
    }
    if (!std::isfinite(mu_hz)) {
        throw DomainError("gate detuning must be finite");
    }
    for (std::size_t k = 0; k < segments.size(); k++) {
        const auto &s = segments[k];
        if (!(s.duration_s > 0) || !std::isfinite(s.duration_s)) {
            throw DomainError(fmt::format("segment {}: duration must be positive", k));
        }
        if (s.is_gap && s.rabi_rate != 0) {
            throw DomainError(fmt::format("segment {}: gaps carry no drive", k));
        }
        if (!std::isfinite(s.phase_rad) || !std::isfinite(s.rabi_rate)) {
            throw DomainError(fmt::format("segment {}: phase and Rabi rate must be finite", k));
        }
    }
}

double GateSequence::total_duration() const {
    double t = 0;
    for (const auto &s : segments) {
        t += s.duration_s;
    }
    return t;
}

std::vector<double> GateSequence::start_times() const {
    std::vector<double> out;
    out.reserve(segments.size());
    double t = 0;
    for (const auto &s : segments) {
        out.push_back(t);
        t += s.duration_s;
    }
    return out;
}

double GateSequence::mode_detuning(std::size_t mode_index) const {
    return 2 * kPi * (mu_hz - modes.at(mode_index).frequency_hz);
}

std::size_t GateSequence::drive_segment_count() const {
    std::size_t n = 0;
    for (const auto &s : segments) {
        n += s.is_gap ? 0 : 1;
    }
    return n;
}

double heuristic_segment_duration(double com_frequency_hz, double rocking_frequency_hz) {
    double split = com_frequency_hz - rocking_frequency_hz;
    if (split == 0) {
        throw DegenerateModes("center-of-mass and rocking frequencies coincide");
    }
    return 4 * kPi / (3 * 2 * kPi * std::abs(split));
}

GateSequence build_heuristic_sequence(const HeuristicParams &p) {
    if (!(p.com_frequency_hz > 0) || !(p.rocking_frequency_hz > 0)) {
        throw DomainError("mode frequencies must be positive");
    }
    double tau = heuristic_segment_duration(p.com_frequency_hz, p.rocking_frequency_hz);
    if (p.edge_length < 1) {
        throw DomainError("edge length must be at least 1");
    }
    int block_len = 4 * p.edge_length;
    if (p.segment_count % block_len != 0 || p.segment_count / block_len < 2) {
        throw DomainError(fmt::format(
            "segment count {} must be a multiple of 4 x edge length ({}) with at least two blocks", p.segment_count, block_len));
    }
    if (p.relocated_segments < 0 || p.relocated_segments >= p.edge_length) {
        throw DomainError("relocated segment count must lie in [0, edge length)");
    }
    if (!(p.gap_s >= 0)) {
        throw DomainError("gap duration must be non-negative");
    }
    if (!(p.rabi_rate_s >= 0) || !(p.rabi_rate_f >= 0)) {
        throw DomainError("Rabi rates must be non-negative");
    }
    if (p.orientation != 1 && p.orientation != -1) {
        throw DomainError("orientation must be +1 or -1");
    }

    GateSequence seq;
    seq.mu_hz = 0.5 * (p.com_frequency_hz + p.rocking_frequency_hz);
    seq.modes = {
        {dynamics::ModeLabel::CenterOfMass, p.com_frequency_hz, {p.eta, p.eta}, p.nbar_com},
        {dynamics::ModeLabel::Rocking, p.rocking_frequency_hz, {p.eta, -p.eta}, p.nbar_rocking},
    };
    for (const auto &m : seq.modes) {
        m.validate();
    }
    double d_com = seq.mode_detuning(0);
    double d_roc = seq.mode_detuning(1);

    // Edge index of each position inside one block.
    std::vector<int> edges;
    for (int k = p.relocated_segments; k < p.edge_length; k++) {
        edges.push_back(0);
    }
    for (int e = 1; e < 4; e++) {
        for (int k = 0; k < p.edge_length; k++) {
            edges.push_back(e);
        }
    }
    for (int k = 0; k < p.relocated_segments; k++) {
        edges.push_back(0);
    }

    int blocks = p.segment_count / block_len;
    double step = tau + p.gap_s;
    double block_duration = block_len * step;
    double t = 0;
    for (int b = 0; b < blocks; b++) {
        double block_phase = b * (2 * kPi / blocks - (d_roc - d_com) * block_duration);
        for (int e : edges) {
            Target target = e % 2 == 0 ? Target::IonS : Target::IonF;
            double phase = p.orientation * e * kPi / 2 - d_com * t + block_phase;
            double rabi = target == Target::IonS ? p.rabi_rate_s : p.rabi_rate_f;
            if (!seq.segments.empty() && p.gap_s > 0) {
                seq.segments.push_back({target, p.gap_s, 0, 0, true});
            }
            seq.segments.push_back({target, tau, std::remainder(phase, 2 * kPi), rabi, false});
            t += step;
        }
    }
    return seq;
}

double segment_arc(const GateSequence &seq, std::size_t mode_index) {
    check_mode_index(seq, mode_index);
    for (const auto &s : seq.segments) {
        if (!s.is_gap) {
            return std::abs(seq.mode_detuning(mode_index)) * s.duration_s;
        }
    }
    throw DomainError("sequence has no drive segments");
}

Trajectory integrate_displacement(
    const GateSequence &seq, std::size_t mode_index, std::array<int, 2> spins, int samples_per_segment, double offset) {
    seq.validate();
    check_mode_index(seq, mode_index);
    if (samples_per_segment < 0) {
        throw DomainError("samples per segment must be non-negative");
    }
    const auto &mode = seq.modes[mode_index];
    double delta = seq.mode_detuning(mode_index) + offset;

    Trajectory out;
    out.mode_label = mode.label;
    out.samples.push_back({0, 0});
    Complex alpha = 0;
    double phase = 0;
    double t = 0;
    for (const auto &s : seq.segments) {
        if (!s.is_gap && s.rabi_rate != 0) {
            int spin = spins[static_cast<std::size_t>(s.target)];
            Complex k = -0.5 * kI * double(spin) * eta_of(mode, s.target) * s.rabi_rate * std::polar(1.0, s.phase_rad);
            for (int q = 1; q <= samples_per_segment; q++) {
                double u = s.duration_s * q / (samples_per_segment + 1);
                out.samples.push_back({t + u, alpha + k * phase_integral(delta, t, u)});
            }
            Complex chord = k * phase_integral(delta, t, s.duration_s);
            phase += std::imag(std::conj(alpha) * chord) + std::norm(k) * self_area(delta, s.duration_s);
            alpha += chord;
        }
        t += s.duration_s;
        out.samples.push_back({t, alpha});
    }
    out.final_displacement = alpha;
    out.geometric_phase = phase;
    return out;
}

std::vector<TrajectorySample> rotating_frame(std::span<const TrajectorySample> samples, double detuning_rad_s) {
    std::vector<TrajectorySample> out;
    out.reserve(samples.size());
    for (const auto &s : samples) {
        out.push_back({s.time_s, std::polar(1.0, -detuning_rad_s * s.time_s) * s.alpha});
    }
    return out;
}

double mean_abs_displacement(const Trajectory &trajectory) {
    const auto &s = trajectory.samples;
    if (s.size() < 2) {
        return 0;
    }
    double area = 0;
    for (std::size_t k = 1; k < s.size(); k++) {
        area += 0.5 * (std::abs(s[k].alpha) + std::abs(s[k - 1].alpha)) * (s[k].time_s - s[k - 1].time_s);
    }
    double span = s.back().time_s - s.front().time_s;
    return span > 0 ? area / span : 0;
}

std::array<Complex, 2> residual_displacements(const GateSequence &seq, std::size_t mode_index, double offset) {
    seq.validate();
    check_mode_index(seq, mode_index);
    return mode_pass(seq, mode_index, offset).residual;
}

double entangling_phase(const GateSequence &seq, double offset) {
    seq.validate();
    double chi = 0;
    for (std::size_t m = 0; m < seq.modes.size(); m++) {
        chi += mode_pass(seq, m, offset).chi;
    }
    return chi;
}

double calibrate_rabi(const GateSequence &seq, double target_chi) {
    double chi = entangling_phase(seq);
    if (chi == 0 || !std::isfinite(chi)) {
        throw Uncalibratable("sequence produces no entangling phase at unit amplitude");
    }
    double ratio = target_chi / chi;
    if (!(ratio > 0)) {
        throw Uncalibratable(fmt::format(
            "target phase {} has the opposite sign of the sequence phase {}; amplitude scaling cannot reach it", target_chi, chi));
    }
    return std::sqrt(ratio);
}

GateSequence scale_rabi(const GateSequence &seq, double scale) {
    if (!(scale >= 0) || !std::isfinite(scale)) {
        throw DomainError("Rabi scale must be finite and non-negative");
    }
    GateSequence out = seq;
    for (auto &s : out.segments) {
        s.rabi_rate *= scale;
    }
    return out;
}

void NoiseModel::validate() const {
    if (!(spin_coherence_time_s > 0) || !(motional_coherence_time_s > 0)) {
        throw DomainError("coherence times must be positive");
    }
    if (shots < 1) {
        throw DomainError("noise model needs at least one shot");
    }
}

std::vector<double> default_analysis_phases(int count) {
    if (count < 4) {
        throw DomainError("parity scan needs at least four analysis phases");
    }
    std::vector<double> out(count);
    for (int k = 0; k < count; k++) {
        out[k] = kPi * k / count;
    }
    return out;
}

GateSimulation simulate_gate(
    const GateSequence &seq, std::size_t initial_state, const NoiseModel &noise, std::span<const double> analysis_phases) {
    seq.validate();
    noise.validate();
    if (initial_state >= 4) {
        throw DomainError("initial state index must be in 0..3");
    }
    double duration = seq.total_duration();
    double sigma_spin = std::sqrt(2.0) * duration / noise.spin_coherence_time_s;
    double sigma_trap = std::sqrt(2.0) / noise.motional_coherence_time_s;

    // Initial amplitudes in the σx eigenbasis (index bit 0 ↔ +1).
    std::array<Complex, 4> c{};
    for (std::size_t x = 0; x < 4; x++) {
        int sign = 1;
        if (((x >> 1) & (initial_state >> 1) & 1) != 0) {
            sign = -sign;
        }
        if ((x & initial_state & 1) != 0) {
            sign = -sign;
        }
        c[x] = 0.5 * sign;
    }
    Matrix4 h = hadamard2();

    std::vector<ModeResult> modes(seq.modes.size());
    Matrix4 rho_sum = Matrix4::Zero();
    for (int shot = 0; shot < noise.shots; shot++) {
        auto rng = stream_rng(noise.seed, uint64_t(shot));
        std::normal_distribution<double> normal;
        double eps = normal(rng) * sigma_trap;
        double phi_s = normal(rng) * sigma_spin;
        double phi_f = normal(rng) * sigma_spin;

        double chi = 0;
        for (std::size_t m = 0; m < modes.size(); m++) {
            modes[m] = mode_pass(seq, m, eps);
            chi += modes[m].chi;
        }

        Matrix4 rho_x;
        for (std::size_t i = 0; i < 4; i++) {
            int si0 = spin_of_bit(i, 0), si1 = spin_of_bit(i, 1);
            for (std::size_t j = 0; j < 4; j++) {
                int sj0 = spin_of_bit(j, 0), sj1 = spin_of_bit(j, 1);
                double phase = chi * (si0 * si1 - sj0 * sj1);
                double decay = 0;
                for (std::size_t m = 0; m < modes.size(); m++) {
                    Complex a = double(si0) * modes[m].residual[0] + double(si1) * modes[m].residual[1];
                    Complex b = double(sj0) * modes[m].residual[0] + double(sj1) * modes[m].residual[1];
                    phase += std::imag(std::conj(b) * a);
                    decay += std::norm(a - b) * (seq.modes[m].nbar + 0.5);
                }
                rho_x(i, j) = c[i] * std::conj(c[j]) * std::polar(std::exp(-decay), phase);
            }
        }
        Matrix4 rho_z = h * rho_x * h.adjoint();

        // σ_z phase errors, e^{−iϕσz/2} on each ion.
        std::array<double, 4> theta{};
        for (std::size_t k = 0; k < 4; k++) {
            theta[k] = 0.5 * (phi_s * spin_of_bit(k, 0) + phi_f * spin_of_bit(k, 1));
        }
        for (std::size_t i = 0; i < 4; i++) {
            for (std::size_t j = 0; j < 4; j++) {
                rho_z(i, j) *= std::polar(1.0, -(theta[i] - theta[j]));
            }
        }
        rho_sum += rho_z;
    }
    Matrix4 rho = rho_sum / double(noise.shots);

    GateSimulation out{};
    for (std::size_t k = 0; k < 4; k++) {
        out.populations[k] = std::max(0.0, rho(k, k).real());
    }
    out.target_states = {initial_state, initial_state ^ 3};
    out.population_target = out.populations[out.target_states[0]] + out.populations[out.target_states[1]];
    for (double phi : analysis_phases) {
        Matrix4 r = analysis_pulse(phi);
        Matrix4 after = r * rho * r.adjoint();
        double parity = 0;
        std::array<double, 4> pops{};
        for (std::size_t k = 0; k < 4; k++) {
            pops[k] = std::max(0.0, after(k, k).real());
            parity += spin_of_bit(k, 0) * spin_of_bit(k, 1) * after(k, k).real();
        }
        out.parity_curve.emplace_back(phi, parity);
        out.analysis_populations.push_back(pops);
    }
    out.contrast = readout::fit_parity(out.parity_curve).contrast;
    out.fidelity = readout::bell_fidelity(std::min(1.0, out.population_target), out.contrast);
    return out;
}

std::string sequence_to_json(const GateSequence &seq) {
    nlohmann::ordered_json j;
    j["mu_hz"] = seq.mu_hz;
    j["modes"] = nlohmann::ordered_json::array();
    for (const auto &m : seq.modes) {
        nlohmann::ordered_json mj;
        mj["label"] = dynamics::mode_label_name(m.label);
        mj["frequency_hz"] = m.frequency_hz;
        mj["eta"] = m.eta;
        mj["nbar"] = m.nbar;
        j["modes"].push_back(mj);
    }
    j["segments"] = nlohmann::ordered_json::array();
    for (const auto &s : seq.segments) {
        nlohmann::ordered_json sj;
        sj["target"] = target_name(s.target);
        sj["duration_s"] = s.duration_s;
        sj["phase_rad"] = s.phase_rad;
        sj["rabi_rate_rad_s"] = s.rabi_rate;
        sj["is_gap"] = s.is_gap;
        j["segments"].push_back(sj);
    }
    return j.dump(2) + "\n";
}

GateSequence sequence_from_json(std::string_view text) {
    GateSequence seq;
    std::string where = "sequence";
    try {
        auto j = nlohmann::json::parse(text);
        where = "mu_hz";
        seq.mu_hz = j.at("mu_hz").get<double>();
        const auto &modes = j.at("modes");
        for (std::size_t k = 0; k < modes.size(); k++) {
            where = fmt::format("modes[{}]", k);
            const auto &mj = modes[k];
            seq.modes.push_back({
                dynamics::parse_mode_label(mj.at("label").get<std::string>()),
                mj.at("frequency_hz").get<double>(),
                mj.at("eta").get<std::vector<double>>(),
                mj.at("nbar").get<double>(),
            });
        }
        const auto &segs = j.at("segments");
        for (std::size_t k = 0; k < segs.size(); k++) {
            where = fmt::format("segments[{}]", k);
            const auto &sj = segs[k];
            seq.segments.push_back({
                parse_target(sj.at("target").get<std::string>()),
                sj.at("duration_s").get<double>(),
                sj.at("phase_rad").get<double>(),
                sj.at("rabi_rate_rad_s").get<double>(),
                sj.at("is_gap").get<bool>(),
            });
        }
    } catch (const nlohmann::json::exception &e) {
        throw DomainError(fmt::format("gate sequence JSON, {}: {}", where, e.what()));
    }
    seq.validate();
    return seq;
}

void write_trajectory_csv(std::ostream &out, std::span<const TrajectorySample> samples) {
    out << "time_s,re_alpha,im_alpha\n";
    for (const auto &s : samples) {
        out << fmt::format("{},{},{}\n", s.time_s, s.alpha.real(), s.alpha.imag());
    }
}

void write_parity_csv(std::ostream &out, std::span<const std::pair<double, double>> curve) {
    out << "analysis_phase_rad,parity\n";
    for (const auto &[phi, parity] : curve) {
        out << fmt::format("{},{}\n", phi, parity);
    }
}

}  // namespace dualtype::gate
