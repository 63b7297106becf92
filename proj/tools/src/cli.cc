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

#include "cli.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "config.h"
#include "dualtype/chain.h"
#include "dualtype/dynamics.h"
#include "dualtype/errors.h"
#include "dualtype/freqplan.h"
#include "dualtype/gate.h"
#include "dualtype/protocol.h"
#include "dualtype/readout.h"
#include "dualtype/seeding.h"
#include "manifest.h"

namespace dualtype::cli {

namespace {

using ojson = nlohmann::ordered_json;
constexpr double kTwoPi = 2 * std::numbers::pi;

/// Reference values for the (1, 2) chain: the harmonic-trap prediction
/// quoted to two decimals and the observed position.
constexpr double kReferenceTheoryZ1 = -1.53;
constexpr double kReferenceMeasuredZ1 = -1.61;

struct Context {
    ExperimentConfig cfg;
    OutputSet outputs;
    std::ostream &out;
    std::ostream &err;
};

std::string dump(const ojson &j) {
    return j.dump(2) + "\n";
}

std::string read_file(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError(fmt::format("{}: cannot open file", path.string()));
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> out(n);
    for (int k = 0; k < n; k++) {
        out[k] = a + (b - a) * k / (n - 1);
    }
    return out;
}

ojson probabilities_json(const readout::Probabilities &p) {
    ojson j;
    for (std::size_t k = 0; k < readout::kBasisSize; k++) {
        j[std::string(readout::basis_label(k))] = p[k];
    }
    return j;
}

ojson matrix_json(const readout::ConfusionMatrix &m) {
    ojson rows = ojson::array();
    for (std::size_t i = 0; i < readout::kBasisSize; i++) {
        ojson row = ojson::array();
        for (std::size_t j = 0; j < readout::kBasisSize; j++) {
            row.push_back(m(i, j));
        }
        rows.push_back(row);
    }
    return rows;
}

ojson errors_json(const protocol::ErrorModel &e) {
    return ojson{
        {"pi411", e.pi411},
        {"pi3432_a", e.pi3432_a},
        {"pi3432_b", e.pi3432_b},
        {"pump976", e.pump976},
        {"pump370", e.pump370},
        {"crosstalk_s", e.crosstalk_s},
        {"crosstalk_f", e.crosstalk_f},
        {"raman355", e.raman355},
        {"microwave_s", e.microwave_s},
        {"microwave_f", e.microwave_f},
    };
}

ojson observables_json(const protocol::Observables &o) {
    return ojson{
        {"preparation_success", o.preparation_success},
        {"f_detection_infidelity_0p", o.f_infidelity_0p},
        {"f_detection_infidelity_1p", o.f_infidelity_1p},
        {"joint_detection_infidelity_s", o.joint_infidelity_s},
        {"joint_detection_infidelity_f", o.joint_infidelity_f},
    };
}

// ---------------------------------------------------------------- plan

struct PlanOptions {
    std::string species;
    std::optional<double> detuning_hz;
};

void cmd_plan(Context &ctx, const PlanOptions &opt) {
    const auto &c = ctx.cfg;
    ojson report;
    report["comb"] = {
        {"repetition_rate_hz", c.comb.repetition_rate_hz},
        {"pulse_width_s", c.comb.pulse_width_s},
        {"bandwidth_hz", c.comb.bandwidth_hz()},
        {"covers_S", c.comb.covers(c.s.species.splitting_hz)},
        {"covers_F", c.comb.covers(c.f.species.splitting_hz)},
    };
    report["aom_band"] = {{"low_hz", c.aom_band.low_hz}, {"high_hz", c.aom_band.high_hz}};
    report["plans"] = ojson::array();

    auto add = [&](const SpeciesConfig &sp, const std::string &selection, double detuning) {
        auto plan = freqplan::solve_awg(
            {sp.species, sp.pll_frequency_hz, detuning, sp.beat_sign}, c.comb.repetition_rate_hz, c.aom_band);
        report["plans"].push_back({
            {"species", freqplan::species_name(sp.species.label)},
            {"selection", selection},
            {"detuning_hz", detuning},
            {"tooth_index", sp.species.tooth_index},
            {"pll_frequency_hz", plan.pll_frequency_hz},
            {"awg_frequency_hz", plan.awg_frequency_hz},
            {"beat_sign", freqplan::beat_sign_name(plan.beat_sign)},
            {"closure_error_hz", plan.closure_error_hz(c.comb.repetition_rate_hz)},
        });
        ctx.out << fmt::format("{} {:<22} detuning {:>+14.3f} Hz  PLL {:.6f} MHz  AWG {:.6f} MHz\n",
                               freqplan::species_name(sp.species.label), selection, detuning, plan.pll_frequency_hz / 1e6,
                               plan.awg_frequency_hz / 1e6);
    };

    std::vector<const SpeciesConfig *> which;
    if (opt.species.empty() || opt.species == "S") {
        which.push_back(&c.s);
    }
    if (opt.species.empty() || opt.species == "F") {
        which.push_back(&c.f);
    }
    if (which.empty()) {
        throw ConfigError("--species: expected S or F");
    }
    for (const auto *sp : which) {
        if (opt.detuning_hz) {
            add(*sp, "custom", *opt.detuning_hz);
            continue;
        }
        add(*sp, "carrier", 0);
        for (const auto &m : c.modes) {
            std::string label(dynamics::mode_label_name(m.label));
            add(*sp, "blue:" + label, m.frequency_hz);
            add(*sp, "red:" + label, -m.frequency_hz);
        }
    }
    ctx.outputs.add("plan.json", dump(report));
}

// ---------------------------------------------------------------- rabi, spectrum

double ion_rabi_rate(const ExperimentConfig &c, std::size_t ion) {
    return ion == 0 ? c.rabi_rate_f * c.drive_s_to_f_ratio : c.rabi_rate_f;
}

void cmd_rabi(Context &ctx) {
    const auto &c = ctx.cfg;
    dynamics::DriveParams s{ion_rabi_rate(c, 0), 0, 0, c.decay_rate};
    dynamics::DriveParams f{ion_rabi_rate(c, 1), 0, 0, c.decay_rate};
    std::string csv = "time_s,flip_probability_s,flip_probability_f\n";
    for (double t : linspace(0, c.rabi_stop_s, c.rabi_points)) {
        csv += fmt::format("{},{},{}\n", t, dynamics::carrier_flip_probability(s, t), dynamics::carrier_flip_probability(f, t));
    }
    ctx.outputs.add("rabi.csv", csv);
    ctx.out << fmt::format("carrier pi time: S {:.3f} us, F {:.3f} us\n", std::numbers::pi / s.rabi_rate * 1e6,
                           std::numbers::pi / f.rabi_rate * 1e6);
}

void cmd_spectrum(Context &ctx) {
    const auto &c = ctx.cfg;
    std::size_t ion = c.spectrum_ion;
    double rabi = ion_rabi_rate(c, ion);
    dynamics::DriveParams drive{rabi, 0, c.spectrum_duration_s, c.decay_rate};
    auto grid = linspace(c.spectrum_start_hz, c.spectrum_stop_hz, c.spectrum_points);
    auto spectrum = dynamics::scan_spectrum(c.modes, ion, drive, grid);
    std::ostringstream csv;
    dynamics::write_csv(csv, spectrum);
    ctx.outputs.add("spectrum.csv", csv.str());

    ojson thermo;
    thermo["ion"] = ion == 0 ? "S" : "F";
    thermo["pulse_area_rad"] = c.thermometry_pulse_area;
    thermo["modes"] = ojson::array();
    for (const auto &m : c.modes) {
        double coupling = std::abs(m.eta[ion]) * rabi;
        double t = c.thermometry_pulse_area / coupling;
        dynamics::DriveParams probe{rabi, 0, t, 0};
        auto red = dynamics::sideband_flip_detailed(m, ion, probe, dynamics::Sideband::Red, t);
        auto blue = dynamics::sideband_flip_detailed(m, ion, probe, dynamics::Sideband::Blue, t);
        if (red.truncation_warning || blue.truncation_warning) {
            ctx.err << fmt::format("warning: thermal distribution truncated for mode {} (tail mass {:.3g})\n",
                                   dynamics::mode_label_name(m.label), red.tail_mass);
        }
        double estimate = dynamics::estimate_nbar(red.probability, blue.probability);
        thermo["modes"].push_back({
            {"label", dynamics::mode_label_name(m.label)},
            {"frequency_hz", m.frequency_hz},
            {"nbar", m.nbar},
            {"probe_duration_s", t},
            {"red_flip_probability", red.probability},
            {"blue_flip_probability", blue.probability},
            {"estimated_nbar", estimate},
        });
        ctx.out << fmt::format("{}: nbar {} -> estimated {:.4f}\n", dynamics::mode_label_name(m.label), m.nbar, estimate);
    }
    ctx.outputs.add("thermometry.json", dump(thermo));
}

// ---------------------------------------------------------------- gate

struct DesignedGate {
    gate::GateSequence unit;
    gate::GateSequence calibrated;
    double scale;
};

DesignedGate design_gate(const ExperimentConfig &c, const gate::HeuristicParams &params) {
    DesignedGate d;
    d.unit = gate::build_heuristic_sequence(params);
    d.unit.modes = c.modes;
    d.scale = gate::calibrate_rabi(d.unit, c.target_chi);
    d.calibrated = gate::scale_rabi(d.unit, d.scale);
    return d;
}

void cmd_gate_design(Context &ctx) {
    const auto &c = ctx.cfg;
    auto d = design_gate(c, c.gate);
    const auto &seq = d.calibrated;
    double tau = gate::heuristic_segment_duration(c.gate.com_frequency_hz, c.gate.rocking_frequency_hz);
    double total = seq.total_duration();

    auto unrelocated_params = c.gate;
    unrelocated_params.relocated_segments = 0;
    auto plain = design_gate(c, unrelocated_params);

    ojson report;
    report["segment_duration_s"] = tau;
    report["total_duration_s"] = total;
    report["total_duration_with_trailing_gap_s"] = total + c.gate.gap_s;
    report["mu_hz"] = seq.mu_hz;
    report["rabi_scale"] = d.scale;
    report["rabi_rate_s_rad_s"] = c.gate.rabi_rate_s * d.scale;
    report["rabi_rate_f_rad_s"] = c.gate.rabi_rate_f * d.scale;
    report["entangling_phase_unit_rad"] = gate::entangling_phase(d.unit);
    report["entangling_phase_rad"] = gate::entangling_phase(seq);
    report["modes"] = ojson::array();
    std::vector<std::string> names = {"com", "rocking"};
    for (std::size_t m = 0; m < seq.modes.size(); m++) {
        auto residual = gate::residual_displacements(seq, m);
        auto traj = gate::integrate_displacement(seq, m, {1, 1}, c.samples_per_segment);
        auto plain_traj = gate::integrate_displacement(plain.calibrated, m, {1, 1}, c.samples_per_segment);
        report["modes"].push_back({
            {"label", dynamics::mode_label_name(seq.modes[m].label)},
            {"detuning_rad_s", seq.mode_detuning(m)},
            {"segment_arc_rad", gate::segment_arc(seq, m)},
            {"residual_abs_alpha_s", std::abs(residual[0])},
            {"residual_abs_alpha_f", std::abs(residual[1])},
            {"mean_abs_alpha", gate::mean_abs_displacement(traj)},
            {"mean_abs_alpha_without_relocation", gate::mean_abs_displacement(plain_traj)},
        });
        std::ostringstream csv;
        gate::write_trajectory_csv(csv, traj.samples);
        ctx.outputs.add("trajectory_" + names[m] + ".csv", csv.str());
    }
    ctx.outputs.add("gate_sequence.json", gate::sequence_to_json(seq));
    ctx.outputs.add("gate_design.json", dump(report));

    ctx.out << fmt::format("segment duration tau = {:.5f} us\n", tau * 1e6);
    ctx.out << fmt::format("total duration T = {:.3f} us ({} segments, {} gaps); {:.3f} us counting a gap after the last segment\n",
                           total * 1e6, seq.drive_segment_count(), seq.segments.size() - seq.drive_segment_count(),
                           (total + c.gate.gap_s) * 1e6);
    for (std::size_t m = 0; m < seq.modes.size(); m++) {
        ctx.out << fmt::format("per-segment arc, {}: {:.9f} rad (2pi/3 = {:.9f})\n", dynamics::mode_label_name(seq.modes[m].label),
                               gate::segment_arc(seq, m), kTwoPi / 3);
    }
    ctx.out << fmt::format("calibrated chi = {:.9f} rad with sideband Rabi eta*Omega/2pi = {:.3f} kHz\n",
                           gate::entangling_phase(seq), c.gate.eta * c.gate.rabi_rate_f * d.scale / kTwoPi / 1e3);
}

struct SimulateOptions {
    std::optional<int> shots;
    std::optional<double> spin_t2;
    std::optional<double> motion_t2;
};

gate::NoiseModel noise_with(const ExperimentConfig &c, const SimulateOptions &opt) {
    auto noise = c.noise;
    noise.seed = c.seed;
    if (opt.shots) {
        noise.shots = *opt.shots;
    }
    if (opt.spin_t2) {
        noise.spin_coherence_time_s = *opt.spin_t2;
    }
    if (opt.motion_t2) {
        noise.motional_coherence_time_s = *opt.motion_t2;
    }
    return noise;
}

gate::GateSimulation simulate(const ExperimentConfig &c, const gate::NoiseModel &noise) {
    auto d = design_gate(c, c.gate);
    auto phases = gate::default_analysis_phases(c.analysis_phases);
    return gate::simulate_gate(d.calibrated, c.initial_state, noise, phases);
}

void cmd_gate_simulate(Context &ctx, const SimulateOptions &opt) {
    const auto &c = ctx.cfg;
    auto noise = noise_with(c, opt);
    auto sim = simulate(c, noise);
    ojson report;
    report["noise"] = {
        {"spin_coherence_time_s", noise.spin_coherence_time_s},
        {"motional_coherence_time_s", noise.motional_coherence_time_s},
        {"shots", noise.shots},
        {"seed", noise.seed},
    };
    report["initial_state"] = readout::basis_label(c.initial_state);
    report["populations"] = probabilities_json(sim.populations);
    report["target_states"] = {readout::basis_label(sim.target_states[0]), readout::basis_label(sim.target_states[1])};
    report["target_population"] = sim.population_target;
    report["parity_contrast"] = sim.contrast;
    report["bell_fidelity"] = sim.fidelity;
    std::ostringstream csv;
    gate::write_parity_csv(csv, sim.parity_curve);
    ctx.outputs.add("gate_simulation.json", dump(report));
    ctx.outputs.add("parity.csv", csv.str());
    ctx.out << fmt::format("target population {:.4f}, parity contrast {:.4f}, Bell fidelity {:.4f}\n", sim.population_target,
                           sim.contrast, sim.fidelity);
}

// ---------------------------------------------------------------- readout

readout::ConfusionMatrix load_confusion(const ExperimentConfig &c) {
    std::istringstream in(read_file(c.confusion_csv));
    try {
        return readout::ConfusionMatrix::from_csv(in);
    } catch (const DomainError &e) {
        throw ConfigError(fmt::format("{}: {}", c.confusion_csv.string(), e.what()));
    }
}

struct BellData {
    readout::OutcomeDistribution population;
    std::vector<readout::ParityScanPoint> scan;
};

ojson counts_json(const std::array<uint64_t, readout::kBasisSize> &counts) {
    ojson j;
    for (std::size_t k = 0; k < readout::kBasisSize; k++) {
        j[std::string(readout::basis_label(k))] = counts[k];
    }
    return j;
}

std::array<uint64_t, readout::kBasisSize> counts_of(const readout::OutcomeDistribution &d) {
    std::array<uint64_t, readout::kBasisSize> out{};
    for (std::size_t k = 0; k < readout::kBasisSize; k++) {
        out[k] = static_cast<uint64_t>(std::llround(d.frequencies()[k] * double(d.shots())));
    }
    return out;
}

/// Measurement record of the simulated noisy gate seen through `m`.
BellData synthetic_bell_data(const ExperimentConfig &c, const readout::ConfusionMatrix &m) {
    auto sim = simulate(c, noise_with(c, {}));
    auto measure = [&](const std::array<double, 4> &p, uint64_t stream) {
        readout::Probabilities truth{};
        double total = 0;
        for (std::size_t k = 0; k < 4; k++) {
            total += p[k];
        }
        for (std::size_t k = 0; k < 4; k++) {
            truth[k] = p[k] / total;
        }
        auto rng = stream_rng(derive_seed(c.seed, 0x5eed), stream);
        return readout::OutcomeDistribution::from_counts(readout::sample_counts(m.apply(truth), c.shots_per_setting, rng));
    };
    BellData data{measure(sim.populations, 0), {}};
    for (std::size_t k = 0; k < sim.parity_curve.size(); k++) {
        data.scan.push_back({sim.parity_curve[k].first, measure(sim.analysis_populations[k], k + 1)});
    }
    return data;
}

std::array<uint64_t, readout::kBasisSize> parse_counts_object(const nlohmann::json &j, const std::string &where) {
    std::array<uint64_t, readout::kBasisSize> counts{};
    if (!j.is_object()) {
        throw ConfigError(where + ": expected an object of counts");
    }
    for (const auto &[key, value] : j.items()) {
        std::size_t idx;
        try {
            idx = parse_basis_state(key);
        } catch (const DomainError &e) {
            throw ConfigError(fmt::format("{}.{}: {}", where, key, e.what()));
        }
        if (!value.is_number_unsigned() && !(value.is_number_integer() && value.get<int64_t>() >= 0)) {
            throw ConfigError(fmt::format("{}.{}: expected a non-negative integer", where, key));
        }
        counts[idx] = value.get<uint64_t>();
    }
    return counts;
}

BellData load_bell_data(const std::filesystem::path &path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::parse_error &e) {
        throw ConfigError(fmt::format("{}: {}", path.string(), e.what()));
    }
    if (!j.contains("population") || !j.contains("parity_scan")) {
        throw ConfigError(path.string() + ": needs \"population\" and \"parity_scan\"");
    }
    BellData data{readout::OutcomeDistribution::from_counts(parse_counts_object(j["population"], "population")), {}};
    const auto &scan = j["parity_scan"];
    for (std::size_t k = 0; k < scan.size(); k++) {
        std::string where = fmt::format("parity_scan[{}]", k);
        if (!scan[k].contains("analysis_phase_rad") || !scan[k]["analysis_phase_rad"].is_number()) {
            throw ConfigError(path.string() + ": " + where + ".analysis_phase_rad: expected a number");
        }
        data.scan.push_back({scan[k]["analysis_phase_rad"].get<double>(),
                             readout::OutcomeDistribution::from_counts(parse_counts_object(scan[k].value("counts", nlohmann::json()), where + ".counts"))});
    }
    return data;
}

ojson bell_data_json(const BellData &d) {
    ojson j;
    j["population"] = counts_json(counts_of(d.population));
    j["parity_scan"] = ojson::array();
    for (const auto &pt : d.scan) {
        j["parity_scan"].push_back({{"analysis_phase_rad", pt.analysis_phase}, {"counts", counts_json(counts_of(pt.observed))}});
    }
    return j;
}

std::array<uint64_t, readout::kBasisSize> load_counts_csv(const std::filesystem::path &path) {
    std::istringstream in(read_file(path));
    std::array<uint64_t, readout::kBasisSize> counts{};
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        line_no++;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty() || line == "state,count") {
            continue;
        }
        auto comma = line.find(',');
        try {
            if (comma == std::string::npos) {
                throw DomainError("expected state,count");
            }
            auto idx = parse_basis_state(line.substr(0, comma));
            std::size_t used = 0;
            auto value = std::stoull(line.substr(comma + 1), &used);
            if (used != line.size() - comma - 1) {
                throw DomainError("count is not an integer");
            }
            counts[idx] += value;
        } catch (const std::exception &e) {
            throw ConfigError(fmt::format("{}: line {}: {}", path.string(), line_no, e.what()));
        }
    }
    return counts;
}

std::string counts_csv(const std::array<uint64_t, readout::kBasisSize> &counts) {
    std::string csv = "state,count\n";
    for (std::size_t k = 0; k < readout::kBasisSize; k++) {
        csv += fmt::format("{},{}\n", readout::basis_label(k), counts[k]);
    }
    return csv;
}

void cmd_readout_correct(Context &ctx, const std::string &counts_path) {
    const auto &c = ctx.cfg;
    auto m = load_confusion(c);
    std::array<uint64_t, readout::kBasisSize> counts{};
    if (counts_path.empty()) {
        counts = counts_of(synthetic_bell_data(c, m).population);
    } else {
        counts = load_counts_csv(counts_path);
    }
    auto observed = readout::OutcomeDistribution::from_counts(counts);
    auto mle = readout::mle_correct_detailed(observed, m);
    auto boot = readout::bootstrap_uncertainty(observed, m, c.bootstrap_resamples, c.seed);
    ojson report;
    report["shots"] = observed.shots();
    report["measured"] = probabilities_json(observed.frequencies());
    report["corrected"] = probabilities_json(mle.p);
    report["corrected_standard_error"] = probabilities_json(boot.standard_error);
    report["iterations"] = mle.iterations;
    report["converged"] = mle.converged;
    report["log_likelihood"] = mle.log_likelihood;
    report["bootstrap_resamples"] = c.bootstrap_resamples;
    ctx.outputs.add("readout_counts.csv", counts_csv(counts));
    ctx.outputs.add("readout_corrected.json", dump(report));
    ctx.out << fmt::format("corrected p = ({:.4f}, {:.4f}, {:.4f}, {:.4f})\n", mle.p[0], mle.p[1], mle.p[2], mle.p[3]);
}

void cmd_readout_fidelity(Context &ctx, const std::string &data_path) {
    const auto &c = ctx.cfg;
    auto m = load_confusion(c);
    BellData data = data_path.empty() ? synthetic_bell_data(c, m) : load_bell_data(data_path);
    std::array<std::size_t, 2> targets = {c.initial_state, c.initial_state ^ 3};
    auto est = readout::bootstrap_fidelity(data.population, data.scan, m, c.bootstrap_resamples, c.seed, targets);

    // Raw values without readout correction, for comparison.
    const auto &raw = data.population.frequencies();
    std::vector<std::pair<double, double>> raw_curve;
    for (const auto &pt : data.scan) {
        raw_curve.emplace_back(pt.analysis_phase, readout::parity_of(pt.observed.frequencies()));
    }
    double raw_population = raw[targets[0]] + raw[targets[1]];
    double raw_contrast = readout::fit_parity(raw_curve).contrast;

    ojson report;
    report["target_states"] = {readout::basis_label(targets[0]), readout::basis_label(targets[1])};
    report["population_even"] = est.population_even;
    report["population_even_std"] = est.population_std;
    report["parity_contrast"] = est.contrast;
    report["parity_contrast_std"] = est.contrast_std;
    report["bell_fidelity"] = est.fidelity;
    report["bell_fidelity_std"] = est.fidelity_std;
    report["uncorrected"] = {
        {"population_even", raw_population},
        {"parity_contrast", raw_contrast},
        {"bell_fidelity", readout::bell_fidelity(raw_population, raw_contrast)},
    };
    report["bootstrap_resamples"] = c.bootstrap_resamples;
    ctx.outputs.add("bell_data.json", dump(bell_data_json(data)));
    ctx.outputs.add("fidelity.json", dump(report));
    ctx.out << fmt::format("population {:.4f} +- {:.4f}, contrast {:.4f} +- {:.4f}, fidelity {:.4f} +- {:.4f}\n",
                           est.population_even, est.population_std, est.contrast, est.contrast_std, est.fidelity,
                           est.fidelity_std);
}

// ---------------------------------------------------------------- protocol

protocol::Programs load_programs(const std::filesystem::path &dir) {
    auto load = [&](const char *name) {
        auto path = dir / (std::string(name) + ".json");
        try {
            return protocol::parse_program(read_file(path));
        } catch (const DomainError &e) {
            throw ConfigError(fmt::format("{}: {}", path.string(), e.what()));
        }
    };
    protocol::Programs p{load("prepare_sf"), load("detect_f"), load("detect_joint")};
    try {
        p.validate();
    } catch (const DomainError &e) {
        throw ConfigError(fmt::format("{}: {}", dir.string(), e.what()));
    }
    return p;
}

struct ProtocolOptions {
    bool calibrate = false;
    std::optional<uint64_t> shots;
};

void cmd_protocol_detect(Context &ctx, const ProtocolOptions &opt) {
    const auto &c = ctx.cfg;
    auto programs = load_programs(c.sequences_dir);
    auto errors = c.pulse_errors;
    ojson report;
    if (opt.calibrate) {
        protocol::CalibrationTargets targets;
        auto cal = protocol::calibrate_errors(targets, c.rounds, programs);
        if (!cal.converged) {
            throw ConvergenceError("pulse-error calibration did not converge", cal.final_cost);
        }
        errors = cal.errors;
        report["calibration"] = {
            {"targets", observables_json(targets.observables)},
            {"target_diagonal", targets.diagonal},
            {"final_cost", cal.final_cost},
            {"converged", cal.converged},
        };
    }
    report["pulse_errors"] = errors_json(errors);
    report["observables"] = observables_json(protocol::compute_observables(errors, c.rounds, programs));

    report["f_detection_by_rounds"] = ojson::array();
    for (int r = 1; r <= c.rounds; r++) {
        auto f = protocol::run_detect_f(errors, r, programs);
        report["f_detection_by_rounds"].push_back({{"rounds", r}, {"infidelity_0p", f.infidelity_0p}, {"infidelity_1p", f.infidelity_1p}});
    }
    auto prep = protocol::run_prepare_sf(errors, programs);
    ojson post = ojson::array();
    for (const auto &ion : prep.post_selected) {
        ojson levels;
        for (std::size_t l = 0; l < protocol::kLevelCount; l++) {
            auto level = static_cast<protocol::Level>(l);
            levels[std::string(protocol::level_name(level))] = ion[level];
        }
        post.push_back(levels);
    }
    report["preparation"] = {{"success_probability", prep.success_probability}, {"post_selected", post}};
    auto joint = protocol::run_detect_joint(errors, programs);
    report["joint_detection"] = {{"infidelity_s", joint.infidelity_s}, {"infidelity_f", joint.infidelity_f}};
    auto exact = protocol::joint_confusion_exact(errors, programs);
    report["confusion_exact"] = matrix_json(exact);

    uint64_t shots = opt.shots.value_or(c.confusion_shots);
    auto synth = protocol::synthesize_confusion_matrix(errors, shots, c.seed, programs);
    report["confusion_shots"] = shots;
    std::ostringstream csv;
    synth.write_csv(csv);
    ctx.outputs.add("protocol_report.json", dump(report));
    ctx.outputs.add("confusion_synthesized.csv", csv.str());

    auto o = protocol::compute_observables(errors, c.rounds, programs);
    ctx.out << fmt::format(
        "preparation success {:.2f}%, F detection {:.2f}% / {:.2f}%, joint detection S {:.2f}% / F {:.2f}%\n",
        100 * o.preparation_success, 100 * o.f_infidelity_0p, 100 * o.f_infidelity_1p, 100 * o.joint_infidelity_s,
        100 * o.joint_infidelity_f);
    ctx.out << fmt::format("confusion diagonal {:.2f}% {:.2f}% {:.2f}% {:.2f}%\n", 100 * exact(0, 0), 100 * exact(1, 1),
                           100 * exact(2, 2), 100 * exact(3, 3));
}

// ---------------------------------------------------------------- chain

void cmd_chain(Context &ctx, const std::vector<int> &charges) {
    auto config = ctx.cfg.chain;
    if (!charges.empty()) {
        config.charges = charges;
    }
    auto r = chain::equilibrium_positions(config);
    ojson report;
    report["charges"] = config.charges;
    report["trap_curvature"] = config.trap_curvature;
    report["positions_z0_units"] = r.positions;
    report["raw_positions"] = r.raw_positions;
    report["z0"] = r.z0;
    report["residual_force_norm"] = r.residual_force_norm;
    report["converged"] = r.converged;
    report["iterations"] = r.iterations;
    report["reference_theory_z1"] = kReferenceTheoryZ1;
    report["reference_measured_z1"] = kReferenceMeasuredZ1;
    ctx.outputs.add("chain.json", dump(report));
    std::string positions;
    for (double z : r.positions) {
        positions += fmt::format(" {:+.4f}", z);
    }
    ctx.out << "equilibrium positions (z0 units):" << positions << "\n";
}

}  // namespace

int run_cli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
    CLI::App app{"Planning and simulation toolkit for dual-type trapped-ion qubits", "dualtype"};
    app.fallthrough();
    app.require_subcommand(1);

    std::string config_path = DUALTYPE_DEFAULT_CONFIG;
    std::optional<uint64_t> seed;
    std::string out_dir = "out";
    app.add_option("--config", config_path, "Experiment configuration (JSON)");
    app.add_option("--seed", seed, "Override the configuration seed");
    app.add_option("--out", out_dir, "Output directory");

    PlanOptions plan_opt;
    auto *plan = app.add_subcommand("plan", "Raman beat-note plans for both species at the carrier and every sideband -> plan.json");
    plan->add_option("--species", plan_opt.species, "Restrict to one species (S or F)");
    plan->add_option("--detuning-hz", plan_opt.detuning_hz, "Plan a single detuning from the carrier instead");

    auto *rabi = app.add_subcommand("rabi", "Carrier Rabi flopping of both ions -> rabi.csv");
    auto *spectrum =
        app.add_subcommand("spectrum", "Carrier and sideband spectrum plus sideband thermometry -> spectrum.csv, thermometry.json");

    auto *gate_cmd = app.add_subcommand("gate", "Segmented phase-modulated entangling gate");
    gate_cmd->require_subcommand(1);
    auto *design = gate_cmd->add_subcommand(
        "design", "Build and calibrate the 40-segment sequence; prints tau, T and the per-segment arc -> gate_sequence.json, "
                  "gate_design.json, trajectory_com.csv, trajectory_rocking.csv");
    SimulateOptions sim_opt;
    auto *simulate_cmd = gate_cmd->add_subcommand(
        "simulate", "Bell-state preparation under spin and motional dephasing -> gate_simulation.json, parity.csv");
    simulate_cmd->add_option("--shots", sim_opt.shots, "Monte Carlo shots");
    simulate_cmd->add_option("--spin-t2", sim_opt.spin_t2, "Spin coherence time (s)");
    simulate_cmd->add_option("--motion-t2", sim_opt.motion_t2, "Motional coherence time (s)");

    auto *readout_cmd = app.add_subcommand("readout", "Maximum-likelihood readout correction");
    readout_cmd->require_subcommand(1);
    std::string counts_path;
    auto *correct = readout_cmd->add_subcommand(
        "correct", "Correct a two-qubit count histogram (synthetic Bell data by default) -> readout_counts.csv, readout_corrected.json");
    correct->add_option("--counts", counts_path, "CSV with state,count rows");
    std::string data_path;
    auto *fidelity = readout_cmd->add_subcommand(
        "fidelity", "Bell fidelity from population and parity-scan counts with bootstrap errors -> bell_data.json, fidelity.json");
    fidelity->add_option("--data", data_path, "JSON with population and parity_scan counts (synthetic if omitted)");

    auto *protocol_cmd = app.add_subcommand("protocol", "State preparation and detection sequences");
    protocol_cmd->require_subcommand(1);
    ProtocolOptions proto_opt;
    auto *detect = protocol_cmd->add_subcommand(
        "detect", "Preparation success, detection infidelities and a synthesized confusion matrix -> protocol_report.json, "
                  "confusion_synthesized.csv");
    detect->add_flag("--calibrate", proto_opt.calibrate, "Fit the pulse errors to the reference observables first");
    detect->add_option("--shots", proto_opt.shots, "Shots per prepared state for the synthesized matrix");

    std::vector<int> charges;
    auto *chain_cmd = app.add_subcommand("chain", "Equilibrium positions of a two-ion crystal -> chain.json");
    chain_cmd->add_option("--charges", charges, "Charges in axial order")->delimiter(',');

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError &e) {
        int code = app.exit(e, out, err);
        return code == 0 ? kSuccess : kConfigError;
    }

    std::string command;
    try {
        Context ctx{load_config(config_path), {}, out, err};
        if (seed) {
            ctx.cfg.seed = *seed;
            ctx.cfg.noise.seed = *seed;
        }
        if (*plan) {
            command = "plan";
            cmd_plan(ctx, plan_opt);
        } else if (*rabi) {
            command = "rabi";
            cmd_rabi(ctx);
        } else if (*spectrum) {
            command = "spectrum";
            cmd_spectrum(ctx);
        } else if (*design) {
            command = "gate design";
            cmd_gate_design(ctx);
        } else if (*simulate_cmd) {
            command = "gate simulate";
            cmd_gate_simulate(ctx, sim_opt);
        } else if (*correct) {
            command = "readout correct";
            cmd_readout_correct(ctx, counts_path);
        } else if (*fidelity) {
            command = "readout fidelity";
            cmd_readout_fidelity(ctx, data_path);
        } else if (*detect) {
            command = "protocol detect";
            cmd_protocol_detect(ctx, proto_opt);
        } else if (*chain_cmd) {
            command = "chain";
            cmd_chain(ctx, charges);
        }
        ctx.outputs.commit(out_dir, command, sha256_hex(ctx.cfg.canonical_json), ctx.cfg.seed);
    } catch (const ConfigError &e) {
        err << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const ConvergenceError &e) {
        err << "convergence error: " << e.what() << " (residual " << e.residual() << ")\n";
        return kConvergenceError;
    } catch (const std::domain_error &e) {
        err << "domain error: " << e.what() << "\n";
        return kDomainError;
    } catch (const std::exception &e) {
        err << "error: " << e.what() << "\n";
        return kDomainError;
    }
    return kSuccess;
}

}  // namespace dualtype::cli
