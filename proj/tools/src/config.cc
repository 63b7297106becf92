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

#include "config.h"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

namespace dualtype::cli {

namespace {

using nlohmann::json;

/// A JSON value together with its dotted path, for error messages.
class Node {
   public:
    Node(const json &value, std::string path) : j_(value), path_(std::move(path)) {
    }

    const std::string &path() const {
        return path_;
    }

    Node at(std::string_view key) const {
        if (!j_.is_object()) {
            fail("expected an object");
        }
        auto it = j_.find(std::string(key));
        if (it == j_.end()) {
            throw ConfigError(fmt::format("{}: missing field", child(key)));
        }
        return Node(*it, child(key));
    }

    Node at(std::size_t index) const {
        if (!j_.is_array() || index >= j_.size()) {
            fail("index out of range");
        }
        return Node(j_[index], fmt::format("{}[{}]", path_, index));
    }

    std::size_t size() const {
        if (!j_.is_array()) {
            fail("expected an array");
        }
        return j_.size();
    }

    /// Rejects keys outside `allowed`; keys starting with '_' are comments.
    void only(std::initializer_list<std::string_view> allowed) const {
        if (!j_.is_object()) {
            fail("expected an object");
        }
        for (const auto &[key, value] : j_.items()) {
            if (!key.empty() && key[0] == '_') {
                continue;
            }
            bool ok = false;
            for (auto a : allowed) {
                ok |= key == a;
            }
            if (!ok) {
                throw ConfigError(fmt::format("{}: unknown field", child(key)));
            }
        }
    }

    double number() const {
        if (!j_.is_number()) {
            fail("expected a number");
        }
        double v = j_.get<double>();
        if (!std::isfinite(v)) {
            fail("expected a finite number");
        }
        return v;
    }

    double positive() const {
        double v = number();
        if (!(v > 0)) {
            fail("must be positive");
        }
        return v;
    }

    double non_negative() const {
        double v = number();
        if (!(v >= 0)) {
            fail("must be non-negative");
        }
        return v;
    }

    int64_t integer() const {
        if (!j_.is_number_integer()) {
            fail("expected an integer");
        }
        return j_.get<int64_t>();
    }

    int64_t integer_at_least(int64_t lo) const {
        auto v = integer();
        if (v < lo) {
            fail(fmt::format("must be at least {}", lo));
        }
        return v;
    }

    std::string string() const {
        if (!j_.is_string()) {
            fail("expected a string");
        }
        return j_.get<std::string>();
    }

    [[noreturn]] void fail(std::string_view what) const {
        throw ConfigError(fmt::format("{}: {}", path_, what));
    }

   private:
    std::string child(std::string_view key) const {
        return path_.empty() ? std::string(key) : fmt::format("{}.{}", path_, key);
    }

    const json &j_;
    std::string path_;
};

/// Runs `f`, re-throwing domain errors as configuration errors at `path`.
template <typename F>
auto checked(const std::string &path, F &&f) {
    try {
        return f();
    } catch (const DomainError &e) {
        throw ConfigError(fmt::format("{}: {}", path, e.what()));
    }
}

SpeciesConfig read_species(const Node &n, freqplan::Species label) {
    n.only({"splitting_hz", "tooth_index", "pll_frequency_hz", "beat_sign"});
    SpeciesConfig out{};
    out.species.label = label;
    out.species.splitting_hz = n.at("splitting_hz").positive();
    out.species.tooth_index = static_cast<int>(n.at("tooth_index").integer_at_least(1));
    out.pll_frequency_hz = n.at("pll_frequency_hz").positive();
    auto sign = n.at("beat_sign");
    out.beat_sign = checked(sign.path(), [&] { return freqplan::parse_beat_sign(sign.string()); });
    checked(n.path(), [&] {
        out.species.validate();
        return 0;
    });
    return out;
}

dynamics::MotionalMode read_mode(const Node &n) {
    n.only({"label", "frequency_hz", "eta", "nbar"});
    dynamics::MotionalMode m{};
    auto label = n.at("label");
    m.label = checked(label.path(), [&] { return dynamics::parse_mode_label(label.string()); });
    m.frequency_hz = n.at("frequency_hz").positive();
    auto eta = n.at("eta");
    for (std::size_t k = 0; k < eta.size(); k++) {
        m.eta.push_back(eta.at(k).number());
    }
    m.nbar = n.at("nbar").non_negative();
    checked(n.path(), [&] {
        m.validate();
        return 0;
    });
    return m;
}

std::string line_column(std::string_view text, std::size_t byte) {
    std::size_t line = 1;
    std::size_t col = 1;
    for (std::size_t k = 0; k < byte && k < text.size(); k++) {
        if (text[k] == '\n') {
            line++;
            col = 1;
        } else {
            col++;
        }
    }
    return fmt::format("line {}, column {}", line, col);
}

}  // namespace

std::size_t parse_basis_state(std::string_view text) {
    std::string s(text);
    if (!s.empty() && s.back() == '\'') {
        s.pop_back();
    }
    if (s == "00") return 0;
    if (s == "01") return 1;
    if (s == "10") return 2;
    if (s == "11") return 3;
    throw DomainError("basis state must be one of 00', 01', 10', 11'");
}

ExperimentConfig parse_config(std::string_view text, const std::filesystem::path &base_dir) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error &e) {
        throw ConfigError(fmt::format("{}: {}", line_column(text, e.byte == 0 ? 0 : e.byte - 1), e.what()));
    }
    Node root(doc, "");
    root.only({"seed", "comb", "aom_band", "species", "modes", "drive", "gate", "noise", "pulse_errors", "protocol", "readout", "chain"});

    ExperimentConfig c;
    c.seed = static_cast<uint64_t>(root.at("seed").integer_at_least(0));

    auto comb = root.at("comb");
    comb.only({"repetition_rate_hz", "pulse_width_s"});
    c.comb = checked(comb.path(), [&] {
        return freqplan::CombSpec::make(comb.at("repetition_rate_hz").number(), comb.at("pulse_width_s").number());
    });

    auto band = root.at("aom_band");
    band.only({"low_hz", "high_hz"});
    c.aom_band = checked(band.path(), [&] { return freqplan::AomBand::make(band.at("low_hz").number(), band.at("high_hz").number()); });

    auto species = root.at("species");
    species.only({"S", "F"});
    c.s = read_species(species.at("S"), freqplan::Species::S);
    c.f = read_species(species.at("F"), freqplan::Species::F);

    auto modes = root.at("modes");
    if (modes.size() != 2) {
        modes.fail("expected a center-of-mass and a rocking mode");
    }
    for (std::size_t k = 0; k < 2; k++) {
        c.modes.push_back(read_mode(modes.at(k)));
        if (c.modes.back().eta.size() != 2) {
            modes.at(k).at("eta").fail("expected one entry per ion (S, F)");
        }
    }
    if (c.modes[0].label != dynamics::ModeLabel::CenterOfMass || c.modes[1].label != dynamics::ModeLabel::Rocking) {
        modes.fail("first mode must be CenterOfMass and second Rocking");
    }

    auto drive = root.at("drive");
    drive.only({"rabi_rate_f_rad_s", "s_to_f_rabi_ratio", "decay_rate_per_s", "rabi_scan", "spectrum", "thermometry_pulse_area_rad"});
    c.rabi_rate_f = drive.at("rabi_rate_f_rad_s").positive();
    c.drive_s_to_f_ratio = drive.at("s_to_f_rabi_ratio").positive();
    c.decay_rate = drive.at("decay_rate_per_s").non_negative();
    auto rabi = drive.at("rabi_scan");
    rabi.only({"stop_s", "points"});
    c.rabi_stop_s = rabi.at("stop_s").positive();
    c.rabi_points = static_cast<int>(rabi.at("points").integer_at_least(2));
    auto spectrum = drive.at("spectrum");
    spectrum.only({"ion", "duration_s", "start_hz", "stop_hz", "points"});
    {
        auto ion = spectrum.at("ion");
        auto name = ion.string();
        if (name == "S") {
            c.spectrum_ion = 0;
        } else if (name == "F") {
            c.spectrum_ion = 1;
        } else {
            ion.fail("expected \"S\" or \"F\"");
        }
    }
    c.spectrum_duration_s = spectrum.at("duration_s").positive();
    c.spectrum_start_hz = spectrum.at("start_hz").number();
    c.spectrum_stop_hz = spectrum.at("stop_hz").number();
    c.spectrum_points = static_cast<int>(spectrum.at("points").integer_at_least(2));
    if (!(c.spectrum_stop_hz > c.spectrum_start_hz)) {
        spectrum.at("stop_hz").fail("must exceed start_hz");
    }
    c.thermometry_pulse_area = drive.at("thermometry_pulse_area_rad").positive();

    auto g = root.at("gate");
    g.only({"segment_count", "gap_s", "edge_length", "relocated_segments", "s_to_f_rabi_ratio", "orientation", "target_chi_rad",
            "initial_state", "analysis_phases", "trajectory_samples_per_segment"});
    c.gate.com_frequency_hz = c.modes[0].frequency_hz;
    c.gate.rocking_frequency_hz = c.modes[1].frequency_hz;
    c.gate.eta = c.modes[0].eta[0];
    c.gate.nbar_com = c.modes[0].nbar;
    c.gate.nbar_rocking = c.modes[1].nbar;
    c.gate.segment_count = static_cast<int>(g.at("segment_count").integer_at_least(1));
    c.gate.gap_s = g.at("gap_s").non_negative();
    c.gate.edge_length = static_cast<int>(g.at("edge_length").integer_at_least(1));
    c.gate.relocated_segments = static_cast<int>(g.at("relocated_segments").integer_at_least(0));
    c.gate.rabi_rate_s = g.at("s_to_f_rabi_ratio").positive();
    c.gate.rabi_rate_f = 1;
    c.gate.orientation = static_cast<int>(g.at("orientation").integer());
    c.target_chi = g.at("target_chi_rad").number();
    {
        auto init = g.at("initial_state");
        c.initial_state = checked(init.path(), [&] { return parse_basis_state(init.string()); });
    }
    c.analysis_phases = static_cast<int>(g.at("analysis_phases").integer_at_least(4));
    c.samples_per_segment = static_cast<int>(g.at("trajectory_samples_per_segment").integer_at_least(0));
    checked(g.path(), [&] {
        auto seq = gate::build_heuristic_sequence(c.gate);
        seq.modes = c.modes;
        seq.validate();
        return 0;
    });

    auto noise = root.at("noise");
    noise.only({"spin_coherence_time_s", "motional_coherence_time_s", "shots"});
    c.noise.spin_coherence_time_s = noise.at("spin_coherence_time_s").positive();
    c.noise.motional_coherence_time_s = noise.at("motional_coherence_time_s").positive();
    c.noise.shots = static_cast<int>(noise.at("shots").integer_at_least(1));
    c.noise.seed = c.seed;

    auto pe = root.at("pulse_errors");
    pe.only({"pi411", "pi3432_a", "pi3432_b", "pump976", "pump370", "crosstalk_s", "crosstalk_f", "raman355", "microwave_s",
             "microwave_f"});
    auto prob = [&](std::string_view key) {
        auto n = pe.at(key);
        double v = n.number();
        if (!(v >= 0 && v <= 1)) {
            n.fail("must lie in [0, 1]");
        }
        return v;
    };
    c.pulse_errors.pi411 = prob("pi411");
    c.pulse_errors.pi3432_a = prob("pi3432_a");
    c.pulse_errors.pi3432_b = prob("pi3432_b");
    c.pulse_errors.pump976 = prob("pump976");
    c.pulse_errors.pump370 = prob("pump370");
    c.pulse_errors.crosstalk_s = prob("crosstalk_s");
    c.pulse_errors.crosstalk_f = prob("crosstalk_f");
    c.pulse_errors.raman355 = prob("raman355");
    c.pulse_errors.microwave_s = prob("microwave_s");
    c.pulse_errors.microwave_f = prob("microwave_f");

    auto proto = root.at("protocol");
    proto.only({"rounds", "confusion_shots", "sequences_dir"});
    c.rounds = static_cast<int>(proto.at("rounds").integer_at_least(1));
    c.confusion_shots = static_cast<uint64_t>(proto.at("confusion_shots").integer_at_least(1));
    c.sequences_dir = base_dir / proto.at("sequences_dir").string();

    auto ro = root.at("readout");
    ro.only({"confusion_csv", "shots_per_setting", "bootstrap_resamples"});
    c.confusion_csv = base_dir / ro.at("confusion_csv").string();
    c.shots_per_setting = static_cast<uint64_t>(ro.at("shots_per_setting").integer_at_least(1));
    c.bootstrap_resamples = static_cast<int>(ro.at("bootstrap_resamples").integer_at_least(100));

    auto ch = root.at("chain");
    ch.only({"charges", "trap_curvature"});
    auto charges = ch.at("charges");
    for (std::size_t k = 0; k < charges.size(); k++) {
        c.chain.charges.push_back(static_cast<int>(charges.at(k).integer_at_least(1)));
    }
    c.chain.trap_curvature = ch.at("trap_curvature").positive();
    checked(ch.path(), [&] {
        c.chain.validate();
        return 0;
    });

    c.canonical_json = doc.dump();
    return c;
}

ExperimentConfig load_config(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError(fmt::format("{}: cannot open configuration file", path.string()));
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return parse_config(buf.str(), path.parent_path());
    } catch (const ConfigError &e) {
        throw ConfigError(fmt::format("{}: {}", path.string(), e.what()));
    }
}

}  // namespace dualtype::cli
