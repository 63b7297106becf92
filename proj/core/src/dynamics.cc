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

#include "dualtype/dynamics.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <string>

#include <fmt/format.h>

namespace dualtype::dynamics {

namespace {

constexpr double kTwoPi = 2 * std::numbers::pi;

}  // namespace

std::string_view mode_label_name(ModeLabel label) {
    return label == ModeLabel::CenterOfMass ? "CenterOfMass" : "Rocking";
}

ModeLabel parse_mode_label(std::string_view name) {
    if (name == "CenterOfMass" || name == "com") {
        return ModeLabel::CenterOfMass;
    }
    if (name == "Rocking" || name == "rocking") {
        return ModeLabel::Rocking;
    }
    throw DomainError("unknown mode label '" + std::string(name) + "'");
}

void MotionalMode::validate() const {
    if (!(frequency_hz > 0) || !std::isfinite(frequency_hz)) {
        throw DomainError("mode frequency must be positive");
    }
    if (!(nbar >= 0) || !std::isfinite(nbar)) {
        throw DomainError("mean phonon number must be non-negative");
    }
    if (eta.empty()) {
        throw DomainError("mode needs at least one Lamb-Dicke parameter");
    }
    bool any_positive = false;
    bool any_negative = false;
    for (double e : eta) {
        if (!(std::abs(e) < 0.5)) {
            throw DomainError("Lamb-Dicke parameter outside |eta| < 0.5");
        }
        any_positive |= e > 0;
        any_negative |= e < 0;
    }
    if (label == ModeLabel::CenterOfMass && any_positive && any_negative) {
        throw DomainError("center-of-mass mode needs equal-sign eta entries");
    }
    if (label == ModeLabel::Rocking && eta.size() > 1 && !(any_positive && any_negative)) {
        throw DomainError("rocking mode needs opposite-sign eta entries");
    }
}

void DriveParams::validate() const {
    if (!(rabi_rate >= 0)) {
        throw DomainError("Rabi rate must be non-negative");
    }
    if (!(duration_s >= 0)) {
        throw DomainError("drive duration must be non-negative");
    }
    if (!(decay_rate >= 0)) {
        throw DomainError("decay rate must be non-negative");
    }
}

double damped_rabi_flip(double rabi_rate, double detuning_rad_s, double decay_rate, double t) {
    double w2 = rabi_rate * rabi_rate + detuning_rad_s * detuning_rad_s;
    if (w2 == 0) {
        return 0;
    }
    double w = std::sqrt(w2);
    double resonant = rabi_rate * rabi_rate / w2;
    // 1 − cos(Wt) written as 2 sin²(Wt/2) keeps small-t values exact.
    double s = std::sin(0.5 * w * t);
    double undamped_z = 1 - resonant * 2 * s * s;
    double p = 0.5 * (1 - std::exp(-decay_rate * t) * undamped_z);
    return std::clamp(p, 0.0, 1.0);
}

double carrier_flip_probability(const DriveParams &drive, double t) {
    drive.validate();
    if (!(t >= 0)) {
        throw DomainError("evolution time must be non-negative");
    }
    return damped_rabi_flip(drive.rabi_rate, kTwoPi * drive.detuning_hz, drive.decay_rate, t);
}

ThermalDistribution thermal_distribution(double nbar, int n_max) {
    if (!(nbar >= 0)) {
        throw DomainError("mean phonon number must be non-negative");
    }
    if (n_max < 0) {
        throw DomainError("phonon cutoff must be non-negative");
    }
    ThermalDistribution out;
    out.weights.resize(static_cast<std::size_t>(n_max) + 1);
    double ratio = nbar / (nbar + 1);
    double w = 1 / (nbar + 1);
    double kept = 0;
    for (auto &p : out.weights) {
        p = w;
        kept += w;
        w *= ratio;
    }
    out.tail_mass = std::pow(ratio, n_max + 1);
    // Guard against the subtraction 1 − kept being swamped by rounding.
    if (out.tail_mass < 0 || !std::isfinite(out.tail_mass)) {
        out.tail_mass = std::max(0.0, 1 - kept);
    }
    return out;
}

SidebandResult sideband_flip_detailed(
    const MotionalMode &mode, std::size_t ion_index, const DriveParams &drive, Sideband sideband, double t, int n_max) {
    mode.validate();
    drive.validate();
    if (ion_index >= mode.eta.size()) {
        throw DomainError("ion index outside the mode's eta list");
    }
    if (!(t >= 0)) {
        throw DomainError("evolution time must be non-negative");
    }
    auto thermal = thermal_distribution(mode.nbar, n_max);
    double coupling = std::abs(mode.eta[ion_index]) * drive.rabi_rate;
    double detuning = kTwoPi * drive.detuning_hz;

    double p = 0;
    for (std::size_t n = 0; n < thermal.weights.size(); n++) {
        double quanta = sideband == Sideband::Red ? static_cast<double>(n) : static_cast<double>(n + 1);
        p += thermal.weights[n] * damped_rabi_flip(coupling * std::sqrt(quanta), detuning, drive.decay_rate, t);
    }
    return {std::clamp(p, 0.0, 1.0), thermal.tail_mass, thermal.truncation_warning()};
}

double sideband_flip_probability(
    const MotionalMode &mode, std::size_t ion_index, const DriveParams &drive, Sideband sideband, double t, int n_max) {
    return sideband_flip_detailed(mode, ion_index, drive, sideband, t, n_max).probability;
}

Spectrum scan_spectrum(
    std::span<const MotionalMode> modes, std::size_t ion_index, const DriveParams &drive, std::span<const double> grid) {
    drive.validate();
    if (grid.empty()) {
        throw DomainError("detuning grid is empty");
    }
    for (std::size_t k = 1; k < grid.size(); k++) {
        if (!(grid[k] > grid[k - 1])) {
            throw DomainError("detuning grid must be strictly increasing");
        }
    }
    for (const auto &m : modes) {
        m.validate();
    }

    Spectrum out;
    out.points.reserve(grid.size());
    for (double delta : grid) {
        // Nearest line wins; ties go to the carrier, then modes in order.
        double best_distance = std::abs(delta);
        const MotionalMode *best_mode = nullptr;
        Sideband best_sideband = Sideband::Red;
        for (const auto &m : modes) {
            for (auto sb : {Sideband::Red, Sideband::Blue}) {
                double line = sb == Sideband::Red ? -m.frequency_hz : m.frequency_hz;
                double distance = std::abs(delta - line);
                if (distance < best_distance) {
                    best_distance = distance;
                    best_mode = &m;
                    best_sideband = sb;
                }
            }
        }

        DriveParams probe = drive;
        double p;
        if (best_mode == nullptr) {
            probe.detuning_hz = delta;
            p = carrier_flip_probability(probe, drive.duration_s);
        } else {
            double line = best_sideband == Sideband::Red ? -best_mode->frequency_hz : best_mode->frequency_hz;
            probe.detuning_hz = delta - line;
            p = sideband_flip_probability(*best_mode, ion_index, probe, best_sideband, drive.duration_s);
        }
        out.points.push_back({delta, p});
    }
    return out;
}

void write_csv(std::ostream &out, const Spectrum &spectrum) {
    out << "detuning_hz,flip_probability\n";
    for (const auto &pt : spectrum.points) {
        out << fmt::format("{},{}\n", pt.detuning_hz, pt.flip_probability);
    }
}

double estimate_nbar(double p_red, double p_blue) {
    if (!(p_red >= 0 && p_red <= 1 && p_blue >= 0 && p_blue <= 1)) {
        throw DomainError("sideband probabilities must lie in [0, 1]");
    }
    if (!(p_red < p_blue)) {
        throw NotThermalizable("red sideband is not weaker than blue sideband (ratio >= 1)");
    }
    double r = p_red / p_blue;
    return r / (1 - r);
}

double gaussian_crosstalk(double separation, double beam_radius) {
    if (!(beam_radius > 0)) {
        throw DomainError("beam radius must be positive");
    }
    double x = separation / beam_radius;
    return std::exp(-2 * x * x);
}

}  // namespace dualtype::dynamics
