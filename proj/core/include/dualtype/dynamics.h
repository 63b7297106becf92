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

#ifndef DUALTYPE_DYNAMICS_H
#define DUALTYPE_DYNAMICS_H

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "dualtype/errors.h"

namespace dualtype::dynamics {

enum class ModeLabel { CenterOfMass, Rocking };

std::string_view mode_label_name(ModeLabel label);
ModeLabel parse_mode_label(std::string_view name);

/// One collective phonon mode of the crystal.
struct MotionalMode {
    ModeLabel label;
    double frequency_hz;
    /// Per-ion Lamb–Dicke parameters, signed.
    std::vector<double> eta;
    double nbar;

    /// Throws DomainError on a non-positive frequency, negative n̄,
    /// |η| ≥ 0.5, or an η sign pattern that contradicts the label.
    void validate() const;
};

/// Drive applied to one ion. `detuning_hz` is measured from the addressed
/// line (carrier or sideband); `decay_rate` damps the oscillation contrast.
struct DriveParams {
    double rabi_rate;
    double detuning_hz = 0;
    double duration_s = 0;
    double decay_rate = 0;

    void validate() const;
};

enum class Sideband { Red, Blue };

/// Two-level flip probability ½[1 − e^{−γt}(Δ²/W² + Ω²/W²·cos Wt)] with
/// W² = Ω² + Δ². All rates in rad/s.
double damped_rabi_flip(double rabi_rate, double detuning_rad_s, double decay_rate, double t);

double carrier_flip_probability(const DriveParams &drive, double t);

inline constexpr int kDefaultMaxPhonons = 200;
inline constexpr double kTruncationTolerance = 1e-8;

struct ThermalDistribution {
    /// p_n for n = 0..n_max.
    std::vector<double> weights;
    /// Probability mass above n_max.
    double tail_mass;

    bool truncation_warning() const {
        return tail_mass > kTruncationTolerance;
    }
};

ThermalDistribution thermal_distribution(double nbar, int n_max = kDefaultMaxPhonons);

struct SidebandResult {
    double probability;
    double tail_mass;
    bool truncation_warning;
};

/// Thermal average of the sideband flip probability on ion `ion_index`:
/// sin²(η√n·Ωt/2) for Red and sin²(η√(n+1)·Ωt/2) for Blue on resonance.
SidebandResult sideband_flip_detailed(
    const MotionalMode &mode,
    std::size_t ion_index,
    const DriveParams &drive,
    Sideband sideband,
    double t,
    int n_max = kDefaultMaxPhonons);

double sideband_flip_probability(
    const MotionalMode &mode,
    std::size_t ion_index,
    const DriveParams &drive,
    Sideband sideband,
    double t,
    int n_max = kDefaultMaxPhonons);

struct SpectrumPoint {
    double detuning_hz;
    double flip_probability;
};

struct Spectrum {
    std::vector<SpectrumPoint> points;
};

/// Flip probability after `drive.duration_s` as a function of the drive
/// detuning from the carrier. Each point is evaluated for the nearest line
/// (carrier, or the red/blue sideband of some mode) as an isolated two-level
/// process; lines do not interfere.
Spectrum scan_spectrum(
    std::span<const MotionalMode> modes, std::size_t ion_index, const DriveParams &drive, std::span<const double> detuning_grid_hz);

void write_csv(std::ostream &out, const Spectrum &spectrum);

class NotThermalizable : public DomainError {
   public:
    using DomainError::DomainError;
};

/// Sideband-asymmetry thermometry: R/(1 − R) with R = p_red/p_blue.
double estimate_nbar(double p_red, double p_blue);

/// Relative intensity exp(−2 d²/w²) of a Gaussian beam at distance d from
/// its centre.
double gaussian_crosstalk(double separation, double beam_radius);

}  // namespace dualtype::dynamics

#endif
