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

#ifndef DUALTYPE_GATE_H
#define DUALTYPE_GATE_H

#include <array>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dualtype/dynamics.h"
#include "dualtype/errors.h"

namespace dualtype::gate {

using Complex = std::complex<double>;

/// Ion addressed by a segment. Index into MotionalMode::eta.
enum class Target { IonS = 0, IonF = 1 };

std::string_view target_name(Target target);
Target parse_target(std::string_view name);

struct DriveSegment {
    Target target;
    double duration_s;
    /// Motional drive phase, piecewise constant.
    double phase_rad;
    /// Sideband Rabi rate Ω before the Lamb–Dicke factor (rad/s).
    double rabi_rate;
    bool is_gap;
};

struct GateSequence {
    /// Drive and gap segments in time order.
    std::vector<DriveSegment> segments;
    /// Symmetric bichromatic detuning in the mode frame (Hz).
    double mu_hz;
    /// Center-of-mass and rocking modes, in that order.
    std::vector<dynamics::MotionalMode> modes;

    void validate() const;
    double total_duration() const;
    /// Start time of every segment.
    std::vector<double> start_times() const;
    /// δ_m = 2π(μ − ν_m) in rad/s.
    double mode_detuning(std::size_t mode_index) const;
    std::size_t drive_segment_count() const;
};

struct HeuristicParams {
    double com_frequency_hz = 2.271e6;
    double rocking_frequency_hz = 2.203e6;
    int segment_count = 40;
    double gap_s = 2e-6;
    int edge_length = 5;
    int relocated_segments = 2;
    double rabi_rate_s = 1;
    double rabi_rate_f = 1;
    double eta = 0.1;
    double nbar_com = 0.3;
    double nbar_rocking = 0.1;
    /// +1 or −1: rotation sense of the rectangle.
    int orientation = 1;
};

class DegenerateModes : public DomainError {
   public:
    using DomainError::DomainError;
};

/// Segment duration 4π/[3(ω_c − ω_roc)]: one third of a loop of either mode
/// when μ sits midway between them.
double heuristic_segment_duration(double com_frequency_hz, double rocking_frequency_hz);

/// Builds blocks of 4·edge_length segments tracing a rectangle in the
/// center-of-mass phase space (edges alternate S, F, S, F and turn by π/2),
/// with the first `relocated_segments` of each block's first edge moved to
/// the block end. Block b is phase-shifted by b·(2π/B − (δ_roc − δ_com)T_block)
/// so that the rocking-mode residuals of the B blocks cancel.
GateSequence build_heuristic_sequence(const HeuristicParams &params);

/// |δ_m|·τ of the first drive segment.
double segment_arc(const GateSequence &seq, std::size_t mode_index);

struct TrajectorySample {
    double time_s;
    Complex alpha;
};

struct Trajectory {
    dynamics::ModeLabel mode_label;
    std::vector<TrajectorySample> samples;
    Complex final_displacement;
    /// Im ∮ α* dα over the whole sequence.
    double geometric_phase;
};

/// Interaction-picture displacement α(t) = −(i/2) Σ sⱼ η Ω ∫ e^{iδt′} e^{iφ} dt′
/// for the spin eigenvalues `spins` (S, F). Every segment is evaluated in
/// closed form; `samples_per_segment` interior points are added per drive
/// segment. `detuning_offset` shifts δ (rad/s).
Trajectory integrate_displacement(
    const GateSequence &seq,
    std::size_t mode_index,
    std::array<int, 2> spins = {1, 1},
    int samples_per_segment = 16,
    double detuning_offset = 0);

/// β = e^{−iδt} α: the frame in which gaps are free rotations.
std::vector<TrajectorySample> rotating_frame(std::span<const TrajectorySample> samples, double detuning_rad_s);

/// Time average of |α| over the trajectory (trapezoid rule on the samples).
double mean_abs_displacement(const Trajectory &trajectory);

/// Per-ion final displacements (α_S, α_F) of one mode.
std::array<Complex, 2> residual_displacements(const GateSequence &seq, std::size_t mode_index, double detuning_offset = 0);

/// Two-qubit geometric phase χ: Σ_m of the cross terms between S and F
/// drive segments, Im[G_a G_b*] for a later than b, G = (ηΩ/2) e^{iφ} ∫ e^{iδt} dt.
double entangling_phase(const GateSequence &seq, double detuning_offset = 0);

class Uncalibratable : public DomainError {
   public:
    using DomainError::DomainError;
};

/// Scale s with s²·χ(Ω) = target_chi.
double calibrate_rabi(const GateSequence &seq, double target_chi);

GateSequence scale_rabi(const GateSequence &seq, double scale);

struct NoiseModel {
    double spin_coherence_time_s = std::numeric_limits<double>::infinity();
    double motional_coherence_time_s = std::numeric_limits<double>::infinity();
    int shots = 1;
    uint64_t seed = 0;

    void validate() const;
};

struct GateSimulation {
    /// Over 00', 01', 10', 11'.
    std::array<double, 4> populations;
    /// (analysis phase, parity).
    std::vector<std::pair<double, double>> parity_curve;
    /// Basis populations after the analysis pulses, one entry per phase.
    std::vector<std::array<double, 4>> analysis_populations;
    std::array<std::size_t, 2> target_states;
    double population_target;
    double contrast;
    double fidelity;
};

/// Evenly spaced analysis phases on [0, π).
std::vector<double> default_analysis_phases(int count = 32);

/// Starts from the basis state `initial_state` (0..3), applies the gate
/// exp(iχσₓσₓ) with its residual spin–motion displacement on thermal modes,
/// per-qubit quasi-static σ_z phases, and averages the density matrix over
/// shots. The parity curve follows analysis π/2 pulses of phase φ on both
/// ions; the fidelity is (target population + fitted contrast)/2.
GateSimulation simulate_gate(
    const GateSequence &seq, std::size_t initial_state, const NoiseModel &noise, std::span<const double> analysis_phases);

std::string sequence_to_json(const GateSequence &seq);
GateSequence sequence_from_json(std::string_view text);

void write_trajectory_csv(std::ostream &out, std::span<const TrajectorySample> samples);
void write_parity_csv(std::ostream &out, std::span<const std::pair<double, double>> curve);

}  // namespace dualtype::gate

#endif
