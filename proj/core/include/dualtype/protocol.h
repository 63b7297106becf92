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

#ifndef DUALTYPE_PROTOCOL_H
#define DUALTYPE_PROTOCOL_H

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dualtype/errors.h"
#include "dualtype/readout.h"

namespace dualtype::protocol {

enum class Level { S0, S1, F0p, F1p, D52_F2, D52_F3, D32, Lost };
inline constexpr std::size_t kLevelCount = 8;

std::string_view level_name(Level level);

/// Incoherent populations of one ion over the named levels.
class LevelState {
   public:
    static LevelState pure(Level level);

    double operator[](Level level) const {
        return p_[static_cast<std::size_t>(level)];
    }
    double &operator[](Level level) {
        return p_[static_cast<std::size_t>(level)];
    }
    double total() const;
    /// Population in the S manifold or D3/2, which scatters at 370 nm.
    double bright() const;

   private:
    std::array<double, kLevelCount> p_{};
};

enum class PulseKind {
    Pi411,          ///< S0 ↔ D5/2 F=2
    Pi3432_a,       ///< D5/2 F=2 ↔ F0'
    Pi3432_b,       ///< D5/2 F=3 ↔ F1'
    Pi3432,         ///< bichromatic a + b
    Pump976,        ///< D5/2 F=2 → S0, F=3 → S1
    Pump370_no935,  ///< S manifold → D3/2
    Detect370,      ///< fluorescence readout
    MicrowavePi,    ///< S0 ↔ S1
    MicrowavePiF,   ///< F0' ↔ F1'
    Raman355Pi,     ///< S0 ↔ S1
};

std::string_view pulse_name(PulseKind kind);
PulseKind parse_pulse(std::string_view name);

struct PulseOp {
    PulseKind kind;
    /// Fraction of the addressed population that is not transferred.
    double transfer_error = 0;
};

/// π pulses exchange their level pair with probability 1 − ε; pumps move
/// the addressed population with ε left behind. Detect370 is a no-op.
LevelState apply_pulse(const LevelState &state, const PulseOp &pulse);

/// Per-pulse transfer errors and the two-ion detection crosstalk.
struct ErrorModel {
    double pi411 = 0;
    double pi3432_a = 0;
    double pi3432_b = 0;
    double pump976 = 0;
    double pump370 = 0;
    /// Probability that a dark S-type (F-type) ion is read bright while its
    /// neighbour is bright.
    double crosstalk_s = 0;
    double crosstalk_f = 0;
    double raman355 = 0;
    double microwave_s = 0;
    double microwave_f = 0;

    void validate() const;
    double error_for(PulseKind kind) const;
};

/// One step of a pulse program: a pulse on some ions, or a repeated body.
struct Step {
    std::optional<PulseKind> pulse;
    /// Ions the pulse addresses; empty means every ion.
    std::vector<std::size_t> ions;
    int repeat = 1;
    std::vector<Step> body;

    bool operator==(const Step &) const = default;
};

struct Program {
    std::string name;
    std::size_t ion_count = 1;
    std::vector<Step> steps;

    bool operator==(const Program &) const = default;
};

/// Parses {"name", "ions", "steps": [...]} where a step is a pulse name,
/// {"pulse": name, "ions": [...], "repeat": n}, or {"repeat": n, "steps": [...]}.
Program parse_program(std::string_view json_text);

/// Built-in copies of the three shipped sequence files.
std::string_view builtin_program_text(std::string_view name);
Program builtin_program(std::string_view name);

/// The preparation, F-type detection and joint detection programs.
struct Programs {
    Program prepare_sf;
    Program detect_f;
    Program detect_joint;

    /// Checks ion counts and that detect_f has a repeated block.
    void validate() const;
};

/// Parsed once on first use.
const Programs &builtin_programs();

/// Joint readout outcomes indexed 2·s + f, where s = 1 when the S-type ion
/// is read bright and f = 1 when the F-type ion is read dark; this matches
/// the 00', 01', 10', 11' labelling after the exchange map.
using JointOutcome = std::array<double, 4>;

struct SequenceResult {
    std::vector<LevelState> ions;
    std::vector<double> bright_probability;
    /// Readout distribution at the last Detect370 (or at the end); only
    /// filled for two ions.
    std::optional<JointOutcome> joint;
};

SequenceResult run_program(const Program &program, const std::vector<LevelState> &initial, const ErrorModel &errors);

/// Joint readout of two ions with bright probabilities b_S and b_F.
JointOutcome joint_readout(double bright_s, double bright_f, const ErrorModel &errors);

struct PreparationResult {
    double success_probability;
    /// Per-ion marginals conditioned on passing the verification.
    std::vector<LevelState> post_selected;
};

PreparationResult run_prepare_sf(const ErrorModel &errors, const Programs &programs = builtin_programs());

struct FDetectionResult {
    double infidelity_0p;
    double infidelity_1p;
};

/// `rounds` replaces the repeat count of the program's repeated block.
FDetectionResult run_detect_f(const ErrorModel &errors, int rounds = 5, const Programs &programs = builtin_programs());

struct JointDetectionResult {
    double infidelity_s;
    double infidelity_f;
    /// Outcome distribution for each prepared basis state.
    std::array<JointOutcome, 4> outcomes;
};

JointDetectionResult run_detect_joint(const ErrorModel &errors, const Programs &programs = builtin_programs());

/// Level populations after the joint-detection pulses on one ion.
LevelState joint_exchange(
    const LevelState &state, const ErrorModel &errors, const Programs &programs = builtin_programs());

/// Exact prepare-and-measure table including state-preparation errors.
readout::ConfusionMatrix joint_confusion_exact(const ErrorModel &errors, const Programs &programs = builtin_programs());

/// Monte Carlo version of the table with `shots` runs per prepared state.
readout::ConfusionMatrix synthesize_confusion_matrix(
    const ErrorModel &errors, uint64_t shots, uint64_t seed, const Programs &programs = builtin_programs());

struct Observables {
    double preparation_success;
    double f_infidelity_0p;
    double f_infidelity_1p;
    double joint_infidelity_s;
    double joint_infidelity_f;
};

Observables compute_observables(const ErrorModel &errors, int rounds = 5, const Programs &programs = builtin_programs());

struct CalibrationTargets {
    Observables observables{0.94, 0.005, 0.009, 0.005, 0.028};
    std::array<double, 4> diagonal{0.9682, 0.9716, 0.9743, 0.9538};
};

struct CalibrationResult {
    ErrorModel errors;
    Observables observables;
    std::array<double, 4> diagonal;
    double final_cost;
    bool converged;
};

/// Least-squares fit of (ε411, ε3432a, ε3432b, ε976, ε370, c_S, c_F) to the
/// five observables and the four diagonal entries. Every other pulse error
/// is written as ε411·s with s ∈ [0, 1], so ε411 stays the largest.
CalibrationResult calibrate_errors(
    const CalibrationTargets &targets = {}, int rounds = 5, const Programs &programs = builtin_programs());

}  // namespace dualtype::protocol

#endif
